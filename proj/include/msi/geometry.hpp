#pragma once

namespace msi {

// Axis-aligned box, top-left origin, pixel units.
struct Bbox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
};

struct IntBox {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
};

// Per-coordinate rounding, halfway cases away from zero.
IntBox round_box(const Bbox& b);

// Intersects the box with [0,width] x [0,height]; result w/h may be zero.
IntBox clamp_box(const IntBox& b, int width, int height);

}  // namespace msi
