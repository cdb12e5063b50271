#include "msi/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace msi {

IntBox round_box(const Bbox& b) {
    return IntBox{static_cast<int>(std::llround(b.x)), static_cast<int>(std::llround(b.y)),
                  static_cast<int>(std::llround(b.w)), static_cast<int>(std::llround(b.h))};
}

IntBox clamp_box(const IntBox& b, int width, int height) {
    const int x0 = std::clamp(b.x, 0, width);
    const int y0 = std::clamp(b.y, 0, height);
    const int x1 = std::clamp(b.x + b.w, 0, width);
    const int y1 = std::clamp(b.y + b.h, 0, height);
    return IntBox{x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

}  // namespace msi
