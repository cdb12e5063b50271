#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace msi {

// Row-major binary raster, one byte per pixel (0 or 1).
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> data;

    uint8_t at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
    void set(int x, int y, uint8_t v) { data[static_cast<size_t>(y) * width + x] = v; }
    uint64_t area() const;
};

BinaryMask make_mask(int width, int height);

// Run-length counts in column-major order, starting with a zero-run.
using RleCounts = std::vector<uint64_t>;

// Sum of the one-runs. Does not materialize the raster.
uint64_t rle_area(const RleCounts& counts);

// Counts must sum to height*width, else RunLengthMismatch.
BinaryMask rle_decode(const RleCounts& counts, int height, int width);
RleCounts rle_encode(const BinaryMask& mask);

// Char-packed codec: 5 payload bits plus a continuation bit per char,
// offset into ASCII 48..111. Runs at index >2 are stored as deltas
// against the count two positions back.
std::string rle_counts_to_string(const RleCounts& counts);
RleCounts rle_string_to_counts(const std::string& s);

}  // namespace msi
