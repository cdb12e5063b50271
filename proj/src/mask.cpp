#include "msi/mask.hpp"

#include <numeric>

#include "msi/errors.hpp"

namespace msi {

uint64_t BinaryMask::area() const {
    uint64_t n = 0;
    for (uint8_t v : data)
        if (v) ++n;
    return n;
}

BinaryMask make_mask(int width, int height) {
    BinaryMask m;
    m.width = width;
    m.height = height;
    m.data.assign(static_cast<size_t>(width) * height, 0);
    return m;
}

uint64_t rle_area(const RleCounts& counts) {
    uint64_t n = 0;
    for (size_t i = 1; i < counts.size(); i += 2) n += counts[i];
    return n;
}

BinaryMask rle_decode(const RleCounts& counts, int height, int width) {
    const uint64_t total = static_cast<uint64_t>(height) * width;
    uint64_t sum = std::accumulate(counts.begin(), counts.end(), uint64_t{0});
    if (sum != total)
        throw RunLengthMismatch("run lengths sum to " + std::to_string(sum) + ", raster has " +
                                std::to_string(total) + " pixels");
    BinaryMask m = make_mask(width, height);
    uint64_t p = 0;
    uint8_t value = 0;
    for (uint64_t run : counts) {
        for (uint64_t j = 0; j < run; ++j, ++p) {
            // Column-major position p maps to row p%h, column p/h.
            if (value) m.data[(p % height) * static_cast<uint64_t>(width) + p / height] = 1;
        }
        value ^= 1;
    }
    return m;
}

RleCounts rle_encode(const BinaryMask& mask) {
    RleCounts counts;
    uint8_t value = 0;
    uint64_t run = 0;
    for (int x = 0; x < mask.width; ++x) {
        for (int y = 0; y < mask.height; ++y) {
            uint8_t v = mask.at(x, y) ? 1 : 0;
            if (v == value) {
                ++run;
            } else {
                counts.push_back(run);
                value = v;
                run = 1;
            }
        }
    }
    counts.push_back(run);
    return counts;
}

std::string rle_counts_to_string(const RleCounts& counts) {
    std::string s;
    s.reserve(counts.size() * 2);
    for (size_t i = 0; i < counts.size(); ++i) {
        int64_t x = static_cast<int64_t>(counts[i]);
        if (i > 2) x -= static_cast<int64_t>(counts[i - 2]);
        bool more = true;
        while (more) {
            int c = static_cast<int>(x & 0x1f);
            x >>= 5;
            more = (c & 0x10) ? x != -1 : x != 0;
            if (more) c |= 0x20;
            s.push_back(static_cast<char>(c + 48));
        }
    }
    return s;
}

RleCounts rle_string_to_counts(const std::string& s) {
    RleCounts counts;
    size_t p = 0;
    while (p < s.size()) {
        int64_t x = 0;
        int k = 0;
        bool more = true;
        int c = 0;
        while (more) {
            if (p >= s.size()) throw InvalidEncoding("truncated run at end of string");
            int raw = static_cast<unsigned char>(s[p]);
            if (raw < 48 || raw > 111)
                throw InvalidEncoding("byte " + std::to_string(raw) + " at offset " + std::to_string(p) +
                                      " outside the codec alphabet");
            c = raw - 48;
            x |= static_cast<int64_t>(c & 0x1f) << (5 * k);
            more = (c & 0x20) != 0;
            ++p;
            ++k;
        }
        if (c & 0x10) x |= -(int64_t{1} << (5 * k));
        if (counts.size() > 2) x += static_cast<int64_t>(counts[counts.size() - 2]);
        if (x < 0) throw InvalidEncoding("negative run length " + std::to_string(x));
        counts.push_back(static_cast<uint64_t>(x));
    }
    return counts;
}

}  // namespace msi
