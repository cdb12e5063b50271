#include "msi/rng.hpp"

#include <algorithm>

#include "msi/errors.hpp"

namespace msi {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

uint64_t derive_stream(uint64_t global_seed, uint64_t image_id, uint64_t annotation_id) {
    uint64_t h = splitmix64(global_seed);
    h = splitmix64(h ^ image_id);
    h = splitmix64(h ^ annotation_id);
    return h;
}

uint64_t Rng::bounded(uint64_t n) {
    if (n == 0) throw InvalidRange("bounded draw needs n > 0");
    // Rejection below the threshold keeps the draw exactly uniform.
    const uint64_t threshold = (0 - n) % n;
    for (;;) {
        const uint64_t r = next();
        if (r >= threshold) return r % n;
    }
}

std::vector<size_t> sample_subset_indices(size_t n, size_t k, Rng& rng) {
    if (k > n) throw InvalidRange("subset size exceeds population");
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    // Partial Fisher-Yates: the first k slots are a uniform ordered sample,
    // so the set of them is uniform over all k-subsets.
    for (size_t i = 0; i < k; ++i) {
        const size_t j = i + static_cast<size_t>(rng.bounded(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace msi
