#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace msi {

// SplitMix64 finalizer step.
uint64_t splitmix64(uint64_t x);

// Seed of an independent per-subject draw stream. Depends only on the
// global seed and the (image, annotation) identity, so assembly order and
// parallel scheduling never change what a subject draws.
uint64_t derive_stream(uint64_t global_seed, uint64_t image_id, uint64_t annotation_id);

// Deterministic generator. std::mt19937_64 keeps the raw sequence identical
// across standard libraries; the bounded draw is done by rejection here
// because std::uniform_int_distribution is implementation-defined.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next() { return gen_(); }

    // Unbiased draw in [0, n). n must be nonzero.
    uint64_t bounded(uint64_t n);

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 gen_;
};

// Uniformly chosen k-subset of {0..n-1}, ascending. k must be <= n.
std::vector<size_t> sample_subset_indices(size_t n, size_t k, Rng& rng);

}  // namespace msi
