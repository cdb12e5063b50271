#pragma once

#include <cstdint>
#include <vector>

#include "msi/errors.hpp"
#include "msi/rng.hpp"

namespace msi {

struct DstConfig {
    double eta1 = 1e-4;  // stage-1 learning rate
    double eta2 = 5e-5;  // stage-2 learning rate
    int64_t e1 = 7;      // stage-1 epochs
    int64_t e2 = 3;      // stage-2 epochs
};

struct ClsqConfig {
    int64_t k_min = 2;
    int64_t k_max = 5;
    int64_t total_epochs = 10;
    double gamma = 1.0;  // curriculum pace, domain (0, inf)
};

struct EpochPlan {
    int64_t epoch = 0;  // 1-based
    double learning_rate = 0.0;
    int64_t k = 0;
};

// InvalidRange on violated bounds.
void validate(const DstConfig& config);
void validate(const ClsqConfig& config);

// K(e) = max(k_min, k_min + floor((e/E)^gamma * (k_max - k_min))),
// epochs 1-based. EpochOutOfRange outside [1, E].
int64_t subjects_at_epoch(const ClsqConfig& config, int64_t epoch);

// eta1 through epoch e1, eta2 after. EpochOutOfRange outside [1, e1+e2].
double learning_rate_at(const DstConfig& config, int64_t epoch);

// One plan per epoch. ConfigMismatch when dst epochs disagree with clsq.
std::vector<EpochPlan> export_schedule(const DstConfig& dst, const ClsqConfig& clsq);

// Keeps all subjects when k_e covers them, otherwise a uniformly chosen
// size-k_e subset with the original relative order preserved.
template <typename T>
std::vector<T> select_subjects(const std::vector<T>& subjects, int64_t k_e, Rng& rng) {
    if (k_e < 1) throw InternalError("subject subset size must be positive");
    if (static_cast<int64_t>(subjects.size()) <= k_e) return subjects;
    std::vector<size_t> idx = sample_subset_indices(subjects.size(), static_cast<size_t>(k_e), rng);
    std::vector<T> out;
    out.reserve(idx.size());
    for (size_t i : idx) out.push_back(subjects[i]);
    return out;
}

}  // namespace msi
