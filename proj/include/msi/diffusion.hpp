#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace msi {

struct NoiseSchedule {
    std::vector<double> betas;      // beta_t for t = 1..T at index t-1
    std::vector<double> alpha_bar;  // cumulative product of (1 - beta_s)

    int64_t total_steps() const { return static_cast<int64_t>(betas.size()); }
};

// Linear beta interpolation from beta_start to beta_end over T steps.
// InvalidRange unless 0 < beta_start <= beta_end < 1 and T >= 1.
NoiseSchedule build_noise_schedule(int64_t total_steps, double beta_start, double beta_end);

struct Tensor {
    std::vector<uint64_t> shape;
    std::vector<double> values;
};

// Framed binary: rank u64 LE, each dim u64 LE, values f64 LE row-major.
Tensor read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const Tensor& tensor);

// z_t = sqrt(abar_t) z0 + sqrt(1 - abar_t) eps, elementwise.
std::vector<double> forward_diffuse(const std::vector<double>& z0, const std::vector<double>& eps,
                                    const NoiseSchedule& sched, int64_t t);

// z0 = (z_t - sqrt(1 - abar_t) eps) / sqrt(abar_t). StepOutOfRange when
// abar_t falls below the 1e-12 floor.
std::vector<double> invert_forward(const std::vector<double>& zt, const std::vector<double>& eps,
                                   const NoiseSchedule& sched, int64_t t);

// Sum (or mean) of squared elementwise differences, accumulated with
// pairwise-tree summation so the result is reduction-order independent.
double denoising_loss(const std::vector<double>& eps_true, const std::vector<double>& eps_pred,
                      bool mean = false);

}  // namespace msi
