#include "msi/diffusion.hpp"

#include <cmath>
#include <cstring>

#include "msi/errors.hpp"
#include "msi/io.hpp"

namespace msi {

NoiseSchedule build_noise_schedule(int64_t total_steps, double beta_start, double beta_end) {
    if (total_steps < 1)
        throw InvalidRange("schedule needs at least one step, got " + std::to_string(total_steps));
    if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0))
        throw InvalidRange("betas must satisfy 0 < beta_start <= beta_end < 1, got start=" +
                           format_double(beta_start) + " end=" + format_double(beta_end));
    NoiseSchedule sched;
    sched.betas.resize(static_cast<size_t>(total_steps));
    sched.alpha_bar.resize(static_cast<size_t>(total_steps));
    double cumulative = 1.0;
    for (int64_t i = 0; i < total_steps; ++i) {
        double beta = total_steps == 1
                          ? beta_start
                          : beta_start + (beta_end - beta_start) * static_cast<double>(i) / (total_steps - 1);
        sched.betas[i] = beta;
        cumulative *= 1.0 - beta;
        sched.alpha_bar[i] = cumulative;
    }
    return sched;
}

namespace {

constexpr double kAlphaBarFloor = 1e-12;

double alpha_bar_at(const NoiseSchedule& sched, int64_t t) {
    if (t < 1 || t > sched.total_steps())
        throw StepOutOfRange("timestep " + std::to_string(t) + " outside [1, " +
                             std::to_string(sched.total_steps()) + "]");
    return sched.alpha_bar[static_cast<size_t>(t - 1)];
}

void check_shapes(size_t a, size_t b) {
    if (a != b)
        throw ShapeMismatch("tensor sizes differ: " + std::to_string(a) + " vs " + std::to_string(b));
}

double pairwise_sq_diff(const double* a, const double* b, size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double d = a[i] - b[i];
            s += d * d;
        }
        return s;
    }
    size_t half = n / 2;
    return pairwise_sq_diff(a, b, half) + pairwise_sq_diff(a + half, b + half, n - half);
}

void append_u64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint64_t read_u64(const std::string& bytes, size_t offset) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<uint64_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
    return v;
}

}  // namespace

std::vector<double> forward_diffuse(const std::vector<double>& z0, const std::vector<double>& eps,
                                    const NoiseSchedule& sched, int64_t t) {
    check_shapes(z0.size(), eps.size());
    double abar = alpha_bar_at(sched, t);
    double signal = std::sqrt(abar);
    double noise = std::sqrt(1.0 - abar);
    std::vector<double> out(z0.size());
    for (size_t i = 0; i < z0.size(); ++i) out[i] = signal * z0[i] + noise * eps[i];
    return out;
}

std::vector<double> invert_forward(const std::vector<double>& zt, const std::vector<double>& eps,
                                   const NoiseSchedule& sched, int64_t t) {
    check_shapes(zt.size(), eps.size());
    double abar = alpha_bar_at(sched, t);
    if (abar < kAlphaBarFloor)
        throw StepOutOfRange("alpha_bar " + format_double(abar) + " below the invertibility floor");
    double signal = std::sqrt(abar);
    double noise = std::sqrt(1.0 - abar);
    std::vector<double> out(zt.size());
    for (size_t i = 0; i < zt.size(); ++i) out[i] = (zt[i] - noise * eps[i]) / signal;
    return out;
}

double denoising_loss(const std::vector<double>& eps_true, const std::vector<double>& eps_pred,
                      bool mean) {
    check_shapes(eps_true.size(), eps_pred.size());
    if (eps_true.empty()) return 0.0;
    double sum = pairwise_sq_diff(eps_true.data(), eps_pred.data(), eps_true.size());
    return mean ? sum / static_cast<double>(eps_true.size()) : sum;
}

Tensor read_tensor(const std::filesystem::path& path) {
    std::string bytes = read_file(path);
    if (bytes.size() < 8) throw MalformedDocument("tensor file too short: " + path.string());
    uint64_t rank = read_u64(bytes, 0);
    if (rank > 16) throw MalformedDocument("tensor rank " + std::to_string(rank) + " is implausible");
    size_t need = 8 + 8 * rank;
    if (bytes.size() < need) throw MalformedDocument("tensor header truncated: " + path.string());

    Tensor tensor;
    uint64_t count = 1;
    for (uint64_t i = 0; i < rank; ++i) {
        uint64_t dim = read_u64(bytes, 8 + 8 * i);
        if (dim == 0 || count > (uint64_t{1} << 33) / (dim ? dim : 1))
            throw MalformedDocument("tensor dimensions invalid or oversized: " + path.string());
        tensor.shape.push_back(dim);
        count *= dim;
    }
    if (bytes.size() != need + 8 * count)
        throw MalformedDocument("tensor payload size mismatch: " + path.string());
    tensor.values.resize(count);
    for (uint64_t i = 0; i < count; ++i) {
        uint64_t bits = read_u64(bytes, need + 8 * i);
        double v;
        std::memcpy(&v, &bits, sizeof v);
        tensor.values[i] = v;
    }
    return tensor;
}

void write_tensor(const std::filesystem::path& path, const Tensor& tensor) {
    uint64_t count = 1;
    for (uint64_t dim : tensor.shape) count *= dim;
    if (count != tensor.values.size())
        throw ShapeMismatch("tensor shape covers " + std::to_string(count) + " values, have " +
                            std::to_string(tensor.values.size()));
    std::string bytes;
    bytes.reserve(8 + 8 * tensor.shape.size() + 8 * tensor.values.size());
    append_u64(bytes, tensor.shape.size());
    for (uint64_t dim : tensor.shape) append_u64(bytes, dim);
    for (double v : tensor.values) {
        uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        append_u64(bytes, bits);
    }
    atomic_write_file(path, bytes);
}

}  // namespace msi
