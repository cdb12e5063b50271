#include "msi/schedule.hpp"

#include <cmath>

#include "msi/io.hpp"

namespace msi {

void validate(const DstConfig& config) {
    if (config.e1 < 1) throw InvalidRange("e1 must be at least 1, got " + std::to_string(config.e1));
    if (config.e2 < 0) throw InvalidRange("e2 must be non-negative, got " + std::to_string(config.e2));
    if (config.e1 <= config.e2)
        throw InvalidRange("e1 must exceed e2, got e1=" + std::to_string(config.e1) +
                           " e2=" + std::to_string(config.e2));
    if (!(config.eta2 > 0.0) || !(config.eta1 > config.eta2))
        throw InvalidRange("learning rates must satisfy eta1 > eta2 > 0, got eta1=" +
                           format_double(config.eta1) + " eta2=" + format_double(config.eta2));
}

void validate(const ClsqConfig& config) {
    if (config.k_min < 1)
        throw InvalidRange("k_min must be at least 1, got " + std::to_string(config.k_min));
    if (config.k_max < config.k_min)
        throw InvalidRange("k_max must be at least k_min, got k_min=" + std::to_string(config.k_min) +
                           " k_max=" + std::to_string(config.k_max));
    if (config.total_epochs < 1)
        throw InvalidRange("total epochs must be at least 1, got " + std::to_string(config.total_epochs));
    if (!(config.gamma > 0.0))
        throw InvalidRange("gamma must be positive, got " + format_double(config.gamma));
}

int64_t subjects_at_epoch(const ClsqConfig& config, int64_t epoch) {
    validate(config);
    if (epoch < 1 || epoch > config.total_epochs)
        throw EpochOutOfRange("epoch " + std::to_string(epoch) + " outside [1, " +
                              std::to_string(config.total_epochs) + "]");
    double progress = std::pow(static_cast<double>(epoch) / config.total_epochs, config.gamma);
    int64_t step = static_cast<int64_t>(std::floor(progress * (config.k_max - config.k_min)));
    int64_t k = config.k_min + step;
    return k < config.k_min ? config.k_min : k;
}

double learning_rate_at(const DstConfig& config, int64_t epoch) {
    validate(config);
    if (epoch < 1 || epoch > config.e1 + config.e2)
        throw EpochOutOfRange("epoch " + std::to_string(epoch) + " outside [1, " +
                              std::to_string(config.e1 + config.e2) + "]");
    return epoch <= config.e1 ? config.eta1 : config.eta2;
}

std::vector<EpochPlan> export_schedule(const DstConfig& dst, const ClsqConfig& clsq) {
    validate(dst);
    validate(clsq);
    if (dst.e1 + dst.e2 != clsq.total_epochs)
        throw ConfigMismatch("stage epochs total " + std::to_string(dst.e1 + dst.e2) +
                             " but the curriculum spans " + std::to_string(clsq.total_epochs));
    std::vector<EpochPlan> plans;
    plans.reserve(static_cast<size_t>(clsq.total_epochs));
    for (int64_t e = 1; e <= clsq.total_epochs; ++e)
        plans.push_back(EpochPlan{e, learning_rate_at(dst, e), subjects_at_epoch(clsq, e)});
    return plans;
}

}  // namespace msi
