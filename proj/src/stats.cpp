#include "qsdc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qsdc::stats {

double theoretical_eve_error_rate(int d, int M) {
    if (d < 2) throw std::domain_error("theoretical_eve_error_rate: d >= 2 required");
    if (M < 1 || M > d + 1)
        throw std::domain_error("theoretical_eve_error_rate: 1 <= M <= d+1 required");
    return static_cast<double>(M * d + 1 - M - d) / (M * d);
}

RateEstimate estimate_rate(std::uint64_t errors, std::uint64_t samples) {
    if (samples == 0) throw std::domain_error("estimate_rate: samples must be >= 1");
    RateEstimate e;
    e.errors = errors;
    e.samples = samples;
    e.rate = static_cast<double>(errors) / static_cast<double>(samples);
    double half = 1.96 * std::sqrt(e.rate * (1.0 - e.rate) / static_cast<double>(samples));
    e.ci_lo = std::max(0.0, e.rate - half);
    e.ci_hi = std::min(1.0, e.rate + half);
    return e;
}

double detection_probability(double epsilon, std::uint64_t n_samples) {
    if (epsilon < 0.0 || epsilon > 1.0)
        throw std::domain_error("detection_probability: epsilon in [0, 1] required");
    return 1.0 - std::pow(1.0 - epsilon, static_cast<double>(n_samples));
}

Decision abort_decision(const RateEstimate& estimate, double epsilon_t) {
    return estimate.rate > epsilon_t ? Decision::Abort : Decision::Continue;
}

}  // namespace qsdc::stats
