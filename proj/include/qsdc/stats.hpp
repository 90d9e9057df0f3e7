#pragma once

#include <cstdint>
#include <utility>

namespace qsdc::stats {

struct RateEstimate {
    std::uint64_t errors = 0;
    std::uint64_t samples = 0;
    double rate = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

// (M*d + 1 - M - d) / (M*d): the intercept-resend error rate when the
// legitimate parties draw uniformly from M mutually unbiased bases.
double theoretical_eve_error_rate(int d, int M);

// rate +/- 1.96 * sqrt(rate*(1-rate)/n), clamped to [0, 1]
RateEstimate estimate_rate(std::uint64_t errors, std::uint64_t samples);

// 1 - (1 - epsilon)^n
double detection_probability(double epsilon, std::uint64_t n_samples);

enum class Decision { Continue, Abort };

// strict comparison: abort iff rate > epsilon_t
Decision abort_decision(const RateEstimate& estimate, double epsilon_t);

}  // namespace qsdc::stats
