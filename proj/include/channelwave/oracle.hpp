#ifndef CHANNELWAVE_ORACLE_HPP
#define CHANNELWAVE_ORACLE_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "channelwave/protocols.hpp"

// Exact small-instance probability computations used as ground truth for the
// statistical suites: the probability that a sum of independent 0-1 variables
// is exactly zero or exactly one, and exact attempt counts for c-backoff.

namespace channelwave {

struct BernoulliVector {
    std::vector<double> p; // each in [0, 1/2]
};

inline void validate(const BernoulliVector& v) {
    for (double pi : v.p) {
        if (!(pi >= 0.0 && pi <= 0.5)) {
            throw std::invalid_argument("BernoulliVector entries must lie in [0, 1/2]");
        }
    }
}

// Pr[sum == 0] = prod (1 - p_i), accumulated in log space so long vectors do
// not underflow.
inline double prob_exactly_zero(const BernoulliVector& v) {
    validate(v);
    double log_p0 = 0.0;
    for (double pi : v.p) log_p0 += std::log1p(-pi);
    return std::exp(log_p0);
}

// Pr[sum == 1] = sum_i p_i prod_{j != i} (1 - p_j)
//             = prod_j (1 - p_j) * sum_i p_i / (1 - p_i).
inline double prob_exactly_one(const BernoulliVector& v) {
    validate(v);
    if (v.p.empty()) return 0.0;
    double log_p0 = 0.0;
    double odds = 0.0;
    for (double pi : v.p) {
        log_p0 += std::log1p(-pi);
        odds += pi / (1.0 - pi);
    }
    return std::exp(log_p0) * odds;
}

// Attempt counts for a fresh c-backoff observed over its first `horizon`
// channel-local slots. Epoch l contributes c scheduled broadcasts inside
// (c^l, c^(l+1)]; a partially covered epoch contributes at most the slots
// entered, and in expectation c * entered / range.
struct BackoffAttemptCounts {
    std::uint64_t max_attempts = 0; // largest possible schedule count
    double expected_attempts = 0.0; // exact expectation of the schedule count
    double lemma_bound = 0.0;       // c * log_c horizon, the coarse cap
};

inline BackoffAttemptCounts expected_backoff_attempts(std::uint32_t c, std::uint64_t horizon) {
    if (c < 2) throw std::invalid_argument("c-backoff requires c >= 2");
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    BackoffAttemptCounts out;
    for (std::uint32_t l = 1;; ++l) {
        const std::uint64_t lo = detail::pow_sat(c, l);
        if (lo >= horizon) break;
        const std::uint64_t hi = detail::pow_sat(c, l + 1);
        const std::uint64_t range = hi - lo;
        const std::uint64_t entered = std::min(horizon, hi) - lo;
        out.max_attempts += std::min<std::uint64_t>(c, entered);
        out.expected_attempts += static_cast<double>(c) *
                                 static_cast<double>(entered) / static_cast<double>(range);
    }
    if (horizon > c) {
        out.lemma_bound = static_cast<double>(c) *
                          std::log(static_cast<double>(horizon)) / std::log(static_cast<double>(c));
    }
    return out;
}

} // namespace channelwave

#endif // CHANNELWAVE_ORACLE_HPP
