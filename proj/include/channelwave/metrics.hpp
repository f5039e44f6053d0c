#ifndef CHANNELWAVE_METRICS_HPP
#define CHANNELWAVE_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "channelwave/trace.hpp"

// Everything the runs report is derived here from the trace: implicit
// throughput n_t / s_t, active-slot counts, k-smoothness, truncated batch
// lengths, non-batch run lengths, attempt totals, and empirical survival
// tails.

namespace channelwave {

struct ThroughputPoint {
    std::uint64_t t = 0;
    std::uint64_t arrivals = 0;     // n_t
    std::uint64_t active_slots = 0; // s_t
    double ratio = 0.0;             // n_t / s_t; +inf sentinel when s_t = 0
    bool defined = false;
};

struct AttemptsSummary {
    std::uint64_t total = 0;
    double per_arrival = 0.0; // total / n_t; +inf sentinel when n_t = 0
    bool defined = false;
};

// Prefix sums over a trace so the per-checkpoint queries are O(1).
class TraceMetrics {
public:
    explicit TraceMetrics(const SimTrace& trace) : trace_(&trace) {
        const std::size_t n = trace.rows.size();
        arrivals_.resize(n + 1, 0);
        active_.resize(n + 1, 0);
        attempts_.resize(n + 1, 0);
        successes_.resize(n + 1, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const TraceRow& r = trace.rows[i];
            // A slot is active if at least one player is in the system during
            // it; a player arriving into an otherwise empty slot counts.
            const bool active = r.population_before + r.arrivals >= 1;
            arrivals_[i + 1] = arrivals_[i] + r.arrivals;
            active_[i + 1] = active_[i] + (active ? 1 : 0);
            attempts_[i + 1] = attempts_[i] + r.broadcasters;
            successes_[i + 1] = successes_[i] + (r.kind == SlotKind::Success ? 1 : 0);
        }
    }

    const SimTrace& trace() const { return *trace_; }
    std::uint64_t horizon() const { return trace_->rows.size(); }

    std::uint64_t arrivals_by(std::uint64_t t) const { return arrivals_[clamp(t)]; }
    std::uint64_t active_slots(std::uint64_t t) const { return active_[clamp(t)]; }
    std::uint64_t attempts_by(std::uint64_t t) const { return attempts_[clamp(t)]; }
    std::uint64_t successes_by(std::uint64_t t) const { return successes_[clamp(t)]; }

    ThroughputPoint implicit_throughput(std::uint64_t t) const {
        ThroughputPoint pt;
        pt.t = t;
        pt.arrivals = arrivals_by(t);
        pt.active_slots = active_slots(t);
        if (pt.active_slots == 0) {
            pt.ratio = std::numeric_limits<double>::infinity();
            pt.defined = false;
        } else {
            pt.ratio = static_cast<double>(pt.arrivals) / static_cast<double>(pt.active_slots);
            pt.defined = true;
        }
        return pt;
    }

    std::vector<ThroughputPoint> throughput_series(std::span<const std::uint64_t> ts) const {
        std::vector<ThroughputPoint> out;
        out.reserve(ts.size());
        for (std::uint64_t t : ts) out.push_back(implicit_throughput(t));
        return out;
    }

    AttemptsSummary attempts_summary(std::uint64_t t) const {
        AttemptsSummary s;
        s.total = attempts_by(t);
        const std::uint64_t n = arrivals_by(t);
        if (n == 0) {
            s.per_arrival = std::numeric_limits<double>::infinity();
            s.defined = false;
        } else {
            s.per_arrival = static_cast<double>(s.total) / static_cast<double>(n);
            s.defined = true;
        }
        return s;
    }

    // A step t is k-smooth if every trailing window of length j >= k holds at
    // most eps * j arrivals.
    bool k_smooth(std::uint64_t t, std::uint64_t k, double eps) const {
        if (k < 1 || t < k) throw std::invalid_argument("k_smooth requires 1 <= k <= t");
        for (std::uint64_t j = k; j <= t; ++j) {
            const std::uint64_t window = arrivals_by(t) - arrivals_by(t - j);
            if (static_cast<double>(window) > eps * static_cast<double>(j)) return false;
        }
        return true;
    }

private:
    std::size_t clamp(std::uint64_t t) const {
        if (t > trace_->rows.size()) throw std::out_of_range("t beyond trace horizon");
        return static_cast<std::size_t>(t);
    }

    const SimTrace* trace_;
    std::vector<std::uint64_t> arrivals_;
    std::vector<std::uint64_t> active_;
    std::vector<std::uint64_t> attempts_;
    std::vector<std::uint64_t> successes_;
};

// Truncated batch length: zero when the episode already paid for itself with
// successes or arrivals proportional to its length, the raw length otherwise.
inline std::uint64_t truncated_batch_length(const BatchEpisode& episode, double theta) {
    const std::uint64_t l = episode.length();
    if (l == 0) return 0;
    const double bar = theta * static_cast<double>(l);
    if (static_cast<double>(episode.successes) >= bar) return 0;
    if (static_cast<double>(episode.arrivals) >= bar) return 0;
    return l;
}

// Maximal runs of consecutive active non-batch steps, additionally split
// where the whole population is new (nobody present at the previous step).
struct NonbatchRun {
    std::uint64_t start = 0;  // first step of the run
    std::uint64_t length = 0; // active non-batch steps in the run
    std::uint64_t arrivals = 0;
    bool censored = false; // cut by the horizon rather than a delimiter
};

inline std::vector<NonbatchRun> nonbatch_runs(const SimTrace& trace) {
    std::vector<NonbatchRun> runs;
    const std::uint64_t horizon = trace.rows.size();
    if (horizon == 0) return runs;

    // Steps covered by batch episodes, as sorted disjoint [start, end] spans.
    std::size_t ep = 0;
    bool open = false;
    NonbatchRun cur;
    for (std::uint64_t g = 1; g <= horizon; ++g) {
        while (ep < trace.episodes.size() && trace.episodes[ep].end_step < g) ++ep;
        const bool in_batch = ep < trace.episodes.size() &&
                              trace.episodes[ep].start_step() <= g &&
                              g <= trace.episodes[ep].end_step;
        const TraceRow& r = trace.row(g);
        const bool active = r.population_before + r.arrivals >= 1;
        const bool fresh_start = active && r.population_before == 0 && r.arrivals > 0;

        if (!active || in_batch) {
            if (open) {
                runs.push_back(cur);
                open = false;
            }
            continue;
        }
        if (fresh_start && open) {
            runs.push_back(cur);
            open = false;
        }
        if (!open) {
            cur = NonbatchRun{g, 0, 0, false};
            open = true;
        }
        cur.length += 1;
        cur.arrivals += r.arrivals;
    }
    if (open) {
        cur.censored = true;
        runs.push_back(cur);
    }
    return runs;
}

inline std::vector<std::uint64_t> nonbatch_run_lengths(const SimTrace& trace, double theta) {
    std::vector<std::uint64_t> out;
    for (const NonbatchRun& run : nonbatch_runs(trace)) {
        const double bar = theta * static_cast<double>(run.length);
        out.push_back(static_cast<double>(run.arrivals) >= bar ? 0 : run.length);
    }
    return out;
}

// Wilson 95% score interval for a binomial proportion.
struct WilsonInterval {
    double lo = 0.0;
    double hi = 1.0;
};

inline WilsonInterval wilson95(std::uint64_t hits, std::uint64_t n) {
    if (n == 0) return {0.0, 1.0};
    constexpr double z = 1.959963984540054;
    const double nn = static_cast<double>(n);
    const double phat = static_cast<double>(hits) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (phat + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct TailPoint {
    std::uint64_t t = 0;
    std::uint64_t hits = 0; // samples >= t
    double survival = 0.0;  // empirical Pr[X >= t]
    WilsonInterval ci;
};

// Empirical complementary CDF on a power-of-two grid from 1 up to the sample
// maximum, with Wilson 95% intervals per point.
inline std::vector<TailPoint> survival_tail(std::span<const std::uint64_t> samples) {
    if (samples.empty()) throw std::invalid_argument("survival_tail needs samples");
    std::vector<std::uint64_t> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const std::uint64_t maxv = sorted.back();
    std::vector<TailPoint> out;
    for (std::uint64_t t = 1; t <= std::max<std::uint64_t>(maxv, 1); t *= 2) {
        const auto it = std::lower_bound(sorted.begin(), sorted.end(), t);
        const std::uint64_t hits = static_cast<std::uint64_t>(sorted.end() - it);
        TailPoint pt;
        pt.t = t;
        pt.hits = hits;
        pt.survival = static_cast<double>(hits) / static_cast<double>(sorted.size());
        pt.ci = wilson95(hits, sorted.size());
        out.push_back(pt);
        if (t > (std::uint64_t(1) << 62)) break;
    }
    return out;
}

// Least-squares slope of log2(survival) against log2(t) over the points with
// positive survival in [t_min, t_max]. Returns false when fewer than two
// usable points exist.
inline bool tail_slope(std::span<const TailPoint> tail, std::uint64_t t_min,
                       std::uint64_t t_max, double& slope_out) {
    std::vector<double> xs, ys;
    for (const TailPoint& pt : tail) {
        if (pt.t < t_min || pt.t > t_max || pt.survival <= 0.0) continue;
        xs.push_back(std::log2(static_cast<double>(pt.t)));
        ys.push_back(std::log2(pt.survival));
    }
    if (xs.size() < 2) return false;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) return false;
    slope_out = (n * sxy - sx * sy) / denom;
    return true;
}

} // namespace channelwave

#endif // CHANNELWAVE_METRICS_HPP
