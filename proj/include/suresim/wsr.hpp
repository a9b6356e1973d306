#pragma once

// Betting-style confidence interval for the mean of bounded scores.
//
// Every candidate mean m on a grid is treated as a null hypothesis and
// wagered against twice, once long and once short.  A candidate is knocked
// out as soon as either wealth process crosses 2/alpha; the interval is the
// hull of the candidates still standing after the last sample.  Wealth is
// tracked in log space: the per-step factors are strictly positive for
// stakes below 1, so log1p is always defined and fifty-thousand-step
// products cannot overflow or vanish.
//
// The grid excludes the exact endpoints 0 and 1 (the stake caps c/m and
// c/(1-m) would divide by zero there), so when an extreme grid candidate
// survives, the untested sliver beyond it cannot be ruled out and the hull
// is widened to the range edge.  That costs at most half a grid cell and
// keeps the interval honest at the boundary.
//
// When the declared range sits inside [0, 1] the result is clipped to
// [0, 1] here, with the truncation flags marking a bound that landed on the
// clip boundary.  For wider ranges (score differences, shifted transforms)
// the raw endpoints are returned; the estimator that owns the final
// composed interval clips once at the end.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "suresim/errors.hpp"
#include "suresim/types.hpp"

namespace suresim {

struct WsrConfig {
    int grid_size = 1001;      // candidate means, evenly spaced in (0, 1)
    double c = 0.99;           // stake cap; must stay below 1
    double range_lower = 0.0;  // known support of the incoming samples
    double range_upper = 1.0;
};

// Running sums behind the adaptive stake schedule.  Mean and variance start
// at the midpoint priors 1/2 and 1/4 and shrink toward the empirical values.
struct WsrState {
    std::size_t t = 0;
    double sum = 0.0;
    double sum_sq = 0.0;
    double mean = 0.5;
    double variance = 0.25;

    void update(double z) {
        ++t;
        sum += z;
        sum_sq += z * z;
        const double tt = static_cast<double>(t);
        mean = (0.5 + sum) / (tt + 1.0);
        // 0.25 + sum of squared deviations from the current running mean.
        variance = (0.25 + sum_sq - 2.0 * mean * sum + tt * mean * mean) / (tt + 1.0);
    }
};

namespace detail {

inline void validate_wsr_config(const WsrConfig& cfg) {
    if (cfg.grid_size < 2) {
        throw config_error("betting grid needs at least 2 candidates, got " +
                           std::to_string(cfg.grid_size));
    }
    if (!(cfg.c > 0.0) || !(cfg.c < 1.0)) {
        throw config_error("stake cap must lie strictly between 0 and 1, got " +
                           std::to_string(cfg.c));
    }
    if (!(cfg.range_upper > cfg.range_lower)) {
        throw config_error("sample range is empty: [" + std::to_string(cfg.range_lower) +
                           ", " + std::to_string(cfg.range_upper) + "]");
    }
    if (!std::isfinite(cfg.range_lower) || !std::isfinite(cfg.range_upper)) {
        throw config_error("sample range must be finite");
    }
}

// Stake sequence lambda_t, one per sample, computed from the running
// variance one step behind: lambda_t = sqrt(2 log(2/alpha) / (n * var_{t-1})).
inline std::vector<double> wsr_stakes(const std::vector<double>& z, double alpha) {
    const double n = static_cast<double>(z.size());
    const double num = 2.0 * std::log(2.0 / alpha);
    std::vector<double> stakes(z.size());
    WsrState state;
    for (std::size_t t = 0; t < z.size(); ++t) {
        stakes[t] = std::sqrt(num / (n * state.variance));
        state.update(z[t]);
    }
    return stakes;
}

} // namespace detail

inline ConfidenceInterval wsr_interval(const std::vector<double>& samples,
                                       SignificanceLevel level,
                                       const WsrConfig& cfg = {},
                                       Method tag = Method::classical) {
    detail::validate_wsr_config(cfg);
    if (samples.empty()) throw data_error("betting interval needs at least one sample");

    const double lo = cfg.range_lower;
    const double span = cfg.range_upper - cfg.range_lower;
    std::vector<double> z(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!(samples[i] >= lo) || !(samples[i] <= cfg.range_upper)) {
            throw data_error("sample " + std::to_string(i) + " = " +
                             std::to_string(samples[i]) + " falls outside the declared range [" +
                             std::to_string(lo) + ", " + std::to_string(cfg.range_upper) + "]");
        }
        z[i] = std::clamp((samples[i] - lo) / span, 0.0, 1.0);
    }

    const std::vector<double> stakes = detail::wsr_stakes(z, level.alpha);
    const double log_threshold = std::log(2.0 / level.alpha);
    const int grid = cfg.grid_size;

    // The grid size counts candidates per two units of range.  On [0, 1] and
    // [-1, 1] that is the grid as configured; for the wide shifted-transform
    // ranges a G-point grid would quantize the hull to cells of span/G raw
    // units (several percent of the metric scale), so the lattice is
    // densified until a cell is at most 2/G raw units again.
    const long long fine = span > 2.0 ? static_cast<long long>(std::ceil(span / 2.0)) : 1;
    const long long total = static_cast<long long>(grid) * fine;
    const double two_g = 2.0 * static_cast<double>(total);

    // Candidate i sits at (2i+1)/(2*total); the wealth pair for one candidate
    // is independent of every other candidate, so candidates are walked from
    // each end of the lattice inward and the walk stops at the first
    // survivor.  Candidates between the two ends of the hull never need to
    // be simulated.  The walk probes every `fine`-th candidate (the native
    // grid spacing) and then sweeps the one-stride window behind the first
    // surviving probe, which finds the exact lattice edge whenever the
    // surviving set is connected at stride scale: a set that dodges every
    // probe is narrower than one stride and lies inside the window.
    auto survives_at = [&](double m) {
        const double cap_long = cfg.c / m;
        const double cap_short = cfg.c / (1.0 - m);
        double log_long = 0.0;
        double log_short = 0.0;
        for (std::size_t t = 0; t < z.size(); ++t) {
            const double d = z[t] - m;
            log_long += std::log1p(std::min(stakes[t], cap_long) * d);
            log_short += std::log1p(-std::min(stakes[t], cap_short) * d);
            if (log_long >= log_threshold || log_short >= log_threshold) return false;
        }
        return true;
    };
    auto survives = [&](long long i) {
        return survives_at((2.0 * static_cast<double>(i) + 1.0) / two_g);
    };

    long long first = -1;
    for (long long i = 0; i < total && first < 0; i += fine) {
        if (survives(i)) first = i;
    }
    if (first > 0) {
        for (long long i = std::max(0LL, first - fine + 1); i < first; ++i) {
            if (survives(i)) {
                first = i;
                break;
            }
        }
    }
    if (first < 0 && fine > 1) {
        // No probe survived; hunt for a sub-stride set before giving up.
        for (long long i = 0; i < total && first < 0; ++i) {
            if (survives(i)) first = i;
        }
    }
    if (first < 0) {
        throw data_error("betting interval is empty: every candidate mean was rejected; "
                         "the declared range likely does not match the data");
    }
    long long last = first;
    for (long long i = total - 1; i > first && last == first; i -= fine) {
        if (survives(i)) last = i;
    }
    if (last < total - 1) {
        for (long long i = std::min(total - 1, last + fine - 1); i > last; --i) {
            if (survives(i)) {
                last = i;
                break;
            }
        }
    }

    ConfidenceInterval ci;
    // A surviving extreme candidate leaves the tail beyond it untested, so
    // the hull extends to the range edge on that side.
    ci.lower = (first == 0)
                   ? lo
                   : lo + span * (2.0 * static_cast<double>(first) + 1.0) / two_g;
    ci.upper = (last == total - 1)
                   ? cfg.range_upper
                   : lo + span * (2.0 * static_cast<double>(last) + 1.0) / two_g;
    ci.alpha = level.alpha;
    ci.method = tag;
    if (lo >= 0.0 && cfg.range_upper <= 1.0) {
        if (ci.lower <= 0.0) {
            ci.lower = 0.0;
            ci.truncated_lower = true;
        }
        if (ci.upper >= 1.0) {
            ci.upper = 1.0;
            ci.truncated_upper = true;
        }
    }
    return ci;
}

} // namespace suresim
