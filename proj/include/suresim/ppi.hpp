#pragma once

// Interval constructions for estimating a mean real score from a few paired
// (real, sim) trials plus a pool of sim-only trials:
//
//   classical      betting interval on the real scores alone
//   suresim        one betting interval over the uniform transform, which
//                  inflates paired residuals by (n+N)/n and passes sim
//                  scores through untouched
//   two-stage      separate rectifier and sim-mean intervals, Minkowski sum,
//                  risk budget split between the stages
//   *-ub           hedged versions: intersection with a classical interval,
//                  budgets 3a/4 + a/4
//   rectifier      interval on the paired differences y - f alone
//
// The *_raw variants return the interval before clipping to [0, 1]; the
// plain variants clip.  Raw endpoints matter both for composing intervals
// and for checking that an interval contains its own point estimate, which
// clipping can void on one side.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "suresim/dataset.hpp"
#include "suresim/errors.hpp"
#include "suresim/types.hpp"
#include "suresim/wsr.hpp"

namespace suresim {

struct UniformPpiTransform {
    std::vector<double> delta_values;  // paired and sim entries, proportionally interleaved
    double inflation = 1.0;            // (n + N) / n
    std::size_t indicator_count = 0;   // paired rows, i.e. entries built from a y
    double range_lower = 0.0;          // betting range for the transform values
    double range_upper = 1.0;
};

// How much of the total budget the two-stage construction spends on the
// rectifier stage (delta) versus the sim-mean stage (remainder).
struct RiskSplit {
    double delta = 0.0;
    double remainder = 0.0;

    static RiskSplit of(double delta, SignificanceLevel total) {
        if (!(delta > 0.0) || !(delta < total.alpha)) {
            throw config_error("risk split must lie strictly inside (0, " +
                               std::to_string(total.alpha) + "), got " + std::to_string(delta));
        }
        return RiskSplit{delta, total.alpha - delta};
    }

    // Spend 90% of the budget on the rectifier; reliable default.
    static RiskSplit heuristic(SignificanceLevel total) {
        return of(0.9 * total.alpha, total);
    }
};

inline UniformPpiTransform build_uniform_transform(const PairedDataset& paired,
                                                   const SimDataset& sim) {
    const std::size_t n = paired.n();
    if (n == 0) throw data_error("uniform transform needs at least one paired sample");
    const std::size_t total = n + sim.cap_n();
    const double inflation = static_cast<double>(total) / static_cast<double>(n);

    UniformPpiTransform out;
    out.inflation = inflation;
    out.indicator_count = n;
    out.range_lower = -inflation;
    out.range_upper = 1.0 + inflation;
    out.delta_values.reserve(total);
    // The betting engine reads the sequence in order, so paired and sim
    // entries are merged proportionally (a quantile merge): every prefix then
    // carries both kinds in near-population ratio.  Feeding the two blocks
    // back to back instead lets any systematic gap between real and sim score
    // levels masquerade as evidence against every candidate mean once the
    // variance estimate tightens; the inflated paired entries are the
    // counterweight to the sim level and must arrive alongside it.
    const std::size_t nsim = sim.cap_n();
    std::size_t i = 0, j = 0;
    while (i < n || j < nsim) {
        const bool take_paired =
            j == nsim || (i < n && (2 * i + 1) * nsim <= (2 * j + 1) * n);
        if (take_paired) {
            const auto& s = paired.samples[i++];
            out.delta_values.push_back(s.f + inflation * (s.y - s.f));
        } else {
            out.delta_values.push_back(sim.scores[j++]);
        }
    }
    return out;
}

// Point estimate behind suresim: the mean of the transform values, an
// unbiased estimate of the real mean under uniform paired selection.
inline double uniform_ppi_point(const PairedDataset& paired, const SimDataset& sim) {
    const auto transform = build_uniform_transform(paired, sim);
    double sum = 0.0;
    for (double d : transform.delta_values) sum += d;
    return sum / static_cast<double>(transform.delta_values.size());
}

// Point estimate behind the two-stage construction: sim mean plus the mean
// paired difference.
inline double two_stage_point(const PairedDataset& paired, const SimDataset& sim) {
    if (paired.n() == 0) throw data_error("two-stage point estimate needs paired samples");
    if (sim.cap_n() == 0) throw data_error("two-stage point estimate needs sim samples");
    double rect = 0.0;
    for (const auto& s : paired.samples) rect += s.y - s.f;
    rect /= static_cast<double>(paired.n());
    double fbar = 0.0;
    for (double f : sim.scores) fbar += f;
    fbar /= static_cast<double>(sim.cap_n());
    return fbar + rect;
}

namespace detail {
inline WsrConfig with_range(WsrConfig cfg, double lo, double hi) {
    cfg.range_lower = lo;
    cfg.range_upper = hi;
    return cfg;
}
} // namespace detail

inline ConfidenceInterval classical_interval(const std::vector<double>& real_scores,
                                             SignificanceLevel alpha,
                                             const WsrConfig& cfg = {}) {
    // Range [0, 1]: the betting engine already clips at the boundary and
    // sets the hit flags, so the result is final as-is.
    return wsr_interval(real_scores, alpha, detail::with_range(cfg, 0.0, 1.0),
                        Method::classical);
}

inline ConfidenceInterval suresim_interval_raw(const PairedDataset& paired,
                                               const SimDataset& sim,
                                               SignificanceLevel alpha,
                                               const WsrConfig& cfg = {}) {
    const auto transform = build_uniform_transform(paired, sim);
    return wsr_interval(transform.delta_values, alpha,
                        detail::with_range(cfg, transform.range_lower, transform.range_upper),
                        Method::suresim);
}

inline ConfidenceInterval suresim_interval(const PairedDataset& paired,
                                           const SimDataset& sim,
                                           SignificanceLevel alpha,
                                           const WsrConfig& cfg = {}) {
    return truncate_to_unit(suresim_interval_raw(paired, sim, alpha, cfg));
}

inline ConfidenceInterval rectifier_interval(const PairedDataset& paired,
                                             SignificanceLevel delta,
                                             const WsrConfig& cfg = {}) {
    if (paired.n() == 0) throw data_error("rectifier interval needs paired samples");
    // Deliberately not clipped: the mean paired difference may be negative.
    return wsr_interval(paired.diffs(), delta, detail::with_range(cfg, -1.0, 1.0),
                        Method::rectifier);
}

inline ConfidenceInterval two_stage_interval_raw(const PairedDataset& paired,
                                                 const SimDataset& sim,
                                                 SignificanceLevel alpha,
                                                 const RiskSplit& split,
                                                 const WsrConfig& cfg = {}) {
    if (!(split.delta > 0.0) || !(split.delta < alpha.alpha)) {
        throw config_error("risk split " + std::to_string(split.delta) +
                           " is not inside (0, " + std::to_string(alpha.alpha) + ")");
    }
    if (sim.cap_n() == 0) {
        throw data_error("two-stage interval needs at least one sim sample");
    }
    const ConfidenceInterval rect =
        rectifier_interval(paired, SignificanceLevel::of(split.delta), cfg);
    const ConfidenceInterval simci =
        wsr_interval(sim.scores, SignificanceLevel::of(alpha.alpha - split.delta),
                     detail::with_range(cfg, 0.0, 1.0), Method::two_stage);
    ConfidenceInterval out;
    out.lower = simci.lower + rect.lower;
    out.upper = simci.upper + rect.upper;
    out.alpha = alpha.alpha;
    out.method = Method::two_stage;
    return out;
}

inline ConfidenceInterval two_stage_interval(const PairedDataset& paired,
                                             const SimDataset& sim,
                                             SignificanceLevel alpha,
                                             const RiskSplit& split,
                                             const WsrConfig& cfg = {}) {
    return truncate_to_unit(two_stage_interval_raw(paired, sim, alpha, split, cfg));
}

// Hedged variants: spend 3a/4 on the headline method and a/4 on a classical
// interval, then intersect.  Each component is valid at its own budget, so
// the intersection misses the truth with probability at most a, and the
// result can never be wider than either component.

inline ConfidenceInterval suresim_ub_interval(const PairedDataset& paired,
                                              const SimDataset& sim,
                                              SignificanceLevel alpha,
                                              const WsrConfig& cfg = {}) {
    const auto main = suresim_interval_raw(paired, sim,
                                           SignificanceLevel::of(0.75 * alpha.alpha), cfg);
    const auto hedge = classical_interval(paired.ys(),
                                          SignificanceLevel::of(0.25 * alpha.alpha), cfg);
    return truncate_to_unit(intersect(main, hedge, Method::suresim_ub, alpha.alpha));
}

inline ConfidenceInterval two_stage_ub_interval(const PairedDataset& paired,
                                                const SimDataset& sim,
                                                SignificanceLevel alpha,
                                                const WsrConfig& cfg = {}) {
    const auto budget = SignificanceLevel::of(0.75 * alpha.alpha);
    const auto main =
        two_stage_interval_raw(paired, sim, budget, RiskSplit::heuristic(budget), cfg);
    const auto hedge = classical_interval(paired.ys(),
                                          SignificanceLevel::of(0.25 * alpha.alpha), cfg);
    return truncate_to_unit(intersect(main, hedge, Method::two_stage_ub, alpha.alpha));
}

// Search the rectifier/sim budget split that minimizes the realized
// two-stage width on this data.  Coarse scan plus ternary refinement, at
// most 40 objective evaluations, with the 0.9a heuristic always evaluated as
// a candidate so the result can never lose to it.  Ties go to the smallest
// delta, which keeps the answer stable across flat stretches.
inline RiskSplit optimize_risk_split(const PairedDataset& paired, const SimDataset& sim,
                                     SignificanceLevel alpha, const WsrConfig& cfg = {}) {
    if (paired.n() == 0) throw data_error("risk-split search needs paired samples");
    if (sim.cap_n() == 0) throw data_error("risk-split search needs sim samples");
    const double a = alpha.alpha;
    const double eps = a / 100.0;
    const double lo = eps;
    const double hi = a - eps;

    const std::vector<double> diffs = paired.diffs();
    const auto width_at = [&](double delta) {
        const auto rect = wsr_interval(diffs, SignificanceLevel::of(delta),
                                       detail::with_range(cfg, -1.0, 1.0), Method::rectifier);
        const auto simci = wsr_interval(sim.scores, SignificanceLevel::of(a - delta),
                                        detail::with_range(cfg, 0.0, 1.0), Method::two_stage);
        return rect.width() + simci.width();
    };

    double best_delta = 0.9 * a;
    double best_width = width_at(best_delta);
    double flat_min = best_width, flat_max = best_width;
    const auto consider = [&](double delta) {
        const double w = width_at(delta);
        flat_min = std::min(flat_min, w);
        flat_max = std::max(flat_max, w);
        if (w < best_width - 1e-15 ||
            (w <= best_width + 1e-15 && delta < best_delta)) {
            best_width = w;
            best_delta = delta;
        }
        return w;
    };

    const int coarse = 11;
    int best_i = -1;
    double best_coarse = best_width;
    for (int i = 0; i < coarse; ++i) {
        const double d = lo + (hi - lo) * static_cast<double>(i) / (coarse - 1);
        const double w = consider(d);
        if (best_i < 0 || w < best_coarse) {
            best_coarse = w;
            best_i = i;
        }
    }
    if (flat_max - flat_min < 1e-12) {
        // Nothing to optimize; fall back to the heuristic split.
        return RiskSplit::heuristic(alpha);
    }

    const double step = (hi - lo) / (coarse - 1);
    double a_lo = std::max(lo, lo + step * (best_i - 1));
    double a_hi = std::min(hi, lo + step * (best_i + 1));
    for (int iter = 0; iter < 13; ++iter) {
        const double m1 = a_lo + (a_hi - a_lo) / 3.0;
        const double m2 = a_hi - (a_hi - a_lo) / 3.0;
        if (consider(m1) <= consider(m2)) {
            a_hi = m2;
        } else {
            a_lo = m1;
        }
    }
    return RiskSplit::of(best_delta, alpha);
}

} // namespace suresim
