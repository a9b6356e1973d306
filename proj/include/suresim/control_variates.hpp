#pragma once

// Control-variate mean estimator with a Chebyshev interval, in two forms.
//
// The standard form estimates the coefficient, the point, and the variance
// from the same paired rows and treats the pooled row count n+N as the
// effective sample size in its plug-in variance.  That optimism is the
// point: this estimator is the comparison method whose coverage degrades as
// the sim pool grows, and the suite asserts that failure rather than hiding
// it.  The split form spends a holdout fraction of the paired rows on the
// coefficient and variance and keeps honest 1/n_inference variance scaling.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "suresim/dataset.hpp"
#include "suresim/errors.hpp"
#include "suresim/rng.hpp"
#include "suresim/types.hpp"

namespace suresim {

struct CvEstimate {
    double point = 0.0;
    double beta = 0.0;               // control-variate coefficient
    double variance_estimate = 0.0;  // estimated variance of `point`
    std::optional<double> split_fraction;
    bool beta_fallback = false;      // proxy variance was zero; beta forced to 0
};

namespace detail {

struct Moments {
    double mean_y = 0.0, mean_f = 0.0;
    double var_y = 0.0, var_f = 0.0, cov = 0.0; // n-1 denominators
};

inline Moments paired_moments(const std::vector<double>& ys, const std::vector<double>& fs) {
    Moments m;
    const std::size_t n = ys.size();
    for (std::size_t i = 0; i < n; ++i) {
        m.mean_y += ys[i];
        m.mean_f += fs[i];
    }
    m.mean_y /= static_cast<double>(n);
    m.mean_f /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double dy = ys[i] - m.mean_y;
        const double df = fs[i] - m.mean_f;
        m.var_y += dy * dy;
        m.var_f += df * df;
        m.cov += dy * df;
    }
    const double denom = static_cast<double>(n - 1);
    m.var_y /= denom;
    m.var_f /= denom;
    m.cov /= denom;
    return m;
}

// Variance of the adjusted mean, up to the 1/count factor the caller picks.
inline double cv_variance_bracket(const Moments& m, double beta, double kappa) {
    const double bracket = m.var_y + beta * beta * kappa * m.var_f - 2.0 * beta * kappa * m.cov;
    return std::max(bracket, 0.0);
}

} // namespace detail

inline CvEstimate cv_estimate(const PairedDataset& paired, const SimDataset& sim) {
    const std::size_t n = paired.n();
    const std::size_t cap = sim.cap_n();
    if (n < 3) {
        throw data_error("control-variate estimate needs at least 3 paired rows, got " +
                         std::to_string(n));
    }
    if (cap < 1) throw data_error("control-variate estimate needs at least one sim score");

    const auto m = detail::paired_moments(paired.ys(), paired.fs());
    const double kappa =
        static_cast<double>(cap) / static_cast<double>(n + cap);

    CvEstimate est;
    if (m.var_f < 1e-15) {
        est.beta = 0.0;
        est.beta_fallback = true;
    } else {
        est.beta = m.cov / m.var_f * kappa;
    }

    double f_all = 0.0;
    for (const auto& s : paired.samples) f_all += s.f;
    for (double f : sim.scores) f_all += f;
    f_all /= static_cast<double>(n + cap);

    est.point = m.mean_y - est.beta * (m.mean_f - f_all);
    if (est.beta_fallback) {
        // Plain mean of n scores; nothing pooled contributes.
        est.variance_estimate = m.var_y / static_cast<double>(n);
    } else {
        est.variance_estimate = detail::cv_variance_bracket(m, est.beta, kappa) /
                                static_cast<double>(n + cap);
    }
    return est;
}

inline ConfidenceInterval cv_interval(const PairedDataset& paired, const SimDataset& sim,
                                      SignificanceLevel alpha) {
    const CvEstimate est = cv_estimate(paired, sim);
    const double half = std::sqrt(est.variance_estimate / alpha.alpha);
    ConfidenceInterval ci;
    ci.lower = est.point - half;
    ci.upper = est.point + half;
    ci.alpha = alpha.alpha;
    ci.method = Method::cv;
    return truncate_to_unit(ci);
}

inline constexpr std::uint64_t kDefaultCvSplitSeed = 0x5eedu;

inline CvEstimate cv_split_estimate(const PairedDataset& paired, const SimDataset& sim,
                                    double split_fraction,
                                    std::uint64_t seed = kDefaultCvSplitSeed) {
    const std::size_t n = paired.n();
    const std::size_t cap = sim.cap_n();
    if (!(split_fraction > 0.0) || !(split_fraction < 1.0)) {
        throw config_error("split fraction must lie strictly between 0 and 1, got " +
                           std::to_string(split_fraction));
    }
    if (cap < 1) throw data_error("control-variate estimate needs at least one sim score");

    const std::size_t n_hold =
        static_cast<std::size_t>(std::ceil(split_fraction * static_cast<double>(n)));
    if (n_hold >= n) {
        throw data_error("split leaves no rows for the point estimate (holdout " +
                         std::to_string(n_hold) + " of " + std::to_string(n) + ")");
    }
    if (n_hold < 2) {
        throw data_error("split leaves too few rows to estimate a variance (holdout " +
                         std::to_string(n_hold) + ")");
    }
    const std::size_t n_inf = n - n_hold;

    // Seeded shuffle so structured row order cannot bias the split.
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(seed);
    shuffle(idx, rng);

    std::vector<double> y_hold, f_hold, y_inf, f_inf;
    y_hold.reserve(n_hold);
    f_hold.reserve(n_hold);
    y_inf.reserve(n_inf);
    f_inf.reserve(n_inf);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = paired.samples[idx[i]];
        if (i < n_hold) {
            y_hold.push_back(s.y);
            f_hold.push_back(s.f);
        } else {
            y_inf.push_back(s.y);
            f_inf.push_back(s.f);
        }
    }

    const auto mh = detail::paired_moments(y_hold, f_hold);
    const double kappa =
        static_cast<double>(cap) / static_cast<double>(n_inf + cap);

    CvEstimate est;
    est.split_fraction = split_fraction;
    if (mh.var_f < 1e-15) {
        est.beta = 0.0;
        est.beta_fallback = true;
    } else {
        est.beta = mh.cov / mh.var_f * kappa;
    }

    double mean_y_inf = 0.0, mean_f_inf = 0.0;
    for (std::size_t i = 0; i < n_inf; ++i) {
        mean_y_inf += y_inf[i];
        mean_f_inf += f_inf[i];
    }
    mean_y_inf /= static_cast<double>(n_inf);
    mean_f_inf /= static_cast<double>(n_inf);

    double f_all = mean_f_inf * static_cast<double>(n_inf);
    for (double f : sim.scores) f_all += f;
    f_all /= static_cast<double>(n_inf + cap);

    est.point = mean_y_inf - est.beta * (mean_f_inf - f_all);
    if (est.beta_fallback) {
        est.variance_estimate = mh.var_y / static_cast<double>(n_inf);
    } else {
        est.variance_estimate = detail::cv_variance_bracket(mh, est.beta, kappa) /
                                static_cast<double>(n_inf);
    }
    return est;
}

inline ConfidenceInterval cv_split_interval(const PairedDataset& paired, const SimDataset& sim,
                                            SignificanceLevel alpha, double split_fraction,
                                            std::uint64_t seed = kDefaultCvSplitSeed) {
    const CvEstimate est = cv_split_estimate(paired, sim, split_fraction, seed);
    const double half = std::sqrt(est.variance_estimate / alpha.alpha);
    ConfidenceInterval ci;
    ci.lower = est.point - half;
    ci.upper = est.point + half;
    ci.alpha = alpha.alpha;
    ci.method = Method::cv_split;
    return truncate_to_unit(ci);
}

} // namespace suresim
