#pragma once

// Descriptive statistics for a paired dataset plus an optional sim pool.
// These feed the `summary` CLI verb and the experiment reports.

#include <cmath>
#include <cstddef>
#include <optional>

#include "suresim/dataset.hpp"
#include "suresim/errors.hpp"

namespace suresim {

struct SummaryStats {
    std::size_t n = 0;     // paired rows
    std::size_t cap_n = 0; // sim-only rows
    double mean_y = 0.0;
    double mean_f_paired = 0.0;
    std::optional<double> mean_f_sim;  // absent when there is no sim pool
    double var_y = 0.0;                // sample variance, n-1 denominator
    double var_rect = 0.0;             // sample variance of y - f
    // Pearson correlation of (y, f) over the paired rows; absent when either
    // marginal is constant, which is not the same thing as zero correlation.
    std::optional<double> rho;
};

inline SummaryStats summary_stats(const PairedDataset& paired, const SimDataset& sim) {
    const std::size_t n = paired.n();
    if (n < 2) {
        throw data_error("summary statistics need at least 2 paired rows, got " +
                         std::to_string(n));
    }
    SummaryStats out;
    out.n = n;
    out.cap_n = sim.cap_n();

    double sum_y = 0.0, sum_f = 0.0;
    for (const auto& s : paired.samples) {
        sum_y += s.y;
        sum_f += s.f;
    }
    out.mean_y = sum_y / static_cast<double>(n);
    out.mean_f_paired = sum_f / static_cast<double>(n);

    double ss_y = 0.0, ss_f = 0.0, ss_yf = 0.0, ss_rect = 0.0;
    const double mean_rect = out.mean_y - out.mean_f_paired;
    for (const auto& s : paired.samples) {
        const double dy = s.y - out.mean_y;
        const double df = s.f - out.mean_f_paired;
        const double dr = (s.y - s.f) - mean_rect;
        ss_y += dy * dy;
        ss_f += df * df;
        ss_yf += dy * df;
        ss_rect += dr * dr;
    }
    const double denom = static_cast<double>(n - 1);
    out.var_y = ss_y / denom;
    out.var_rect = ss_rect / denom;
    if (ss_y > 0.0 && ss_f > 0.0) {
        out.rho = ss_yf / std::sqrt(ss_y * ss_f);
    }

    if (out.cap_n > 0) {
        double sum_sim = 0.0;
        for (double v : sim.scores) sum_sim += v;
        out.mean_f_sim = sum_sim / static_cast<double>(out.cap_n);
    }
    return out;
}

} // namespace suresim
