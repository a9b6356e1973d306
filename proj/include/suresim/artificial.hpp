#pragma once

// Synthetic populations of paired (real, proxy) scores with a known mean and
// a dialled-in Pearson correlation, for ground-truth coverage experiments.
//
// Real scores are uniform on [max{0, 2mu-1}, min{2mu, 1}], the widest
// uniform support with mean mu inside the unit interval.  Proxies blend a
// y-aligned signal with an orthogonalized noise draw through a single signal
// fraction s, so correlation rises monotonically with s and a bisection on s
// lands within tolerance of the target.  After blending, proxies are
// re-centered onto the target proxy mean and clamped to [0, 1]; the residual
// mean drift from clamping must stay within 5e-3 or the spec is rejected.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "suresim/dataset.hpp"
#include "suresim/errors.hpp"
#include "suresim/rng.hpp"

namespace suresim {

struct BankSpec {
    double mu_real = 0.5;
    double mu_sim = 0.5;
    double rho_target = 0.0;
    std::size_t size = 0;
    double rho_tolerance = 0.01;
    std::uint64_t seed = 0;
};

struct LabeledBank {
    std::vector<double> ys;
    std::vector<double> fs;
    double true_mu = 0.0;      // realized mean of ys, the coverage ground truth
    double achieved_rho = 0.0; // realized Pearson correlation of (y, f)
    BankSpec spec;
};

struct BankPartition {
    PairedDataset paired;
    PairedDataset heldout;
    SimDataset sim;
};

namespace detail {

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

// Shift to the requested mean, clamp to [0, 1], and repeat a few rounds so
// clamping and re-centering settle together.
inline void recenter_and_clamp(std::vector<double>& v, double mu) {
    for (int round = 0; round < 8; ++round) {
        const double shift = mu - mean_of(v);
        for (double& x : v) x = std::clamp(x + shift, 0.0, 1.0);
        if (std::abs(mean_of(v) - mu) < 1e-12) break;
    }
}

} // namespace detail

inline void validate_bank_spec(const BankSpec& spec) {
    if (!(spec.mu_real > 0.0) || !(spec.mu_real < 1.0) ||
        !(spec.mu_sim > 0.0) || !(spec.mu_sim < 1.0)) {
        throw config_error("bank means must lie strictly inside (0, 1)");
    }
    if (spec.size < 2) throw config_error("bank size must be at least 2");
    if (!(spec.rho_target >= -1.0) || !(spec.rho_target <= 1.0)) {
        throw config_error("target correlation must lie in [-1, 1], got " +
                           std::to_string(spec.rho_target));
    }
    if (!(spec.rho_tolerance > 0.0)) {
        throw config_error("correlation tolerance must be positive");
    }
}

inline LabeledBank generate_bank(const BankSpec& spec) {
    validate_bank_spec(spec);

    const double y_lo = std::max(0.0, 2.0 * spec.mu_real - 1.0);
    const double y_hi = std::min(2.0 * spec.mu_real, 1.0);
    Rng y_rng(derive_seed(spec.seed, 0));
    std::vector<double> ys(spec.size);
    for (double& y : ys) y = y_rng.next_uniform(y_lo, y_hi);

    LabeledBank bank;
    bank.spec = spec;
    bank.true_mu = detail::mean_of(ys);

    // A perfect proxy at the same mean is the real score itself.
    if (spec.rho_target == 1.0 && spec.mu_sim == spec.mu_real) {
        bank.fs = ys;
        bank.ys = std::move(ys);
        bank.achieved_rho = detail::pearson(bank.ys, bank.fs);
        return bank;
    }

    const double f_lo = std::max(0.0, 2.0 * spec.mu_sim - 1.0);
    const double f_hi = std::min(2.0 * spec.mu_sim, 1.0);
    Rng f_rng(derive_seed(spec.seed, 1));
    std::vector<double> noise(spec.size);
    for (double& f : noise) f = f_rng.next_uniform(f_lo, f_hi);

    // Project the y-direction out of the noise so the zero-signal blend has
    // (near-)zero correlation even in a finite bank.
    const double mean_y = bank.true_mu;
    const double mean_noise = detail::mean_of(noise);
    double syy = 0.0, syn = 0.0;
    for (std::size_t i = 0; i < spec.size; ++i) {
        const double dy = ys[i] - mean_y;
        syy += dy * dy;
        syn += dy * (noise[i] - mean_noise);
    }
    if (syy > 0.0) {
        const double proj = syn / syy;
        for (std::size_t i = 0; i < spec.size; ++i) noise[i] -= proj * (ys[i] - mean_y);
    }

    const double sign = spec.rho_target >= 0.0 ? 1.0 : -1.0;
    std::vector<double> target(spec.size);
    for (std::size_t i = 0; i < spec.size; ++i) {
        target[i] = sign * (ys[i] - mean_y) + spec.mu_sim;
    }

    std::vector<double> proxy(spec.size);
    const auto realize = [&](double s) {
        for (std::size_t i = 0; i < spec.size; ++i) {
            proxy[i] = (1.0 - s) * noise[i] + s * target[i];
        }
        detail::recenter_and_clamp(proxy, spec.mu_sim);
        return detail::pearson(ys, proxy);
    };

    const double want = sign * spec.rho_target; // bisect on |rho|
    double s_lo = 0.0, s_hi = 1.0;
    double rho_lo = sign * realize(0.0);
    double rho_hi = sign * realize(1.0);
    double best_s = rho_lo >= want ? 0.0 : 1.0;
    double best_rho = rho_lo >= want ? rho_lo : rho_hi;

    if (std::abs(rho_lo - want) <= spec.rho_tolerance) {
        best_s = 0.0;
        best_rho = rho_lo;
    } else if (rho_lo > want || rho_hi < want - spec.rho_tolerance) {
        // The signal dial cannot reach the target at all.
        throw infeasible_error(
            "bank correlation target " + std::to_string(spec.rho_target) +
                " is unreachable; closest achievable is " + std::to_string(sign * best_rho),
            sign * best_rho);
    } else {
        bool hit = false;
        for (int iter = 0; iter < 60; ++iter) {
            const double s_mid = 0.5 * (s_lo + s_hi);
            const double rho_mid = sign * realize(s_mid);
            if (std::abs(rho_mid - want) <= spec.rho_tolerance) {
                best_s = s_mid;
                best_rho = rho_mid;
                hit = true;
                break;
            }
            if (rho_mid < want) {
                s_lo = s_mid;
            } else {
                s_hi = s_mid;
            }
            if (std::abs(rho_mid - want) < std::abs(best_rho - want)) {
                best_s = s_mid;
                best_rho = rho_mid;
            }
        }
        if (!hit) {
            throw infeasible_error(
                "bank correlation search hit its iteration cap; achieved " +
                    std::to_string(sign * best_rho) + " for target " +
                    std::to_string(spec.rho_target),
                sign * best_rho);
        }
    }

    const double final_rho = realize(best_s);
    const double drift = std::abs(detail::mean_of(proxy) - spec.mu_sim);
    if (drift > 5e-3) {
        throw infeasible_error("clamping shifted the proxy mean by " + std::to_string(drift) +
                                   ", beyond the 5e-3 budget; the spec is infeasible",
                               final_rho);
    }

    bank.ys = std::move(ys);
    bank.fs = proxy;
    bank.achieved_rho = final_rho;
    return bank;
}

// Disjoint seeded draws: n paired rows, cap_n sim-only rows (real labels
// discarded), and heldout paired rows kept aside as a coverage reference.
inline BankPartition partition_bank(const LabeledBank& bank, std::size_t n,
                                    std::size_t cap_n, std::size_t heldout,
                                    std::uint64_t seed) {
    if (n == 0) throw data_error("partition needs at least one paired row");
    if (n + cap_n + heldout > bank.ys.size()) {
        throw data_error("partition of " + std::to_string(n) + "+" + std::to_string(cap_n) +
                         "+" + std::to_string(heldout) + " rows oversubscribes a bank of " +
                         std::to_string(bank.ys.size()));
    }
    std::vector<std::size_t> idx(bank.ys.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(seed);
    const std::size_t take = n + cap_n + heldout;
    for (std::size_t i = 0; i < take; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(idx.size() - i));
        std::swap(idx[i], idx[j]);
    }

    BankPartition part;
    part.paired.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = idx[i];
        part.paired.samples.push_back({"b" + std::to_string(k), bank.ys[k], bank.fs[k]});
    }
    part.sim.ids.reserve(cap_n);
    part.sim.scores.reserve(cap_n);
    for (std::size_t i = n; i < n + cap_n; ++i) {
        const std::size_t k = idx[i];
        part.sim.ids.push_back("b" + std::to_string(k));
        part.sim.scores.push_back(bank.fs[k]);
    }
    part.heldout.samples.reserve(heldout);
    for (std::size_t i = n + cap_n; i < take; ++i) {
        const std::size_t k = idx[i];
        part.heldout.samples.push_back({"b" + std::to_string(k), bank.ys[k], bank.fs[k]});
    }
    return part;
}

} // namespace suresim
