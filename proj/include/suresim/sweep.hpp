#pragma once

// Monte Carlo experiment engine: width sweeps along one axis (sim-pool size,
// correlation, or significance level), coverage sweeps against a known bank
// mean, and the trials-saved search that asks how many real samples the
// classical baseline would need to match a method's width.
//
// Determinism contract: every redraw r of every grid point g consumes seeds
// derived from (config.seed, a per-purpose stream, g, r) and nothing else.
// Results are therefore byte-stable under re-runs, independent of evaluation
// order, and redraw r's data does not change when the total redraw count
// does.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "suresim/artificial.hpp"
#include "suresim/control_variates.hpp"
#include "suresim/dataset.hpp"
#include "suresim/errors.hpp"
#include "suresim/ppi.hpp"
#include "suresim/resample.hpp"
#include "suresim/rng.hpp"
#include "suresim/types.hpp"
#include "suresim/wsr.hpp"

namespace suresim {

enum class SweepAxis { n_sim, rho, alpha };

inline const char* axis_name(SweepAxis a) {
    switch (a) {
        case SweepAxis::n_sim: return "nsim";
        case SweepAxis::rho:   return "rho";
        case SweepAxis::alpha: return "alpha";
    }
    return "unknown";
}

inline std::optional<SweepAxis> parse_axis(std::string_view name) {
    for (SweepAxis a : {SweepAxis::n_sim, SweepAxis::rho, SweepAxis::alpha}) {
        if (name == axis_name(a)) return a;
    }
    return std::nullopt;
}

enum class DeltaPolicy { heuristic, optimized };
enum class BankMode { fresh, bootstrap };
enum class TruthMode { exact, heldout };

struct SweepConfig {
    std::vector<Method> methods;   // empty = per-verb default
    SweepAxis axis = SweepAxis::n_sim;
    std::vector<double> grid;      // values along the swept axis
    std::size_t n = 100;           // paired draws per experiment
    std::size_t n_sim = 1000;      // sim draws when the axis is not nsim
    double alpha = 0.1;            // budget when the axis is not alpha
    double rho = 0.9;              // bank correlation when the axis is not rho
    double mu_real = 0.5;
    double mu_sim = 0.5;
    double rho_tolerance = 0.01;
    std::size_t bank_size = 0;     // 0 = sized automatically per grid point
    std::size_t redraws = 100;
    std::size_t trials = 1000;     // coverage trials
    std::uint64_t seed = 0;
    DeltaPolicy delta_policy = DeltaPolicy::heuristic;
    double split_fraction = 0.2;   // cv-split holdout share
    BankMode bank_mode = BankMode::fresh;
    TruthMode truth_mode = TruthMode::exact;
    std::size_t heldout = 400;     // reserved rows when truth_mode = heldout
    bool sim_with_replacement = false;
    std::size_t savings_cap_multiplier = 64;
    WsrConfig wsr;
};

struct SweepRow {
    double axis_value = 0.0;
    Method method = Method::classical;
    double mean_width = 0.0;
    double se_width = 0.0;
    double mean_lower = 0.0;
    double mean_upper = 0.0;
    double trunc_lo_freq = 0.0;
    double trunc_hi_freq = 0.0;
    std::size_t n = 0;
    std::size_t n_sim = 0;
    double alpha = 0.0;
    // Rectifier budget actually spent (mean over redraws for optimized
    // splits); NaN for methods with no such knob.
    double delta = std::numeric_limits<double>::quiet_NaN();
    std::size_t redraws = 0;
};

struct SweepResult {
    SweepConfig config;
    std::string source = "generator"; // or "csv"
    std::vector<SweepRow> rows;
};

struct CoverageRow {
    double axis_value = 0.0;
    Method method = Method::classical;
    double coverage = 0.0;
    double se = 0.0; // binomial: sqrt(p(1-p)/trials)
    std::size_t trials = 0;
    std::size_t n = 0;
    std::size_t n_sim = 0;
    double alpha = 0.0;
};

struct CoverageResult {
    SweepConfig config;
    std::string source = "generator";
    std::vector<CoverageRow> rows;
};

struct SavingsRow {
    Method method = Method::suresim;
    double mean_width = 0.0;        // method width at n, mean over redraws
    double n_equivalent_mean = 0.0; // classical sample count matching it
    double savings_mean = 0.0;      // (n' - n) / n'
    double savings_se = 0.0;
    bool cap_censored = false;      // some redraw exhausted the search cap
    std::size_t n = 0;
    std::size_t n_sim = 0;
    double alpha = 0.0;
    std::size_t redraws = 0;
};

struct SavingsResult {
    SweepConfig config;
    std::string source = "generator";
    std::vector<SavingsRow> rows;
};

namespace detail {

// Seed streams.  Grid point g owns a block of streams at base + g so that
// banks, partitions, and resamples never collide across purposes.
inline constexpr std::uint64_t kStreamBootstrapBank = 1;
inline constexpr std::uint64_t kStreamFreshBank = 1000;
inline constexpr std::uint64_t kStreamPartition = 2000;
inline constexpr std::uint64_t kStreamSimResample = 3000;
inline constexpr std::uint64_t kStreamCsvPaired = 4000;
inline constexpr std::uint64_t kStreamCsvSim = 5000;
inline constexpr std::uint64_t kStreamCvSplit = 6000;
inline constexpr std::uint64_t kStreamSavingsClassical = 7000;

struct GridPointParams {
    double axis_value = 0.0;
    std::size_t n_sim = 0;
    double rho = 0.0;
    double alpha = 0.0;
};

inline GridPointParams grid_point_params(const SweepConfig& cfg, double value) {
    GridPointParams p;
    p.axis_value = value;
    p.n_sim = cfg.n_sim;
    p.rho = cfg.rho;
    p.alpha = cfg.alpha;
    switch (cfg.axis) {
        case SweepAxis::n_sim: {
            if (!(value >= 0.0) || value != std::floor(value)) {
                throw config_error("sim-pool grid values must be nonnegative integers");
            }
            p.n_sim = static_cast<std::size_t>(value);
            break;
        }
        case SweepAxis::rho:
            p.rho = value;
            break;
        case SweepAxis::alpha:
            p.alpha = SignificanceLevel::of(value).alpha;
            break;
    }
    return p;
}

inline void validate_sweep_config(const SweepConfig& cfg) {
    if (cfg.grid.empty()) throw config_error("sweep grid must not be empty");
    if (cfg.redraws < 1) throw config_error("redraws must be at least 1");
    if (cfg.n < 1) throw config_error("paired sample count must be at least 1");
    SignificanceLevel::of(cfg.alpha);
    for (double v : cfg.grid) grid_point_params(cfg, v); // per-value checks
}

// One experiment draw: paired set, sim set, and the coverage truth.
struct ExperimentDraw {
    PairedDataset paired;
    SimDataset sim;
    double truth = 0.0;
};

class GeneratorSource {
public:
    GeneratorSource(const SweepConfig& cfg) : cfg_(cfg) {}

    ExperimentDraw draw(const GridPointParams& p, std::size_t g, std::size_t r) const {
        const std::size_t reserve = cfg_.truth_mode == TruthMode::heldout ? cfg_.heldout : 0;
        const LabeledBank& bank = bank_for(p, g, r, reserve);
        const std::uint64_t part_seed = derive_seed(cfg_.seed, kStreamPartition + g, r);
        ExperimentDraw out;
        if (cfg_.sim_with_replacement) {
            // Draw the paired (and heldout) rows without replacement, then
            // scale the sim pool by sampling the leftover rows with
            // replacement; this is how sim counts beyond the bank size are
            // exercised.
            const std::size_t pool = bank.ys.size() - cfg_.n - reserve;
            BankPartition part = partition_bank(bank, cfg_.n, pool, reserve, part_seed);
            out.sim = resample_sim(part.sim, p.n_sim, true,
                                   derive_seed(cfg_.seed, kStreamSimResample + g, r));
            out.paired = std::move(part.paired);
            out.truth = cfg_.truth_mode == TruthMode::heldout
                            ? heldout_mean(part.heldout)
                            : bank.true_mu;
        } else {
            BankPartition part = partition_bank(bank, cfg_.n, p.n_sim, reserve, part_seed);
            out.paired = std::move(part.paired);
            out.sim = std::move(part.sim);
            out.truth = cfg_.truth_mode == TruthMode::heldout
                            ? heldout_mean(part.heldout)
                            : bank.true_mu;
        }
        return out;
    }

    // The y-population the savings search draws classical sets from.
    std::vector<double> classical_pool() const {
        GridPointParams p = grid_point_params(cfg_, cfg_.grid.at(0));
        const std::size_t reserve = cfg_.truth_mode == TruthMode::heldout ? cfg_.heldout : 0;
        return bank_for(p, 0, 0, reserve).ys;
    }

private:
    std::size_t bank_size_for(const GridPointParams& p, std::size_t reserve) const {
        if (cfg_.bank_size != 0) return cfg_.bank_size;
        if (cfg_.sim_with_replacement) {
            // The sim pool is resampled, so the bank only has to hold the
            // paired rows plus a healthy base pool.
            return cfg_.n + reserve + 5000;
        }
        return cfg_.n + p.n_sim + reserve;
    }

    BankSpec spec_for(const GridPointParams& p, std::uint64_t bank_seed,
                      std::size_t reserve) const {
        BankSpec spec;
        spec.mu_real = cfg_.mu_real;
        spec.mu_sim = cfg_.mu_sim;
        spec.rho_target = p.rho;
        spec.size = bank_size_for(p, reserve);
        spec.rho_tolerance = cfg_.rho_tolerance;
        spec.seed = bank_seed;
        return spec;
    }

    const LabeledBank& bank_for(const GridPointParams& p, std::size_t g, std::size_t r,
                                std::size_t reserve) const {
        const bool fresh = cfg_.bank_mode == BankMode::fresh;
        const std::uint64_t key_r = fresh ? r : 0;
        // Non-rho axes share one bootstrap bank across grid points; the rho
        // axis needs one per grid point in either mode.
        const std::uint64_t key_g =
            (!fresh && cfg_.axis != SweepAxis::rho) ? 0 : static_cast<std::uint64_t>(g);
        const std::uint64_t stream = fresh ? kStreamFreshBank + key_g : kStreamBootstrapBank + key_g;
        const std::uint64_t bank_seed = derive_seed(cfg_.seed, stream, key_r);
        auto it = banks_.find(bank_seed);
        if (it == banks_.end()) {
            GridPointParams sized = p;
            if (!fresh && cfg_.axis == SweepAxis::n_sim) {
                // One shared bank must hold the largest grid point.
                double max_v = 0.0;
                for (double v : cfg_.grid) max_v = std::max(max_v, v);
                sized.n_sim = static_cast<std::size_t>(max_v);
            }
            LabeledBank bank = generate_bank(spec_for(sized, bank_seed, reserve));
            it = banks_.emplace(bank_seed, std::move(bank)).first;
            // Fresh mode generates one bank per redraw; cap the cache so a
            // long sweep does not hold every bank it ever built.
            if (banks_.size() > 4) banks_.erase(banks_.begin() == it ? std::next(it) : banks_.begin());
        }
        return it->second;
    }

    static double heldout_mean(const PairedDataset& heldout) {
        if (heldout.n() == 0) throw data_error("heldout truth requested but no rows reserved");
        double s = 0.0;
        for (const auto& x : heldout.samples) s += x.y;
        return s / static_cast<double>(heldout.n());
    }

    const SweepConfig& cfg_;
    mutable std::map<std::uint64_t, LabeledBank> banks_;
};

class CsvSource {
public:
    CsvSource(const SweepConfig& cfg, const PairedDataset& paired, const SimDataset& sim)
        : cfg_(cfg), paired_(paired), sim_(sim) {
        if (cfg.axis == SweepAxis::rho) {
            throw config_error("a CSV source has a fixed correlation; sweep nsim or alpha instead");
        }
    }

    ExperimentDraw draw(const GridPointParams& p, std::size_t g, std::size_t r) const {
        ExperimentDraw out;
        out.paired = resample_paired(paired_, cfg_.n, false,
                                     derive_seed(cfg_.seed, kStreamCsvPaired + g, r));
        const bool with_repl = p.n_sim > sim_.cap_n();
        if (with_repl && !cfg_.sim_with_replacement) {
            throw data_error("sim grid point " + std::to_string(p.n_sim) + " exceeds the " +
                             std::to_string(sim_.cap_n()) +
                             " available sim rows; rerun with sim resampling enabled");
        }
        out.sim = resample_sim(sim_, p.n_sim, with_repl,
                               derive_seed(cfg_.seed, kStreamCsvSim + g, r));
        out.truth = 0.0; // CSV sources carry no ground truth
        return out;
    }

    std::vector<double> classical_pool() const {
        std::vector<double> ys;
        ys.reserve(paired_.n());
        for (const auto& s : paired_.samples) ys.push_back(s.y);
        return ys;
    }

private:
    const SweepConfig& cfg_;
    const PairedDataset& paired_;
    const SimDataset& sim_;
};

struct MethodEval {
    ConfidenceInterval ci;
    double delta = std::numeric_limits<double>::quiet_NaN();
};

inline MethodEval eval_method(Method m, const SweepConfig& cfg, const GridPointParams& p,
                              const ExperimentDraw& d, std::size_t g, std::size_t r) {
    const SignificanceLevel level = SignificanceLevel::of(p.alpha);
    MethodEval out;
    switch (m) {
        case Method::classical:
            out.ci = classical_interval(d.paired.ys(), level, cfg.wsr);
            return out;
        case Method::suresim:
            out.ci = suresim_interval(d.paired, d.sim, level, cfg.wsr);
            return out;
        case Method::suresim_ub:
            out.ci = suresim_ub_interval(d.paired, d.sim, level, cfg.wsr);
            return out;
        case Method::two_stage: {
            const RiskSplit split = cfg.delta_policy == DeltaPolicy::optimized
                                        ? optimize_risk_split(d.paired, d.sim, level, cfg.wsr)
                                        : RiskSplit::heuristic(level);
            out.ci = two_stage_interval(d.paired, d.sim, level, split, cfg.wsr);
            out.delta = split.delta;
            return out;
        }
        case Method::two_stage_ub:
            out.ci = two_stage_ub_interval(d.paired, d.sim, level, cfg.wsr);
            return out;
        case Method::cv:
            out.ci = cv_interval(d.paired, d.sim, level);
            return out;
        case Method::cv_split:
            out.ci = cv_split_interval(d.paired, d.sim, level, cfg.split_fraction,
                                       derive_seed(cfg.seed, kStreamCvSplit + g, r));
            return out;
        case Method::rectifier: {
            const double delta = 0.9 * p.alpha;
            out.ci = rectifier_interval(d.paired, SignificanceLevel::of(delta), cfg.wsr);
            out.delta = delta;
            return out;
        }
    }
    throw config_error("unknown method");
}

struct WidthAccumulator {
    std::size_t count = 0;
    double sum_w = 0.0, sum_w2 = 0.0;
    double sum_lo = 0.0, sum_hi = 0.0;
    double sum_delta = 0.0;
    std::size_t delta_count = 0;
    std::size_t trunc_lo = 0, trunc_hi = 0;

    void add(const MethodEval& e) {
        ++count;
        const double w = e.ci.width();
        sum_w += w;
        sum_w2 += w * w;
        sum_lo += e.ci.lower;
        sum_hi += e.ci.upper;
        if (e.ci.truncated_lower) ++trunc_lo;
        if (e.ci.truncated_upper) ++trunc_hi;
        if (!std::isnan(e.delta)) {
            sum_delta += e.delta;
            ++delta_count;
        }
    }

    SweepRow finish(const GridPointParams& p, Method m, const SweepConfig& cfg) const {
        SweepRow row;
        row.axis_value = p.axis_value;
        row.method = m;
        const double k = static_cast<double>(count);
        row.mean_width = sum_w / k;
        row.mean_lower = sum_lo / k;
        row.mean_upper = sum_hi / k;
        if (count > 1) {
            const double var = std::max(0.0, (sum_w2 - sum_w * sum_w / k) / (k - 1.0));
            row.se_width = std::sqrt(var / k);
        }
        row.trunc_lo_freq = static_cast<double>(trunc_lo) / k;
        row.trunc_hi_freq = static_cast<double>(trunc_hi) / k;
        row.n = cfg.n;
        row.n_sim = p.n_sim;
        row.alpha = p.alpha;
        if (delta_count > 0) row.delta = sum_delta / static_cast<double>(delta_count);
        row.redraws = cfg.redraws;
        return row;
    }
};

inline std::vector<Method> width_methods(const SweepConfig& cfg) {
    std::vector<Method> methods = cfg.methods;
    if (methods.empty()) {
        methods = {Method::classical, Method::suresim, Method::suresim_ub,
                   Method::two_stage, Method::two_stage_ub};
    }
    // Every width sweep reports the rectifier reference curve.
    if (std::find(methods.begin(), methods.end(), Method::rectifier) == methods.end()) {
        methods.push_back(Method::rectifier);
    }
    return methods;
}

template <typename SourceT>
SweepResult run_width_sweep_impl(const SweepConfig& cfg, const SourceT& source,
                                 const char* source_tag) {
    validate_sweep_config(cfg);
    const std::vector<Method> methods = width_methods(cfg);
    SweepResult result;
    result.config = cfg;
    result.source = source_tag;
    for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
        const GridPointParams p = grid_point_params(cfg, cfg.grid[g]);
        std::vector<WidthAccumulator> acc(methods.size());
        for (std::size_t r = 0; r < cfg.redraws; ++r) {
            const ExperimentDraw d = source.draw(p, g, r);
            for (std::size_t mi = 0; mi < methods.size(); ++mi) {
                acc[mi].add(eval_method(methods[mi], cfg, p, d, g, r));
            }
        }
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            result.rows.push_back(acc[mi].finish(p, methods[mi], cfg));
        }
    }
    return result;
}

} // namespace detail

inline SweepResult run_width_sweep(const SweepConfig& cfg) {
    detail::GeneratorSource source(cfg);
    return detail::run_width_sweep_impl(cfg, source, "generator");
}

inline SweepResult run_width_sweep(const SweepConfig& cfg, const PairedDataset& paired,
                                   const SimDataset& sim) {
    detail::CsvSource source(cfg, paired, sim);
    return detail::run_width_sweep_impl(cfg, source, "csv");
}

inline CoverageResult run_coverage_sweep(const SweepConfig& cfg) {
    detail::validate_sweep_config(cfg);
    if (cfg.trials < 100) {
        throw config_error("coverage estimates need at least 100 trials, got " +
                           std::to_string(cfg.trials));
    }
    std::vector<Method> methods = cfg.methods;
    if (methods.empty()) {
        methods = {Method::classical, Method::suresim, Method::suresim_ub,
                   Method::two_stage, Method::two_stage_ub};
    }
    detail::GeneratorSource source(cfg);

    CoverageResult result;
    result.config = cfg;
    for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
        const detail::GridPointParams p = detail::grid_point_params(cfg, cfg.grid[g]);
        std::vector<std::size_t> hits(methods.size(), 0);
        for (std::size_t r = 0; r < cfg.trials; ++r) {
            const detail::ExperimentDraw d = source.draw(p, g, r);
            for (std::size_t mi = 0; mi < methods.size(); ++mi) {
                try {
                    const auto e = detail::eval_method(methods[mi], cfg, p, d, g, r);
                    if (e.ci.covers(d.truth)) ++hits[mi];
                } catch (const data_error&) {
                    // A disjoint hedge intersection is a miscoverage event;
                    // count the trial as a miss rather than aborting the run.
                }
            }
        }
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            CoverageRow row;
            row.axis_value = p.axis_value;
            row.method = methods[mi];
            const double t = static_cast<double>(cfg.trials);
            row.coverage = static_cast<double>(hits[mi]) / t;
            row.se = std::sqrt(row.coverage * (1.0 - row.coverage) / t);
            row.trials = cfg.trials;
            row.n = cfg.n;
            row.n_sim = p.n_sim;
            row.alpha = p.alpha;
            result.rows.push_back(row);
        }
    }
    return result;
}

namespace detail {

// Mean classical width at sample count k, drawing with replacement from a
// fixed y-population.  Memoized: the savings search probes the same counts
// for every outer redraw.
class ClassicalWidthCurve {
public:
    ClassicalWidthCurve(const SweepConfig& cfg, std::vector<double> pool, double alpha)
        : cfg_(cfg), pool_(std::move(pool)), alpha_(alpha) {
        if (pool_.empty()) throw data_error("savings search needs a nonempty y-population");
    }

    double mean_width(std::size_t k) {
        auto it = cache_.find(k);
        if (it != cache_.end()) return it->second;
        double sum = 0.0;
        for (std::size_t j = 0; j < cfg_.redraws; ++j) {
            Rng rng(derive_seed(cfg_.seed, kStreamSavingsClassical + k, j));
            std::vector<double> ys(k);
            for (double& y : ys) y = pool_[rng.next_below(pool_.size())];
            sum += classical_interval(ys, SignificanceLevel::of(alpha_), cfg_.wsr).width();
        }
        const double mean = sum / static_cast<double>(cfg_.redraws);
        cache_.emplace(k, mean);
        return mean;
    }

private:
    const SweepConfig& cfg_;
    std::vector<double> pool_;
    double alpha_;
    std::map<std::size_t, double> cache_;
};

template <typename SourceT>
SavingsResult compute_savings_impl(const SweepConfig& cfg, const SourceT& source,
                                   const char* source_tag) {
    validate_sweep_config(cfg);
    std::vector<Method> methods = cfg.methods;
    if (methods.empty()) methods = {Method::suresim};

    if (cfg.savings_cap_multiplier < 1) {
        throw config_error("savings search cap multiplier must be at least 1");
    }
    const GridPointParams p = grid_point_params(cfg, cfg.grid.at(0));
    const std::size_t cap = cfg.n * cfg.savings_cap_multiplier;
    ClassicalWidthCurve curve(cfg, source.classical_pool(), p.alpha);

    SavingsResult result;
    result.config = cfg;
    result.source = source_tag;
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        double sum_w = 0.0;
        double sum_s = 0.0, sum_s2 = 0.0;
        double sum_n_eq = 0.0;
        bool censored = false;
        for (std::size_t r = 0; r < cfg.redraws; ++r) {
            const ExperimentDraw d = source.draw(p, 0, r);
            const double w = eval_method(methods[mi], cfg, p, d, 0, r).ci.width();
            sum_w += w;

            // Smallest classical count whose mean width beats w, assuming
            // the mean-width curve decreases in the sample count.
            std::size_t n_eq;
            if (!(curve.mean_width(cap) < w)) {
                censored = true;
                n_eq = cap;
            } else {
                std::size_t lo = 1, hi = cap; // invariant: curve(hi) < w
                while (lo < hi) {
                    const std::size_t mid = lo + (hi - lo) / 2;
                    if (curve.mean_width(mid) < w) {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                n_eq = lo;
            }
            const double s =
                (static_cast<double>(n_eq) - static_cast<double>(cfg.n)) / static_cast<double>(n_eq);
            sum_s += s;
            sum_s2 += s * s;
            sum_n_eq += static_cast<double>(n_eq);
        }
        SavingsRow row;
        row.method = methods[mi];
        const double k = static_cast<double>(cfg.redraws);
        row.mean_width = sum_w / k;
        row.n_equivalent_mean = sum_n_eq / k;
        row.savings_mean = sum_s / k;
        if (cfg.redraws > 1) {
            const double var = std::max(0.0, (sum_s2 - sum_s * sum_s / k) / (k - 1.0));
            row.savings_se = std::sqrt(var / k);
        }
        row.cap_censored = censored;
        row.n = cfg.n;
        row.n_sim = p.n_sim;
        row.alpha = p.alpha;
        row.redraws = cfg.redraws;
        result.rows.push_back(row);
    }
    return result;
}

} // namespace detail

inline SavingsResult compute_savings(const SweepConfig& cfg) {
    detail::GeneratorSource source(cfg);
    return detail::compute_savings_impl(cfg, source, "generator");
}

inline SavingsResult compute_savings(const SweepConfig& cfg, const PairedDataset& paired,
                                     const SimDataset& sim) {
    detail::CsvSource source(cfg, paired, sim);
    return detail::compute_savings_impl(cfg, source, "csv");
}

} // namespace suresim
