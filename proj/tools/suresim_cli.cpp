// Command-line front end.
//
// Verbs:
//   interval   one confidence interval from CSV data
//   summary    descriptive statistics of a paired/sim CSV pair
//   gen-data   synthetic bank with known mean and target correlation
//   sweep      mean interval width along an axis (nsim | rho | alpha)
//   coverage   empirical coverage against the bank's known mean
//   savings    classical-equivalent sample count per method
//
// Exit codes: 0 ok, 2 bad configuration, 3 bad data, 4 infeasible search.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "suresim/suresim.hpp"

namespace {

using nlohmann::ordered_json;

std::vector<suresim::Method> parse_methods(const std::vector<std::string>& names) {
    std::vector<suresim::Method> out;
    for (const auto& name : names) {
        const auto m = suresim::parse_method(name);
        if (!m) throw suresim::config_error("unknown method '" + name + "'");
        out.push_back(*m);
    }
    return out;
}

suresim::EmitFormat parse_format(const std::string& name) {
    const auto f = suresim::parse_emit_format(name);
    if (!f) throw suresim::config_error("unknown output format '" + name + "' (csv|json)");
    return *f;
}

void write_text(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw suresim::data_error("cannot open '" + out_path + "' for writing");
    out << text;
    if (!out) throw suresim::data_error("failed while writing '" + out_path + "'");
}

std::string sidecar_path(const std::string& out_path) {
    const std::size_t slash = out_path.find_last_of('/');
    const std::size_t dot = out_path.find_last_of('.');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
        return out_path.substr(0, dot) + ".meta.json";
    }
    return out_path + ".meta.json";
}

// Shared generator/source flags for the sweep-style verbs.
struct SourceArgs {
    std::string paired_path;
    std::string sim_path;
    double mu_real = 0.5;
    double mu_sim = 0.5;
    double rho = 0.9;
    double rho_tolerance = 0.01;
    std::size_t bank_size = 0;
    bool bootstrap_bank = false;
};

void add_source_flags(CLI::App* cmd, SourceArgs& src) {
    cmd->add_option("--paired", src.paired_path, "Paired CSV (id,y,f); selects the CSV source");
    cmd->add_option("--sim", src.sim_path, "Sim CSV (id,f); required with --paired");
    cmd->add_option("--mu", src.mu_real, "Generator: real-score mean");
    cmd->add_option("--mu-sim", src.mu_sim, "Generator: proxy-score mean");
    cmd->add_option("--rho", src.rho, "Generator: target correlation");
    cmd->add_option("--tol", src.rho_tolerance, "Generator: correlation tolerance");
    cmd->add_option("--bank-size", src.bank_size, "Generator: bank size (0 = automatic)");
    cmd->add_flag("--bootstrap-bank", src.bootstrap_bank,
                  "Reuse one generated bank across redraws (default: fresh bank per redraw)");
}

struct CommonSweepArgs {
    std::vector<std::string> methods;
    std::size_t n = 100;
    std::size_t n_sim = 1000;
    double alpha = 0.1;
    std::size_t redraws = 100;
    std::uint64_t seed = 0;
    int grid_size = 1001;
    double wsr_c = 0.99;
    bool optimize_delta = false;
    double split_fraction = 0.2;
    bool sim_with_replacement = false;
    std::string out_path;
    std::string format = "csv";
};

void add_common_sweep_flags(CLI::App* cmd, CommonSweepArgs& args) {
    cmd->add_option("--methods", args.methods, "Comma-separated method tags")->delimiter(',');
    cmd->add_option("--n", args.n, "Paired sample count per draw");
    cmd->add_option("--nsim", args.n_sim, "Sim sample count (when not the swept axis)");
    cmd->add_option("--alpha", args.alpha, "Total miscoverage budget");
    cmd->add_option("--redraws", args.redraws, "Monte Carlo redraws per grid point");
    cmd->add_option("--seed", args.seed, "Base seed");
    cmd->add_option("--grid-size", args.grid_size, "Betting grid resolution");
    cmd->add_option("--wsr-c", args.wsr_c, "Betting stake cap");
    cmd->add_flag("--optimize-delta", args.optimize_delta,
                  "Search the two-stage risk split instead of the 0.9*alpha heuristic");
    cmd->add_option("--split-frac", args.split_fraction, "cv-split holdout fraction");
    cmd->add_flag("--sim-with-replacement", args.sim_with_replacement,
                  "Scale the sim pool by resampling with replacement");
    cmd->add_option("--out", args.out_path, "Output path (default: stdout)");
    cmd->add_option("--format", args.format, "Output format: csv|json");
}

suresim::SweepConfig build_config(const CommonSweepArgs& args, const SourceArgs& src) {
    suresim::SweepConfig cfg;
    cfg.methods = parse_methods(args.methods);
    cfg.n = args.n;
    cfg.n_sim = args.n_sim;
    cfg.alpha = args.alpha;
    cfg.redraws = args.redraws;
    cfg.seed = args.seed;
    cfg.wsr.grid_size = args.grid_size;
    cfg.wsr.c = args.wsr_c;
    cfg.delta_policy = args.optimize_delta ? suresim::DeltaPolicy::optimized
                                           : suresim::DeltaPolicy::heuristic;
    cfg.split_fraction = args.split_fraction;
    cfg.sim_with_replacement = args.sim_with_replacement;
    cfg.mu_real = src.mu_real;
    cfg.mu_sim = src.mu_sim;
    cfg.rho = src.rho;
    cfg.rho_tolerance = src.rho_tolerance;
    cfg.bank_size = src.bank_size;
    cfg.bank_mode = src.bootstrap_bank ? suresim::BankMode::bootstrap : suresim::BankMode::fresh;
    return cfg;
}

int run_interval(const std::string& method_str, const std::string& paired_path,
                 const std::string& sim_path, double alpha, double delta, bool optimize_delta,
                 double split_fraction, int grid_size, double wsr_c, std::uint64_t seed,
                 const std::string& out_path, const std::string& format_str) {
    const auto method = suresim::parse_method(method_str);
    if (!method) throw suresim::config_error("unknown method '" + method_str + "'");
    const auto level = suresim::SignificanceLevel::of(alpha);
    suresim::WsrConfig wsr;
    wsr.grid_size = grid_size;
    wsr.c = wsr_c;

    const suresim::PairedDataset paired = suresim::load_paired_dataset(paired_path);
    suresim::SimDataset sim;
    if (!sim_path.empty()) sim = suresim::load_sim_dataset(sim_path);

    suresim::ConfidenceInterval ci;
    switch (*method) {
        case suresim::Method::classical:
            ci = suresim::classical_interval(paired.ys(), level, wsr);
            break;
        case suresim::Method::suresim:
            ci = suresim::suresim_interval(paired, sim, level, wsr);
            break;
        case suresim::Method::suresim_ub:
            ci = suresim::suresim_ub_interval(paired, sim, level, wsr);
            break;
        case suresim::Method::two_stage: {
            const auto split = optimize_delta
                                   ? suresim::optimize_risk_split(paired, sim, level, wsr)
                                   : (delta > 0.0 ? suresim::RiskSplit::of(delta, level)
                                                  : suresim::RiskSplit::heuristic(level));
            ci = suresim::two_stage_interval(paired, sim, level, split, wsr);
            break;
        }
        case suresim::Method::two_stage_ub:
            ci = suresim::two_stage_ub_interval(paired, sim, level, wsr);
            break;
        case suresim::Method::cv:
            ci = suresim::cv_interval(paired, sim, level);
            break;
        case suresim::Method::cv_split:
            ci = suresim::cv_split_interval(paired, sim, level, split_fraction, seed);
            break;
        case suresim::Method::rectifier: {
            const double d = delta > 0.0 ? delta : 0.9 * alpha;
            ci = suresim::rectifier_interval(paired, suresim::SignificanceLevel::of(d), wsr);
            break;
        }
    }

    const auto format = parse_format(format_str);
    if (format == suresim::EmitFormat::json) {
        ordered_json j;
        j["method"] = suresim::method_name(ci.method);
        j["alpha"] = ci.alpha;
        j["lower"] = ci.lower;
        j["upper"] = ci.upper;
        j["width"] = ci.width();
        j["truncated_lower"] = ci.truncated_lower;
        j["truncated_upper"] = ci.truncated_upper;
        j["n"] = paired.n();
        j["N"] = sim.cap_n();
        write_text(out_path, j.dump(2) + "\n");
    } else {
        std::string out = "method,alpha,lower,upper,width,truncated_lower,truncated_upper,n,N\n";
        out += suresim::method_name(ci.method);
        out += ",";
        out += suresim::format_double(ci.alpha);
        out += ",";
        out += suresim::format_double(ci.lower);
        out += ",";
        out += suresim::format_double(ci.upper);
        out += ",";
        out += suresim::format_double(ci.width());
        out += ",";
        out += ci.truncated_lower ? "true" : "false";
        out += ",";
        out += ci.truncated_upper ? "true" : "false";
        out += ",";
        out += std::to_string(paired.n());
        out += ",";
        out += std::to_string(sim.cap_n());
        out += "\n";
        write_text(out_path, out);
    }
    return 0;
}

int run_summary(const std::string& paired_path, const std::string& sim_path,
                const std::string& out_path, const std::string& format_str) {
    const suresim::PairedDataset paired = suresim::load_paired_dataset(paired_path);
    suresim::SimDataset sim;
    if (!sim_path.empty()) sim = suresim::load_sim_dataset(sim_path);
    const suresim::SummaryStats stats = suresim::summary_stats(paired, sim);

    const auto format = parse_format(format_str);
    if (format == suresim::EmitFormat::json) {
        ordered_json j;
        j["n"] = stats.n;
        j["N"] = stats.cap_n;
        if (stats.rho) {
            j["rho"] = *stats.rho;
        } else {
            j["rho"] = nullptr;
        }
        j["mean_y"] = stats.mean_y;
        j["mean_f_paired"] = stats.mean_f_paired;
        if (stats.mean_f_sim) {
            j["mean_f_sim"] = *stats.mean_f_sim;
        } else {
            j["mean_f_sim"] = nullptr;
        }
        j["var_y"] = stats.var_y;
        j["var_rect"] = stats.var_rect;
        write_text(out_path, j.dump(2) + "\n");
    } else {
        std::string out = "n,N,rho,mean_y,mean_f_paired,mean_f_sim,var_y,var_rect\n";
        out += std::to_string(stats.n);
        out += ",";
        out += std::to_string(stats.cap_n);
        out += ",";
        out += stats.rho ? suresim::format_double(*stats.rho) : std::string();
        out += ",";
        out += suresim::format_double(stats.mean_y);
        out += ",";
        out += suresim::format_double(stats.mean_f_paired);
        out += ",";
        out += stats.mean_f_sim ? suresim::format_double(*stats.mean_f_sim) : std::string();
        out += ",";
        out += suresim::format_double(stats.var_y);
        out += ",";
        out += suresim::format_double(stats.var_rect);
        out += "\n";
        write_text(out_path, out);
    }
    return 0;
}

int run_gen_data(const suresim::BankSpec& spec, const std::string& out_path) {
    if (out_path.empty()) throw suresim::config_error("gen-data requires --out");
    const suresim::LabeledBank bank = suresim::generate_bank(spec);

    suresim::PairedDataset ds;
    ds.samples.reserve(bank.ys.size());
    for (std::size_t i = 0; i < bank.ys.size(); ++i) {
        ds.samples.push_back({"b" + std::to_string(i), bank.ys[i], bank.fs[i]});
    }
    suresim::write_paired_dataset(out_path, ds);

    ordered_json meta;
    meta["true_mu"] = bank.true_mu;
    meta["achieved_rho"] = bank.achieved_rho;
    meta["spec"] = {{"mu_real", spec.mu_real},     {"mu_sim", spec.mu_sim},
                    {"rho_target", spec.rho_target}, {"size", spec.size},
                    {"rho_tolerance", spec.rho_tolerance}, {"seed", spec.seed}};
    const std::string meta_text = meta.dump(2) + "\n";
    write_text(sidecar_path(out_path), meta_text);
    std::cout << meta_text;
    return 0;
}

// CLI11 only processes config files attached to the root command, so each
// verb's --config is expanded by hand before parsing: file entries become
// --key=value tokens spliced in after the verb name, skipping any option the
// command line already sets (explicit flags win).
void expand_config_args(std::vector<std::string>& args,
                        const std::vector<std::pair<std::string, const CLI::App*>>& verbs) {
    std::size_t verb_idx = args.size();
    const CLI::App* verb = nullptr;
    for (std::size_t i = 0; i < args.size() && verb == nullptr; ++i) {
        for (const auto& [name, cmd] : verbs) {
            if (args[i] == name) {
                verb_idx = i;
                verb = cmd;
                break;
            }
        }
    }
    if (verb == nullptr) return;

    std::string path;
    std::set<std::string> given;
    for (std::size_t i = verb_idx + 1; i < args.size(); ++i) {
        const std::string& tok = args[i];
        if (tok == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
        } else if (tok.rfind("--config=", 0) == 0) {
            path = tok.substr(9);
        } else if (tok.rfind("--", 0) == 0 && tok.size() > 2) {
            given.insert(tok.substr(2, tok.find('=') - 2));
        }
    }
    if (path.empty()) return;

    std::ifstream in(path);
    if (!in) throw suresim::config_error("cannot read config file '" + path + "'");
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigINI{}.from_config(in);
    } catch (const CLI::Error& e) {
        throw suresim::config_error("cannot parse config file '" + path + "': " + e.what());
    }

    std::vector<std::string> extra;
    for (const auto& item : items) {
        if (item.name == "++" || item.name == "--") continue; // section markers
        if (!item.parents.empty()) {
            throw suresim::config_error("config keys must be flat, got '" + item.fullname() + "'");
        }
        if (item.name == "config") {
            throw suresim::config_error("config files cannot chain to other config files");
        }
        if (given.count(item.name) > 0) continue;
        const auto* opt = verb->get_option_no_throw("--" + item.name);
        if (opt == nullptr) {
            throw suresim::config_error("config file sets unknown option '--" + item.name + "'");
        }
        if (item.inputs.empty()) {
            if (opt->get_expected_min() != 0) {
                throw suresim::config_error("config entry '" + item.name + "' needs a value");
            }
            extra.push_back("--" + item.name);
        } else {
            for (const auto& value : item.inputs) {
                extra.push_back("--" + item.name + "=" + value);
            }
        }
    }
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(verb_idx) + 1, extra.begin(),
                extra.end());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-sample confidence intervals from paired real/sim scores"};
    app.require_subcommand(1);

    // ---- interval ----
    auto* interval = app.add_subcommand("interval", "Compute one confidence interval");
    std::string iv_method;
    std::string iv_paired, iv_sim, iv_out;
    std::string iv_format = "json";
    double iv_alpha = 0.1, iv_delta = 0.0, iv_split = 0.2;
    bool iv_optimize = false;
    int iv_grid = 1001;
    double iv_c = 0.99;
    std::uint64_t iv_seed = suresim::kDefaultCvSplitSeed;
    interval->add_option("--method", iv_method, "Method tag")->required();
    interval->add_option("--alpha", iv_alpha, "Total miscoverage budget");
    interval->add_option("--paired", iv_paired, "Paired CSV (id,y,f)")->required();
    interval->add_option("--sim", iv_sim, "Sim CSV (id,f)");
    interval->add_option("--delta", iv_delta, "Rectifier budget (two-stage, rectifier)");
    interval->add_flag("--optimize-delta", iv_optimize, "Search the two-stage risk split");
    interval->add_option("--split-frac", iv_split, "cv-split holdout fraction");
    interval->add_option("--grid-size", iv_grid, "Betting grid resolution");
    interval->add_option("--wsr-c", iv_c, "Betting stake cap");
    interval->add_option("--seed", iv_seed, "Seed (cv-split shuffle)");
    interval->add_option("--out", iv_out, "Output path (default: stdout)");
    interval->add_option("--format", iv_format, "Output format: csv|json");

    // ---- summary ----
    auto* summary = app.add_subcommand("summary", "Describe a paired/sim dataset");
    std::string sm_paired, sm_sim, sm_out;
    std::string sm_format = "json";
    summary->add_option("--paired", sm_paired, "Paired CSV (id,y,f)")->required();
    summary->add_option("--sim", sm_sim, "Sim CSV (id,f)");
    summary->add_option("--out", sm_out, "Output path (default: stdout)");
    summary->add_option("--format", sm_format, "Output format: csv|json");

    // ---- gen-data ----
    auto* gen = app.add_subcommand("gen-data", "Generate a labeled synthetic bank");
    suresim::BankSpec gd_spec;
    std::string gd_out;
    gen->add_option("--mu", gd_spec.mu_real, "Real-score mean");
    gen->add_option("--mu-sim", gd_spec.mu_sim, "Proxy-score mean");
    gen->add_option("--rho", gd_spec.rho_target, "Target Pearson correlation");
    gen->add_option("--size", gd_spec.size, "Bank size")->required();
    gen->add_option("--tol", gd_spec.rho_tolerance, "Correlation tolerance");
    gen->add_option("--seed", gd_spec.seed, "Seed");
    gen->add_option("--out", gd_out, "Output CSV path (sidecar: <out>.meta.json)")->required();

    // ---- sweep ----
    auto* sweep = app.add_subcommand("sweep", "Mean interval width along an axis");
    std::string sw_axis = "nsim";
    std::vector<double> sw_grid;
    CommonSweepArgs sw_args;
    SourceArgs sw_src;
    sweep->add_option("--axis", sw_axis, "Swept axis: nsim|rho|alpha")->required();
    sweep->add_option("--grid", sw_grid, "Axis values")->required()->delimiter(',');
    add_common_sweep_flags(sweep, sw_args);
    add_source_flags(sweep, sw_src);

    // ---- coverage ----
    auto* coverage = app.add_subcommand("coverage", "Empirical coverage on generated banks");
    std::string cv_axis = "nsim";
    std::vector<double> cv_grid;
    std::size_t cv_trials = 1000;
    std::string cv_truth = "exact";
    std::size_t cv_heldout = 400;
    CommonSweepArgs cv_args;
    SourceArgs cv_src;
    coverage->add_option("--axis", cv_axis, "Swept axis: nsim|rho|alpha")->required();
    coverage->add_option("--grid", cv_grid, "Axis values")->required()->delimiter(',');
    coverage->add_option("--trials", cv_trials, "Trials per grid point");
    coverage->add_option("--truth", cv_truth, "Coverage truth: exact|heldout");
    coverage->add_option("--heldout", cv_heldout, "Heldout rows for --truth heldout");
    add_common_sweep_flags(coverage, cv_args);
    add_source_flags(coverage, cv_src);

    // ---- savings ----
    auto* savings = app.add_subcommand("savings", "Classical-equivalent sample count");
    std::size_t sv_cap_mult = 64;
    CommonSweepArgs sv_args;
    SourceArgs sv_src;
    savings->add_option("--cap-mult", sv_cap_mult,
                        "Search cap as a multiple of the paired count");
    add_common_sweep_flags(savings, sv_args);
    add_source_flags(savings, sv_src);

    // Every verb reads defaults from an INI file; explicit flags win.
    std::string config_path;
    for (auto* cmd : {interval, summary, gen, sweep, coverage, savings}) {
        cmd->add_option("--config", config_path,
                        "Read options from a config file (flags override it)");
    }

    if (argc > 0) app.name(argv[0]);
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        expand_config_args(args, {{"interval", interval},
                                  {"summary", summary},
                                  {"gen-data", gen},
                                  {"sweep", sweep},
                                  {"coverage", coverage},
                                  {"savings", savings}});
    } catch (const suresim::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    std::reverse(args.begin(), args.end());

    try {
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (interval->parsed()) {
            return run_interval(iv_method, iv_paired, iv_sim, iv_alpha, iv_delta, iv_optimize,
                                iv_split, iv_grid, iv_c, iv_seed, iv_out, iv_format);
        }
        if (summary->parsed()) {
            return run_summary(sm_paired, sm_sim, sm_out, sm_format);
        }
        if (gen->parsed()) {
            return run_gen_data(gd_spec, gd_out);
        }
        if (sweep->parsed()) {
            suresim::SweepConfig cfg = build_config(sw_args, sw_src);
            const auto axis = suresim::parse_axis(sw_axis);
            if (!axis) throw suresim::config_error("unknown axis '" + sw_axis + "'");
            cfg.axis = *axis;
            cfg.grid = sw_grid;
            suresim::SweepResult result;
            if (!sw_src.paired_path.empty()) {
                if (sw_src.sim_path.empty()) {
                    throw suresim::config_error("--paired requires --sim for sweeps");
                }
                const auto paired = suresim::load_paired_dataset(sw_src.paired_path);
                const auto sim = suresim::load_sim_dataset(sw_src.sim_path);
                result = suresim::run_width_sweep(cfg, paired, sim);
            } else {
                result = suresim::run_width_sweep(cfg);
            }
            const auto format = parse_format(sw_args.format);
            write_text(sw_args.out_path, suresim::emit_to_string(result, format));
            return 0;
        }
        if (coverage->parsed()) {
            suresim::SweepConfig cfg = build_config(cv_args, cv_src);
            const auto axis = suresim::parse_axis(cv_axis);
            if (!axis) throw suresim::config_error("unknown axis '" + cv_axis + "'");
            cfg.axis = *axis;
            cfg.grid = cv_grid;
            cfg.trials = cv_trials;
            cfg.heldout = cv_heldout;
            if (cv_truth == "exact") {
                cfg.truth_mode = suresim::TruthMode::exact;
            } else if (cv_truth == "heldout") {
                cfg.truth_mode = suresim::TruthMode::heldout;
            } else {
                throw suresim::config_error("unknown truth mode '" + cv_truth + "'");
            }
            if (!cv_src.paired_path.empty()) {
                throw suresim::config_error(
                    "coverage needs a generated bank with a known mean; CSV sources are not supported");
            }
            const auto result = suresim::run_coverage_sweep(cfg);
            const auto format = parse_format(cv_args.format);
            write_text(cv_args.out_path, suresim::emit_to_string(result, format));
            return 0;
        }
        if (savings->parsed()) {
            suresim::SweepConfig cfg = build_config(sv_args, sv_src);
            cfg.axis = suresim::SweepAxis::n_sim;
            cfg.grid = {static_cast<double>(cfg.n_sim)};
            cfg.savings_cap_multiplier = sv_cap_mult;
            suresim::SavingsResult result;
            if (!sv_src.paired_path.empty()) {
                if (sv_src.sim_path.empty()) {
                    throw suresim::config_error("--paired requires --sim for savings");
                }
                const auto paired = suresim::load_paired_dataset(sv_src.paired_path);
                const auto sim = suresim::load_sim_dataset(sv_src.sim_path);
                result = suresim::compute_savings(cfg, paired, sim);
            } else {
                result = suresim::compute_savings(cfg);
            }
            const auto format = parse_format(sv_args.format);
            write_text(sv_args.out_path, suresim::emit_to_string(result, format));
            return 0;
        }
    } catch (const suresim::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const suresim::infeasible_error& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 4;
    } catch (const suresim::data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
