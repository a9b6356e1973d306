// Experiment harness: sweep determinism, seed-stream isolation, coverage
// accounting, the savings search, and artifact serialization.

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "suresim/suresim.hpp"

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::MessageMatches;
using Catch::Matchers::WithinAbs;

namespace {

suresim::PairedDataset fixture_paired() {
    return suresim::load_paired_dataset(std::string(TEST_DATA_DIR) + "/paired_fixture.csv");
}

suresim::SimDataset fixture_sim() {
    return suresim::load_sim_dataset(std::string(TEST_DATA_DIR) + "/sim_fixture.csv");
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s) {
    return std::strtod(s.c_str(), nullptr);
}

void require_same_row(const suresim::SweepRow& a, const suresim::SweepRow& b) {
    REQUIRE(a.axis_value == b.axis_value);
    REQUIRE(a.method == b.method);
    REQUIRE(a.mean_width == b.mean_width);
    REQUIRE(a.se_width == b.se_width);
    REQUIRE(a.mean_lower == b.mean_lower);
    REQUIRE(a.mean_upper == b.mean_upper);
    REQUIRE(a.trunc_lo_freq == b.trunc_lo_freq);
    REQUIRE(a.trunc_hi_freq == b.trunc_hi_freq);
    REQUIRE(a.n == b.n);
    REQUIRE(a.n_sim == b.n_sim);
    REQUIRE(a.alpha == b.alpha);
    if (std::isnan(a.delta)) {
        REQUIRE(std::isnan(b.delta));
    } else {
        REQUIRE(a.delta == b.delta);
    }
    REQUIRE(a.redraws == b.redraws);
}

} // namespace

TEST_CASE("csv width sweep aggregates exactly the seeded per-draw intervals", "[harness]") {
    const auto paired = fixture_paired();
    const auto sim = fixture_sim();

    suresim::SweepConfig cfg;
    cfg.methods = {suresim::Method::classical, suresim::Method::suresim};
    cfg.axis = suresim::SweepAxis::n_sim;
    cfg.grid = {30.0, 40.0};
    cfg.n = 25;
    cfg.alpha = 0.1;
    cfg.redraws = 2;
    cfg.seed = 777;

    const auto result = suresim::run_width_sweep(cfg, paired, sim);
    REQUIRE(result.source == "csv");
    // Two grid points, each reporting the two requested methods plus the
    // rectifier reference curve.
    REQUIRE(result.rows.size() == 6);

    const auto level = suresim::SignificanceLevel::of(cfg.alpha);
    const double rect_delta = 0.9 * cfg.alpha;
    for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
        const auto n_sim = static_cast<std::size_t>(cfg.grid[g]);
        // Replay the documented seed streams: draw r at grid point g depends
        // on (seed, stream + g, r) and nothing else.
        double sum_w[3] = {0, 0, 0}, sum_w2[3] = {0, 0, 0};
        double sum_lo[3] = {0, 0, 0}, sum_hi[3] = {0, 0, 0};
        for (std::size_t r = 0; r < cfg.redraws; ++r) {
            const auto pd = suresim::resample_paired(
                paired, cfg.n, false,
                suresim::derive_seed(cfg.seed, suresim::detail::kStreamCsvPaired + g, r));
            const auto sd = suresim::resample_sim(
                sim, n_sim, false,
                suresim::derive_seed(cfg.seed, suresim::detail::kStreamCsvSim + g, r));
            const suresim::ConfidenceInterval cis[3] = {
                suresim::classical_interval(pd.ys(), level, cfg.wsr),
                suresim::suresim_interval(pd, sd, level, cfg.wsr),
                suresim::rectifier_interval(pd, suresim::SignificanceLevel::of(rect_delta),
                                            cfg.wsr)};
            for (int m = 0; m < 3; ++m) {
                const double w = cis[m].width();
                sum_w[m] += w;
                sum_w2[m] += w * w;
                sum_lo[m] += cis[m].lower;
                sum_hi[m] += cis[m].upper;
            }
        }
        const suresim::Method expect_method[3] = {
            suresim::Method::classical, suresim::Method::suresim, suresim::Method::rectifier};
        for (int m = 0; m < 3; ++m) {
            const auto& row = result.rows[3 * g + static_cast<std::size_t>(m)];
            REQUIRE(row.method == expect_method[m]);
            REQUIRE(row.axis_value == cfg.grid[g]);
            const double k = 2.0;
            REQUIRE(row.mean_width == sum_w[m] / k);
            REQUIRE(row.mean_lower == sum_lo[m] / k);
            REQUIRE(row.mean_upper == sum_hi[m] / k);
            const double var = std::max(0.0, (sum_w2[m] - sum_w[m] * sum_w[m] / k) / (k - 1.0));
            REQUIRE(row.se_width == std::sqrt(var / k));
            REQUIRE(row.n == cfg.n);
            REQUIRE(row.n_sim == n_sim);
            REQUIRE(row.alpha == cfg.alpha);
            REQUIRE(row.redraws == cfg.redraws);
            if (expect_method[m] == suresim::Method::rectifier) {
                REQUIRE(row.delta == rect_delta);
            } else {
                REQUIRE(std::isnan(row.delta));
            }
        }
    }
}

TEST_CASE("generator sweep wires bank, partition, and interval together", "[harness]") {
    suresim::SweepConfig cfg;
    cfg.methods = {suresim::Method::suresim};
    cfg.axis = suresim::SweepAxis::n_sim;
    cfg.grid = {120.0};
    cfg.n = 30;
    cfg.rho = 0.7;
    cfg.alpha = 0.1;
    cfg.redraws = 1;
    cfg.seed = 4242;

    const auto result = suresim::run_width_sweep(cfg);
    REQUIRE(result.source == "generator");
    REQUIRE(result.rows.size() == 2);

    // Replay the single draw by hand through the same seed streams.
    suresim::BankSpec spec;
    spec.mu_real = cfg.mu_real;
    spec.mu_sim = cfg.mu_sim;
    spec.rho_target = cfg.rho;
    spec.size = cfg.n + 120;
    spec.rho_tolerance = cfg.rho_tolerance;
    spec.seed = suresim::derive_seed(cfg.seed, suresim::detail::kStreamFreshBank + 0, 0);
    const auto bank = suresim::generate_bank(spec);
    const auto part = suresim::partition_bank(
        bank, cfg.n, 120, 0, suresim::derive_seed(cfg.seed, suresim::detail::kStreamPartition + 0, 0));
    const auto ci = suresim::suresim_interval(part.paired, part.sim,
                                              suresim::SignificanceLevel::of(cfg.alpha), cfg.wsr);

    const auto& row = result.rows[0];
    REQUIRE(row.method == suresim::Method::suresim);
    REQUIRE(row.mean_width == ci.width());
    REQUIRE(row.mean_lower == ci.lower);
    REQUIRE(row.mean_upper == ci.upper);
    REQUIRE(row.se_width == 0.0);
    REQUIRE(result.rows[1].method == suresim::Method::rectifier);
    REQUIRE(result.rows[1].delta == 0.9 * cfg.alpha);
}

TEST_CASE("redraw data is independent of redraw count and method list", "[harness]") {
    SECTION("generator draws depend only on (seed, grid point, redraw)") {
        suresim::SweepConfig a;
        a.methods = {suresim::Method::classical};
        a.axis = suresim::SweepAxis::n_sim;
        a.grid = {60.0};
        a.n = 20;
        a.rho = 0.5;
        a.redraws = 5;
        a.seed = 99;

        suresim::SweepConfig b = a;
        b.methods = {suresim::Method::suresim, suresim::Method::two_stage};
        b.redraws = 50;

        suresim::detail::GeneratorSource src_a(a);
        suresim::detail::GeneratorSource src_b(b);
        const auto p = suresim::detail::grid_point_params(a, a.grid[0]);
        for (std::size_t r = 0; r < 5; ++r) {
            const auto da = src_a.draw(p, 0, r);
            const auto db = src_b.draw(p, 0, r);
            REQUIRE(da.truth == db.truth);
            REQUIRE(da.paired.n() == db.paired.n());
            for (std::size_t i = 0; i < da.paired.n(); ++i) {
                REQUIRE(da.paired.samples[i].id == db.paired.samples[i].id);
                REQUIRE(da.paired.samples[i].y == db.paired.samples[i].y);
                REQUIRE(da.paired.samples[i].f == db.paired.samples[i].f);
            }
            REQUIRE(da.sim.scores == db.sim.scores);
        }
        // Distinct redraws see distinct paired subsets.
        const auto d0 = src_a.draw(p, 0, 0);
        const auto d1 = src_a.draw(p, 0, 1);
        bool any_diff = false;
        for (std::size_t i = 0; i < d0.paired.n(); ++i) {
            if (d0.paired.samples[i].id != d1.paired.samples[i].id) any_diff = true;
        }
        REQUIRE(any_diff);
    }

    SECTION("adding a method leaves the other methods' rows untouched") {
        const auto paired = fixture_paired();
        const auto sim = fixture_sim();

        suresim::SweepConfig small;
        small.methods = {suresim::Method::classical};
        small.axis = suresim::SweepAxis::n_sim;
        small.grid = {25.0, 35.0};
        small.n = 20;
        small.redraws = 3;
        small.seed = 2024;

        suresim::SweepConfig big = small;
        big.methods = {suresim::Method::suresim, suresim::Method::classical};

        const auto r_small = suresim::run_width_sweep(small, paired, sim);
        const auto r_big = suresim::run_width_sweep(big, paired, sim);
        REQUIRE(r_small.rows.size() == 4); // classical + rectifier per point
        REQUIRE(r_big.rows.size() == 6);
        // Grid point g occupies methods.size() consecutive rows.
        require_same_row(r_small.rows[0], r_big.rows[1]);
        require_same_row(r_small.rows[1], r_big.rows[2]);
        require_same_row(r_small.rows[2], r_big.rows[4]);
        require_same_row(r_small.rows[3], r_big.rows[5]);
    }
}

TEST_CASE("coverage rows report exact binomial uncertainty", "[harness]") {
    suresim::SweepConfig cfg;
    cfg.methods = {suresim::Method::classical};
    cfg.axis = suresim::SweepAxis::n_sim;
    cfg.grid = {0.0};
    cfg.n = 25;
    cfg.rho = 0.0;
    cfg.alpha = 0.1;
    cfg.trials = 150;
    cfg.seed = 11;
    cfg.bank_mode = suresim::BankMode::bootstrap;

    const auto result = suresim::run_coverage_sweep(cfg);
    REQUIRE(result.rows.size() == 1);
    const auto& row = result.rows[0];
    REQUIRE(row.method == suresim::Method::classical);
    REQUIRE(row.trials == 150);
    REQUIRE(row.n == 25);
    REQUIRE(row.n_sim == 0);
    REQUIRE(row.alpha == 0.1);
    // The rate is a hit count over trials...
    const double hits = row.coverage * 150.0;
    REQUIRE_THAT(hits, WithinAbs(std::round(hits), 1e-9));
    // ...and the uncertainty is exact binomial.
    REQUIRE_THAT(row.se, WithinAbs(std::sqrt(row.coverage * (1.0 - row.coverage) / 150.0), 1e-15));
    // A 90% guarantee should not dip anywhere near 0.8 over 150 trials.
    REQUIRE(row.coverage >= 0.8);

    SECTION("heldout truth mode runs against a reserved block") {
        suresim::SweepConfig held = cfg;
        held.trials = 100;
        held.truth_mode = suresim::TruthMode::heldout;
        held.heldout = 60;
        const auto r2 = suresim::run_coverage_sweep(held);
        REQUIRE(r2.rows.size() == 1);
        REQUIRE(r2.rows[0].coverage >= 0.7);
    }
}

TEST_CASE("coverage requires a minimum trial count", "[harness]") {
    suresim::SweepConfig cfg;
    cfg.methods = {suresim::Method::classical};
    cfg.axis = suresim::SweepAxis::n_sim;
    cfg.grid = {0.0};
    cfg.n = 25;
    cfg.trials = 99;
    REQUIRE_THROWS_MATCHES(suresim::run_coverage_sweep(cfg), suresim::config_error,
                           MessageMatches(ContainsSubstring("at least 100 trials")));
}

TEST_CASE("sweep configs are validated before any work happens", "[harness]") {
    const auto paired = fixture_paired();
    const auto sim = fixture_sim();

    suresim::SweepConfig cfg;
    cfg.methods = {suresim::Method::classical};
    cfg.axis = suresim::SweepAxis::n_sim;
    cfg.grid = {20.0};
    cfg.n = 10;
    cfg.redraws = 1;

    SECTION("empty grid") {
        cfg.grid.clear();
        REQUIRE_THROWS_MATCHES(suresim::run_width_sweep(cfg, paired, sim), suresim::config_error,
                               MessageMatches(ContainsSubstring("grid must not be empty")));
    }
    SECTION("zero redraws") {
        cfg.redraws = 0;
        REQUIRE_THROWS_MATCHES(suresim::run_width_sweep(cfg, paired, sim), suresim::config_error,
                               MessageMatches(ContainsSubstring("redraws must be at least 1")));
    }
    SECTION("zero paired samples") {
        cfg.n = 0;
        REQUIRE_THROWS_MATCHES(suresim::run_width_sweep(cfg, paired, sim), suresim::config_error,
                               MessageMatches(ContainsSubstring("paired sample count")));
    }
    SECTION("fractional sim-pool grid point") {
        cfg.grid = {10.5};
        REQUIRE_THROWS_MATCHES(suresim::run_width_sweep(cfg, paired, sim), suresim::config_error,
                               MessageMatches(ContainsSubstring("nonnegative integers")));
    }
    SECTION("negative sim-pool grid point") {
        cfg.grid = {-5.0};
        REQUIRE_THROWS_MATCHES(suresim::run_width_sweep(cfg, paired, sim), suresim::config_error,
                               MessageMatches(ContainsSubstring("nonnegative integers")));
    }
    SECTION("invalid alpha") {
        cfg.alpha = 1.5;
        REQUIRE_THROWS_MATCHES(suresim::run_width_sweep(cfg, paired, sim), suresim::config_error,
                               MessageMatches(ContainsSubstring("strictly between 0 and 1")));
    }
    SECTION("invalid alpha grid point") {
        cfg.axis = suresim::SweepAxis::alpha;
        cfg.grid = {0.0};
        REQUIRE_THROWS_MATCHES(suresim::run_width_sweep(cfg, paired, sim), suresim::config_error,
                               MessageMatches(ContainsSubstring("strictly between 0 and 1")));
    }
}

TEST_CASE("csv sources refuse a correlation axis and oversubscribed sim pools", "[harness]") {
    const auto paired = fixture_paired();
    const auto sim = fixture_sim();

    suresim::SweepConfig cfg;
    cfg.methods = {suresim::Method::suresim};
    cfg.axis = suresim::SweepAxis::n_sim;
    cfg.grid = {20.0};
    cfg.n = 15;
    cfg.redraws = 2;
    cfg.seed = 5;

    SECTION("rho axis needs a generator") {
        cfg.axis = suresim::SweepAxis::rho;
        cfg.grid = {0.5};
        REQUIRE_THROWS_MATCHES(suresim::run_width_sweep(cfg, paired, sim), suresim::config_error,
                               MessageMatches(ContainsSubstring("fixed correlation")));
    }
    SECTION("sim grid beyond the pool fails without resampling") {
        cfg.grid = {41.0};
        REQUIRE_THROWS_MATCHES(
            suresim::run_width_sweep(cfg, paired, sim), suresim::data_error,
            MessageMatches(ContainsSubstring("exceeds the 40 available sim rows")));
    }
    SECTION("sim resampling unlocks larger pools") {
        cfg.grid = {80.0};
        cfg.sim_with_replacement = true;
        const auto result = suresim::run_width_sweep(cfg, paired, sim);
        REQUIRE(result.rows.size() == 2);
        REQUIRE(result.rows[0].n_sim == 80);
        REQUIRE(result.rows[0].mean_width > 0.0);
    }
}

TEST_CASE("emitted artifacts carry schema and provenance and parse back", "[harness]") {
    const auto paired = fixture_paired();
    const auto sim = fixture_sim();

    suresim::SweepConfig cfg;
    cfg.methods = {suresim::Method::classical, suresim::Method::two_stage};
    cfg.axis = suresim::SweepAxis::n_sim;
    cfg.grid = {20.0, 30.0};
    cfg.n = 20;
    cfg.alpha = 0.1;
    cfg.redraws = 2;
    cfg.seed = 99;

    const auto result = suresim::run_width_sweep(cfg, paired, sim);
    REQUIRE(result.rows.size() == 6);
    const std::string csv = suresim::emit_to_string(result, suresim::EmitFormat::csv);
    const std::string json_text = suresim::emit_to_string(result, suresim::EmitFormat::json);

    SECTION("csv provenance preamble") {
        const auto lines = split_lines(csv);
        REQUIRE(lines.size() == 5 + result.rows.size());
        REQUIRE(lines[0] == std::string("# artifact_version=") + suresim::kArtifactVersion);
        REQUIRE(lines[1] == "# seed=99");
        REQUIRE(lines[2].rfind("# config_hash=", 0) == 0);
        const std::string hash = lines[2].substr(std::string("# config_hash=").size());
        REQUIRE(hash.size() == 16);
        for (char c : hash) REQUIRE(std::string("0123456789abcdef").find(c) != std::string::npos);
        REQUIRE(lines[3].rfind("# config=", 0) == 0);
        const auto cfg_json =
            nlohmann::json::parse(lines[3].substr(std::string("# config=").size()));
        REQUIRE(cfg_json.at("seed").get<std::uint64_t>() == 99);
        REQUIRE(cfg_json.at("axis").get<std::string>() == "nsim");
        REQUIRE(cfg_json.at("source").get<std::string>() == "csv");
        REQUIRE(cfg_json.at("n").get<std::size_t>() == 20);
    }

    SECTION("csv golden header and row fields") {
        const auto lines = split_lines(csv);
        // Pin the column contract; any schema change must be deliberate.
        REQUIRE(lines[4] ==
                "axis,axis_value,method,mean_width,se_width,mean_lower,mean_upper,"
                "trunc_lo_freq,trunc_hi_freq,n,N,alpha,delta,redraws,seed");
        REQUIRE(lines[4] == suresim::kSweepCsvHeader);
        const double heuristic_delta =
            suresim::RiskSplit::heuristic(suresim::SignificanceLevel::of(cfg.alpha)).delta;
        for (std::size_t i = 0; i < result.rows.size(); ++i) {
            const auto f = split_fields(lines[5 + i]);
            REQUIRE(f.size() == 15);
            const auto& row = result.rows[i];
            REQUIRE(f[0] == "nsim");
            REQUIRE(parse_double(f[1]) == row.axis_value);
            REQUIRE(f[2] == suresim::method_name(row.method));
            REQUIRE(parse_double(f[3]) == row.mean_width);
            REQUIRE(parse_double(f[4]) == row.se_width);
            REQUIRE(parse_double(f[5]) == row.mean_lower);
            REQUIRE(parse_double(f[6]) == row.mean_upper);
            REQUIRE(f[9] == "20");
            REQUIRE(f[10] == std::to_string(row.n_sim));
            REQUIRE(parse_double(f[11]) == cfg.alpha);
            if (row.method == suresim::Method::classical) {
                REQUIRE(f[12].empty());
            } else {
                // Both two-stage (heuristic policy) and the rectifier spend
                // the same 0.9*alpha budget here.
                REQUIRE(f[12] == suresim::format_double(heuristic_delta));
            }
            REQUIRE(f[13] == "2");
            REQUIRE(f[14] == "99");
        }
    }

    SECTION("json envelope matches the csv provenance") {
        const auto lines = split_lines(csv);
        const std::string hash = lines[2].substr(std::string("# config_hash=").size());
        const auto cfg_json =
            nlohmann::json::parse(lines[3].substr(std::string("# config=").size()));

        const auto j = nlohmann::json::parse(json_text);
        REQUIRE(j.at("artifact_version").get<std::string>() == suresim::kArtifactVersion);
        REQUIRE(j.at("schema").get<std::string>() == "sweep");
        REQUIRE(j.at("provenance").at("seed").get<std::uint64_t>() == 99);
        REQUIRE(j.at("provenance").at("config_hash").get<std::string>() == hash);
        REQUIRE(j.at("provenance").at("config") == cfg_json);

        const auto& rows = j.at("results");
        REQUIRE(rows.size() == result.rows.size());
        for (std::size_t i = 0; i < result.rows.size(); ++i) {
            const auto& row = result.rows[i];
            REQUIRE(rows[i].at("method").get<std::string>() == suresim::method_name(row.method));
            REQUIRE(rows[i].at("mean_width").get<double>() == row.mean_width);
            REQUIRE(rows[i].at("se_width").get<double>() == row.se_width);
            REQUIRE(rows[i].at("N").get<std::size_t>() == row.n_sim);
            if (row.method == suresim::Method::classical) {
                REQUIRE(rows[i].at("delta").is_null());
            } else {
                REQUIRE(rows[i].at("delta").get<double>() == row.delta);
            }
        }
    }

    SECTION("identical runs emit byte-identical artifacts") {
        const auto rerun = suresim::run_width_sweep(cfg, paired, sim);
        REQUIRE(suresim::emit_to_string(rerun, suresim::EmitFormat::csv) == csv);
        REQUIRE(suresim::emit_to_string(rerun, suresim::EmitFormat::json) == json_text);
    }
}

TEST_CASE("coverage and savings artifacts use their own golden schemas", "[harness]") {
    SECTION("coverage csv and json") {
        suresim::SweepConfig cfg;
        cfg.methods = {suresim::Method::classical};
        cfg.axis = suresim::SweepAxis::n_sim;
        cfg.grid = {0.0};
        cfg.n = 20;
        cfg.rho = 0.0;
        cfg.trials = 100;
        cfg.seed = 3;
        cfg.bank_mode = suresim::BankMode::bootstrap;
        const auto result = suresim::run_coverage_sweep(cfg);

        const auto lines = split_lines(suresim::emit_to_string(result, suresim::EmitFormat::csv));
        REQUIRE(lines[4] == "axis,axis_value,method,coverage,se,trials,n,N,alpha,seed");
        REQUIRE(lines[4] == suresim::kCoverageCsvHeader);
        REQUIRE(lines.size() == 6);
        const auto f = split_fields(lines[5]);
        REQUIRE(f.size() == 10);
        REQUIRE(f[2] == "classical");
        REQUIRE(parse_double(f[3]) == result.rows[0].coverage);
        REQUIRE(f[5] == "100");

        const auto j =
            nlohmann::json::parse(suresim::emit_to_string(result, suresim::EmitFormat::json));
        REQUIRE(j.at("schema").get<std::string>() == "coverage");
        REQUIRE(j.at("results").size() == 1);
        REQUIRE(j.at("results")[0].at("coverage").get<double>() == result.rows[0].coverage);
        REQUIRE(j.at("results")[0].at("trials").get<std::size_t>() == 100);
    }

    SECTION("savings csv and json") {
        const auto paired = fixture_paired();
        const auto sim = fixture_sim();
        suresim::SweepConfig cfg;
        cfg.methods = {};
        cfg.axis = suresim::SweepAxis::n_sim;
        cfg.grid = {30.0};
        cfg.n = 20;
        cfg.redraws = 3;
        cfg.seed = 8;
        cfg.savings_cap_multiplier = 4;
        const auto result = suresim::compute_savings(cfg, paired, sim);
        REQUIRE(result.rows.size() == 1);
        // An empty method list defaults the savings verb to the flagship
        // estimator.
        REQUIRE(result.rows[0].method == suresim::Method::suresim);

        const auto lines = split_lines(suresim::emit_to_string(result, suresim::EmitFormat::csv));
        REQUIRE(lines[4] ==
                "method,mean_width,n_equivalent,savings,se_savings,cap_censored,n,N,alpha,"
                "redraws,seed");
        REQUIRE(lines[4] == suresim::kSavingsCsvHeader);
        const auto f = split_fields(lines[5]);
        REQUIRE(f.size() == 11);
        REQUIRE(f[0] == "suresim");
        REQUIRE((f[5] == "true" || f[5] == "false"));

        const auto j =
            nlohmann::json::parse(suresim::emit_to_string(result, suresim::EmitFormat::json));
        REQUIRE(j.at("schema").get<std::string>() == "savings");
        REQUIRE(j.at("results")[0].at("savings").get<double>() == result.rows[0].savings_mean);
        REQUIRE(j.at("results")[0].at("cap_censored").is_boolean());
    }
}

TEST_CASE("savings search finds parity when a method is its own baseline", "[harness]") {
    suresim::SweepConfig cfg;
    cfg.methods = {suresim::Method::classical};
    cfg.axis = suresim::SweepAxis::n_sim;
    cfg.grid = {200.0};
    cfg.n = 40;
    cfg.alpha = 0.1;
    cfg.redraws = 40;
    cfg.seed = 5150;
    cfg.bank_mode = suresim::BankMode::bootstrap;

    const auto result = suresim::compute_savings(cfg);
    REQUIRE(result.rows.size() == 1);
    const auto& row = result.rows[0];
    REQUIRE(row.method == suresim::Method::classical);
    REQUIRE_FALSE(row.cap_censored);
    // The classical method matched against its own width curve needs about
    // n classical samples: no savings, no penalty.
    REQUIRE(row.n_equivalent_mean > 0.5 * 40.0);
    REQUIRE(row.n_equivalent_mean < 2.0 * 40.0);
    REQUIRE(std::abs(row.savings_mean) < 0.12);
    REQUIRE(row.savings_se < 0.05);
    REQUIRE(row.mean_width > 0.05);
    REQUIRE(row.mean_width < 0.6);

    SECTION("a tight cap censors the search and reports it") {
        suresim::SweepConfig tight = cfg;
        tight.savings_cap_multiplier = 1;
        tight.redraws = 12;
        const auto r2 = suresim::compute_savings(tight);
        REQUIRE(r2.rows[0].cap_censored);
        // With the search capped at n itself, no draw can report savings.
        REQUIRE(r2.rows[0].savings_mean <= 1e-12);
        REQUIRE(r2.rows[0].n_equivalent_mean <= 40.0);
    }

    SECTION("the cap multiplier must be positive") {
        suresim::SweepConfig bad = cfg;
        bad.savings_cap_multiplier = 0;
        REQUIRE_THROWS_MATCHES(suresim::compute_savings(bad), suresim::config_error,
                               MessageMatches(ContainsSubstring("cap multiplier")));
    }
}

TEST_CASE("empty method lists expand to the documented defaults", "[harness]") {
    SECTION("width sweeps compare the full interval family") {
        const auto paired = fixture_paired();
        const auto sim = fixture_sim();
        suresim::SweepConfig cfg;
        cfg.axis = suresim::SweepAxis::n_sim;
        cfg.grid = {30.0};
        cfg.n = 20;
        cfg.redraws = 1;
        cfg.seed = 1;
        const auto result = suresim::run_width_sweep(cfg, paired, sim);
        REQUIRE(result.rows.size() == 6);
        const suresim::Method expect[6] = {
            suresim::Method::classical,    suresim::Method::suresim,
            suresim::Method::suresim_ub,   suresim::Method::two_stage,
            suresim::Method::two_stage_ub, suresim::Method::rectifier};
        for (std::size_t i = 0; i < 6; ++i) REQUIRE(result.rows[i].method == expect[i]);
    }

    SECTION("coverage sweeps validate the full family at once") {
        suresim::SweepConfig cfg;
        cfg.axis = suresim::SweepAxis::n_sim;
        cfg.grid = {25.0};
        cfg.n = 15;
        cfg.rho = 0.6;
        cfg.alpha = 0.1;
        cfg.trials = 100;
        cfg.seed = 31;
        cfg.bank_mode = suresim::BankMode::bootstrap;
        const auto result = suresim::run_coverage_sweep(cfg);
        REQUIRE(result.rows.size() == 5);
        for (const auto& row : result.rows) {
            INFO("method " << suresim::method_name(row.method));
            REQUIRE(row.coverage >= 0.75);
            REQUIRE(row.coverage <= 1.0);
        }
    }
}
