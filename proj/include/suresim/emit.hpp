#pragma once

// Result serialization.  Either format carries the same records plus a full
// provenance block (artifact version, seed, config hash, and the config
// itself), so any emitted file can be traced back to the exact run that
// produced it.  All floating-point output uses shortest round-trip
// formatting, which together with the deterministic engine makes repeated
// runs byte-identical.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "suresim/dataset.hpp"
#include "suresim/errors.hpp"
#include "suresim/sweep.hpp"
#include "suresim/version.hpp"

namespace suresim {

enum class EmitFormat { csv, json };

inline std::optional<EmitFormat> parse_emit_format(std::string_view name) {
    if (name == "csv") return EmitFormat::csv;
    if (name == "json") return EmitFormat::json;
    return std::nullopt;
}

namespace detail {

inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline nlohmann::ordered_json config_json(const SweepConfig& cfg, const std::string& source) {
    nlohmann::ordered_json j;
    j["source"] = source;
    j["axis"] = axis_name(cfg.axis);
    j["grid"] = cfg.grid;
    nlohmann::ordered_json methods = nlohmann::ordered_json::array();
    for (Method m : cfg.methods) methods.push_back(method_name(m));
    j["methods"] = methods;
    j["n"] = cfg.n;
    j["n_sim"] = cfg.n_sim;
    j["alpha"] = cfg.alpha;
    j["rho"] = cfg.rho;
    j["mu_real"] = cfg.mu_real;
    j["mu_sim"] = cfg.mu_sim;
    j["rho_tolerance"] = cfg.rho_tolerance;
    j["bank_size"] = cfg.bank_size;
    j["redraws"] = cfg.redraws;
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    j["delta_policy"] = cfg.delta_policy == DeltaPolicy::optimized ? "optimized" : "heuristic";
    j["split_fraction"] = cfg.split_fraction;
    j["bank_mode"] = cfg.bank_mode == BankMode::bootstrap ? "bootstrap" : "fresh";
    j["truth_mode"] = cfg.truth_mode == TruthMode::heldout ? "heldout" : "exact";
    j["heldout"] = cfg.heldout;
    j["sim_with_replacement"] = cfg.sim_with_replacement;
    j["savings_cap_multiplier"] = cfg.savings_cap_multiplier;
    j["wsr"] = {{"grid_size", cfg.wsr.grid_size}, {"c", cfg.wsr.c}};
    return j;
}

struct Provenance {
    std::string config_text;
    std::string config_hash;
};

inline Provenance provenance_of(const SweepConfig& cfg, const std::string& source) {
    Provenance p;
    p.config_text = config_json(cfg, source).dump();
    p.config_hash = hex64(fnv1a64(p.config_text));
    return p;
}

inline void append_csv_provenance(std::string& out, const SweepConfig& cfg,
                                  const Provenance& prov) {
    out += "# artifact_version=";
    out += kArtifactVersion;
    out += "\n# seed=";
    out += std::to_string(cfg.seed);
    out += "\n# config_hash=";
    out += prov.config_hash;
    out += "\n# config=";
    out += prov.config_text;
    out += "\n";
}

inline nlohmann::ordered_json json_envelope(const SweepConfig& cfg, const std::string& source,
                                            const char* schema, const Provenance& prov) {
    nlohmann::ordered_json j;
    j["artifact_version"] = kArtifactVersion;
    j["schema"] = schema;
    j["provenance"] = {{"seed", cfg.seed},
                       {"config_hash", prov.config_hash},
                       {"config", config_json(cfg, source)}};
    return j;
}

// delta is the one optional numeric column: NaN means "not applicable".
inline std::string csv_optional(double v) {
    return std::isnan(v) ? std::string() : format_double(v);
}

} // namespace detail

inline constexpr const char* kSweepCsvHeader =
    "axis,axis_value,method,mean_width,se_width,mean_lower,mean_upper,"
    "trunc_lo_freq,trunc_hi_freq,n,N,alpha,delta,redraws,seed";

inline constexpr const char* kCoverageCsvHeader =
    "axis,axis_value,method,coverage,se,trials,n,N,alpha,seed";

inline constexpr const char* kSavingsCsvHeader =
    "method,mean_width,n_equivalent,savings,se_savings,cap_censored,n,N,alpha,redraws,seed";

inline std::string emit_to_string(const SweepResult& result, EmitFormat format) {
    const auto prov = detail::provenance_of(result.config, result.source);
    if (format == EmitFormat::csv) {
        std::string out;
        detail::append_csv_provenance(out, result.config, prov);
        out += kSweepCsvHeader;
        out += "\n";
        for (const auto& r : result.rows) {
            out += axis_name(result.config.axis);
            out += ",";
            out += format_double(r.axis_value);
            out += ",";
            out += method_name(r.method);
            out += ",";
            out += format_double(r.mean_width);
            out += ",";
            out += format_double(r.se_width);
            out += ",";
            out += format_double(r.mean_lower);
            out += ",";
            out += format_double(r.mean_upper);
            out += ",";
            out += format_double(r.trunc_lo_freq);
            out += ",";
            out += format_double(r.trunc_hi_freq);
            out += ",";
            out += std::to_string(r.n);
            out += ",";
            out += std::to_string(r.n_sim);
            out += ",";
            out += format_double(r.alpha);
            out += ",";
            out += detail::csv_optional(r.delta);
            out += ",";
            out += std::to_string(r.redraws);
            out += ",";
            out += std::to_string(result.config.seed);
            out += "\n";
        }
        return out;
    }
    auto j = detail::json_envelope(result.config, result.source, "sweep", prov);
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : result.rows) {
        nlohmann::ordered_json row;
        row["axis"] = axis_name(result.config.axis);
        row["axis_value"] = r.axis_value;
        row["method"] = method_name(r.method);
        row["mean_width"] = r.mean_width;
        row["se_width"] = r.se_width;
        row["mean_lower"] = r.mean_lower;
        row["mean_upper"] = r.mean_upper;
        row["trunc_lo_freq"] = r.trunc_lo_freq;
        row["trunc_hi_freq"] = r.trunc_hi_freq;
        row["n"] = r.n;
        row["N"] = r.n_sim;
        row["alpha"] = r.alpha;
        if (std::isnan(r.delta)) {
            row["delta"] = nullptr;
        } else {
            row["delta"] = r.delta;
        }
        row["redraws"] = r.redraws;
        row["seed"] = result.config.seed;
        rows.push_back(row);
    }
    j["results"] = rows;
    return j.dump(2) + "\n";
}

inline std::string emit_to_string(const CoverageResult& result, EmitFormat format) {
    const auto prov = detail::provenance_of(result.config, result.source);
    if (format == EmitFormat::csv) {
        std::string out;
        detail::append_csv_provenance(out, result.config, prov);
        out += kCoverageCsvHeader;
        out += "\n";
        for (const auto& r : result.rows) {
            out += axis_name(result.config.axis);
            out += ",";
            out += format_double(r.axis_value);
            out += ",";
            out += method_name(r.method);
            out += ",";
            out += format_double(r.coverage);
            out += ",";
            out += format_double(r.se);
            out += ",";
            out += std::to_string(r.trials);
            out += ",";
            out += std::to_string(r.n);
            out += ",";
            out += std::to_string(r.n_sim);
            out += ",";
            out += format_double(r.alpha);
            out += ",";
            out += std::to_string(result.config.seed);
            out += "\n";
        }
        return out;
    }
    auto j = detail::json_envelope(result.config, result.source, "coverage", prov);
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : result.rows) {
        nlohmann::ordered_json row;
        row["axis"] = axis_name(result.config.axis);
        row["axis_value"] = r.axis_value;
        row["method"] = method_name(r.method);
        row["coverage"] = r.coverage;
        row["se"] = r.se;
        row["trials"] = r.trials;
        row["n"] = r.n;
        row["N"] = r.n_sim;
        row["alpha"] = r.alpha;
        row["seed"] = result.config.seed;
        rows.push_back(row);
    }
    j["results"] = rows;
    return j.dump(2) + "\n";
}

inline std::string emit_to_string(const SavingsResult& result, EmitFormat format) {
    const auto prov = detail::provenance_of(result.config, result.source);
    if (format == EmitFormat::csv) {
        std::string out;
        detail::append_csv_provenance(out, result.config, prov);
        out += kSavingsCsvHeader;
        out += "\n";
        for (const auto& r : result.rows) {
            out += method_name(r.method);
            out += ",";
            out += format_double(r.mean_width);
            out += ",";
            out += format_double(r.n_equivalent_mean);
            out += ",";
            out += format_double(r.savings_mean);
            out += ",";
            out += format_double(r.savings_se);
            out += ",";
            out += r.cap_censored ? "true" : "false";
            out += ",";
            out += std::to_string(r.n);
            out += ",";
            out += std::to_string(r.n_sim);
            out += ",";
            out += format_double(r.alpha);
            out += ",";
            out += std::to_string(r.redraws);
            out += ",";
            out += std::to_string(result.config.seed);
            out += "\n";
        }
        return out;
    }
    auto j = detail::json_envelope(result.config, result.source, "savings", prov);
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : result.rows) {
        nlohmann::ordered_json row;
        row["method"] = method_name(r.method);
        row["mean_width"] = r.mean_width;
        row["n_equivalent"] = r.n_equivalent_mean;
        row["savings"] = r.savings_mean;
        row["se_savings"] = r.savings_se;
        row["cap_censored"] = r.cap_censored;
        row["n"] = r.n;
        row["N"] = r.n_sim;
        row["alpha"] = r.alpha;
        row["redraws"] = r.redraws;
        row["seed"] = result.config.seed;
        rows.push_back(row);
    }
    j["results"] = rows;
    return j.dump(2) + "\n";
}

template <typename ResultT>
void emit_results(const ResultT& result, EmitFormat format, const std::string& path) {
    const std::string text = emit_to_string(result, format);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw data_error("failed while writing '" + path + "'");
}

} // namespace suresim
