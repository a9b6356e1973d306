#pragma once

// Core value types shared by every estimator: scores, significance levels,
// and the confidence-interval record that all methods return.

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>

#include "suresim/errors.hpp"

namespace suresim {

// Scores live in the closed unit interval.
inline bool is_unit_score(double v) { return v >= 0.0 && v <= 1.0; }

enum class Method {
    classical,
    suresim,
    suresim_ub,
    two_stage,
    two_stage_ub,
    cv,
    cv_split,
    rectifier,
};

inline const char* method_name(Method m) {
    switch (m) {
        case Method::classical:    return "classical";
        case Method::suresim:      return "suresim";
        case Method::suresim_ub:   return "suresim-ub";
        case Method::two_stage:    return "two-stage";
        case Method::two_stage_ub: return "two-stage-ub";
        case Method::cv:           return "cv";
        case Method::cv_split:     return "cv-split";
        case Method::rectifier:    return "rectifier";
    }
    return "unknown";
}

inline std::optional<Method> parse_method(std::string_view name) {
    for (Method m : {Method::classical, Method::suresim, Method::suresim_ub,
                     Method::two_stage, Method::two_stage_ub, Method::cv,
                     Method::cv_split, Method::rectifier}) {
        if (name == method_name(m)) return m;
    }
    return std::nullopt;
}

// Miscoverage budget, valid only on the open interval (0, 1).  Methods that
// split their budget build the sub-levels through this type as well, so a
// nonsensical split fails loudly instead of producing a vacuous interval.
struct SignificanceLevel {
    double alpha;

    static SignificanceLevel of(double a) {
        if (!(a > 0.0) || !(a < 1.0)) {
            throw config_error("significance level must lie strictly between 0 and 1, got " +
                               std::to_string(a));
        }
        return SignificanceLevel{a};
    }
};

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 1.0;
    double alpha = 0.0;          // total miscoverage budget this interval spends
    Method method = Method::classical;
    bool truncated_lower = false; // true when clipping to [0, 1] moved the bound
    bool truncated_upper = false;

    double width() const { return upper - lower; }
    bool covers(double value) const { return lower <= value && value <= upper; }
};

// Clip an interval to the unit range, recording which side the clip moved.
// Estimates of means of unit-range scores lose nothing by this.
inline ConfidenceInterval truncate_to_unit(ConfidenceInterval ci) {
    if (ci.lower < 0.0) {
        ci.lower = 0.0;
        ci.truncated_lower = true;
    }
    if (ci.upper > 1.0) {
        ci.upper = 1.0;
        ci.truncated_upper = true;
    }
    return ci;
}

// Intersection of two intervals whose budgets were split from one total.
// Disjoint inputs mean the data contradicts itself at the chosen levels;
// surface that rather than fabricating an empty-but-plausible interval.
inline ConfidenceInterval intersect(const ConfidenceInterval& a,
                                    const ConfidenceInterval& b,
                                    Method method, double total_alpha) {
    ConfidenceInterval out;
    out.lower = std::max(a.lower, b.lower);
    out.upper = std::min(a.upper, b.upper);
    if (out.lower > out.upper) {
        throw data_error("hedged interval intersection is empty: [" +
                         std::to_string(a.lower) + ", " + std::to_string(a.upper) + "] vs [" +
                         std::to_string(b.lower) + ", " + std::to_string(b.upper) + "]");
    }
    out.alpha = total_alpha;
    out.method = method;
    return out;
}

} // namespace suresim
