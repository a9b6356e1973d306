#pragma once

// CSV-backed datasets.  Two shapes appear throughout:
//   paired rows  id,y,f   — a real score y and its simulator score f
//   sim rows     id,f     — simulator score only
// Loaders are strict: exact headers, exact field counts, unit-range scores,
// unique ids, and every complaint carries the offending row number.

#include <charconv>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_set>
#include <vector>

#include "suresim/errors.hpp"
#include "suresim/types.hpp"

namespace suresim {

struct PairedSample {
    std::string id;
    double y = 0.0; // real score
    double f = 0.0; // simulator score for the same item
};

struct PairedDataset {
    std::vector<PairedSample> samples;

    std::size_t n() const { return samples.size(); }

    std::vector<double> ys() const {
        std::vector<double> out;
        out.reserve(samples.size());
        for (const auto& s : samples) out.push_back(s.y);
        return out;
    }

    std::vector<double> fs() const {
        std::vector<double> out;
        out.reserve(samples.size());
        for (const auto& s : samples) out.push_back(s.f);
        return out;
    }

    // Per-item rectifier scores y - f, each in [-1, 1].
    std::vector<double> diffs() const {
        std::vector<double> out;
        out.reserve(samples.size());
        for (const auto& s : samples) out.push_back(s.y - s.f);
        return out;
    }
};

struct SimDataset {
    std::vector<std::string> ids;
    std::vector<double> scores;

    std::size_t cap_n() const { return scores.size(); }
};

// Shortest decimal string that round-trips to exactly the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

inline double parse_score(std::string_view field, const std::string& path,
                          std::size_t row, const char* column) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last || field.empty()) {
        throw data_error(path + ":" + std::to_string(row) + ": column '" + column +
                         "' is not a number: '" + std::string(field) + "'");
    }
    if (!is_unit_score(value)) {
        throw data_error(path + ":" + std::to_string(row) + ": column '" + column +
                         "' must lie in [0, 1], got " + std::string(field));
    }
    return value;
}

// Reads all nonempty lines, tolerating CRLF and a trailing newline.
inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open '" + path + "' for reading");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

inline void check_id(const std::string& path, std::size_t row, std::string_view id,
                     std::unordered_set<std::string>& seen) {
    if (id.empty()) {
        throw data_error(path + ":" + std::to_string(row) + ": empty id");
    }
    if (!seen.insert(std::string(id)).second) {
        throw data_error(path + ":" + std::to_string(row) + ": duplicate id '" +
                         std::string(id) + "'");
    }
}

} // namespace detail

inline PairedDataset load_paired_dataset(const std::string& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty()) throw data_error(path + ": empty file, expected header 'id,y,f'");
    if (lines[0] != "id,y,f") {
        throw data_error(path + ":1: expected header 'id,y,f', got '" + lines[0] + "'");
    }
    PairedDataset ds;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t row = i + 1;
        const auto fields = detail::split_fields(lines[i]);
        if (fields.size() != 3) {
            throw data_error(path + ":" + std::to_string(row) + ": expected 3 fields, got " +
                             std::to_string(fields.size()));
        }
        detail::check_id(path, row, fields[0], seen);
        PairedSample s;
        s.id = std::string(fields[0]);
        s.y = detail::parse_score(fields[1], path, row, "y");
        s.f = detail::parse_score(fields[2], path, row, "f");
        ds.samples.push_back(std::move(s));
    }
    if (ds.samples.empty()) throw data_error(path + ": no data rows");
    return ds;
}

inline SimDataset load_sim_dataset(const std::string& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty()) throw data_error(path + ": empty file, expected header 'id,f'");
    if (lines[0] != "id,f") {
        throw data_error(path + ":1: expected header 'id,f', got '" + lines[0] + "'");
    }
    SimDataset ds;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t row = i + 1;
        const auto fields = detail::split_fields(lines[i]);
        if (fields.size() != 2) {
            throw data_error(path + ":" + std::to_string(row) + ": expected 2 fields, got " +
                             std::to_string(fields.size()));
        }
        detail::check_id(path, row, fields[0], seen);
        ds.ids.push_back(std::string(fields[0]));
        ds.scores.push_back(detail::parse_score(fields[1], path, row, "f"));
    }
    if (ds.scores.empty()) throw data_error(path + ": no data rows");
    return ds;
}

namespace detail {
inline void check_writable_id(const std::string& id) {
    if (id.find(',') != std::string::npos || id.find('\n') != std::string::npos) {
        throw data_error("id '" + id + "' contains a delimiter and cannot be written as CSV");
    }
}
} // namespace detail

inline void write_paired_dataset(const std::string& path, const PairedDataset& ds) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot open '" + path + "' for writing");
    out << "id,y,f\n";
    for (const auto& s : ds.samples) {
        detail::check_writable_id(s.id);
        out << s.id << ',' << format_double(s.y) << ',' << format_double(s.f) << '\n';
    }
    if (!out) throw data_error("failed while writing '" + path + "'");
}

inline void write_sim_dataset(const std::string& path, const SimDataset& ds) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot open '" + path + "' for writing");
    out << "id,f\n";
    for (std::size_t i = 0; i < ds.scores.size(); ++i) {
        detail::check_writable_id(ds.ids[i]);
        out << ds.ids[i] << ',' << format_double(ds.scores[i]) << '\n';
    }
    if (!out) throw data_error("failed while writing '" + path + "'");
}

} // namespace suresim
