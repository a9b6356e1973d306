#pragma once

// Seeded resampling of datasets.  Draws with replacement disambiguate
// repeated ids with an occurrence suffix ("#2", "#3", ...) so the result
// still satisfies the unique-id invariant and survives a write/load cycle.

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "suresim/dataset.hpp"
#include "suresim/errors.hpp"
#include "suresim/rng.hpp"

namespace suresim {

namespace detail {

// First `count` slots of a partial Fisher-Yates pass over 0..size-1.
inline std::vector<std::size_t> sample_indices_without_replacement(std::size_t size,
                                                                   std::size_t count,
                                                                   Rng& rng) {
    std::vector<std::size_t> idx(size);
    for (std::size_t i = 0; i < size; ++i) idx[i] = i;
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(size - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    return idx;
}

inline std::string occurrence_id(const std::string& base, std::size_t occurrence) {
    if (occurrence <= 1) return base;
    return base + "#" + std::to_string(occurrence);
}

} // namespace detail

inline PairedDataset resample_paired(const PairedDataset& bank, std::size_t n,
                                     bool with_replacement, std::uint64_t seed) {
    if (n == 0) throw data_error("resample size must be positive");
    if (bank.n() == 0) throw data_error("cannot resample from an empty dataset");
    if (!with_replacement && n > bank.n()) {
        throw data_error("cannot draw " + std::to_string(n) + " of " +
                         std::to_string(bank.n()) + " rows without replacement");
    }
    Rng rng(seed);
    PairedDataset out;
    out.samples.reserve(n);
    if (with_replacement) {
        std::unordered_map<std::string, std::size_t> seen;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& src = bank.samples[rng.next_below(bank.n())];
            PairedSample s = src;
            s.id = detail::occurrence_id(src.id, ++seen[src.id]);
            out.samples.push_back(std::move(s));
        }
    } else {
        for (std::size_t i : detail::sample_indices_without_replacement(bank.n(), n, rng)) {
            out.samples.push_back(bank.samples[i]);
        }
    }
    return out;
}

inline SimDataset resample_sim(const SimDataset& bank, std::size_t n,
                               bool with_replacement, std::uint64_t seed) {
    if (n == 0) throw data_error("resample size must be positive");
    if (bank.cap_n() == 0) throw data_error("cannot resample from an empty dataset");
    if (!with_replacement && n > bank.cap_n()) {
        throw data_error("cannot draw " + std::to_string(n) + " of " +
                         std::to_string(bank.cap_n()) + " rows without replacement");
    }
    Rng rng(seed);
    SimDataset out;
    out.ids.reserve(n);
    out.scores.reserve(n);
    if (with_replacement) {
        std::unordered_map<std::string, std::size_t> seen;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = static_cast<std::size_t>(rng.next_below(bank.cap_n()));
            out.ids.push_back(detail::occurrence_id(bank.ids[k], ++seen[bank.ids[k]]));
            out.scores.push_back(bank.scores[k]);
        }
    } else {
        for (std::size_t i : detail::sample_indices_without_replacement(bank.cap_n(), n, rng)) {
            out.ids.push_back(bank.ids[i]);
            out.scores.push_back(bank.scores[i]);
        }
    }
    return out;
}

} // namespace suresim
