#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "neucogar/network.hpp"

namespace neucogar {

namespace detail {
inline std::string format_fixed(double x, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
    std::string s(buf);
    if (s == "-0.0" || s == "-0") s.erase(0, 1);
    return s;
}

/// Shortest decimal that reads back to the same double.
inline std::string format_exact(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}
}  // namespace detail

/// `t_ms,population,neuron`, one row per spike, time at 0.1 ms resolution.
inline std::string raster_csv(const SpikeRecord& record) {
    std::ostringstream out;
    out << "t_ms,population,neuron\n";
    for (const auto& e : record.events) {
        const auto* p = record.find(e.population);
        out << detail::format_fixed(record.time_of(e), 1) << ',' << (p ? p->name : "?") << ','
            << e.neuron << '\n';
    }
    return out.str();
}

struct RasterRow {
    double t_ms = 0.0;
    std::string population;
    std::uint32_t neuron = 0;

    bool operator==(const RasterRow&) const = default;
};

inline std::vector<RasterRow> parse_raster_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "t_ms,population,neuron") {
        throw std::runtime_error("raster csv: bad header");
    }
    std::vector<RasterRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string t, p, n;
        if (!std::getline(fields, t, ',') || !std::getline(fields, p, ',') ||
            !std::getline(fields, n)) {
            throw std::runtime_error("raster csv: malformed row '" + line + "'");
        }
        rows.push_back(RasterRow{std::stod(t), p, static_cast<std::uint32_t>(std::stoul(n))});
    }
    return rows;
}

/// Per-population firing rate in fixed bins:
/// `bin_start_ms,population,rate_hz`. Bins cover [t_begin, t_end).
inline std::string rates_csv(const SpikeRecord& record, double bin_ms = 10.0) {
    if (!(bin_ms > 0.0)) throw std::invalid_argument("rates_csv: bin width must be > 0");
    const auto n_bins = static_cast<std::size_t>(
        std::ceil((record.t_end - record.t_begin) / bin_ms - 1e-9));
    std::map<std::uint32_t, std::vector<std::size_t>> counts;
    for (const auto& p : record.populations) counts[p.index].assign(n_bins, 0);
    for (const auto& e : record.events) {
        // A spike stamped at T belongs to the bin containing T (bins are [a, b)).
        const double offset = record.time_of(e) - record.t_begin;
        auto bin = static_cast<std::size_t>(std::floor(offset / bin_ms + 1e-9));
        if (bin >= n_bins) continue;  // stamped exactly at t_end
        ++counts[e.population][bin];
    }
    std::ostringstream out;
    out << "bin_start_ms,population,rate_hz\n";
    for (std::size_t b = 0; b < n_bins; ++b) {
        const double start = record.t_begin + static_cast<double>(b) * bin_ms;
        const double width = std::min(bin_ms, record.t_end - start);
        for (const auto& p : record.populations) {
            const double rate = static_cast<double>(counts[p.index][b]) * 1000.0 /
                                (static_cast<double>(p.size) * width);
            out << detail::format_fixed(start, 1) << ',' << p.name << ','
                << detail::format_fixed(rate, 6) << '\n';
        }
    }
    return out.str();
}

inline std::string rule_string(const Projection& p) {
    if (p.volume) return "volume";
    switch (p.rule.kind) {
        case ConnectionRule::Kind::AllToAll: return "all_to_all";
        case ConnectionRule::Kind::FixedOutdegree:
            return "fixed_outdegree(" + std::to_string(p.rule.outdegree) + ")";
        case ConnectionRule::Kind::PairwiseBernoulli:
            return "pairwise_bernoulli(" + detail::format_exact(p.rule.probability) + ")";
    }
    return "?";
}

/// Receptor column: the receptor name, with `:D1` / `:D2` appended when a
/// current-carrying edge is dopamine-modulated.
inline std::string receptor_string(const Projection& p) {
    std::string s(to_string(p.receptor));
    if (!p.volume && p.modulation != Modulation::None) {
        s += ':';
        s += to_string(p.modulation);
    }
    return s;
}

/// `source,target,receptor,rule,weight,delay`, one row per projection.
inline std::string topology_csv(const Network& net) {
    std::ostringstream out;
    out << "source,target,receptor,rule,weight,delay\n";
    for (const auto& p : net.projections()) {
        out << net.population(PopulationHandle{p.source}).name << ','
            << net.population(PopulationHandle{p.target}).name << ',' << receptor_string(p) << ','
            << rule_string(p) << ',' << detail::format_exact(p.weight) << ','
            << detail::format_exact(p.delay) << '\n';
    }
    return out.str();
}

}  // namespace neucogar
