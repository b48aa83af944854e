#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "cbo/analysis.hpp"
#include "cbo/constants.hpp"
#include "cbo/error.hpp"
#include "cbo/experiments/config.hpp"
#include "cbo/version.hpp"

namespace cbo::experiments {

/// Shortest decimal form that reads back to the same double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Pointwise replicate mean on a shared grid. Every point records how many
/// replicates it averaged.
struct AggregateSeries {
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> std_error;
    std::vector<std::size_t> count;

    std::size_t size() const noexcept { return times.size(); }

    MomentSeries as_series(SeriesKind kind, double p) const {
        MomentSeries s;
        s.times = times;
        s.values = mean;
        s.kind = kind;
        s.p = p;
        return s;
    }
};

/// Sums run in replicate order so the result is schedule independent.
inline AggregateSeries aggregate(const std::vector<MomentSeries>& reps) {
    if (reps.empty()) throw InputError("aggregate: no replicate series");
    AggregateSeries a;
    a.times = reps.front().times;
    const std::size_t n = a.times.size();
    for (const auto& s : reps) {
        s.validate();
        if (s.times != a.times) throw InputError("aggregate: replicate series use different time grids");
    }
    a.mean.resize(n);
    a.std_error.resize(n);
    a.count.assign(n, reps.size());
    std::vector<double> column(reps.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < reps.size(); ++r) column[r] = reps[r].values[i];
        const Estimate e = summarize(column);
        a.mean[i] = e.mean;
        a.std_error[i] = e.std_error;
    }
    return a;
}

/// All replicates of one observable, sorted by replicate index.
struct SeriesGroup {
    std::string name;   ///< file stem, e.g. "mfl-error_J16"
    SeriesKind kind = SeriesKind::centered_p;
    double p = 2.0;
    std::size_t particles = 0;
    std::vector<MomentSeries> replicates;
    AggregateSeries mean;
};

inline std::string group_name(SeriesKind kind, std::optional<double> p, std::optional<std::size_t> particles) {
    std::string s = to_string(kind);
    if (p) s += "_p" + format_double(*p);
    if (particles) s += "_J" + std::to_string(*particles);
    return s;
}

inline SeriesGroup make_group(SeriesKind kind, double p, std::size_t particles, std::string name,
                              std::vector<MomentSeries> reps) {
    SeriesGroup g;
    g.name = std::move(name);
    g.kind = kind;
    g.p = p;
    g.particles = particles;
    for (std::size_t r = 0; r < reps.size(); ++r) {
        reps[r].kind = kind;
        reps[r].p = p;
        reps[r].replicate = r;
    }
    g.mean = aggregate(reps);
    g.replicates = std::move(reps);
    return g;
}

/// Free-form numeric table written as <name>.csv.
struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<SeriesGroup> series;
    std::vector<Table> tables;
    std::map<std::string, FitResult> fits;
    std::optional<ConstantsReport> constants;
    json summary = json::object();   ///< experiment-specific values and contract checks
    std::vector<std::string> notes;
    double wall_seconds = 0.0;

    const SeriesGroup& group(const std::string& name) const {
        for (const auto& g : series)
            if (g.name == name) return g;
        throw InputError("ExperimentResult: no series named '" + name + "'");
    }
};

inline json provenance(const ExperimentConfig& c) {
    return {{"master_seed", c.seed},
            {"replicates", c.replicates},
            {"generator", "philox4x32-10 with Box-Muller"},
            {"counter_layout", "w0 = domain << 24 | block, w1 = particle, w2 = step, w3 = replicate; key = master seed"},
            {"domains",
             {{"increments", 0}, {"initial", 1}, {"initial_b", 2}, {"sampling", 3}, {"reference", 4},
              {"certification", 5}}}};
}

inline json to_json(const FitResult& f) {
    return {{"estimate", cbo::detail::number_to_json(f.estimate)},
            {"intercept", cbo::detail::number_to_json(f.intercept)},
            {"r_squared", cbo::detail::number_to_json(f.r_squared)},
            {"window_lo", f.window_lo},
            {"window_hi", f.window_hi}};
}

inline json to_json(const Estimate& e) {
    return {{"mean", cbo::detail::number_to_json(e.mean)},
            {"stderr", cbo::detail::number_to_json(e.std_error)},
            {"n", e.n}};
}

inline json summary_document(const ExperimentResult& r) {
    json fits = json::object();
    for (const auto& [name, f] : r.fits) fits[name] = to_json(f);
    json series = json::array();
    for (const auto& g : r.series) series.push_back(g.name);
    return {{"version", kVersion},
            {"config", to_json(r.config)},
            {"provenance", provenance(r.config)},
            {"fits", fits},
            {"results", r.summary},
            {"series", series},
            {"notes", r.notes},
            {"constants", r.constants ? to_json(*r.constants) : json(nullptr)}};
}

namespace detail {

inline std::string csv_preamble(const ExperimentConfig& c) {
    return std::string("# ") + kVersion + " config=" + to_json(c).dump() + "\n";
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

}  // namespace detail

/// Writes config.json, summary.json, constants.json (when present),
/// series_*.csv, aggregate_*.csv, table CSVs and timing.json. Everything but
/// timing.json is a pure function of the config.
inline void write_result(const ExperimentResult& r, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
    const json echo = to_json(r.config);
    detail::write_text(dir / "config.json", json{{"version", kVersion}, {"config", echo}}.dump(2) + "\n");
    detail::write_text(dir / "summary.json", summary_document(r).dump(2) + "\n");
    if (r.constants) {
        json doc = to_json(*r.constants);
        doc["version"] = kVersion;
        doc["config"] = echo;
        detail::write_text(dir / "constants.json", doc.dump(2) + "\n");
    }
    const std::string pre = detail::csv_preamble(r.config);
    for (const auto& g : r.series) {
        std::string s = pre + "replicate,t,value\n";
        for (const auto& rep : g.replicates)
            for (std::size_t i = 0; i < rep.times.size(); ++i)
                s += std::to_string(rep.replicate) + "," + format_double(rep.times[i]) + "," +
                     format_double(rep.values[i]) + "\n";
        detail::write_text(dir / ("series_" + g.name + ".csv"), s);
        std::string a = pre + "t,mean,stderr,n\n";
        for (std::size_t i = 0; i < g.mean.size(); ++i)
            a += format_double(g.mean.times[i]) + "," + format_double(g.mean.mean[i]) + "," +
                 format_double(g.mean.std_error[i]) + "," + std::to_string(g.mean.count[i]) + "\n";
        detail::write_text(dir / ("aggregate_" + g.name + ".csv"), a);
    }
    for (const auto& t : r.tables) {
        std::string s = pre;
        for (std::size_t k = 0; k < t.columns.size(); ++k) s += (k ? "," : "") + t.columns[k];
        s += "\n";
        for (const auto& row : t.rows) {
            for (std::size_t k = 0; k < row.size(); ++k) s += (k ? "," : "") + format_double(row[k]);
            s += "\n";
        }
        detail::write_text(dir / (t.name + ".csv"), s);
    }
    detail::write_text(dir / "timing.json",
                       json{{"version", kVersion}, {"config", echo}, {"wall_seconds", r.wall_seconds}}.dump(2) + "\n");
}

/// Runs fn(0..count-1) on `workers` threads (0 = hardware concurrency) with
/// dynamic scheduling. Every task runs; the error of the lowest failing index
/// is rethrown, so the outcome does not depend on the schedule.
template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
    if (workers == 0) workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    workers = std::min(workers, count);
    std::exception_ptr error;
    std::size_t error_index = std::numeric_limits<std::size_t>::max();
    std::mutex mu;
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace cbo::experiments
