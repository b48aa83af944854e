#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cbo/dynamics.hpp"
#include "cbo/error.hpp"
#include "cbo/laws.hpp"
#include "cbo/objectives.hpp"

namespace cbo::experiments {

using nlohmann::json;

enum class ExperimentKind { constants, simulate, optimize, moments, mfl, stability, concentration, wm_mc };

inline const std::map<std::string, ExperimentKind>& experiment_kinds() {
    static const std::map<std::string, ExperimentKind> kinds{
        {"constants", ExperimentKind::constants}, {"simulate", ExperimentKind::simulate},
        {"optimize", ExperimentKind::optimize},   {"moments", ExperimentKind::moments},
        {"mfl", ExperimentKind::mfl},             {"stability", ExperimentKind::stability},
        {"concentration", ExperimentKind::concentration}, {"wm-mc", ExperimentKind::wm_mc}};
    return kinds;
}

inline std::string to_string(ExperimentKind k) {
    for (const auto& [name, kind] : experiment_kinds())
        if (kind == k) return name;
    return "unknown";
}

inline ExperimentKind parse_experiment_kind(const std::string& s) {
    const auto& kinds = experiment_kinds();
    if (auto it = kinds.find(s); it != kinds.end()) return it->second;
    throw ConfigError("unknown experiment kind '" + s + "'");
}

struct ObjectiveSpec {
    std::string name = "gauss-well";
    std::size_t dimension = 2;
    Point minimizer;          ///< empty means the origin
    double scale = 10.0;      ///< soft-rastrigin only

    Objective build() const { return make_builtin(name, dimension, minimizer, scale); }
};

/// Excursion baseline: M_2(ρ̄_0), E[M_2(μ̂_0)] = (J-1)/J M_2(ρ̄_0), or each
/// run's own initial M_2(μ̂_0).
enum class BaselineKind { law, expected, initial };

inline std::string to_string(BaselineKind b) {
    switch (b) {
        case BaselineKind::law: return "law";
        case BaselineKind::expected: return "expected";
        case BaselineKind::initial: return "initial";
    }
    return "unknown";
}

inline BaselineKind parse_baseline_kind(const std::string& s) {
    if (s == "law") return BaselineKind::law;
    if (s == "expected") return BaselineKind::expected;
    if (s == "initial") return BaselineKind::initial;
    throw ConfigError("baseline must be 'law', 'expected' or 'initial'");
}

/// Everything needed to reproduce a run bit for bit. The worker count and
/// output directory are deliberately not part of it.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::simulate;
    ObjectiveSpec objective;
    InitialLaw init_law{LawKind::gaussian, {0.0, 0.0}, 1.0};
    std::optional<InitialLaw> init_law_b;
    CboParams params;
    std::vector<std::size_t> j_ladder{64};
    std::size_t oversample = 16;
    std::size_t replicates = 64;
    std::uint64_t seed = 0;
    std::size_t stride = 10;
    double fit_window = 0.6;
    double q = 2.0;
    std::optional<double> kappa;      ///< default λ_8 / 8
    double threshold = 1.0;           ///< excursion level A
    BaselineKind baseline = BaselineKind::expected;
    std::optional<std::size_t> reference_size;   ///< wm-mc N, default 100 max J
    std::vector<double> moment_orders{2.0, 4.0, 8.0};
    std::map<double, double> c_mz;
    bool allow_supercritical = false;
    bool shared_initial_stream = false;
    double gap_tolerance = 0.1;
    std::string output_dir = "out";   ///< not echoed

    std::size_t max_particles() const { return j_ladder.back(); }

    void validate() const {
        params.validate();
        init_law.validate();
        if (init_law.dim() != objective.dimension)
            throw ConfigError("init_law dimension differs from objective dimension");
        if (init_law_b) {
            init_law_b->validate();
            if (init_law_b->dim() != objective.dimension)
                throw ConfigError("init_law_b dimension differs from objective dimension");
        }
        if (replicates < 1) throw ConfigError("replicates must be >= 1");
        if (j_ladder.empty()) throw ConfigError("j_ladder must be nonempty");
        for (std::size_t i = 0; i < j_ladder.size(); ++i) {
            if (j_ladder[i] == 0) throw ConfigError("j_ladder entries must be positive");
            if (i > 0 && j_ladder[i] <= j_ladder[i - 1]) throw ConfigError("j_ladder must be strictly increasing");
        }
        if (oversample < 1) throw ConfigError("oversample must be >= 1");
        if (stride < 1) throw ConfigError("stride must be >= 1");
        if (!(fit_window > 0.0 && fit_window <= 1.0)) throw ConfigError("fit_window must lie in (0, 1]");
        if (!(q >= 2.0)) throw ConfigError("q must be >= 2");
        if (!(threshold > 0.0)) throw ConfigError("threshold must be positive");
        if (moment_orders.empty()) throw ConfigError("moment_orders must be nonempty");
        for (double p : moment_orders)
            if (!(p >= 2.0)) throw ConfigError("moment_orders entries must be >= 2");
        if (!(gap_tolerance > 0.0)) throw ConfigError("gap_tolerance must be positive");
    }
};

namespace detail {

inline void reject_unknown_keys(const json& j, const std::set<std::string>& known, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, value] : j.items())
        if (!known.contains(key)) throw ConfigError("unknown key '" + where + key + "'");
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("invalid value for '" + where + key + "': " + e.what());
    }
}

inline InitialLaw parse_law(const json& j, const std::string& where) {
    reject_unknown_keys(j, {"name", "location", "scale"}, where);
    InitialLaw law;
    if (j.contains("name")) law.kind = parse_law_kind(get<std::string>(j, "name", where));
    if (j.contains("location")) law.location = get<Point>(j, "location", where);
    if (j.contains("scale")) law.scale = get<double>(j, "scale", where);
    return law;
}

inline json law_to_json(const InitialLaw& law) {
    return {{"name", cbo::to_string(law.kind)}, {"location", law.location}, {"scale", law.scale}};
}

}  // namespace detail

/// Parses a config document. Absent keys keep their defaults; the init law
/// defaults to a standard Gaussian in the objective's dimension.
inline ExperimentConfig parse_config(const json& j) {
    using detail::get;
    detail::reject_unknown_keys(
        j,
        {"kind", "objective", "init_law", "init_law_b", "params", "j_ladder", "oversample", "replicates", "seed",
         "stride", "fit_window", "q", "kappa", "threshold", "baseline", "reference_size", "moment_orders", "c_mz",
         "allow_supercritical", "shared_initial_stream", "gap_tolerance", "output_dir"},
        "");
    ExperimentConfig c;
    if (j.contains("kind")) c.kind = parse_experiment_kind(get<std::string>(j, "kind", ""));
    if (j.contains("objective")) {
        const json& o = j.at("objective");
        detail::reject_unknown_keys(o, {"name", "dimension", "minimizer", "scale"}, "objective.");
        if (o.contains("name")) c.objective.name = get<std::string>(o, "name", "objective.");
        if (o.contains("dimension")) c.objective.dimension = get<std::size_t>(o, "dimension", "objective.");
        if (o.contains("minimizer")) c.objective.minimizer = get<Point>(o, "minimizer", "objective.");
        if (o.contains("scale")) c.objective.scale = get<double>(o, "scale", "objective.");
    }
    if (c.objective.dimension == 0) throw ConfigError("objective.dimension must be positive");
    c.init_law.location.assign(c.objective.dimension, 0.0);
    if (j.contains("init_law")) c.init_law = detail::parse_law(j.at("init_law"), "init_law.");
    if (j.contains("init_law_b") && !j.at("init_law_b").is_null())
        c.init_law_b = detail::parse_law(j.at("init_law_b"), "init_law_b.");
    if (j.contains("params")) {
        const json& p = j.at("params");
        detail::reject_unknown_keys(p, {"alpha", "sigma", "noise", "dt", "horizon"}, "params.");
        if (p.contains("alpha")) c.params.alpha = get<double>(p, "alpha", "params.");
        if (p.contains("sigma")) c.params.sigma = get<double>(p, "sigma", "params.");
        if (p.contains("noise")) c.params.noise = parse_noise_kind(get<std::string>(p, "noise", "params."));
        if (p.contains("dt")) c.params.dt = get<double>(p, "dt", "params.");
        if (p.contains("horizon")) c.params.horizon = get<double>(p, "horizon", "params.");
    }
    if (j.contains("j_ladder")) c.j_ladder = get<std::vector<std::size_t>>(j, "j_ladder", "");
    if (j.contains("oversample")) c.oversample = get<std::size_t>(j, "oversample", "");
    if (j.contains("replicates")) c.replicates = get<std::size_t>(j, "replicates", "");
    if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed", "");
    if (j.contains("stride")) c.stride = get<std::size_t>(j, "stride", "");
    if (j.contains("fit_window")) c.fit_window = get<double>(j, "fit_window", "");
    if (j.contains("q")) c.q = get<double>(j, "q", "");
    if (j.contains("kappa") && !j.at("kappa").is_null()) c.kappa = get<double>(j, "kappa", "");
    if (j.contains("threshold")) c.threshold = get<double>(j, "threshold", "");
    if (j.contains("baseline")) {
        c.baseline = parse_baseline_kind(get<std::string>(j, "baseline", ""));
    }
    if (j.contains("reference_size") && !j.at("reference_size").is_null())
        c.reference_size = get<std::size_t>(j, "reference_size", "");
    if (j.contains("moment_orders")) c.moment_orders = get<std::vector<double>>(j, "moment_orders", "");
    if (j.contains("c_mz")) {
        for (const auto& e : j.at("c_mz")) {
            detail::reject_unknown_keys(e, {"p", "value"}, "c_mz[].");
            c.c_mz[get<double>(e, "p", "c_mz[].")] = get<double>(e, "value", "c_mz[].");
        }
    }
    if (j.contains("allow_supercritical")) c.allow_supercritical = get<bool>(j, "allow_supercritical", "");
    if (j.contains("shared_initial_stream")) c.shared_initial_stream = get<bool>(j, "shared_initial_stream", "");
    if (j.contains("gap_tolerance")) c.gap_tolerance = get<double>(j, "gap_tolerance", "");
    if (j.contains("output_dir")) c.output_dir = get<std::string>(j, "output_dir", "");
    c.validate();
    return c;
}

/// Canonical JSON form; parse_config(to_json(c)) reproduces c up to
/// output_dir, which never influences results.
inline json to_json(const ExperimentConfig& c) {
    json cmz = json::array();
    for (const auto& [p, v] : c.c_mz) cmz.push_back({{"p", p}, {"value", v}});
    return {
        {"kind", to_string(c.kind)},
        {"objective",
         {{"name", c.objective.name},
          {"dimension", c.objective.dimension},
          {"minimizer", c.objective.minimizer.empty() ? Point(c.objective.dimension, 0.0) : c.objective.minimizer},
          {"scale", c.objective.scale}}},
        {"init_law", detail::law_to_json(c.init_law)},
        {"init_law_b", c.init_law_b ? detail::law_to_json(*c.init_law_b) : json(nullptr)},
        {"params",
         {{"alpha", c.params.alpha},
          {"sigma", c.params.sigma},
          {"noise", cbo::to_string(c.params.noise)},
          {"dt", c.params.dt},
          {"horizon", c.params.horizon}}},
        {"j_ladder", c.j_ladder},
        {"oversample", c.oversample},
        {"replicates", c.replicates},
        {"seed", c.seed},
        {"stride", c.stride},
        {"fit_window", c.fit_window},
        {"q", c.q},
        {"kappa", c.kappa ? json(*c.kappa) : json(nullptr)},
        {"threshold", c.threshold},
        {"baseline", to_string(c.baseline)},
        {"reference_size", c.reference_size ? json(*c.reference_size) : json(nullptr)},
        {"moment_orders", c.moment_orders},
        {"c_mz", cmz},
        {"allow_supercritical", c.allow_supercritical},
        {"shared_initial_stream", c.shared_initial_stream},
        {"gap_tolerance", c.gap_tolerance},
    };
}

/// Applies "a.b.c=value" to a config document. The value is read as JSON
/// when it parses, otherwise as a plain string.
inline void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment);
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    json* node = &doc;
    std::stringstream ss(path);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!node->contains(parts[i]) || (*node)[parts[i]].is_null()) (*node)[parts[i]] = json::object();
        node = &(*node)[parts[i]];
    }
    (*node)[parts.back()] = value;
}

inline json load_config_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("config file '" + path + "' is not valid JSON");
    return doc;
}

}  // namespace cbo::experiments
