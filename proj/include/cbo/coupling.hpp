#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "cbo/constants.hpp"
#include "cbo/dynamics.hpp"
#include "cbo/error.hpp"
#include "cbo/laws.hpp"
#include "cbo/matrix.hpp"
#include "cbo/objectives.hpp"
#include "cbo/rng.hpp"

namespace cbo {

/// Interacting system of J particles coupled to M >= J i.i.d. mean-field
/// particles. Row j < J of both ensembles starts at the same point and is
/// driven by the same increments; the consensus point of all M mean-field
/// rows stands in for M_α(ρ̄_t).
struct MflCoupledSystem {
    Ensemble interacting;
    Ensemble meanfield;
    std::vector<std::string> warnings;

    std::size_t particles() const noexcept { return interacting.size(); }
    std::size_t proxy_size() const noexcept { return meanfield.size(); }
};

/// Two interacting copies from different initial laws sharing increments.
struct StabilityCoupledSystem {
    Ensemble copy_a;
    Ensemble copy_b;
};

namespace detail {

inline std::vector<std::string> noise_threshold_warnings(const CboParams& params, const Objective& obj) {
    ProblemProfile prof;
    prof.alpha = params.alpha;
    prof.sigma = params.sigma;
    prof.noise = params.noise;
    prof.dim = obj.dimension();
    prof.f_upper = obj.upper_bound();
    prof.f_lower = obj.lower_bound();
    const double threshold = sigma_tilde(prof);
    if (params.sigma >= threshold)
        return {"sigma = " + std::to_string(params.sigma) + " >= sigma_tilde = " + std::to_string(threshold) +
                "; uniform-in-time guarantees do not apply"};
    return {};
}

// One Euler step of rows [0, rows) of `ens` toward the fixed consensus `m`.
inline void advance_toward(Ensemble& ens, std::span<const double> m, const Matrix& dw, std::size_t rows,
                           const CboParams& params, const char* tag) {
    const std::size_t bad = advance_rows(ens.positions, m, dw, rows, params.dt, params.sigma, params.noise);
    if (bad != rows)
        throw NumericError(std::string(tag) + ": non-finite position at particle " + std::to_string(bad));
    ens.time += params.dt;
}

}  // namespace detail

/// Draws M i.i.d. samples from `law` (initial domain of `stream`) and copies
/// the first J of them into the interacting system.
inline MflCoupledSystem init_mfl_coupling(const InitialLaw& law, std::size_t particles, std::size_t proxy_size,
                                          const CboParams& params, const Objective& obj, const RngStream& stream) {
    law.validate();
    params.validate();
    if (particles == 0) throw ConfigError("init_mfl_coupling: J must be positive");
    if (proxy_size < particles) throw ConfigError("init_mfl_coupling: M must be >= J");
    if (law.dim() != obj.dimension()) throw ConfigError("init_mfl_coupling: law and objective dimensions differ");
    MflCoupledSystem sys;
    sys.meanfield = Ensemble(law.sample_rows(stream.in_domain(StreamDomain::initial), proxy_size));
    sys.interacting = Ensemble(sys.meanfield.positions.head(particles));
    sys.warnings = detail::noise_threshold_warnings(params, obj);
    return sys;
}

/// Advances both systems one step. `dw_meanfield` has M rows; its first J
/// rows drive the interacting particles too.
inline MflCoupledSystem mfl_coupled_step(const MflCoupledSystem& sys, const CboParams& params, const Objective& obj,
                                         const Matrix& dw_meanfield) {
    if (dw_meanfield.rows() != sys.proxy_size() || dw_meanfield.cols() != sys.meanfield.dim())
        throw InputError("mfl_coupled_step: increment shape does not match the mean-field ensemble");
    MflCoupledSystem next = sys;
    const Point m_int = consensus_point(sys.interacting, params.alpha, obj);
    const Point m_mf = consensus_point(sys.meanfield, params.alpha, obj);
    detail::advance_toward(next.interacting, m_int, dw_meanfield, sys.particles(), params, "interacting");
    detail::advance_toward(next.meanfield, m_mf, dw_meanfield, sys.proxy_size(), params, "meanfield");
    return next;
}

/// E_t = (1/J) Σ_{j<J} |X^j - X̄^j|².
inline double mfl_error(const MflCoupledSystem& sys) {
    double acc = 0.0;
    for (std::size_t j = 0; j < sys.particles(); ++j) acc += squared_distance(sys.interacting[j], sys.meanfield[j]);
    return acc / static_cast<double>(sys.particles());
}

/// |M_α(all M mean-field rows) - M_α(first J mean-field rows)|², the proxy
/// for the squared weighted-mean sampling error.
inline double wm_sampling_error(const MflCoupledSystem& sys, double alpha, const Objective& obj) {
    if (sys.proxy_size() == sys.particles())
        throw InputError("wm_sampling_error: M = J makes the proxy coincide with the sub-ensemble");
    const Point full = consensus_point(sys.meanfield, alpha, obj);
    const Point sub = consensus_point(Ensemble(sys.meanfield.positions.head(sys.particles())), alpha, obj);
    return squared_distance(full, sub);
}

/// copy_a ~ law_a^J and copy_b ~ law_b^J from independent sub-streams, or
/// from the same sub-stream when `shared_initial_stream` is set.
inline StabilityCoupledSystem init_stability_coupling(const InitialLaw& law_a, const InitialLaw& law_b,
                                                      std::size_t particles, const CboParams& params,
                                                      const Objective& obj, const RngStream& stream,
                                                      bool shared_initial_stream = false) {
    law_a.validate();
    law_b.validate();
    params.validate();
    if (particles == 0) throw ConfigError("init_stability_coupling: J must be positive");
    if (law_a.dim() != law_b.dim() || law_a.dim() != obj.dimension())
        throw ConfigError("init_stability_coupling: dimension mismatch between laws and objective");
    const RngStream sa = stream.in_domain(StreamDomain::initial);
    const RngStream sb = shared_initial_stream ? sa : stream.in_domain(StreamDomain::initial_b);
    return {Ensemble(law_a.sample_rows(sa, particles)), Ensemble(law_b.sample_rows(sb, particles))};
}

inline StabilityCoupledSystem stability_coupled_step(const StabilityCoupledSystem& sys, const CboParams& params,
                                                     const Objective& obj, const Matrix& dw) {
    if (dw.rows() != sys.copy_a.size() || dw.cols() != sys.copy_a.dim())
        throw InputError("stability_coupled_step: increment shape does not match the ensembles");
    StabilityCoupledSystem next = sys;
    const Point ma = consensus_point(sys.copy_a, params.alpha, obj);
    const Point mb = consensus_point(sys.copy_b, params.alpha, obj);
    detail::advance_toward(next.copy_a, ma, dw, dw.rows(), params, "copy_a");
    detail::advance_toward(next.copy_b, mb, dw, dw.rows(), params, "copy_b");
    return next;
}

/// G_t = (1/J) Σ |a_j - b_j|².
inline double stability_gap(const StabilityCoupledSystem& sys) {
    if (sys.copy_a.size() != sys.copy_b.size()) throw InputError("stability_gap: copies differ in size");
    double acc = 0.0;
    for (std::size_t j = 0; j < sys.copy_a.size(); ++j) acc += squared_distance(sys.copy_a[j], sys.copy_b[j]);
    return acc / static_cast<double>(sys.copy_a.size());
}

/// One shared mean-field proxy coupled to interacting systems for every J of
/// a ladder. Each rung evolves exactly as an MflCoupledSystem with the same
/// proxy would; the proxy is integrated once instead of once per rung.
struct MflLadderSystem {
    Ensemble meanfield;
    std::vector<Ensemble> interacting;   ///< one per rung, sizes increasing
    std::vector<std::string> warnings;
};

inline MflLadderSystem init_mfl_ladder(const InitialLaw& law, const std::vector<std::size_t>& ladder,
                                       std::size_t proxy_size, const CboParams& params, const Objective& obj,
                                       const RngStream& stream) {
    if (ladder.empty()) throw ConfigError("init_mfl_ladder: empty J ladder");
    MflCoupledSystem base = init_mfl_coupling(law, ladder.back(), proxy_size, params, obj, stream);
    MflLadderSystem sys;
    sys.meanfield = std::move(base.meanfield);
    for (std::size_t J : ladder) {
        if (J == 0 || J > proxy_size) throw ConfigError("init_mfl_ladder: every J must satisfy 0 < J <= M");
        sys.interacting.emplace_back(sys.meanfield.positions.head(J));
    }
    sys.warnings = std::move(base.warnings);
    return sys;
}

/// In-place step of every rung and the shared proxy.
inline void mfl_ladder_step(MflLadderSystem& sys, const CboParams& params, const Objective& obj,
                            const Matrix& dw_meanfield) {
    const Point m_mf = consensus_point(sys.meanfield, params.alpha, obj);
    for (auto& ens : sys.interacting) {
        const Point m = consensus_point(ens, params.alpha, obj);
        detail::advance_toward(ens, m, dw_meanfield, ens.size(), params, "interacting");
    }
    detail::advance_toward(sys.meanfield, m_mf, dw_meanfield, sys.meanfield.size(), params, "meanfield");
}

inline double mfl_ladder_error(const MflLadderSystem& sys, std::size_t rung) {
    const Ensemble& ens = sys.interacting.at(rung);
    double acc = 0.0;
    for (std::size_t j = 0; j < ens.size(); ++j) acc += squared_distance(ens[j], sys.meanfield[j]);
    return acc / static_cast<double>(ens.size());
}

}  // namespace cbo
