#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cbo/analysis.hpp"
#include "cbo/constants.hpp"
#include "cbo/coupling.hpp"
#include "cbo/dynamics.hpp"
#include "cbo/error.hpp"
#include "cbo/experiments/config.hpp"
#include "cbo/experiments/result.hpp"

namespace cbo::experiments {

struct RunOptions {
    std::size_t workers = 0;   ///< 0 = hardware concurrency; never affects results
};

namespace detail {

inline RngStream replicate_stream(const ExperimentConfig& c, std::size_t replicate) {
    return RngStream{c.seed, replicate, 0, StreamDomain::increments};
}

inline bool observed(std::size_t step, std::size_t steps, std::size_t stride) {
    return step % stride == 0 || step == steps;
}

inline json number(double v) { return cbo::detail::number_to_json(v); }

inline ConstantsReport constants_for(const ExperimentConfig& c, const Objective& obj) {
    ProblemProfile prof = make_profile(obj, c.params, c.init_law, c.q, c.init_law_b ? &*c.init_law_b : nullptr);
    prof.c_mz = c.c_mz;
    return theorem_constants(prof, c.q);
}

inline ProblemProfile profile_for(const ExperimentConfig& c, const Objective& obj) {
    ProblemProfile prof = make_profile(obj, c.params, c.init_law, c.q, c.init_law_b ? &*c.init_law_b : nullptr);
    prof.c_mz = c.c_mz;
    return prof;
}

inline void require_subcritical(const ExperimentConfig& c, const ConstantsReport& rep) {
    if (!rep.subcritical && !c.allow_supercritical)
        throw PreconditionError("sigma = " + format_double(c.params.sigma) + " is not below sigma_tilde = " +
                                format_double(rep.sigma_tilde) + "; set allow_supercritical to run anyway");
}

inline NumericError tag_replicate(const NumericError& e, std::size_t replicate) {
    return NumericError("replicate " + std::to_string(replicate) + ": " + e.what());
}

/// Largest prefix [0, hi) with t <= fraction * horizon whose points all lie
/// above ten standard errors (the noise floor). Shrinking is logged.
inline std::pair<std::size_t, std::size_t> fit_window(const AggregateSeries& a, double horizon, double fraction,
                                                      std::vector<std::string>& notes, const std::string& label) {
    std::size_t limit = 0;
    while (limit < a.size() && a.times[limit] <= fraction * horizon * (1.0 + 1e-12)) ++limit;
    std::size_t hi = 0;
    while (hi < limit && a.mean[hi] > 0.0 && a.mean[hi] > 10.0 * a.std_error[hi]) ++hi;
    if (hi < limit)
        notes.push_back(label + ": fit window shrunk from " + std::to_string(limit) + " to " + std::to_string(hi) +
                        " points (values within 10 standard errors of zero)");
    return {0, hi};
}

/// Wilson score interval at 95%.
inline std::pair<double, double> wilson_interval(std::size_t hits, std::size_t n) {
    const double z = 1.959963984540054;
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(hits) / nn;
    const double denom = 1.0 + z * z / nn;
    const double centre = (p + z * z / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

inline ExperimentResult start_result(const ExperimentConfig& c) {
    c.validate();
    ExperimentResult r;
    r.config = c;
    return r;
}

/// Per-replicate trajectories of one interacting system of size J; `probe`
/// maps an observed state to one value per requested observable.
inline std::vector<std::vector<MomentSeries>> interacting_runs(
    const ExperimentConfig& c, const Objective& obj, std::size_t particles, std::size_t observables,
    const std::function<std::vector<double>(const Ensemble&)>& probe, const RunOptions& opt,
    std::vector<Ensemble>* finals = nullptr, std::size_t stream_offset = 0) {
    std::vector<std::vector<MomentSeries>> out(observables, std::vector<MomentSeries>(c.replicates));
    if (finals) finals->assign(c.replicates, Ensemble());
    parallel_for(c.replicates, opt.workers, [&](std::size_t r) {
        const RngStream stream = replicate_stream(c, stream_offset + r);
        const Ensemble init(c.init_law.sample_rows(stream.in_domain(StreamDomain::initial), particles));
        auto record = [&](const Ensemble& state, std::size_t) {
            const std::vector<double> v = probe(state);
            for (std::size_t k = 0; k < observables; ++k) {
                out[k][r].times.push_back(state.time);
                out[k][r].values.push_back(v[k]);
            }
        };
        try {
            Ensemble last = simulate(init, c.params, obj, stream, {record}, SimulationOptions{c.stride});
            if (finals) (*finals)[r] = std::move(last);
        } catch (const NumericError& e) {
            throw tag_replicate(e, r);
        }
    });
    return out;
}

}  // namespace detail

/// Full constants report for the configured profile.
inline ExperimentResult run_constants(const ExperimentConfig& c, const RunOptions& = {}) {
    detail::Timer timer;
    ExperimentResult r = detail::start_result(c);
    const Objective obj = c.objective.build();
    r.constants = detail::constants_for(c, obj);
    r.summary["subcritical"] = r.constants->subcritical;
    r.summary["sigma_tilde"] = detail::number(r.constants->sigma_tilde);
    r.wall_seconds = timer.seconds();
    return r;
}

/// R independent runs of size J = j_ladder[0]; records M_2 and f(m_α) and the
/// final ensembles.
inline ExperimentResult run_simulate(const ExperimentConfig& c, const RunOptions& opt = {}) {
    detail::Timer timer;
    ExperimentResult r = detail::start_result(c);
    const Objective obj = c.objective.build();
    const std::size_t J = c.j_ladder.front();
    const double alpha = c.params.alpha;
    std::vector<Ensemble> finals;
    auto runs = detail::interacting_runs(
        c, obj, J, 2,
        [&](const Ensemble& e) {
            return std::vector<double>{centered_moment(e, 2.0), obj(consensus_point(e, alpha, obj))};
        },
        opt, &finals);
    r.series.push_back(make_group(SeriesKind::centered_p, 2.0, J, group_name(SeriesKind::centered_p, 2.0, {}),
                                  std::move(runs[0])));
    r.series.push_back(make_group(SeriesKind::consensus_value, 0.0, J,
                                  group_name(SeriesKind::consensus_value, {}, {}), std::move(runs[1])));
    Table positions{"final_positions", {"replicate", "particle"}, {}};
    for (std::size_t k = 0; k < obj.dimension(); ++k) positions.columns.push_back("x" + std::to_string(k));
    for (std::size_t rep = 0; rep < finals.size(); ++rep)
        for (std::size_t j = 0; j < finals[rep].size(); ++j) {
            std::vector<double> row{static_cast<double>(rep), static_cast<double>(j)};
            row.insert(row.end(), finals[rep][j].begin(), finals[rep][j].end());
            positions.rows.push_back(std::move(row));
        }
    r.tables.push_back(std::move(positions));
    const auto& m2 = r.series.front().mean;
    r.summary["particles"] = J;
    r.summary["final_centered_m2"] = {{"mean", detail::number(m2.mean.back())},
                                      {"stderr", detail::number(m2.std_error.back())},
                                      {"n", m2.count.back()}};
    r.wall_seconds = timer.seconds();
    return r;
}

/// Plain CBO: consensus trajectory, f(consensus) and the final gap to the
/// known minimizer.
inline ExperimentResult run_optimize(const ExperimentConfig& c, const RunOptions& opt = {}) {
    detail::Timer timer;
    ExperimentResult r = detail::start_result(c);
    const Objective obj = c.objective.build();
    const std::size_t J = c.j_ladder.front();
    const double alpha = c.params.alpha;
    const std::optional<Point>& xstar = obj.known_minimizer();
    auto runs = detail::interacting_runs(
        c, obj, J, 2,
        [&](const Ensemble& e) {
            const Point m = consensus_point(e, alpha, obj);
            const double gap = xstar ? std::sqrt(squared_distance(m, *xstar)) : 0.0;
            return std::vector<double>{obj(m), gap};
        },
        opt);
    r.series.push_back(make_group(SeriesKind::consensus_value, 0.0, J,
                                  group_name(SeriesKind::consensus_value, {}, {}), std::move(runs[0])));
    r.summary["particles"] = J;
    if (xstar) {
        r.series.push_back(make_group(SeriesKind::consensus_gap, 0.0, J,
                                      group_name(SeriesKind::consensus_gap, {}, {}), std::move(runs[1])));
        std::vector<double> gaps;
        std::size_t successes = 0;
        for (const auto& s : r.series.back().replicates) {
            gaps.push_back(s.values.back());
            if (s.values.back() <= c.gap_tolerance) ++successes;
        }
        r.summary["final_gaps"] = gaps;
        r.summary["final_gap"] = to_json(summarize(gaps));
        r.summary["gap_tolerance"] = c.gap_tolerance;
        r.summary["success_fraction"] = static_cast<double>(successes) / static_cast<double>(gaps.size());
    } else {
        r.notes.push_back("objective has no known minimizer; gap not reported");
    }
    r.wall_seconds = timer.seconds();
    return r;
}

/// Decay of the centered moments M_p(t) for every configured order, with the
/// fitted rate of the replicate mean compared against λ_p.
inline ExperimentResult run_moments(const ExperimentConfig& c, const RunOptions& opt = {}) {
    detail::Timer timer;
    ExperimentResult r = detail::start_result(c);
    const Objective obj = c.objective.build();
    r.constants = detail::constants_for(c, obj);
    const ProblemProfile prof = detail::profile_for(c, obj);
    const std::size_t J = c.j_ladder.front();
    const std::vector<double> orders = c.moment_orders;
    auto runs = detail::interacting_runs(
        c, obj, J, orders.size(),
        [&](const Ensemble& e) {
            std::vector<double> v;
            for (double p : orders) v.push_back(centered_moment(e, p));
            return v;
        },
        opt);
    json per_order = json::array();
    bool all_ok = true;
    for (std::size_t k = 0; k < orders.size(); ++k) {
        const double p = orders[k];
        r.series.push_back(
            make_group(SeriesKind::centered_p, p, J, group_name(SeriesKind::centered_p, p, {}), std::move(runs[k])));
        const SeriesGroup& g = r.series.back();
        const double lam = lambda_p(prof, p);
        json entry{{"p", p}, {"lambda", detail::number(lam)}, {"lambda_positive", lam > 0.0}};
        const auto [lo, hi] = detail::fit_window(g.mean, c.params.horizon, c.fit_window, r.notes, g.name);
        try {
            const FitResult fit = fit_exp_decay(g.mean.as_series(SeriesKind::centered_p, p), lo, hi);
            std::vector<double> rates;
            for (const auto& rep : g.replicates) {
                try {
                    rates.push_back(fit_exp_decay(rep, lo, hi).estimate);
                } catch (const FitError&) {
                }
            }
            const Estimate spread = summarize(rates);
            const bool ok = fit.estimate >= lam - 2.0 * spread.std_error;
            r.fits["decay_" + g.name] = fit;
            entry["rate"] = detail::number(fit.estimate);
            entry["rate_stderr"] = detail::number(spread.std_error);
            entry["replicate_rates_used"] = spread.n;
            entry["decay_at_least_lambda"] = ok;
            all_ok = all_ok && ok;
        } catch (const FitError& e) {
            r.notes.push_back(g.name + ": " + e.what());
            entry["rate"] = nullptr;
            entry["decay_at_least_lambda"] = false;
            all_ok = false;
        }
        per_order.push_back(entry);
    }
    r.summary["particles"] = J;
    r.summary["orders"] = per_order;
    r.summary["decay_at_least_lambda"] = all_ok;
    r.wall_seconds = timer.seconds();
    return r;
}

/// Mean-field limit: every J of the ladder coupled to one shared proxy of size
/// M = oversample * max J per replicate.
inline ExperimentResult run_mfl(const ExperimentConfig& c, const RunOptions& opt = {}) {
    detail::Timer timer;
    ExperimentResult r = detail::start_result(c);
    const Objective obj = c.objective.build();
    r.constants = detail::constants_for(c, obj);
    detail::require_subcritical(c, *r.constants);
    if (!r.constants->subcritical)
        r.notes.push_back("sigma >= sigma_tilde: run forced with allow_supercritical");
    const std::size_t M = c.oversample * c.max_particles();
    const std::size_t rungs = c.j_ladder.size();
    const std::size_t steps = c.params.step_count();
    const double alpha = c.params.alpha;
    const std::size_t d = obj.dimension();

    // err[k][rep], wm[k][rep]
    std::vector<std::vector<MomentSeries>> err(rungs, std::vector<MomentSeries>(c.replicates));
    std::vector<std::vector<MomentSeries>> wm(rungs, std::vector<MomentSeries>(c.replicates));
    parallel_for(c.replicates, opt.workers, [&](std::size_t rep) {
        const RngStream stream = detail::replicate_stream(c, rep);
        MflLadderSystem sys = init_mfl_ladder(c.init_law, c.j_ladder, M, c.params, obj, stream);
        auto record = [&](std::size_t step) {
            const double t = static_cast<double>(step) * c.params.dt;
            const Point full = consensus_point(sys.meanfield, alpha, obj);
            for (std::size_t k = 0; k < rungs; ++k) {
                err[k][rep].times.push_back(t);
                err[k][rep].values.push_back(mfl_ladder_error(sys, k));
                if (c.j_ladder[k] < M) {
                    const Point sub = consensus_point(Ensemble(sys.meanfield.positions.head(c.j_ladder[k])), alpha, obj);
                    wm[k][rep].times.push_back(t);
                    wm[k][rep].values.push_back(squared_distance(full, sub));
                }
            }
        };
        record(0);
        for (std::size_t n = 0; n < steps; ++n) {
            const Matrix dw = brownian_increments(stream.at_step(n), M, d, c.params.dt);
            try {
                mfl_ladder_step(sys, c.params, obj, dw);
            } catch (const NumericError& e) {
                throw detail::tag_replicate(NumericError(std::string(e.what()) + " (step " + std::to_string(n) + ")"),
                                            rep);
            }
            if (detail::observed(n + 1, steps, c.stride)) record(n + 1);
        }
    });

    std::vector<double> sizes, sups;
    json per_rung = json::array();
    bool uniform_all = true;
    bool ceiling_all = true;
    const double half = 0.5 * c.params.horizon;
    for (std::size_t k = 0; k < rungs; ++k) {
        const std::size_t J = c.j_ladder[k];
        r.series.push_back(make_group(SeriesKind::mfl_error, 2.0, J, group_name(SeriesKind::mfl_error, {}, J),
                                      std::move(err[k])));
        const SeriesGroup& g = r.series.back();
        double sup = -1.0, sup_first = -1.0, sup_second = -1.0, argmax = 0.0;
        for (std::size_t i = 0; i < g.mean.size(); ++i) {
            const double t = g.mean.times[i], v = g.mean.mean[i];
            if (v > sup) {
                sup = v;
                argmax = t;
            }
            if (t <= half * (1.0 + 1e-12)) sup_first = std::max(sup_first, v);
            if (t >= half * (1.0 - 1e-12)) sup_second = std::max(sup_second, v);
        }
        std::vector<double> rep_sups;
        for (const auto& s : g.replicates) rep_sups.push_back(*std::max_element(s.values.begin(), s.values.end()));
        const bool uniform = sup_second <= 2.0 * sup_first;
        uniform_all = uniform_all && uniform;
        json entry{{"particles", J},
                   {"sup_mean_error", detail::number(sup)},
                   {"sup_time", detail::number(argmax)},
                   {"sup_first_half", detail::number(sup_first)},
                   {"sup_second_half", detail::number(sup_second)},
                   {"sup_attained_before_half", argmax <= half * (1.0 + 1e-12)},
                   {"uniform_in_time", uniform},
                   {"replicate_sup", to_json(summarize(rep_sups))}};
        if (r.constants->c_mfl) {
            const double ceiling = *r.constants->c_mfl / static_cast<double>(J);
            const bool ok = sup <= ceiling;
            ceiling_all = ceiling_all && ok;
            entry["ceiling"] = detail::number(ceiling);
            entry["below_ceiling"] = ok;
        } else {
            entry["ceiling"] = nullptr;
        }
        per_rung.push_back(entry);
        sizes.push_back(static_cast<double>(J));
        sups.push_back(sup);
        if (!wm[k].front().times.empty())
            r.series.push_back(make_group(SeriesKind::wm_error, 2.0, J, group_name(SeriesKind::wm_error, {}, J),
                                          std::move(wm[k])));
    }
    r.summary["proxy_size"] = M;
    r.summary["rungs"] = per_rung;
    r.summary["uniform_in_time"] = uniform_all;
    r.summary["below_ceiling"] = r.constants->c_mfl ? json(ceiling_all) : json(nullptr);
    try {
        r.fits["mfl_slope"] = fit_power_law(sizes, sups);
    } catch (const FitError& e) {
        r.notes.push_back(std::string("mfl_slope: ") + e.what());
    }
    r.wall_seconds = timer.seconds();
    return r;
}

/// Stability: two copies from different laws driven by shared increments.
inline ExperimentResult run_stability(const ExperimentConfig& c, const RunOptions& opt = {}) {
    detail::Timer timer;
    ExperimentResult r = detail::start_result(c);
    if (!c.init_law_b) throw ConfigError("stability experiment needs init_law_b");
    const Objective obj = c.objective.build();
    r.constants = detail::constants_for(c, obj);
    if (!r.constants->subcritical) r.notes.push_back("sigma >= sigma_tilde: stability constants unavailable");
    const std::size_t rungs = c.j_ladder.size();
    const std::size_t steps = c.params.step_count();
    const std::size_t d = obj.dimension();

    std::vector<std::vector<MomentSeries>> gaps(rungs, std::vector<MomentSeries>(c.replicates));
    parallel_for(rungs * c.replicates, opt.workers, [&](std::size_t task) {
        const std::size_t k = task / c.replicates, rep = task % c.replicates;
        const std::size_t J = c.j_ladder[k];
        const RngStream stream = detail::replicate_stream(c, rep);
        StabilityCoupledSystem sys =
            init_stability_coupling(c.init_law, *c.init_law_b, J, c.params, obj, stream, c.shared_initial_stream);
        MomentSeries& out = gaps[k][rep];
        out.times.push_back(0.0);
        out.values.push_back(stability_gap(sys));
        for (std::size_t n = 0; n < steps; ++n) {
            const Matrix dw = brownian_increments(stream.at_step(n), J, d, c.params.dt);
            try {
                sys = stability_coupled_step(sys, c.params, obj, dw);
            } catch (const NumericError& e) {
                throw detail::tag_replicate(NumericError(std::string(e.what()) + " (step " + std::to_string(n) + ")"),
                                            rep);
            }
            if (detail::observed(n + 1, steps, c.stride)) {
                out.times.push_back(static_cast<double>(n + 1) * c.params.dt);
                out.values.push_back(stability_gap(sys));
            }
        }
    });

    const double half = 0.5 * c.params.horizon;
    const double expo = r.constants->stability_exponent;
    json per_rung = json::array();
    std::vector<double> ratios, g0s, sup_excess;
    bool bounded_all = true, nongrowing_all = true;
    for (std::size_t k = 0; k < rungs; ++k) {
        const std::size_t J = c.j_ladder[k];
        r.series.push_back(make_group(SeriesKind::stability_gap, 2.0, J,
                                      group_name(SeriesKind::stability_gap, {}, J), std::move(gaps[k])));
        const AggregateSeries& a = r.series.back().mean;
        const double g0 = a.mean.front();
        const double sup = *std::max_element(a.mean.begin(), a.mean.end());
        std::size_t ih = 0;
        while (ih + 1 < a.size() && a.times[ih] < half * (1.0 - 1e-12)) ++ih;
        double sup_late = a.mean[ih];
        for (std::size_t i = ih; i < a.size(); ++i) sup_late = std::max(sup_late, a.mean[i]);
        const bool nongrowing = sup_late <= a.mean[ih] + 2.0 * a.std_error[ih];
        nongrowing_all = nongrowing_all && nongrowing;
        const double ratio = g0 > 0.0 ? sup / g0 : std::numeric_limits<double>::quiet_NaN();
        json entry{{"particles", J},
                   {"mean_gap_initial", detail::number(g0)},
                   {"mean_gap_initial_stderr", detail::number(a.std_error.front())},
                   {"sup_mean_gap", detail::number(sup)},
                   {"sup_ratio", detail::number(ratio)},
                   {"mean_gap_at_half", detail::number(a.mean[ih])},
                   {"sup_mean_gap_second_half", detail::number(sup_late)},
                   {"nongrowing_second_half", nongrowing}};
        if (r.constants->c_stab1 && r.constants->c_stab2) {
            const double bound = *r.constants->c_stab1 * g0 +
                                 *r.constants->c_stab2 / std::pow(static_cast<double>(J), expo);
            const bool ok = sup <= bound;
            bounded_all = bounded_all && ok;
            entry["bound"] = detail::number(bound);
            entry["below_bound"] = ok;
        } else {
            entry["bound"] = nullptr;
        }
        per_rung.push_back(entry);
        ratios.push_back(ratio);
        g0s.push_back(g0);
        sup_excess.push_back(sup);
    }
    double variation = std::numeric_limits<double>::quiet_NaN();
    if (std::all_of(ratios.begin(), ratios.end(), [](double x) { return x > 0.0 && std::isfinite(x); })) {
        const auto [mn, mx] = std::minmax_element(ratios.begin(), ratios.end());
        variation = *mx / *mn;
        // Residual sup_t max(E G_t - c E G_0, floor) with c the smallest ratio.
        const double cfit = *mn;
        const double floor = 1e-12 * *std::max_element(g0s.begin(), g0s.end());
        std::vector<double> sizes, residual;
        for (std::size_t k = 0; k < rungs; ++k) {
            const AggregateSeries& a = r.series[k].mean;
            double best = floor;
            for (double v : a.mean) best = std::max(best, v - cfit * g0s[k]);
            sizes.push_back(static_cast<double>(c.j_ladder[k]));
            residual.push_back(best);
        }
        r.summary["residual_coefficient"] = detail::number(cfit);
        r.summary["residuals"] = residual;
        try {
            r.fits["stability_residual_slope"] = fit_power_law(sizes, residual);
        } catch (const FitError& e) {
            r.notes.push_back(std::string("stability_residual_slope: ") + e.what());
        }
    } else {
        r.notes.push_back("initial gap is zero for some J; ratios undefined");
    }
    r.summary["rungs"] = per_rung;
    r.summary["ratio_variation"] = detail::number(variation);
    r.summary["j_uniform"] = std::isfinite(variation) && variation < 2.0;
    r.summary["nongrowing_second_half"] = nongrowing_all;
    r.summary["below_bound"] = (r.constants->c_stab1 ? json(bounded_all) : json(nullptr));
    r.wall_seconds = timer.seconds();
    return r;
}

/// Excursion probabilities of e^{κt} M_2(t) above baseline + A across the
/// ladder, next to the theoretical ceiling.
inline ExperimentResult run_concentration(const ExperimentConfig& c, const RunOptions& opt = {}) {
    detail::Timer timer;
    ExperimentResult r = detail::start_result(c);
    const Objective obj = c.objective.build();
    r.constants = detail::constants_for(c, obj);
    const ProblemProfile prof = detail::profile_for(c, obj);
    const double kappa = c.kappa.value_or(r.constants->kappa);
    const double lam2 = lambda_p(prof, 2.0), lam2q = lambda_p(prof, 2.0 * c.q);
    const double kappa_max = std::min(lam2, lam2q / c.q);
    const bool in_window = kappa < kappa_max;
    if (!in_window && !c.allow_supercritical)
        throw PreconditionError("kappa = " + format_double(kappa) + " outside the valid interval kappa < " +
                                format_double(kappa_max) + " = min(lambda_2, lambda_2q / q)");
    if (!in_window) r.notes.push_back("kappa outside the valid window: run forced, ceiling omitted");
    std::optional<double> cbad;
    if (in_window) cbad = c_bad_particle(prof, c.q, kappa);

    const std::size_t rungs = c.j_ladder.size();
    // Rung k uses replicate streams k R .. k R + R - 1, so rungs are independent.
    std::vector<std::vector<MomentSeries>> runs(rungs);
    for (std::size_t k = 0; k < rungs; ++k) {
        auto m2 = detail::interacting_runs(
            c, obj, c.j_ladder[k], 1, [](const Ensemble& e) { return std::vector<double>{centered_moment(e, 2.0)}; },
            opt, nullptr, k * c.replicates);
        runs[k] = std::move(m2[0]);
    }

    json per_rung = json::array();
    std::vector<double> probs, lows, highs;
    bool ceiling_all = true;
    for (std::size_t k = 0; k < rungs; ++k) {
        const std::size_t J = c.j_ladder[k];
        r.series.push_back(make_group(SeriesKind::centered_p, 2.0, J, group_name(SeriesKind::centered_p, 2.0, J),
                                      std::move(runs[k])));
        const auto& reps = r.series.back().replicates;
        double prob = 0.0;
        json baseline_json;
        switch (c.baseline) {
            case BaselineKind::law:
                baseline_json = detail::number(prof.centered_m2);
                prob = excursion_probability(reps, kappa, c.threshold, prof.centered_m2);
                break;
            case BaselineKind::expected: {
                const double b = prof.centered_m2 * static_cast<double>(J - 1) / static_cast<double>(J);
                baseline_json = detail::number(b);
                prob = excursion_probability(reps, kappa, c.threshold, b);
                break;
            }
            case BaselineKind::initial:
                baseline_json = "initial";
                prob = excursion_probability_relative(reps, kappa, c.threshold);
                break;
        }
        const auto hits = static_cast<std::size_t>(std::llround(prob * static_cast<double>(reps.size())));
        const auto [lo, hi] = detail::wilson_interval(hits, reps.size());
        json entry{{"particles", J},
                   {"baseline", baseline_json},
                   {"hits", hits},
                   {"runs", reps.size()},
                   {"probability", detail::number(prob)},
                   {"wilson_low", detail::number(lo)},
                   {"wilson_high", detail::number(hi)}};
        if (cbad) {
            const double ceiling = *cbad * std::pow(c.threshold, -c.q) *
                                   std::pow(static_cast<double>(J), -c.q / 2.0) * prof.centered_m2q;
            const bool ok = prob <= ceiling;
            ceiling_all = ceiling_all && ok;
            entry["ceiling"] = detail::number(ceiling);
            entry["below_ceiling"] = ok;
        } else {
            entry["ceiling"] = nullptr;
        }
        per_rung.push_back(entry);
        probs.push_back(prob);
        lows.push_back(lo);
        highs.push_back(hi);
    }
    std::size_t inversions = 0, significant = 0;
    for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
        if (probs[k + 1] > probs[k]) {
            ++inversions;
            if (lows[k + 1] > highs[k]) ++significant;
        }
    }
    r.summary["kappa"] = detail::number(kappa);
    r.summary["kappa_max"] = detail::number(kappa_max);
    r.summary["threshold"] = c.threshold;
    r.summary["baseline_kind"] = to_string(c.baseline);
    r.summary["c_bad"] = cbad ? detail::number(*cbad) : json(nullptr);
    r.summary["rungs"] = per_rung;
    r.summary["inversions"] = inversions;
    r.summary["significant_inversions"] = significant;
    r.summary["nonincreasing"] = inversions <= 1 && significant == 0;
    r.summary["below_ceiling"] = cbad ? json(ceiling_all) : json(nullptr);
    r.wall_seconds = timer.seconds();
    return r;
}

/// Monte Carlo error of the weighted mean of J i.i.d. samples across the
/// ladder against a size-N reference.
inline ExperimentResult run_wm_mc(const ExperimentConfig& c, const RunOptions& opt = {}) {
    detail::Timer timer;
    ExperimentResult r = detail::start_result(c);
    const Objective obj = c.objective.build();
    r.constants = detail::constants_for(c, obj);
    const ProblemProfile prof = detail::profile_for(c, obj);
    const std::size_t N = c.reference_size.value_or(100 * c.max_particles());
    if (N < 100 * c.max_particles()) throw ConfigError("reference_size must be at least 100 * max(j_ladder)");
    const double alpha = c.params.alpha;
    const Ensemble big(c.init_law.sample_rows(RngStream{c.seed, 0, 0, StreamDomain::reference}, N));
    const Point reference = consensus_point(big, alpha, obj);

    const std::size_t rungs = c.j_ladder.size();
    std::vector<std::vector<double>> errors(rungs);
    parallel_for(rungs, opt.workers, [&](std::size_t k) {
        const RngStream stream{c.seed, k, 0, StreamDomain::sampling};
        errors[k] = wm_mc_errors(c.init_law, obj, alpha, c.j_ladder[k], N, c.replicates, stream, &reference);
    });

    const double m2 = prof.centered_m2;
    const double cwm2 = c_wm_p(prof, 2.0);
    Table table{"wm_mc", {"J", "mean", "stderr", "n", "normalized", "normalized_stderr", "ceiling"}, {}};
    json per_rung = json::array();
    std::vector<double> sizes, means;
    bool ceiling_all = true, clt_all = true;
    for (std::size_t k = 0; k < rungs; ++k) {
        const std::size_t J = c.j_ladder[k];
        const double Jd = static_cast<double>(J);
        std::vector<MomentSeries> reps(errors[k].size());
        for (std::size_t i = 0; i < reps.size(); ++i) {
            reps[i].times = {0.0};
            reps[i].values = {errors[k][i]};
        }
        r.series.push_back(
            make_group(SeriesKind::wm_error, 2.0, J, group_name(SeriesKind::wm_error, {}, J), std::move(reps)));
        const Estimate e = summarize(errors[k]);
        const double normalized = e.mean * Jd / m2, normalized_se = e.std_error * Jd / m2;
        const double ceiling = cwm2 * m2 / Jd;
        const bool below = e.mean <= ceiling;
        const bool clt = std::abs(normalized - 1.0) <= 3.0 * normalized_se;
        ceiling_all = ceiling_all && below;
        clt_all = clt_all && clt;
        table.rows.push_back({Jd, e.mean, e.std_error, static_cast<double>(e.n), normalized, normalized_se, ceiling});
        per_rung.push_back({{"particles", J},
                            {"error", to_json(e)},
                            {"normalized", detail::number(normalized)},
                            {"normalized_stderr", detail::number(normalized_se)},
                            {"normalized_within_3se_of_one", clt},
                            {"ceiling", detail::number(ceiling)},
                            {"below_ceiling", below}});
        sizes.push_back(Jd);
        means.push_back(e.mean);
    }
    r.tables.push_back(std::move(table));
    r.summary["reference_size"] = N;
    r.summary["reference_point"] = reference;
    r.summary["centered_m2_law"] = detail::number(m2);
    r.summary["c_wm_2"] = detail::number(cwm2);
    r.summary["rungs"] = per_rung;
    r.summary["below_ceiling"] = ceiling_all;
    r.summary["normalized_within_3se_of_one"] = clt_all;
    try {
        r.fits["wm_slope"] = fit_power_law(sizes, means);
    } catch (const FitError& e) {
        r.notes.push_back(std::string("wm_slope: ") + e.what());
    }
    r.wall_seconds = timer.seconds();
    return r;
}

inline ExperimentResult run_experiment(const ExperimentConfig& c, const RunOptions& opt = {}) {
    switch (c.kind) {
        case ExperimentKind::constants: return run_constants(c, opt);
        case ExperimentKind::simulate: return run_simulate(c, opt);
        case ExperimentKind::optimize: return run_optimize(c, opt);
        case ExperimentKind::moments: return run_moments(c, opt);
        case ExperimentKind::mfl: return run_mfl(c, opt);
        case ExperimentKind::stability: return run_stability(c, opt);
        case ExperimentKind::concentration: return run_concentration(c, opt);
        case ExperimentKind::wm_mc: return run_wm_mc(c, opt);
    }
    throw ConfigError("unknown experiment kind");
}

}  // namespace cbo::experiments
