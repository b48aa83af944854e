#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cbo/assignment.hpp"
#include "cbo/constants.hpp"
#include "cbo/dynamics.hpp"
#include "cbo/error.hpp"
#include "cbo/laws.hpp"
#include "cbo/matrix.hpp"
#include "cbo/objectives.hpp"
#include "cbo/rng.hpp"

namespace cbo {

enum class SeriesKind { centered_p, raw_p, mfl_error, stability_gap, wm_error, consensus_value, consensus_gap };

inline std::string to_string(SeriesKind k) {
    switch (k) {
        case SeriesKind::centered_p: return "centered-p";
        case SeriesKind::raw_p: return "raw-p";
        case SeriesKind::mfl_error: return "mfl-error";
        case SeriesKind::stability_gap: return "stability-gap";
        case SeriesKind::wm_error: return "wm-error";
        case SeriesKind::consensus_value: return "consensus-value";
        case SeriesKind::consensus_gap: return "consensus-gap";
    }
    return "unknown";
}

/// A scalar observable of one replicate sampled on a time grid.
struct MomentSeries {
    std::vector<double> times;
    std::vector<double> values;
    SeriesKind kind = SeriesKind::centered_p;
    double p = 2.0;
    std::size_t replicate = 0;

    void validate() const {
        if (times.size() != values.size()) throw InputError("MomentSeries: times/values length mismatch");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1])) throw InputError("MomentSeries: times must increase strictly");
    }
};

/// Least-squares line; `estimate` is a rate or slope depending on the fit.
/// The window is the half-open index range [window_lo, window_hi).
struct FitResult {
    double estimate = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t window_lo = 0;
    std::size_t window_hi = 0;
};

/// Sample mean with its standard error.
struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

inline Estimate summarize(const std::vector<double>& xs) {
    Estimate e;
    e.n = xs.size();
    if (xs.empty()) return e;
    double sum = 0.0;
    for (double x : xs) sum += x;
    e.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - e.mean) * (x - e.mean);
        e.std_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
    }
    return e;
}

/// (1/J) Σ |x_j - mean|^p.
inline double centered_moment(const Ensemble& ens, double p) {
    if (!(p >= 1.0)) throw InputError("centered_moment: p must be >= 1");
    const Point m = mean_point(ens);
    double acc = 0.0;
    for (std::size_t j = 0; j < ens.size(); ++j) {
        const double r2 = squared_distance(ens[j], m);
        acc += p == 2.0 ? r2 : std::pow(r2, 0.5 * p);
    }
    return acc / static_cast<double>(ens.size());
}

/// (1/J) Σ |x_j|^p.
inline double raw_moment(const Ensemble& ens, double p) {
    if (!(p >= 1.0)) throw InputError("raw_moment: p must be >= 1");
    double acc = 0.0;
    for (std::size_t j = 0; j < ens.size(); ++j) {
        const double r2 = squared_norm(ens[j]);
        acc += p == 2.0 ? r2 : std::pow(r2, 0.5 * p);
    }
    return acc / static_cast<double>(ens.size());
}

/// (1/J)Σ|z_j|² - (1/J)Σ|z_j - m|² - |m|², identically zero.
inline double huygens_residual(const Ensemble& points) {
    const Point m = mean_point(points);
    double raw = 0.0, centered = 0.0;
    for (std::size_t j = 0; j < points.size(); ++j) {
        raw += squared_norm(points[j]);
        centered += squared_distance(points[j], m);
    }
    const double inv = 1.0 / static_cast<double>(points.size());
    return raw * inv - centered * inv - squared_norm(m);
}

inline constexpr std::size_t kExactW2MaxParticles = 512;

/// sqrt((1/J) Σ |a_j - b_j|²): the W_2 cost of the identity pairing, an
/// upper bound for W_2 of the two empirical measures.
inline double identity_pairing_w2(const Ensemble& a, const Ensemble& b) {
    if (a.size() != b.size() || a.dim() != b.dim())
        throw InputError("identity_pairing_w2: ensembles differ in size or dimension");
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) acc += squared_distance(a[j], b[j]);
    return std::sqrt(acc / static_cast<double>(a.size()));
}

/// Wasserstein-2 distance between two equal-size empirical measures, solved
/// exactly as an assignment problem.
inline double exact_w2(const Ensemble& a, const Ensemble& b) {
    if (a.size() != b.size() || a.dim() != b.dim())
        throw InputError("exact_w2: ensembles differ in size or dimension");
    if (a.size() > kExactW2MaxParticles)
        throw ScaleError("exact_w2: J = " + std::to_string(a.size()) + " exceeds " +
                         std::to_string(kExactW2MaxParticles) +
                         "; use identity_pairing_w2 (the coupling upper bound) instead");
    const std::size_t n = a.size();
    Matrix cost(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) cost(i, j) = squared_distance(a[i], b[j]);
    const Assignment best = solve_assignment(cost);
    return std::sqrt(std::max(0.0, best.cost) / static_cast<double>(n));
}

namespace detail {

inline FitResult least_squares(const std::vector<double>& x, const std::vector<double>& y,
                               std::size_t lo, std::size_t hi) {
    const double n = static_cast<double>(hi - lo);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw FitError("fit: abscissae are all equal");
    FitResult f;
    f.estimate = sxy / sxx;
    f.intercept = my - f.estimate * mx;
    double ss_res = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
        const double e = y[i] - (f.intercept + f.estimate * x[i]);
        ss_res += e * e;
    }
    f.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    f.window_lo = lo;
    f.window_hi = hi;
    return f;
}

}  // namespace detail

/// Exponential decay rate from a least-squares line through (t, log value)
/// on [lo, hi). The estimate is the negated slope.
inline FitResult fit_exp_decay(const MomentSeries& series, std::size_t lo, std::size_t hi) {
    series.validate();
    if (hi > series.values.size() || hi - lo < 2 || lo >= hi)
        throw FitError("fit_exp_decay: window must hold at least two points");
    std::vector<double> logs(series.values.size(), 0.0);
    for (std::size_t i = lo; i < hi; ++i) {
        if (!(series.values[i] > 0.0))
            throw FitError("fit_exp_decay: nonpositive value at index " + std::to_string(i) +
                           " (noise floor reached; shrink the window)");
        logs[i] = std::log(series.values[i]);
    }
    FitResult f = detail::least_squares(series.times, logs, lo, hi);
    f.estimate = -f.estimate;
    return f;
}

/// Slope of log(error) against log(size).
inline FitResult fit_power_law(const std::vector<double>& sizes, const std::vector<double>& errors) {
    if (sizes.size() != errors.size()) throw InputError("fit_power_law: length mismatch");
    if (sizes.size() < 3) throw FitError("fit_power_law: need at least three points");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (!(sizes[i] > 0.0)) throw FitError("fit_power_law: sizes must be positive");
        if (!(errors[i] > 0.0)) throw FitError("fit_power_law: nonpositive error value");
        lx.push_back(std::log(sizes[i]));
        ly.push_back(std::log(errors[i]));
    }
    return detail::least_squares(lx, ly, 0, lx.size());
}

/// max over the grid of e^{κ t} value(t).
inline double weighted_grid_sup(const MomentSeries& run, double kappa) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < run.values.size(); ++i)
        best = std::max(best, std::exp(kappa * run.times[i]) * run.values[i]);
    return best;
}

/// Fraction of runs whose grid supremum of e^{κ t} M_2(t) reaches
/// baseline + threshold.
inline double excursion_probability(const std::vector<MomentSeries>& runs, double kappa, double threshold,
                                    double baseline) {
    if (runs.empty()) throw InputError("excursion_probability: no runs");
    std::size_t hits = 0;
    for (const auto& run : runs)
        if (weighted_grid_sup(run, kappa) >= baseline + threshold) ++hits;
    return static_cast<double>(hits) / static_cast<double>(runs.size());
}

/// Like excursion_probability with each run's own initial value as baseline.
inline double excursion_probability_relative(const std::vector<MomentSeries>& runs, double kappa,
                                             double threshold) {
    if (runs.empty()) throw InputError("excursion_probability_relative: no runs");
    std::size_t hits = 0;
    for (const auto& run : runs) {
        if (run.values.empty()) throw InputError("excursion_probability_relative: empty run");
        if (weighted_grid_sup(run, kappa) >= run.values.front() + threshold) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(runs.size());
}

/// Both sides of |M_α(μ) - M(μ)|^q <= e^{α(f̄-f̲)} (1/J) Σ |x_j - M(μ)|^q.
inline std::pair<double, double> jensen_gap(const Ensemble& ens, double alpha, const Objective& obj, double q) {
    const Point weighted = consensus_point(ens, alpha, obj);
    const Point plain = mean_point(ens);
    const double lhs = std::pow(std::sqrt(squared_distance(weighted, plain)), q);
    const double rhs = std::exp(alpha * obj.range()) * centered_moment(ens, q);
    return {lhs, rhs};
}

/// Both sides of the weighted-mean stability estimate:
/// lhs = |M_α(a) - M(a) - M_α(b) + M(b)|,
/// rhs = C_M (sqrt(M_2(a)) + sqrt(M_2(b))) W_2(a, b).
inline std::pair<double, double> wm_stability_gap(const Ensemble& a, const Ensemble& b, double alpha,
                                                  const Objective& obj) {
    const double w2 = exact_w2(a, b);
    const Point wa = consensus_point(a, alpha, obj), ma = mean_point(a);
    const Point wb = consensus_point(b, alpha, obj), mb = mean_point(b);
    double lhs2 = 0.0;
    for (std::size_t k = 0; k < wa.size(); ++k) {
        const double v = wa[k] - ma[k] - wb[k] + mb[k];
        lhs2 += v * v;
    }
    ProblemProfile prof;
    prof.alpha = alpha;
    prof.lipschitz = obj.lipschitz();
    prof.f_upper = obj.upper_bound();
    prof.f_lower = obj.lower_bound();
    const double rhs = c_m(prof) * (std::sqrt(centered_moment(a, 2.0)) + std::sqrt(centered_moment(b, 2.0))) * w2;
    return {std::sqrt(lhs2), rhs};
}

/// Per-replicate squared errors |M_α(μ̂_J) - M_α(ρ̄)|², where M_α(ρ̄) is
/// replaced by the consensus point of a size-N reference sample. Replicate r
/// draws its J points from step r of the sampling domain of `stream`; the
/// reference comes from step 0 of the reference domain unless supplied.
inline std::vector<double> wm_mc_errors(const InitialLaw& law, const Objective& obj, double alpha,
                                        std::size_t particles, std::size_t reference_size,
                                        std::size_t replicates, const RngStream& stream,
                                        const Point* reference = nullptr) {
    law.validate();
    if (particles == 0 || replicates == 0) throw ConfigError("wm_mc_error: J and R must be positive");
    if (reference_size < 100 * particles)
        throw ConfigError("wm_mc_error: reference size N must be at least 100 J");
    if (law.dim() != obj.dimension()) throw ConfigError("wm_mc_error: law and objective dimensions differ");
    Point ref;
    if (reference) {
        if (reference->size() != law.dim()) throw InputError("wm_mc_error: reference point has wrong dimension");
        ref = *reference;
    } else {
        const Ensemble big(law.sample_rows(stream.in_domain(StreamDomain::reference).at_step(0), reference_size));
        ref = consensus_point(big, alpha, obj);
    }
    std::vector<double> errs(replicates);
    const RngStream sampling = stream.in_domain(StreamDomain::sampling);
    for (std::size_t r = 0; r < replicates; ++r) {
        const Ensemble sample(law.sample_rows(sampling.at_step(r), particles));
        errs[r] = squared_distance(consensus_point(sample, alpha, obj), ref);
    }
    return errs;
}

/// Monte Carlo estimate of E|M_α(μ̂_J) - M_α(ρ̄)|² with its standard error.
inline Estimate wm_mc_error(const InitialLaw& law, const Objective& obj, double alpha, std::size_t particles,
                            std::size_t reference_size, std::size_t replicates, const RngStream& stream,
                            const Point* reference = nullptr) {
    return summarize(wm_mc_errors(law, obj, alpha, particles, reference_size, replicates, stream, reference));
}

}  // namespace cbo
