#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "cbo/error.hpp"
#include "cbo/matrix.hpp"
#include "cbo/objectives.hpp"
#include "cbo/rng.hpp"

namespace cbo {

/// J particles in R^d at time t; row j is particle j. The empirical measure
/// is the uniform measure on rows.
struct Ensemble {
    Matrix positions;
    double time = 0.0;

    Ensemble() = default;
    Ensemble(std::size_t particles, std::size_t dim) : positions(particles, dim) {
        if (particles == 0 || dim == 0) throw InputError("Ensemble: J and d must be positive");
    }
    explicit Ensemble(Matrix pos, double t = 0.0) : positions(std::move(pos)), time(t) {
        if (positions.rows() == 0 || positions.cols() == 0)
            throw InputError("Ensemble: J and d must be positive");
    }
    static Ensemble from_rows(const std::vector<Point>& rows, double t = 0.0) {
        return Ensemble(Matrix::from_rows(rows), t);
    }

    std::size_t size() const noexcept { return positions.rows(); }
    std::size_t dim() const noexcept { return positions.cols(); }
    std::span<double> operator[](std::size_t j) noexcept { return positions.row(j); }
    std::span<const double> operator[](std::size_t j) const noexcept { return positions.row(j); }

    friend bool operator==(const Ensemble&, const Ensemble&) = default;
};

enum class NoiseKind { isotropic, anisotropic };

/// τ(S): d for isotropic noise, 1 for anisotropic noise.
inline double noise_prefactor(NoiseKind kind, std::size_t dim) noexcept {
    return kind == NoiseKind::isotropic ? static_cast<double>(dim) : 1.0;
}

inline std::string to_string(NoiseKind kind) {
    return kind == NoiseKind::isotropic ? "isotropic" : "anisotropic";
}

inline NoiseKind parse_noise_kind(const std::string& s) {
    if (s == "isotropic") return NoiseKind::isotropic;
    if (s == "anisotropic") return NoiseKind::anisotropic;
    throw ConfigError("unknown noise kind '" + s + "'");
}

struct CboParams {
    double alpha = 1.0;   ///< inverse temperature
    double sigma = 0.1;   ///< noise strength
    NoiseKind noise = NoiseKind::anisotropic;
    double dt = 1e-2;
    double horizon = 10.0;

    void validate() const {
        if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
        if (!(sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
        if (!(dt > 0.0)) throw ConfigError("dt must be positive");
        if (!(horizon >= 0.0)) throw ConfigError("horizon must be >= 0");
        if (horizon > 0.0 && dt > horizon) throw ConfigError("dt must not exceed the horizon");
    }

    /// Number of Euler steps covering [0, horizon]; exact multiples are not
    /// rounded up by floating-point noise in horizon / dt.
    std::size_t step_count() const {
        const double ratio = horizon / dt;
        if (!(ratio < 4.0e9)) throw ConfigError("horizon / dt exceeds the step counter");
        const double nearest = std::round(ratio);
        if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest))
            return static_cast<std::size_t>(nearest);
        return static_cast<std::size_t>(std::ceil(ratio));
    }
};

/// Arithmetic mean of the rows.
inline Point mean_point(const Ensemble& ens) {
    if (ens.size() == 0) throw InputError("mean_point: empty ensemble");
    Point m(ens.dim(), 0.0);
    for (std::size_t j = 0; j < ens.size(); ++j) {
        const auto x = ens[j];
        for (std::size_t k = 0; k < m.size(); ++k) m[k] += x[k];
    }
    const double inv = 1.0 / static_cast<double>(ens.size());
    for (double& v : m) v *= inv;
    return m;
}

/// Normalized Gibbs weights exp(-α (f(x_j) - min_k f(x_k))) / Σ. The shift
/// keeps the largest unnormalized weight at 1.
inline std::vector<double> consensus_weights(const Ensemble& ens, double alpha,
                                             const Objective& obj) {
    if (ens.size() == 0) throw InputError("consensus_point: empty ensemble");
    if (obj.dimension() != ens.dim()) throw InputError("consensus_point: dimension mismatch");
    std::vector<double> w(ens.size());
    double fmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ens.size(); ++j) {
        w[j] = obj(ens[j]);
        if (!std::isfinite(w[j]))
            throw NumericError("consensus_point: non-finite objective value at particle " +
                               std::to_string(j));
        fmin = std::min(fmin, w[j]);
    }
    double total = 0.0;
    for (double& v : w) total += (v = std::exp(-alpha * (v - fmin)));
    for (double& v : w) v /= total;
    return w;
}

/// Weighted mean M_α of the empirical measure. The minimum objective value
/// is subtracted before exponentiation, so the normalizer is at least 1.
inline Point consensus_point(const Ensemble& ens, double alpha, const Objective& obj) {
    if (alpha == 0.0) {
        if (obj.dimension() != ens.dim()) throw InputError("consensus_point: dimension mismatch");
        return mean_point(ens);
    }
    const auto w = consensus_weights(ens, alpha, obj);
    Point m(ens.dim(), 0.0);
    for (std::size_t j = 0; j < ens.size(); ++j) {
        const auto x = ens[j];
        for (std::size_t k = 0; k < m.size(); ++k) m[k] += w[j] * x[k];
    }
    return m;
}

/// Applies the noise operator S(v) to w in place of a d x d product:
/// isotropic |v| w, anisotropic v ⊙ w. Both vanish at v = 0.
inline void apply_noise(NoiseKind kind, std::span<const double> v, std::span<const double> w,
                        std::span<double> out) noexcept {
    if (kind == NoiseKind::isotropic) {
        const double r = norm(v);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = r * w[k];
    } else {
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = v[k] * w[k];
    }
}

inline Point noise_factor(NoiseKind kind, std::span<const double> v, std::span<const double> w) {
    if (v.size() != w.size()) throw InputError("noise_factor: dimension mismatch");
    Point out(v.size());
    apply_noise(kind, v, w, out);
    return out;
}

namespace detail {

// x_j <- x_j - (x_j - m) dt + σ S(x_j - m) dW_j for rows [0, rows) with a
// fixed consensus m. Returns the first non-finite row or rows.
inline std::size_t advance_rows(Matrix& pos, std::span<const double> m, const Matrix& dw,
                                std::size_t rows, double dt, double sigma, NoiseKind kind) {
    const std::size_t d = pos.cols();
    for (std::size_t j = 0; j < rows; ++j) {
        auto x = pos.row(j);
        const auto w = dw.row(j);
        double radius = 0.0;
        if (kind == NoiseKind::isotropic) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) s += (x[k] - m[k]) * (x[k] - m[k]);
            radius = std::sqrt(s);
        }
        bool finite = true;
        for (std::size_t k = 0; k < d; ++k) {
            const double v = x[k] - m[k];
            const double scale = kind == NoiseKind::isotropic ? radius : v;
            x[k] = x[k] - v * dt + sigma * scale * w[k];
            finite = finite && std::isfinite(x[k]);
        }
        if (!finite) return j;
    }
    return rows;
}

}  // namespace detail

/// One Euler-Maruyama step of the CBO system with the consensus point frozen
/// at its pre-step value. The input ensemble is left untouched.
inline Ensemble em_step(const Ensemble& ens, const CboParams& params, const Objective& obj,
                        const Matrix& dw) {
    if (dw.rows() != ens.size() || dw.cols() != ens.dim())
        throw InputError("em_step: increment shape does not match the ensemble");
    const Point m = consensus_point(ens, params.alpha, obj);
    Ensemble next = ens;
    const std::size_t bad =
        detail::advance_rows(next.positions, m, dw, ens.size(), params.dt, params.sigma, params.noise);
    if (bad != ens.size())
        throw NumericError("em_step: non-finite position at particle " + std::to_string(bad));
    next.time = ens.time + params.dt;
    return next;
}

/// Called with the current state and its step index (0 = initial state).
using Observer = std::function<void(const Ensemble&, std::size_t)>;

struct SimulationOptions {
    std::size_t stride = 1;   ///< observers fire every `stride` steps and at the final step
};

/// Integrates over [0, params.horizon] with increments drawn from
/// `stream` at steps 0, 1, 2, ... Deterministic given (init, params, stream).
inline Ensemble simulate(const Ensemble& init, const CboParams& params, const Objective& obj,
                         const RngStream& stream, const std::vector<Observer>& observers = {},
                         SimulationOptions options = {}) {
    params.validate();
    if (options.stride == 0) throw ConfigError("simulate: stride must be positive");
    const std::size_t steps = params.step_count();
    Ensemble state = init;
    for (const auto& obs : observers) obs(state, 0);
    for (std::size_t n = 0; n < steps; ++n) {
        const Matrix dw = brownian_increments(stream.at_step(n), state.size(), state.dim(), params.dt);
        try {
            state = em_step(state, params, obj, dw);
        } catch (const NumericError& e) {
            throw NumericError(std::string(e.what()) + " (step " + std::to_string(n) + ")");
        }
        state.time = init.time + static_cast<double>(n + 1) * params.dt;
        if ((n + 1) % options.stride == 0 || n + 1 == steps)
            for (const auto& obs : observers) obs(state, n + 1);
    }
    return state;
}

}  // namespace cbo
