#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cbo/error.hpp"
#include "cbo/matrix.hpp"
#include "cbo/rng.hpp"

namespace cbo {

/// Bounded, globally Lipschitz cost function together with its certified
/// constants. Immutable after construction; evaluation is thread-safe.
class Objective {
public:
    using Evaluator = std::function<double(std::span<const double>)>;

    Objective(std::string name, std::size_t dimension, Evaluator evaluator, double lower_bound,
              double upper_bound, double lipschitz, std::optional<Point> known_minimizer = {},
              bool lipschitz_is_numeric = false)
        : name_(std::move(name)),
          dimension_(dimension),
          evaluator_(std::move(evaluator)),
          lower_(lower_bound),
          upper_(upper_bound),
          lipschitz_(lipschitz),
          minimizer_(std::move(known_minimizer)),
          lipschitz_numeric_(lipschitz_is_numeric) {
        if (dimension_ == 0) throw ConfigError("objective dimension must be positive");
        if (!(upper_ >= lower_)) throw ConfigError("objective upper bound below lower bound");
        if (!(lipschitz_ >= 0.0)) throw ConfigError("objective Lipschitz constant must be >= 0");
        if (minimizer_ && minimizer_->size() != dimension_)
            throw ConfigError("objective minimizer has wrong dimension");
    }

    const std::string& name() const noexcept { return name_; }
    std::size_t dimension() const noexcept { return dimension_; }
    double lower_bound() const noexcept { return lower_; }
    double upper_bound() const noexcept { return upper_; }
    double lipschitz() const noexcept { return lipschitz_; }
    bool lipschitz_is_numeric() const noexcept { return lipschitz_numeric_; }
    const std::optional<Point>& known_minimizer() const noexcept { return minimizer_; }

    /// Range f̄ - f̲ that enters every weighted-mean constant.
    double range() const noexcept { return upper_ - lower_; }

    double operator()(std::span<const double> x) const {
        if (x.size() != dimension_) throw InputError("objective: dimension mismatch");
        return evaluator_(x);
    }

private:
    std::string name_;
    std::size_t dimension_;
    Evaluator evaluator_;
    double lower_;
    double upper_;
    double lipschitz_;
    std::optional<Point> minimizer_;
    bool lipschitz_numeric_;
};

inline std::vector<double> eval_batch(const Objective& obj, const std::vector<Point>& points) {
    std::vector<double> values;
    values.reserve(points.size());
    for (const auto& p : points) {
        if (p.size() != obj.dimension()) throw InputError("eval_batch: dimension mismatch");
        values.push_back(obj(p));
    }
    return values;
}

namespace detail {

inline double rastrigin(std::span<const double> z) noexcept {
    double r = 10.0 * static_cast<double>(z.size());
    for (double v : z) r += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
    return r;
}

// One coordinate's contribution g(z) = z^2 + 10 - 10 cos(2 pi z) and its slope.
inline double rastrigin_term(double z) noexcept {
    return z * z + 10.0 - 10.0 * std::cos(2.0 * std::numbers::pi * z);
}
inline double rastrigin_term_slope(double z) noexcept {
    return 2.0 * z + 20.0 * std::numbers::pi * std::sin(2.0 * std::numbers::pi * z);
}

// sup_z |g'(z)| exp(-g(z)/s) / s by dense sampling on the region where the
// factor is not negligible (g(z) >= z^2, so |z| > sqrt(60 s) contributes < e^-60).
inline double soft_rastrigin_coordinate_slope_bound(double scale) {
    const double reach = std::sqrt(60.0 * scale) + 2.0;
    constexpr double step = 1e-4;
    double best = 0.0;
    const auto n = static_cast<std::size_t>(reach / step);
    for (std::size_t i = 0; i <= n; ++i) {
        const double z = static_cast<double>(i) * step;
        const double h = std::abs(rastrigin_term_slope(z)) * std::exp(-rastrigin_term(z) / scale) / scale;
        best = std::max(best, h);
    }
    return best;
}

}  // namespace detail

inline constexpr double kSoftRastriginSafety = 1.1;

/// Builtin objectives with certified constants:
///   saturating-norm  r/(1+r),              r = |x - x*|, L_f = 1
///   gauss-well       1 - exp(-r^2/2),      L_f = e^{-1/2}
///   soft-rastrigin   1 - exp(-R(x - x*)/s), L_f numeric (see below)
/// All three take values in [0, 1).
inline Objective make_builtin(const std::string& name, std::size_t dim, Point minimizer,
                              double scale = 10.0) {
    if (dim == 0) throw ConfigError("make_builtin: dimension must be positive");
    if (minimizer.empty()) minimizer.assign(dim, 0.0);
    if (minimizer.size() != dim) throw ConfigError("make_builtin: minimizer has wrong dimension");
    auto center = std::make_shared<const Point>(minimizer);

    if (name == "saturating-norm") {
        auto f = [center](std::span<const double> x) {
            const double r = std::sqrt(squared_distance(x, *center));
            return r / (1.0 + r);
        };
        return {name, dim, f, 0.0, 1.0, 1.0, minimizer};
    }
    if (name == "gauss-well") {
        auto f = [center](std::span<const double> x) {
            return -std::expm1(-0.5 * squared_distance(x, *center));
        };
        return {name, dim, f, 0.0, 1.0, std::exp(-0.5), minimizer};
    }
    if (name == "soft-rastrigin") {
        if (!(scale > 0.0)) throw ConfigError("soft-rastrigin: scale must be positive");
        auto f = [center, scale](std::span<const double> x) {
            double r = 10.0 * static_cast<double>(x.size());
            for (std::size_t k = 0; k < x.size(); ++k) {
                const double z = x[k] - (*center)[k];
                r += z * z - 10.0 * std::cos(2.0 * std::numbers::pi * z);
            }
            return -std::expm1(-r / scale);
        };
        // |grad f|^2 = sum_k g'(z_k)^2 exp(-2 R/s)/s^2 <= sum_k h(z_k)^2, with
        // h = |g'| exp(-g/s)/s, because every other factor exp(-g(z_i)/s) <= 1.
        const double per_coordinate = detail::soft_rastrigin_coordinate_slope_bound(scale);
        const double lipschitz =
            kSoftRastriginSafety * std::sqrt(static_cast<double>(dim)) * per_coordinate;
        return {name, dim, f, 0.0, 1.0, lipschitz, minimizer, true};
    }
    throw ConfigError("unknown objective '" + name +
                      "' (expected saturating-norm, gauss-well or soft-rastrigin)");
}

struct CertificationReport {
    bool pass = true;
    std::size_t samples = 0;
    double max_bound_violation = 0.0;   ///< max over samples of max(f̲ - f, f - f̄, 0)
    double max_difference_quotient = 0.0;
    Point witness_x;                    ///< pair attaining the largest quotient
    Point witness_y;
    bool lipschitz_numeric = false;     ///< L_f came from sampling, not a closed form
};

/// Randomized check of the stated bounds and Lipschitz constant. Half of the
/// pairs are drawn independently in [-10, 10]^d, half as close neighbours
/// (separation up to 1e-2) where difference quotients approach |grad f|.
inline CertificationReport certify_objective(const Objective& obj, std::size_t sample_count,
                                             std::uint64_t seed, double tolerance = 1e-12) {
    if (sample_count < 2) throw InputError("certify_objective: need at least 2 samples");
    const std::size_t d = obj.dimension();
    CertificationReport rep;
    rep.samples = sample_count;
    rep.lipschitz_numeric = obj.lipschitz_is_numeric();
    RngStream stream{seed, 0, 0, StreamDomain::certification};
    Point x(d), y(d), u(2 * d);
    for (std::size_t i = 0; i < sample_count; ++i) {
        stream.uniforms(i, u);
        for (std::size_t k = 0; k < d; ++k) x[k] = -10.0 + 20.0 * u[k];
        if (i % 2 == 0) {
            for (std::size_t k = 0; k < d; ++k) y[k] = -10.0 + 20.0 * u[d + k];
        } else {
            for (std::size_t k = 0; k < d; ++k) y[k] = x[k] + 1e-2 * (2.0 * u[d + k] - 1.0);
        }
        const double fx = obj(x);
        const double fy = obj(y);
        for (double v : {fx, fy}) {
            const double violation =
                std::max({obj.lower_bound() - v, v - obj.upper_bound(), 0.0});
            if (!std::isfinite(v)) rep.max_bound_violation = INFINITY;
            rep.max_bound_violation = std::max(rep.max_bound_violation, violation);
        }
        const double dist = std::sqrt(squared_distance(x, y));
        if (dist > 0.0) {
            const double q = std::abs(fx - fy) / dist;
            if (q > rep.max_difference_quotient) {
                rep.max_difference_quotient = q;
                rep.witness_x = x;
                rep.witness_y = y;
            }
        }
    }
    rep.pass = rep.max_bound_violation <= tolerance &&
               rep.max_difference_quotient <= obj.lipschitz() + tolerance;
    return rep;
}

}  // namespace cbo
