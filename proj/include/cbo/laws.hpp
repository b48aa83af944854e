#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cbo/error.hpp"
#include "cbo/matrix.hpp"
#include "cbo/rng.hpp"

namespace cbo {

enum class LawKind { gaussian, uniform_box };

inline std::string to_string(LawKind k) { return k == LawKind::gaussian ? "gaussian" : "uniform-box"; }

inline LawKind parse_law_kind(const std::string& s) {
    if (s == "gaussian") return LawKind::gaussian;
    if (s == "uniform-box") return LawKind::uniform_box;
    throw ConfigError("unknown initial law '" + s + "' (expected gaussian or uniform-box)");
}

/// Product law for initial positions: N(location, scale^2 I) or the box
/// location + [-scale, scale]^d.
struct InitialLaw {
    LawKind kind = LawKind::gaussian;
    Point location{0.0};
    double scale = 1.0;

    std::size_t dim() const noexcept { return location.size(); }

    void validate() const {
        if (location.empty()) throw ConfigError("initial law: location must be nonempty");
        if (!(scale > 0.0)) throw ConfigError("initial law: scale must be positive");
    }

    void sample(const RngStream& stream, std::uint64_t index, std::span<double> out) const {
        if (out.size() != dim()) throw InputError("InitialLaw::sample: dimension mismatch");
        if (kind == LawKind::gaussian) {
            stream.standard_normals(index, out);
            for (std::size_t k = 0; k < out.size(); ++k) out[k] = location[k] + scale * out[k];
        } else {
            stream.uniforms(index, out);
            for (std::size_t k = 0; k < out.size(); ++k)
                out[k] = location[k] + scale * (2.0 * out[k] - 1.0);
        }
    }

    /// Rows 0..count-1 drawn from indices 0..count-1 of `stream`.
    Matrix sample_rows(const RngStream& stream, std::size_t count) const {
        validate();
        Matrix m(count, dim());
        for (std::size_t j = 0; j < count; ++j) sample(stream, j, m.row(j));
        return m;
    }
};

namespace detail {

inline double binomial(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

// E[Y^k] for the one-dimensional centered marginal Y.
inline double marginal_moment(LawKind kind, double s, std::size_t k) {
    if (k % 2 == 1) return 0.0;
    if (kind == LawKind::gaussian) {
        double dfact = 1.0;  // (k-1)!!
        for (long long i = static_cast<long long>(k) - 1; i > 1; i -= 2) dfact *= static_cast<double>(i);
        return std::pow(s, static_cast<double>(k)) * dfact;
    }
    return std::pow(s, static_cast<double>(k)) / static_cast<double>(k + 1);
}

// E[|offset + Y|^{2k}] for a random vector with independent centered
// marginals, by binomial convolution of the per-coordinate moment sequences
// of W_i = (offset_i + Y_i)^2.
inline double even_norm_moment(LawKind kind, double s, std::span<const double> offset, std::size_t k) {
    std::vector<double> total(k + 1, 0.0);
    total[0] = 1.0;
    for (double c : offset) {
        std::vector<double> w(k + 1, 0.0);
        for (std::size_t m = 0; m <= k; ++m) {
            double acc = 0.0;
            for (std::size_t i = 0; i <= 2 * m; ++i)
                acc += binomial(2 * m, i) * std::pow(c, static_cast<double>(2 * m - i)) *
                       marginal_moment(kind, s, i);
            w[m] = acc;
        }
        std::vector<double> next(k + 1, 0.0);
        for (std::size_t n = 0; n <= k; ++n)
            for (std::size_t j = 0; j <= n; ++j) next[n] += binomial(n, j) * total[j] * w[n - j];
        total = std::move(next);
    }
    return total[k];
}

inline bool is_even_integer(double p, std::size_t& half) {
    const double r = std::round(p);
    if (std::abs(p - r) > 1e-12 || r < 0 || static_cast<long long>(r) % 2 != 0) return false;
    half = static_cast<std::size_t>(r) / 2;
    return true;
}

inline double monte_carlo_norm_moment(const InitialLaw& law, std::span<const double> origin, double p) {
    constexpr std::size_t samples = 1'000'000;
    const RngStream stream{0x6d6f6d656e7473ull, 0, 0, StreamDomain::reference};
    Point x(law.dim());
    double acc = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        law.sample(stream, i, x);
        acc += std::pow(std::sqrt(squared_distance(x, origin)), p);
    }
    return acc / static_cast<double>(samples);
}

}  // namespace detail

/// M_p of the law: E|X - E X|^p. Closed form for even integer p, otherwise
/// a fixed-seed 10^6-sample Monte Carlo estimate.
inline double law_centered_moment(const InitialLaw& law, double p) {
    law.validate();
    std::size_t half = 0;
    const Point zero(law.dim(), 0.0);
    if (detail::is_even_integer(p, half)) return detail::even_norm_moment(law.kind, law.scale, zero, half);
    return detail::monte_carlo_norm_moment(law, law.location, p);
}

/// m_p of the law: E|X|^p.
inline double law_raw_moment(const InitialLaw& law, double p) {
    law.validate();
    std::size_t half = 0;
    if (detail::is_even_integer(p, half))
        return detail::even_norm_moment(law.kind, law.scale, law.location, half);
    const Point zero(law.dim(), 0.0);
    return detail::monte_carlo_norm_moment(law, zero, p);
}

}  // namespace cbo
