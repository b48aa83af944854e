#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

#include "cbo/error.hpp"
#include "cbo/matrix.hpp"

namespace cbo {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Output is a
// pure function of (counter, key), so any draw can be regenerated in any
// order on any thread.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

namespace detail {

inline void mulhilo32(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

}  // namespace detail

inline PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        detail::mulhilo32(kMul0, ctr[0], hi0, lo0);
        detail::mulhilo32(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

/// Independent sub-streams under one master seed. Each domain feeds a
/// different consumer so that e.g. initial positions never reuse the
/// numbers that drive the Brownian increments.
enum class StreamDomain : std::uint32_t {
    increments = 0,
    initial = 1,
    initial_b = 2,
    sampling = 3,
    reference = 4,
    certification = 5,
};

/// Keyed Gaussian stream. A draw is addressed by
/// (master_seed, domain, replicate, step, particle); the numbers produced
/// for an address never depend on which other addresses were queried.
struct RngStream {
    std::uint64_t master_seed = 0;
    std::uint64_t replicate = 0;
    std::uint64_t step = 0;
    StreamDomain domain = StreamDomain::increments;

    RngStream at_step(std::uint64_t s) const noexcept {
        RngStream r = *this;
        r.step = s;
        return r;
    }
    RngStream in_domain(StreamDomain dom) const noexcept {
        RngStream r = *this;
        r.domain = dom;
        return r;
    }
    RngStream for_replicate(std::uint64_t rep) const noexcept {
        RngStream r = *this;
        r.replicate = rep;
        return r;
    }

    /// Four raw 32-bit words for block `block` of `particle`.
    PhiloxCounter raw_block(std::uint64_t particle, std::uint32_t block) const {
        if (particle > 0xFFFFFFFFull || step > 0xFFFFFFFFull || replicate > 0xFFFFFFFFull ||
            block > 0xFFFFFFu)
            throw InputError("RngStream: stream coordinate exceeds 32-bit counter range");
        const PhiloxCounter ctr{(static_cast<std::uint32_t>(domain) << 24) | block,
                                static_cast<std::uint32_t>(particle),
                                static_cast<std::uint32_t>(step),
                                static_cast<std::uint32_t>(replicate)};
        const PhiloxKey key{static_cast<std::uint32_t>(master_seed),
                            static_cast<std::uint32_t>(master_seed >> 32)};
        return philox4x32_10(ctr, key);
    }

    /// Fills `out` with i.i.d. N(0,1) draws for `particle` via Box-Muller.
    void standard_normals(std::uint64_t particle, std::span<double> out) const {
        const std::size_t n = out.size();
        for (std::size_t k = 0; k < n; k += 2) {
            const PhiloxCounter w = raw_block(particle, static_cast<std::uint32_t>(k / 2));
            const double u1 = to_open_unit(w[0], w[1]);
            const double u2 = to_open_unit(w[2], w[3]);
            const double radius = std::sqrt(-2.0 * std::log(u1));
            const double angle = 2.0 * std::numbers::pi * u2;
            out[k] = radius * std::cos(angle);
            if (k + 1 < n) out[k + 1] = radius * std::sin(angle);
        }
    }

    /// Fills `out` with i.i.d. U(0,1) draws for `particle`.
    void uniforms(std::uint64_t particle, std::span<double> out) const {
        const std::size_t n = out.size();
        for (std::size_t k = 0; k < n; k += 2) {
            const PhiloxCounter w = raw_block(particle, static_cast<std::uint32_t>(k / 2));
            out[k] = to_open_unit(w[0], w[1]);
            if (k + 1 < n) out[k + 1] = to_open_unit(w[2], w[3]);
        }
    }

    /// 53-bit uniform strictly inside (0, 1).
    static double to_open_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
        const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }
};

/// J x d matrix of N(0, dt) increments for particles 0..J-1 at `stream.step`.
inline Matrix brownian_increments(const RngStream& stream, std::size_t particles, std::size_t dim,
                                  double dt) {
    if (!(dt > 0.0)) throw InputError("brownian_increments: dt must be positive");
    Matrix dw(particles, dim);
    const double scale = std::sqrt(dt);
    for (std::size_t j = 0; j < particles; ++j) {
        auto row = dw.row(j);
        stream.standard_normals(j, row);
        for (double& x : row) x *= scale;
    }
    return dw;
}

}  // namespace cbo
