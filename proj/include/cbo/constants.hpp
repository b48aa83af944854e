#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cbo/dynamics.hpp"
#include "cbo/error.hpp"
#include "cbo/laws.hpp"
#include "cbo/objectives.hpp"

namespace cbo {

/// Method and problem parameters consumed by the closed-form constants,
/// plus the initial-law moments M_2, M_{2q}, m_8. The `_b` moments describe
/// the second initial law of the stability coupling; they default to the
/// first law's values when absent.
struct ProblemProfile {
    double alpha = 1.0;
    double sigma = 0.0;
    NoiseKind noise = NoiseKind::anisotropic;
    std::size_t dim = 1;
    double f_upper = 1.0;
    double f_lower = 0.0;
    double lipschitz = 1.0;

    double centered_m2 = 1.0;    ///< M_2(ρ̄_0)
    double centered_m2q = 3.0;   ///< M_{2q}(ρ̄_0) for the q of the report
    double raw_m8 = 105.0;       ///< m_8(ρ̄_0)
    std::optional<double> centered_m2_b;
    std::optional<double> centered_m2q_b;
    std::optional<double> raw_m8_b;

    /// Marcinkiewicz-Zygmund constants keyed by order p. Missing orders fall
    /// back to `default_c_mz` when `allow_default_c_mz` is set.
    std::map<double, double> c_mz;
    bool allow_default_c_mz = true;

    double tau() const noexcept { return noise_prefactor(noise, dim); }
    double spread() const noexcept { return alpha * (f_upper - f_lower); }

    void validate() const {
        if (!(f_upper >= f_lower)) throw ConfigError("profile: f_upper < f_lower");
        if (!(sigma >= 0.0) || !(alpha >= 0.0)) throw ConfigError("profile: sigma and alpha must be >= 0");
        if (dim == 0) throw ConfigError("profile: dimension must be positive");
        for (double m : {centered_m2, centered_m2q, raw_m8})
            if (!(m >= 0.0)) throw ConfigError("profile: moments must be nonnegative");
    }
};

/// Conventional Marcinkiewicz-Zygmund constant: 1 for p = 2, Burkholder's
/// (18 p^{3/2} / (p-1)^{1/2})^p for p > 2.
inline double default_c_mz(double p) {
    if (p == 2.0) return 1.0;
    if (p > 2.0) return std::pow(18.0 * std::pow(p, 1.5) / std::sqrt(p - 1.0), p);
    throw ConfigError("no default Marcinkiewicz-Zygmund constant for p < 2");
}

inline double c_mz(const ProblemProfile& prof, double p) {
    if (auto it = prof.c_mz.find(p); it != prof.c_mz.end()) return it->second;
    if (!prof.allow_default_c_mz)
        throw ConfigError("missing Marcinkiewicz-Zygmund constant c_MZ," + std::to_string(p));
    return default_c_mz(p);
}

/// Decay rate of the p-th centered moment,
/// λ_p = p [1 - (p - 2 + τ) σ² (1 + e^{α(f̄-f̲)/p})² / 2]. May be negative.
inline double lambda_p(const ProblemProfile& prof, double p) {
    if (!(p >= 2.0)) throw InputError("lambda_p: p must be >= 2");
    const double b = 1.0 + std::exp(prof.spread() / p);
    return p * (1.0 - 0.5 * (p - 2.0 + prof.tau()) * prof.sigma * prof.sigma * b * b);
}

/// Noise threshold σ̃ = sqrt(2 / ((6 + 3τ)(1 + e^{α(f̄-f̲)/2})²)).
inline double sigma_tilde(const ProblemProfile& prof) {
    const double b = 1.0 + std::exp(0.5 * prof.spread());
    return std::sqrt(2.0 / ((6.0 + 3.0 * prof.tau()) * b * b));
}

struct BdgConstants {
    double lower = 0.0;
    double upper = 0.0;
};

/// Burkholder-Davis-Gundy constants (c_p, C_p) for the p-th moment of the
/// running supremum of a stochastic integral.
inline BdgConstants bdg_constants(double p) {
    if (!(p > 0.0)) throw InputError("bdg_constants: p must be positive");
    if (p < 2.0) return {std::pow(p / 2.0, p), std::pow(32.0 / p, p / 2.0)};
    if (p == 2.0) return {1.0, 4.0};
    const double inner = std::pow(p, p + 1.0) / (2.0 * std::pow(p - 1.0, p - 1.0));
    return {std::pow(2.0 * p, -p / 2.0), std::pow(inner, p / 2.0)};
}

/// C_M = 2 α L_f e^{2α(f̄-f̲)}.
inline double c_m(const ProblemProfile& prof) {
    return 2.0 * prof.alpha * prof.lipschitz * std::exp(2.0 * prof.spread());
}

/// C_WM,p = c_MZ,p e^{pα(f̄-f̲)} (1 + e^{α(f̄-f̲)/p})^p.
inline double c_wm_p(const ProblemProfile& prof, double p) {
    if (!(p >= 2.0)) throw InputError("c_wm_p: p must be >= 2");
    return c_mz(prof, p) * std::exp(p * prof.spread()) * std::pow(1.0 + std::exp(prof.spread() / p), p);
}

/// Raw-moment constant 1 + (p/λ_p)(1 + σ sqrt(τ) C_BDG,p^{1/p})(1 + e^{α(f̄-f̲)/p}).
inline double c_raw_p(const ProblemProfile& prof, double p) {
    const double lam = lambda_p(prof, p);
    if (!(lam > 0.0))
        throw PreconditionError("c_raw_p: lambda_" + std::to_string(p) + " = " + std::to_string(lam) +
                                " is not positive");
    const double bdg = bdg_constants(p).upper;
    return 1.0 + (p / lam) * (1.0 + prof.sigma * std::sqrt(prof.tau()) * std::pow(bdg, 1.0 / p)) *
                     (1.0 + std::exp(prof.spread() / p));
}

namespace detail {

inline void require_bad_set_window(const ProblemProfile& prof, double q, double kappa) {
    if (!(q >= 2.0)) throw InputError("bad-set constants need q >= 2");
    const double lam2 = lambda_p(prof, 2.0);
    const double lam2q = lambda_p(prof, 2.0 * q);
    if (!(kappa < lam2) || !(q * kappa < lam2q))
        throw PreconditionError("bad-set constants need kappa < min(lambda_2, lambda_2q / q) = " +
                                std::to_string(std::min(lam2, lam2q / q)) +
                                ", got kappa = " + std::to_string(kappa));
}

}  // namespace detail

/// Excursion constant for the interacting particle system:
/// 2^{3q-1} c_MZ,2q + 2^{4q+1} C_BDG,q σ^q ((q-2)/(λ_2q - qκ))^{q/2-1}
///                     (1 + e^{α(f̄-f̲)})^{1/2} / (λ_2q - qκ), with 0^0 = 1.
inline double c_bad_particle(const ProblemProfile& prof, double q, double kappa) {
    detail::require_bad_set_window(prof, q, kappa);
    const double gap = lambda_p(prof, 2.0 * q) - q * kappa;
    const double base = (q - 2.0) / gap;
    const double power = (q == 2.0) ? 1.0 : std::pow(base, q / 2.0 - 1.0);
    return std::pow(2.0, 3.0 * q - 1.0) * c_mz(prof, 2.0 * q) +
           std::pow(2.0, 4.0 * q + 1.0) * bdg_constants(q).upper * std::pow(prof.sigma, q) * power *
               std::sqrt(1.0 + std::exp(prof.spread())) / gap;
}

/// Excursion constant for the synchronously coupled mean-field system. It
/// keeps the final 1/(λ_2q - κ) factor.
inline double c_bad_meanfield(const ProblemProfile& prof, double q, double kappa) {
    const double inner = c_bad_particle(prof, q, kappa);
    const double tau = prof.tau();
    const double s2 = prof.sigma * prof.sigma;
    const double lam2 = lambda_p(prof, 2.0);
    const double lam2q = lambda_p(prof, 2.0 * q);
    const double b = 1.0 + std::exp(0.5 * prof.spread());
    const double growth = 1.0 + 2.0 * s2 * tau / (lam2 - kappa) * b * b;
    return std::pow(1.5, q) * inner +
           std::pow(3.0, q) * c_wm_p(prof, 2.0 * q) * std::pow(2.0, q + 1.0) * std::pow(s2, q) *
               std::pow(tau, q) * std::pow(2.0 * (q - 1.0) / (lam2q - q * kappa), q - 1.0) *
               std::pow(growth, q) / (lam2q - kappa);
}

/// Every constant of the mean-field and stability estimates with its
/// intermediates. Optional fields are absent when their preconditions fail.
struct ConstantsReport {
    double q = 2.0;
    double tau = 1.0;
    double sigma_tilde = 0.0;
    std::map<double, double> lambda;   ///< λ_p for p in {2, 4, 8, 2q}
    double kappa = 0.0;                 ///< λ_8 / 8
    std::map<double, BdgConstants> bdg;
    std::map<double, double> c_mz;
    bool c_mz_defaulted = false;
    double c_m = 0.0;
    std::map<double, double> c_wm;

    bool subcritical = false;              ///< σ < σ̃
    bool lambda8_positive = false;
    bool lambda8_below_8lambda2 = false;
    bool q_kappa_below_lambda2q = false;
    bool kappa_below_lambda2 = false;

    std::optional<double> c_raw_8;
    std::optional<double> c_bad_particle;    ///< order q
    std::optional<double> c_bad_meanfield;   ///< order q
    std::optional<double> c_bad_meanfield_4;
    std::optional<double> c_q;
    std::optional<double> c_q_tilde;
    std::optional<double> c1, c2, c1_tilde, c2_tilde;
    std::optional<double> c_mfl, log_c_mfl;
    std::optional<double> c_stab1, c_stab2, log_c_stab1, log_c_stab2;
    double stability_exponent = 0.5;   ///< J-exponent of the stability remainder, q/4

    std::vector<std::string> notes;

    friend bool operator==(const ConstantsReport& a, const ConstantsReport& b);
};

inline bool operator==(const BdgConstants& a, const BdgConstants& b) {
    return a.lower == b.lower && a.upper == b.upper;
}

inline bool operator==(const ConstantsReport& a, const ConstantsReport& b) {
    return a.q == b.q && a.tau == b.tau && a.sigma_tilde == b.sigma_tilde && a.lambda == b.lambda &&
           a.kappa == b.kappa && a.bdg == b.bdg && a.c_mz == b.c_mz &&
           a.c_mz_defaulted == b.c_mz_defaulted && a.c_m == b.c_m && a.c_wm == b.c_wm &&
           a.subcritical == b.subcritical && a.lambda8_positive == b.lambda8_positive &&
           a.lambda8_below_8lambda2 == b.lambda8_below_8lambda2 &&
           a.q_kappa_below_lambda2q == b.q_kappa_below_lambda2q &&
           a.kappa_below_lambda2 == b.kappa_below_lambda2 && a.c_raw_8 == b.c_raw_8 &&
           a.c_bad_particle == b.c_bad_particle && a.c_bad_meanfield == b.c_bad_meanfield &&
           a.c_bad_meanfield_4 == b.c_bad_meanfield_4 && a.c_q == b.c_q &&
           a.c_q_tilde == b.c_q_tilde && a.c1 == b.c1 && a.c2 == b.c2 &&
           a.c1_tilde == b.c1_tilde && a.c2_tilde == b.c2_tilde && a.c_mfl == b.c_mfl &&
           a.log_c_mfl == b.log_c_mfl && a.c_stab1 == b.c_stab1 && a.c_stab2 == b.c_stab2 &&
           a.log_c_stab1 == b.log_c_stab1 && a.log_c_stab2 == b.log_c_stab2 &&
           a.stability_exponent == b.stability_exponent && a.notes == b.notes;
}

/// Evaluates the dependency chain κ -> C_bad -> C_Q -> (c_1, c_2) -> C_MFL
/// and C̃_Q -> (c̃_1, c̃_2) -> C_Stab. Supercritical profiles yield a partial
/// report carrying the failed flags.
inline ConstantsReport theorem_constants(const ProblemProfile& prof, double q) {
    prof.validate();
    if (!(q >= 2.0)) throw InputError("theorem_constants: q must be >= 2");
    ConstantsReport r;
    r.q = q;
    r.tau = prof.tau();
    r.sigma_tilde = sigma_tilde(prof);
    for (double p : {2.0, 4.0, 8.0, 2.0 * q}) r.lambda[p] = lambda_p(prof, p);
    r.kappa = r.lambda[8.0] / 8.0;
    for (double p : {2.0, 4.0, 8.0, q}) r.bdg[p] = bdg_constants(p);
    for (double p : {2.0, 8.0, 2.0 * q}) {
        r.c_mz[p] = c_mz(prof, p);
        if (!prof.c_mz.contains(p)) r.c_mz_defaulted = true;
        r.c_wm[p] = c_wm_p(prof, p);
    }
    r.c_m = c_m(prof);
    r.stability_exponent = q / 4.0;

    r.subcritical = prof.sigma < r.sigma_tilde;
    r.lambda8_positive = r.lambda[8.0] > 0.0;
    r.lambda8_below_8lambda2 = r.lambda[8.0] < 8.0 * r.lambda[2.0];
    r.q_kappa_below_lambda2q = q * r.kappa < r.lambda[2.0 * q];
    r.kappa_below_lambda2 = r.kappa < r.lambda[2.0];

    if (r.c_mz_defaulted)
        r.notes.push_back("c_MZ,p not supplied for some orders; conventional bound used (user-overridable)");
    r.notes.push_back("c_raw,p uses the factor p/lambda_p, not (p/lambda_p)^(1/p)");
    r.notes.push_back("C_Stab,1/2 use c~_1, c~_2, not c_1, c_2");
    r.notes.push_back("C_bad (mean-field variant) keeps the final 1/(lambda_2q - kappa) factor");

    if (r.subcritical && !(r.lambda8_positive && r.lambda8_below_8lambda2))
        throw std::logic_error("theorem_constants: sigma < sigma_tilde but 0 < lambda_8 < 8 lambda_2 fails");
    if (!r.subcritical) {
        r.notes.push_back("sigma >= sigma_tilde: downstream constants omitted");
        return r;
    }

    const double tau = r.tau;
    const double s2 = prof.sigma * prof.sigma;
    const double kappa = r.kappa;
    r.c_raw_8 = c_raw_p(prof, 8.0);
    if (r.q_kappa_below_lambda2q && r.kappa_below_lambda2) {
        r.c_bad_particle = c_bad_particle(prof, q, kappa);
        r.c_bad_meanfield = c_bad_meanfield(prof, q, kappa);
    } else {
        r.notes.push_back("q * kappa >= lambda_2q: order-q excursion constants omitted");
    }
    r.c_bad_meanfield_4 = c_bad_meanfield(prof, 4.0, kappa);

    const double cm2 = r.c_m * r.c_m;
    r.c_q = std::pow(2.0, 11.0) * std::sqrt(*r.c_bad_meanfield_4) * (*r.c_raw_8) * (*r.c_raw_8) *
            (prof.raw_m8 + 1.0);
    r.c1 = (2.0 * cm2 * (*r.c_q) * (1.0 + 2.0 * tau * s2) + 2.0) / kappa;
    r.c2 = (2.0 * cm2 * (*r.c_q) + r.c_wm[2.0] * prof.centered_m2) * (1.0 + 2.0 * tau * s2) / kappa;
    r.c_mfl = std::exp(2.0 * (*r.c1)) * 2.0 * (*r.c2);
    r.log_c_mfl = 2.0 * (*r.c1) + std::log(2.0 * (*r.c2));

    if (r.c_bad_meanfield) {
        const double m2b = prof.centered_m2_b.value_or(prof.centered_m2);
        const double m2qb = prof.centered_m2q_b.value_or(prof.centered_m2q);
        const double m8b = prof.raw_m8_b.value_or(prof.raw_m8);
        const double craw4 = std::pow(*r.c_raw_8, 4.0);
        r.c_q_tilde = std::pow(std::sqrt(2.0), 9.0) * std::sqrt(*r.c_bad_meanfield) * craw4 *
                          std::sqrt(prof.centered_m2q + m2qb) * std::sqrt(prof.raw_m8 + m8b) +
                      (prof.centered_m2 + m2b) + 2.0;
        r.c1_tilde = 1.0 + 2.0 * cm2 * (*r.c_q_tilde) * (1.0 + tau * s2);
        r.c2_tilde = 2.0 * cm2 * (*r.c_q_tilde) * (1.0 + tau * s2);
        const double lam8 = r.lambda[8.0];
        r.log_c_stab1 = 16.0 * (*r.c1_tilde) / lam8;
        r.c_stab1 = std::exp(*r.log_c_stab1);
        r.c_stab2 = 16.0 * (*r.c2_tilde) / lam8 * (*r.c_stab1);
        r.log_c_stab2 = std::log(16.0 * (*r.c2_tilde) / lam8) + *r.log_c_stab1;
    }
    return r;
}

/// Profile with analytic initial-law moments for the order-q report.
inline ProblemProfile make_profile(const Objective& obj, const CboParams& params, const InitialLaw& law,
                                   double q, const InitialLaw* law_b = nullptr) {
    ProblemProfile p;
    p.alpha = params.alpha;
    p.sigma = params.sigma;
    p.noise = params.noise;
    p.dim = obj.dimension();
    p.f_upper = obj.upper_bound();
    p.f_lower = obj.lower_bound();
    p.lipschitz = obj.lipschitz();
    p.centered_m2 = law_centered_moment(law, 2.0);
    p.centered_m2q = law_centered_moment(law, 2.0 * q);
    p.raw_m8 = law_raw_moment(law, 8.0);
    if (law_b) {
        p.centered_m2_b = law_centered_moment(*law_b, 2.0);
        p.centered_m2q_b = law_centered_moment(*law_b, 2.0 * q);
        p.raw_m8_b = law_raw_moment(*law_b, 8.0);
    }
    return p;
}

// JSON round trip. Non-finite numbers are written as the strings "inf",
// "-inf" and "nan" so that overflowing constants survive serialization.

namespace detail {

inline nlohmann::json number_to_json(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline double number_from_json(const nlohmann::json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        throw InputError("expected a number, got '" + s + "'");
    }
    return j.get<double>();
}

inline nlohmann::json optional_to_json(const std::optional<double>& v) {
    return v ? number_to_json(*v) : nlohmann::json(nullptr);
}

inline std::optional<double> optional_from_json(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    return number_from_json(j);
}

inline nlohmann::json order_map_to_json(const std::map<double, double>& m) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [p, v] : m) out.push_back({{"p", p}, {"value", number_to_json(v)}});
    return out;
}

inline std::map<double, double> order_map_from_json(const nlohmann::json& j) {
    std::map<double, double> m;
    for (const auto& e : j) m[e.at("p").get<double>()] = number_from_json(e.at("value"));
    return m;
}

}  // namespace detail

inline nlohmann::json to_json(const ConstantsReport& r) {
    using detail::number_to_json;
    using detail::optional_to_json;
    nlohmann::json bdg = nlohmann::json::array();
    for (const auto& [p, b] : r.bdg)
        bdg.push_back({{"p", p}, {"lower", number_to_json(b.lower)}, {"upper", number_to_json(b.upper)}});
    return {
        {"q", r.q},
        {"tau", r.tau},
        {"sigma_tilde", number_to_json(r.sigma_tilde)},
        {"lambda", detail::order_map_to_json(r.lambda)},
        {"kappa", number_to_json(r.kappa)},
        {"bdg", bdg},
        {"c_mz", detail::order_map_to_json(r.c_mz)},
        {"c_mz_defaulted", r.c_mz_defaulted},
        {"c_m", number_to_json(r.c_m)},
        {"c_wm", detail::order_map_to_json(r.c_wm)},
        {"subcritical", r.subcritical},
        {"lambda8_positive", r.lambda8_positive},
        {"lambda8_below_8lambda2", r.lambda8_below_8lambda2},
        {"q_kappa_below_lambda2q", r.q_kappa_below_lambda2q},
        {"kappa_below_lambda2", r.kappa_below_lambda2},
        {"c_raw_8", optional_to_json(r.c_raw_8)},
        {"c_bad_particle", optional_to_json(r.c_bad_particle)},
        {"c_bad_meanfield", optional_to_json(r.c_bad_meanfield)},
        {"c_bad_meanfield_4", optional_to_json(r.c_bad_meanfield_4)},
        {"c_q", optional_to_json(r.c_q)},
        {"c_q_tilde", optional_to_json(r.c_q_tilde)},
        {"c1", optional_to_json(r.c1)},
        {"c2", optional_to_json(r.c2)},
        {"c1_tilde", optional_to_json(r.c1_tilde)},
        {"c2_tilde", optional_to_json(r.c2_tilde)},
        {"c_mfl", optional_to_json(r.c_mfl)},
        {"log_c_mfl", optional_to_json(r.log_c_mfl)},
        {"c_stab1", optional_to_json(r.c_stab1)},
        {"c_stab2", optional_to_json(r.c_stab2)},
        {"log_c_stab1", optional_to_json(r.log_c_stab1)},
        {"log_c_stab2", optional_to_json(r.log_c_stab2)},
        {"stability_exponent", r.stability_exponent},
        {"notes", r.notes},
    };
}

inline ConstantsReport constants_report_from_json(const nlohmann::json& j) {
    using detail::number_from_json;
    using detail::optional_from_json;
    ConstantsReport r;
    r.q = j.at("q").get<double>();
    r.tau = j.at("tau").get<double>();
    r.sigma_tilde = number_from_json(j.at("sigma_tilde"));
    r.lambda = detail::order_map_from_json(j.at("lambda"));
    r.kappa = number_from_json(j.at("kappa"));
    for (const auto& e : j.at("bdg"))
        r.bdg[e.at("p").get<double>()] = {number_from_json(e.at("lower")), number_from_json(e.at("upper"))};
    r.c_mz = detail::order_map_from_json(j.at("c_mz"));
    r.c_mz_defaulted = j.at("c_mz_defaulted").get<bool>();
    r.c_m = number_from_json(j.at("c_m"));
    r.c_wm = detail::order_map_from_json(j.at("c_wm"));
    r.subcritical = j.at("subcritical").get<bool>();
    r.lambda8_positive = j.at("lambda8_positive").get<bool>();
    r.lambda8_below_8lambda2 = j.at("lambda8_below_8lambda2").get<bool>();
    r.q_kappa_below_lambda2q = j.at("q_kappa_below_lambda2q").get<bool>();
    r.kappa_below_lambda2 = j.at("kappa_below_lambda2").get<bool>();
    r.c_raw_8 = optional_from_json(j.at("c_raw_8"));
    r.c_bad_particle = optional_from_json(j.at("c_bad_particle"));
    r.c_bad_meanfield = optional_from_json(j.at("c_bad_meanfield"));
    r.c_bad_meanfield_4 = optional_from_json(j.at("c_bad_meanfield_4"));
    r.c_q = optional_from_json(j.at("c_q"));
    r.c_q_tilde = optional_from_json(j.at("c_q_tilde"));
    r.c1 = optional_from_json(j.at("c1"));
    r.c2 = optional_from_json(j.at("c2"));
    r.c1_tilde = optional_from_json(j.at("c1_tilde"));
    r.c2_tilde = optional_from_json(j.at("c2_tilde"));
    r.c_mfl = optional_from_json(j.at("c_mfl"));
    r.log_c_mfl = optional_from_json(j.at("log_c_mfl"));
    r.c_stab1 = optional_from_json(j.at("c_stab1"));
    r.c_stab2 = optional_from_json(j.at("c_stab2"));
    r.log_c_stab1 = optional_from_json(j.at("log_c_stab1"));
    r.log_c_stab2 = optional_from_json(j.at("log_c_stab2"));
    r.stability_exponent = j.at("stability_exponent").get<double>();
    r.notes = j.at("notes").get<std::vector<std::string>>();
    return r;
}

/// Human-readable listing of the report.
inline std::string to_text(const ConstantsReport& r) {
    std::string s;
    auto line = [&s](const std::string& k, const std::string& v) { s += k + " = " + v + "\n"; };
    auto num = [](double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.10g", v);
        return std::string(buf);
    };
    auto opt = [&num](const std::optional<double>& v) { return v ? num(*v) : std::string("(omitted)"); };
    line("q", num(r.q));
    line("tau(S)", num(r.tau));
    line("sigma_tilde", num(r.sigma_tilde));
    for (const auto& [p, v] : r.lambda) line("lambda_" + num(p), num(v));
    line("kappa = lambda_8/8", num(r.kappa));
    for (const auto& [p, b] : r.bdg) line("BDG_" + num(p) + " (lower, upper)", num(b.lower) + ", " + num(b.upper));
    for (const auto& [p, v] : r.c_mz) line("c_MZ," + num(p), num(v));
    line("C_M", num(r.c_m));
    for (const auto& [p, v] : r.c_wm) line("C_WM," + num(p), num(v));
    line("sigma < sigma_tilde", r.subcritical ? "true" : "false");
    line("lambda_8 > 0", r.lambda8_positive ? "true" : "false");
    line("lambda_8 < 8 lambda_2", r.lambda8_below_8lambda2 ? "true" : "false");
    line("q kappa < lambda_2q", r.q_kappa_below_lambda2q ? "true" : "false");
    line("c_raw,8", opt(r.c_raw_8));
    line("C_bad (particle, q)", opt(r.c_bad_particle));
    line("C_bad (mean-field, q)", opt(r.c_bad_meanfield));
    line("C_bad (mean-field, 4)", opt(r.c_bad_meanfield_4));
    line("C_Q", opt(r.c_q));
    line("C~_Q", opt(r.c_q_tilde));
    line("c_1", opt(r.c1));
    line("c_2", opt(r.c2));
    line("C_MFL", opt(r.c_mfl));
    line("log C_MFL", opt(r.log_c_mfl));
    line("c~_1", opt(r.c1_tilde));
    line("c~_2", opt(r.c2_tilde));
    line("C_Stab,1", opt(r.c_stab1));
    line("C_Stab,2", opt(r.c_stab2));
    line("log C_Stab,1", opt(r.log_c_stab1));
    line("log C_Stab,2", opt(r.log_c_stab2));
    for (const auto& n : r.notes) s += "note: " + n + "\n";
    return s;
}

}  // namespace cbo
