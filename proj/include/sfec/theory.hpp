#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sfec/errors.hpp"
#include "sfec/tap_vector.hpp"

namespace sfec::theory {

// ---------------------------------------------------------------------------
// Conditional step-size ratio beta = E[e^2 / (e^2 + lambda)], e ~ N(0, s2).
// Depends on lambda and s2 only through r = lambda / s2.
// ---------------------------------------------------------------------------

/// beta as a function of r = lambda / sigma_e^2 > 0.
///
/// For x = sqrt(r/2) <= 6 this is 1 - sqrt(pi) x exp(x^2) erfc(x), evaluated
/// with the scaled product so nothing overflows. Beyond that the subtraction
/// cancels badly, and beta is summed from its asymptotic series
/// 1/r - 3/r^2 + 15/r^3 - ... , truncated at the smallest term.
inline double beta_of_ratio(double r) {
    if (!(r > 0.0) || std::isnan(r)) throw ValidationError("beta: ratio lambda/sigma_e^2 must be > 0");
    if (std::isinf(r)) return 0.0;
    const double x = std::sqrt(0.5 * r);
    if (x <= 6.0) {
        const double erfcx = std::exp(x * x) * std::erfc(x);
        return 1.0 - std::sqrt(std::numbers::pi) * x * erfcx;
    }
    double term = 1.0 / r;
    double sum = term;
    for (int k = 1; k < 200; ++k) {
        const double next = -term * (2.0 * k + 1.0) / r;
        if (std::abs(next) >= std::abs(term) || std::abs(next) < 1e-18 * std::abs(sum)) break;
        sum += next;
        term = next;
    }
    return sum;
}

inline double beta_closed_form(double lambda, double sigma_e_sq) {
    if (!(lambda > 0.0)) throw ValidationError("beta_closed_form: lambda must be > 0");
    if (!(sigma_e_sq > 0.0)) throw ValidationError("beta_closed_form: sigma_e^2 must be > 0");
    return beta_of_ratio(lambda / sigma_e_sq);
}

/// The same expectation by adaptive Gauss-Kronrod quadrature over the
/// Gaussian density; the independent route for beta_closed_form.
/// lambda == 0 gives exactly 1.
inline double beta_quadrature(double lambda, double sigma_e_sq, double tol = 1e-13) {
    if (lambda < 0.0 || std::isnan(lambda)) throw ValidationError("beta_quadrature: lambda must be >= 0");
    if (!(sigma_e_sq > 0.0)) throw ValidationError("beta_quadrature: sigma_e^2 must be > 0");
    if (lambda == 0.0) return 1.0;
    const double r = lambda / sigma_e_sq;
    const double norm = std::sqrt(2.0 / std::numbers::pi);
    // 1 - beta = 2 * int_0^inf r / (u^2 + r) phi(u) du, smooth and positive.
    auto integrand = [r, norm](double u) { return norm * r / (u * u + r) * std::exp(-0.5 * u * u); };
    double err = 0.0;
    const double complement = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, 0.0, std::numeric_limits<double>::infinity(), 20, tol, &err);
    if (!(err <= 1e-9)) throw ConvergenceError("beta_quadrature did not converge", err);
    return 1.0 - complement;
}

// ---------------------------------------------------------------------------
// Steady-state MSE
// ---------------------------------------------------------------------------

/// sigma_e^2 = sigma_n^2 + sigma_x^2 * D
inline double conditional_error_var(double sigma_n_sq, double sigma_x_sq, double d) {
    return sigma_n_sq + sigma_x_sq * d;
}

/// Steady-state MSE of fixed-step LMS, white input.
inline double lms_steady_mse(double mu_s, std::size_t n_len, double sigma_n_sq, double sigma_x_sq) {
    if (!(mu_s > 0.0)) throw ValidationError("lms_steady_mse: mu_s must be > 0");
    const double n = static_cast<double>(n_len);
    const double denom = 2.0 - mu_s * sigma_x_sq * (n + 2.0);
    if (!(denom > 0.0))
        throw StabilityError("step-size " + std::to_string(mu_s) + " violates mu < 2/((N+2) sigma_x^2)");
    return mu_s * n * sigma_n_sq / denom;
}

struct SteadyStateInput {
    double mu = 0.04;
    double lambda = 0.8;
    std::size_t n_len = 16;
    std::size_t k_sparsity = 2;
    double sigma_x_sq = 1.0;
    double sigma_n_sq = 0.1;
    double gamma_za = 0.0;
};

struct SteadyStateReport {
    double beta_inf = 0.0;
    double d_predicted = 0.0;
    double sigma_e_sq_inf = 0.0;
    std::size_t iterations_to_converge = 0;
    double residual = 0.0;
};

struct FixedPointOptions {
    double damping = 0.5;
    double tol = 1e-12;
    std::size_t max_iter = 10000;
    std::optional<double> initial;  // defaults to the LMS value at step mu
};

/// Largest step for which the closed forms hold: 2 / ((N+2) sigma_x^2).
inline double stability_bound(std::size_t n_len, double sigma_x_sq) {
    return 2.0 / ((static_cast<double>(n_len) + 2.0) * sigma_x_sq);
}

inline void validate(const SteadyStateInput& in) {
    if (!(in.mu > 0.0)) throw ValidationError("mu must be > 0");
    if (!(in.lambda > 0.0)) throw ValidationError("lambda must be > 0");
    if (in.n_len < 1) throw ValidationError("n_len must be >= 1");
    if (in.k_sparsity < 1 || in.k_sparsity > in.n_len)
        throw ValidationError("k_sparsity must lie in [1, n_len]");
    if (!(in.sigma_x_sq > 0.0)) throw ValidationError("sigma_x^2 must be > 0");
    if (!(in.sigma_n_sq >= 0.0)) throw ValidationError("sigma_n^2 must be >= 0");
    if (!(in.gamma_za >= 0.0)) throw ValidationError("gamma_za must be >= 0");
    if (!(in.mu < stability_bound(in.n_len, in.sigma_x_sq)))
        throw StabilityError("step-size " + std::to_string(in.mu) + " violates mu < 2/((N+2) sigma_x^2)");
}

/// mu beta T sigma_n^2 / (2 - mu beta (N+2) sigma_x^2) with T active taps.
/// T = N is the full LMS/F value, T = K the known-support value; sharing the
/// expression keeps the two exactly proportional.
inline double mse_at_beta(double beta, std::size_t active_taps, const SteadyStateInput& in) {
    const double mb = in.mu * beta;
    const double denom = 2.0 - mb * (static_cast<double>(in.n_len) + 2.0) * in.sigma_x_sq;
    if (!(denom > 0.0)) throw StabilityError("effective step mu*beta outside the stability region");
    return mb * static_cast<double>(active_taps) * in.sigma_n_sq / denom;
}

namespace detail {
inline double beta_at(const SteadyStateInput& in, double d) {
    const double s2 = conditional_error_var(in.sigma_n_sq, in.sigma_x_sq, d);
    return s2 > 0.0 ? beta_closed_form(in.lambda, s2) : 0.0;
}
}  // namespace detail

/// Solves D = F(D), F(D) = mse_at_beta(beta(lambda / (sigma_n^2 + sigma_x^2 D)), N)
/// by damped iteration.
inline SteadyStateReport lmsf_steady_mse(const SteadyStateInput& in, const FixedPointOptions& opt = {}) {
    validate(in);
    auto f = [&](double d) { return mse_at_beta(detail::beta_at(in, d), in.n_len, in); };

    double d = opt.initial.value_or(lms_steady_mse(in.mu, in.n_len, in.sigma_n_sq, in.sigma_x_sq));
    double fd = f(d);
    std::size_t it = 0;
    while (std::abs(d - fd) > opt.tol) {
        if (it >= opt.max_iter) throw ConvergenceError("LMS/F steady-state fixed point", std::abs(d - fd));
        d = (1.0 - opt.damping) * d + opt.damping * fd;
        fd = f(d);
        ++it;
    }
    // Report F(d) so that d_predicted is exactly mse_at_beta(beta_inf, N).
    SteadyStateReport rep;
    rep.beta_inf = detail::beta_at(in, d);
    rep.d_predicted = fd;
    rep.sigma_e_sq_inf = conditional_error_var(in.sigma_n_sq, in.sigma_x_sq, d);
    rep.iterations_to_converge = it;
    rep.residual = std::abs(d - fd);
    return rep;
}

/// Known-support steady-state MSE at the LMS/F fixed point's beta.
inline double oracle_steady_mse(const SteadyStateInput& in, const FixedPointOptions& opt = {}) {
    const auto rep = lmsf_steady_mse(in, opt);
    return mse_at_beta(rep.beta_inf, in.k_sparsity, in);
}

/// Steady-state MSE bound of ZA-LMS/F as a function of gamma_za.
///
/// Delta_N = 2 - (N+2) mu beta sigma_x^2 is assumed (by analogy with
/// Delta_K), and gamma^2 multiplies the whole last numerator so the bound
/// returns the LMS/F value at gamma = 0. Only the gamma -> 0 limit and the
/// existence of an improving gamma are meaningful; the absolute numbers
/// are not a validated prediction.
inline double za_steady_mse_bound(const SteadyStateInput& in, const FixedPointOptions& opt = {}) {
    const auto rep = lmsf_steady_mse(in, opt);
    const double g = in.gamma_za;
    if (g == 0.0) return rep.d_predicted;

    const double pi = std::numbers::pi;
    const double n = static_cast<double>(in.n_len);
    const double k = static_cast<double>(in.k_sparsity);
    const double mb = in.mu * rep.beta_inf;
    const double sx2 = in.sigma_x_sq;

    const double d_mu = 1.0 - mb;
    const double d_k = 2.0 - (k + 2.0) * mb * sx2;
    const double d_n = 2.0 - (n + 2.0) * mb * sx2;

    const double p = 8.0 * g * g * d_k * d_k * d_mu * d_mu / pi +
                     16.0 * mb * sx2 * d_n * d_mu * d_mu * (g * g * (k + 1.0) + mb * mb * sx2 * in.sigma_n_sq);
    if (p < 0.0) throw StabilityError("ZA bound discriminant is negative");

    const double denom = mb * mb * sx2 * sx2 * d_n * d_n;
    const double linear = g * (n - k) * std::sqrt(p) / (std::sqrt(2.0 * pi) * denom);
    const double quadratic =
        g * g * (2.0 * (n - k) * d_mu * d_k + pi * d_n * (mb * sx2 + 2.0 * k * d_mu)) / (pi * denom);
    return rep.d_predicted - linear + quadratic;
}

/// Predicted steady-state mean offset of ZA-LMS/F under white input
/// (R = sigma_x^2 I): -(gamma / (mu beta sigma_x^2)) E[sgn(w)].
inline TapVector za_mean_bias(double gamma_za, double mu, double beta_inf, double sigma_x_sq,
                              const TapVector& expected_sign) {
    if (!(beta_inf > 0.0 && beta_inf <= 1.0)) throw ValidationError("beta_inf must lie in (0, 1]");
    if (!(sigma_x_sq > 0.0)) throw ValidationError("sigma_x^2 must be > 0");
    if (!(mu > 0.0)) throw ValidationError("mu must be > 0");
    const double scale = gamma_za / (mu * beta_inf * sigma_x_sq);
    TapVector bias(expected_sign.size());
    for (std::size_t i = 0; i < bias.size(); ++i) bias[i] = -scale * expected_sign[i];
    return bias;
}

}  // namespace sfec::theory
