#pragma once

#include <cstdint>

namespace brownpoly {

/// Digamma function, the logarithmic derivative of Gamma.
/// Throws std::domain_error for x <= 0 or non-finite x.
double digamma(double x);

/// Trigamma function, the derivative of digamma. Strictly decreasing on x > 0.
double trigamma(double x);

/// Inverse of trigamma on (0, inf): the unique theta with trigamma(theta) == tau.
///
/// Bracketed Newton iteration; the bracket is seeded from the large- and
/// small-argument asymptotics and widened until it contains the root. Throws
/// std::runtime_error if the iteration cap (200) is reached.
double inv_trigamma(double tau);

/// Limiting free energy density p(beta) of the point-to-point polymer,
/// evaluated at its minimizer theta = inv_trigamma(beta^2):
///   p(beta) = theta * beta^2 - digamma(theta) - 2 log(beta).
double free_energy_density(double beta);

/// Per-level limit of n^-1 log Z_{1,n}(0, n tau) where tau = trigamma(theta):
///   theta * trigamma(theta) - digamma(theta).
double free_energy_per_level(double theta);

/// Center of the characteristic window: n * trigamma(theta).
double characteristic_time(std::int64_t n, double theta);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

/// CDF of Gamma(shape, 1).
inline double gamma_cdf(double shape, double x) { return x <= 0.0 ? 0.0 : gamma_p(shape, x); }

/// Boundary parameter, time-per-level and inverse temperature tied together by
/// tau = trigamma(theta) = beta^2.
struct CharacteristicPoint {
    double theta = 1.0;
    double tau = 0.0;
    double beta = 0.0;

    static CharacteristicPoint from_theta(double theta);
    static CharacteristicPoint from_tau(double tau);
    static CharacteristicPoint from_beta(double beta);
};

} // namespace brownpoly
