#include "brownpoly/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace brownpoly {

namespace {

// Below this the argument is shifted upward with the recurrences; at and
// above it the truncated asymptotic series is accurate to a few ulp.
constexpr double kAsymptoticThreshold = 8.0;

void require_positive(double x, const char* what)
{
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw std::domain_error(std::string(what) + ": argument must be positive and finite, got "
                                + std::to_string(x));
    }
}

double digamma_asymptotic(double x)
{
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    // Bernoulli terms B_2k / (2k x^2k), k = 1..8, Horner in 1/x^2.
    const double series =
        inv2
        * (1.0 / 12.0
           - inv2
                 * (1.0 / 120.0
                    - inv2
                          * (1.0 / 252.0
                             - inv2
                                   * (1.0 / 240.0
                                      - inv2
                                            * (1.0 / 132.0
                                               - inv2 * (691.0 / 32760.0 - inv2 * (1.0 / 12.0 - inv2 * 3617.0 / 8160.0)))))));
    return std::log(x) - 0.5 * inv - series;
}

double trigamma_asymptotic(double x)
{
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    // B_2k / x^(2k+1), k = 1..8.
    const double series =
        inv2 * inv
        * (1.0 / 6.0
           - inv2
                 * (1.0 / 30.0
                    - inv2
                          * (1.0 / 42.0
                             - inv2
                                   * (1.0 / 30.0
                                      - inv2
                                            * (5.0 / 66.0
                                               - inv2 * (691.0 / 2730.0 - inv2 * (7.0 / 6.0 - inv2 * 3617.0 / 510.0)))))));
    return inv + 0.5 * inv2 + series;
}

// Only feeds the Newton step of inv_trigamma, so a short expansion suffices.
double tetragamma(double x)
{
    double acc = 0.0;
    while (x < kAsymptoticThreshold) {
        acc -= 2.0 / (x * x * x);
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    const double asym = -inv2 - inv2 * inv - 0.5 * inv2 * inv2 + inv2 * inv2 * inv2 / 6.0
                        - inv2 * inv2 * inv2 * inv2 / 6.0;
    return acc + asym;
}

} // namespace

double digamma(double x)
{
    require_positive(x, "digamma");
    double acc = 0.0;
    while (x < kAsymptoticThreshold) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    return acc + digamma_asymptotic(x);
}

double trigamma(double x)
{
    require_positive(x, "trigamma");
    double acc = 0.0;
    while (x < kAsymptoticThreshold) {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    return acc + trigamma_asymptotic(x);
}

double inv_trigamma(double tau)
{
    require_positive(tau, "inv_trigamma");

    // trigamma(theta) ~ 1/theta + 1/(2 theta^2) for large theta and ~ 1/theta^2
    // for small theta; the positive root of tau theta^2 - theta - 1/2 covers both.
    const double guess = (1.0 + std::sqrt(1.0 + 2.0 * tau)) / (2.0 * tau);
    double lo = guess;
    double hi = guess;
    while (trigamma(lo) < tau) lo *= 0.5;
    while (trigamma(hi) > tau) hi *= 2.0;

    const double ftol = 1e-14 * std::max(1.0, tau);
    double theta = std::clamp(guess, lo, hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double f = trigamma(theta) - tau;
        if (std::abs(f) <= ftol) return theta;
        // f is decreasing: f > 0 means the root lies above theta.
        if (f > 0.0) lo = theta; else hi = theta;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return theta;

        double next = theta - f / tetragamma(theta);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        theta = next;
    }
    throw std::runtime_error("inv_trigamma: no convergence within 200 iterations for tau = "
                             + std::to_string(tau));
}

double free_energy_density(double beta)
{
    require_positive(beta, "free_energy_density");
    const double tau = beta * beta;
    const double theta = inv_trigamma(tau);
    return theta * tau - digamma(theta) - 2.0 * std::log(beta);
}

double free_energy_per_level(double theta)
{
    return theta * trigamma(theta) - digamma(theta);
}

double characteristic_time(std::int64_t n, double theta)
{
    if (n < 1) throw std::domain_error("characteristic_time: n must be >= 1");
    return static_cast<double>(n) * trigamma(theta);
}

namespace {

constexpr double kIncGammaEps = 1e-16;
constexpr int kIncGammaMaxIter = 10000;

double log_prefactor(double a, double x)
{
    return -x + a * std::log(x) - std::lgamma(a);
}

double lower_series(double a, double x)
{
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int i = 0; i < kIncGammaMaxIter; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kIncGammaEps) break;
    }
    return sum * std::exp(log_prefactor(a, x));
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
double upper_fraction(double a, double x)
{
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kIncGammaMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kIncGammaEps) break;
    }
    return std::exp(log_prefactor(a, x)) * h;
}

} // namespace

double gamma_p(double a, double x)
{
    require_positive(a, "gamma_p");
    if (x < 0.0 || std::isnan(x)) throw std::domain_error("gamma_p: x must be >= 0");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < a + 1.0) return lower_series(a, x);
    return 1.0 - upper_fraction(a, x);
}

double gamma_q(double a, double x)
{
    require_positive(a, "gamma_q");
    if (x < 0.0 || std::isnan(x)) throw std::domain_error("gamma_q: x must be >= 0");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return 1.0 - lower_series(a, x);
    return upper_fraction(a, x);
}

CharacteristicPoint CharacteristicPoint::from_theta(double theta)
{
    require_positive(theta, "CharacteristicPoint::from_theta");
    const double tau = trigamma(theta);
    return {theta, tau, std::sqrt(tau)};
}

CharacteristicPoint CharacteristicPoint::from_tau(double tau)
{
    return {inv_trigamma(tau), tau, std::sqrt(tau)};
}

CharacteristicPoint CharacteristicPoint::from_beta(double beta)
{
    require_positive(beta, "CharacteristicPoint::from_beta");
    const double tau = beta * beta;
    return {inv_trigamma(tau), tau, beta};
}

} // namespace brownpoly
