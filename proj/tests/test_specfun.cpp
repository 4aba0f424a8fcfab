#include "oracles.hpp"

#include "brownpoly/specfun.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

using namespace brownpoly;

namespace {

// Mixed tolerance: absolute below magnitude one, relative above it. Near
// x = 1e-3 trigamma is ~1e6, where a double cannot resolve 1e-12 absolute.
bool close(double got, long double want, double tol)
{
    return std::abs(static_cast<long double>(got) - want) <= tol * std::max<long double>(1.0L, std::abs(want));
}

} // namespace

TEST_CASE("digamma known values")
{
    CHECK(digamma(1.0) == doctest::Approx(-0.5772156649015329).epsilon(1e-15));
    CHECK(digamma(2.0) == doctest::Approx(0.4227843350984671).epsilon(1e-15));
    CHECK(std::abs(digamma(0.5) - (-std::numbers::egamma - 2 * std::numbers::ln2)) < 1e-13);
}

TEST_CASE("digamma recurrence")
{
    for (double x : {1e-3, 0.1, 0.7, 1.0, 3.3, 12.5, 150.0, 1e4}) {
        CHECK(std::abs(digamma(x + 1) - digamma(x) - 1 / x) <= 1e-12 * std::max(1.0, 1 / x));
    }
}

TEST_CASE("trigamma known values and recurrence")
{
    CHECK(trigamma(1.0) == doctest::Approx(std::numbers::pi * std::numbers::pi / 6).epsilon(1e-15));
    CHECK(trigamma(0.5) == doctest::Approx(4.934802200544679).epsilon(1e-15));
    for (double x : {1e-3, 0.1, 0.7, 1.0, 3.3, 12.5, 150.0, 1e4}) {
        CHECK(std::abs(trigamma(x) - trigamma(x + 1) - 1 / (x * x)) <= 1e-12 * std::max(1.0, 1 / (x * x)));
    }
}

TEST_CASE("digamma and trigamma against the series oracle")
{
    for (int i = 0; i <= 400; ++i) {
        const double x = std::pow(10.0, -3.0 + 9.0 * i / 400.0); // 1e-3 .. 1e6
        CHECK(close(digamma(x), oracle::digamma(x), 1e-12));
        CHECK(close(trigamma(x), oracle::trigamma(x), 1e-12));
    }
}

TEST_CASE("trigamma is strictly decreasing")
{
    double prev = trigamma(1e-3);
    for (int i = 1; i <= 200; ++i) {
        const double v = trigamma(1e-3 * std::pow(1e9, i / 200.0));
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("domain errors")
{
    CHECK_THROWS_AS(digamma(0.0), std::domain_error);
    CHECK_THROWS_AS(digamma(-1.5), std::domain_error);
    CHECK_THROWS_AS(digamma(std::nan("")), std::domain_error);
    CHECK_THROWS_AS(trigamma(0.0), std::domain_error);
    CHECK_THROWS_AS(inv_trigamma(0.0), std::domain_error);
    CHECK_THROWS_AS(inv_trigamma(-2.0), std::domain_error);
    CHECK_THROWS_AS(free_energy_density(0.0), std::domain_error);
    CHECK_THROWS_AS(characteristic_time(0, 1.0), std::domain_error);
}

TEST_CASE("inv_trigamma round trips")
{
    CHECK(inv_trigamma(trigamma(2.5)) == doctest::Approx(2.5).epsilon(1e-9));
    CHECK(inv_trigamma(1.6449340668482264) == doctest::Approx(1.0).epsilon(1e-9));
    for (double tau : {1e-4, 0.01, 0.3, 1.0, 2.0, 10.0, 1e3, 1e5}) {
        const double theta = inv_trigamma(tau);
        CHECK(std::abs(trigamma(theta) - tau) <= 1e-10 * std::max(1.0, tau));
    }
}

TEST_CASE("inv_trigamma at tau = 1 matches bisection on the series")
{
    long double lo = 0.5L, hi = 3.0L;
    for (int it = 0; it < 200; ++it) {
        const long double mid = (lo + hi) / 2;
        (oracle::trigamma(mid) > 1.0L ? lo : hi) = mid;
    }
    CHECK(std::abs(inv_trigamma(1.0) - static_cast<double>(lo)) < 1e-10);
}

TEST_CASE("free energy: infimum form equals the theta form")
{
    for (double beta : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        const long double b2 = static_cast<long double>(beta) * beta;
        const long double inf = oracle::golden_min([&](long double t) { return t * b2 - oracle::digamma(t); }, 1e-6L, 200.0L);
        const long double p = inf - 2 * std::log(static_cast<long double>(beta));
        CHECK(std::abs(free_energy_density(beta) - static_cast<double>(p)) < 1e-10);
        const double theta = inv_trigamma(beta * beta);
        CHECK(free_energy_per_level(theta) == doctest::Approx(free_energy_density(beta) + 2 * std::log(beta)).epsilon(1e-12));
    }
}

TEST_CASE("characteristic time and point")
{
    CHECK(characteristic_time(1, 0.7) == doctest::Approx(trigamma(0.7)));
    CHECK(characteristic_time(100, 1.0) == doctest::Approx(164.49340668482264).epsilon(1e-14));
    const auto p = CharacteristicPoint::from_tau(1.0);
    CHECK(p.beta == doctest::Approx(1.0));
    CHECK(trigamma(p.theta) == doctest::Approx(1.0).epsilon(1e-12));
    const auto q = CharacteristicPoint::from_beta(2.0);
    CHECK(q.tau == doctest::Approx(4.0));
    const auto r = CharacteristicPoint::from_theta(1.0);
    CHECK(r.tau == doctest::Approx(trigamma(1.0)));
}

TEST_CASE("incomplete gamma")
{
    CHECK(gamma_p(1.0, 2.0) == doctest::Approx(1 - std::exp(-2.0)).epsilon(1e-14));
    CHECK(gamma_p(3.0, 1.5) + gamma_q(3.0, 1.5) == doctest::Approx(1.0).epsilon(1e-15));
    // P(1/2, x) = erf(sqrt(x))
    CHECK(gamma_p(0.5, 0.8) == doctest::Approx(std::erf(std::sqrt(0.8))).epsilon(1e-13));
    CHECK(gamma_cdf(2.0, -1.0) == 0.0);
}
