#include "brownpoly/parallel.hpp"
#include "brownpoly/rng.hpp"
#include "brownpoly/stats.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <stdexcept>

using namespace brownpoly;

TEST_CASE("moments and quantiles")
{
    const std::vector<double> x{1, 2, 3, 4, 5};
    CHECK(mean(x) == 3.0);
    CHECK(variance(x) == 2.5);
    CHECK(standard_error(x) == doctest::Approx(std::sqrt(0.5)));
    CHECK(quantile(x, 0.5) == 3.0);
    CHECK(quantile(x, 0.25) == 2.0);
    CHECK(quantile(x, 0.1) == doctest::Approx(1.4));
    CHECK(interquartile_range(x) == 2.0);
    const std::vector<double> y{2, 4, 6, 8, 10};
    CHECK(covariance(x, y) == 5.0);
    CHECK(correlation(x, y) == doctest::Approx(1.0));
}

TEST_CASE("bootstrap standard error of the mean matches the analytic value")
{
    CounterRng rng(1, 1);
    std::vector<double> x(400);
    for (auto& v : x) v = rng.normal();
    const auto b = bootstrap(x, [](std::span<const double> s) { return mean(s); }, 2000, 9);
    CHECK(b.estimate == mean(x));
    CHECK(b.stderr_ == doctest::Approx(standard_error(x)).epsilon(0.1));
    const auto again = bootstrap(x, [](std::span<const double> s) { return mean(s); }, 2000, 9);
    CHECK(again.stderr_ == b.stderr_);
}

TEST_CASE("Kolmogorov-Smirnov")
{
    CHECK(kolmogorov_q(0.0) == doctest::Approx(1.0));
    CHECK(kolmogorov_q(1.3580986393225505) == doctest::Approx(0.05).epsilon(1e-6));
    CounterRng rng(2, 2);
    std::vector<double> u(5000), v(5000);
    for (auto& x : u) x = rng.uniform();
    for (auto& x : v) x = rng.uniform();
    CHECK(ks_one_sample(u, [](double s) { return std::clamp(s, 0.0, 1.0); }).p_value > 0.01);
    CHECK(ks_one_sample(u, [](double s) { return std::clamp(s * s, 0.0, 1.0); }).p_value < 1e-6);
    CHECK(ks_two_sample(u, v).p_value > 0.01);
    const std::vector<double> a{0.1, 0.2, 0.3}, b{0.4, 0.5, 0.6};
    CHECK(ks_two_sample(a, b).statistic == 1.0);
}

TEST_CASE("chi-square")
{
    const std::vector<double> o{10, 10, 10}, e{10, 10, 10};
    const auto r = chi_square(o, e);
    CHECK(r.statistic == 0.0);
    CHECK(r.dof == 2);
    CHECK(r.p_value == doctest::Approx(1.0));
    // chi2 = 2 with 2 dof: p = exp(-1)
    const std::vector<double> o2{12, 8, 10};
    const std::vector<double> e2{10, 10, 10};
    CHECK(chi_square(o2, e2).statistic == doctest::Approx(0.8));
    CHECK(chi_square(o2, e2).p_value == doctest::Approx(std::exp(-0.4)));
}

TEST_CASE("weighted least squares recovers an exact line")
{
    const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9}, s{0.1, 0.2, 0.1, 0.3};
    const LinearFit f = weighted_fit(x, y, s);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.chi2 == doctest::Approx(0.0));
    CHECK(f.dof == 2);
    // Equal errors: slope error = sigma / sqrt(sum (x - xbar)^2)
    const std::vector<double> s1{0.5, 0.5, 0.5, 0.5};
    CHECK(weighted_fit(x, y, s1).slope_stderr == doctest::Approx(0.5 / std::sqrt(5.0)));
}

TEST_CASE("parallel_for places results by index and rethrows the first error")
{
    std::vector<int> out(1000, 0);
    parallel_for(out.size(), 8, [&](std::size_t i) { out[i] = static_cast<int>(i * i % 97); });
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i * i % 97));
    CHECK_THROWS_AS(parallel_for(100, 4,
                                 [](std::size_t i) {
                                     if (i == 42) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
}
