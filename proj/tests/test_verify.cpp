#include "brownpoly/partition.hpp"
#include "brownpoly/specfun.hpp"
#include "brownpoly/stats.hpp"
#include "brownpoly/verify.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace brownpoly;

namespace {

VerifyOptions options()
{
    VerifyOptions opt;
    opt.seed = 777;
    opt.workers = 2;
    opt.bootstrap_resamples = 200;
    return opt;
}

bool all_passed(const std::vector<TestReport>& reports)
{
    bool ok = true;
    for (const auto& r : reports) {
        if (!r.passed) {
            MESSAGE("failed: " << r.name << " stat=" << r.statistic << " target=" << r.target << " z=" << r.z_score);
            ok = false;
        }
    }
    return ok;
}

} // namespace

TEST_CASE("moment_report z-scores")
{
    const auto r = moment_report("x", 1.29, 1.0, 0.1, 100, GridSpec{1, 1.0, 1});
    CHECK(r.z_score == doctest::Approx(2.9));
    CHECK(r.passed);
    CHECK_FALSE(moment_report("y", 1.31, 1.0, 0.1, 100, GridSpec{1, 1.0, 1}).passed);
}

TEST_CASE("mean identity")
{
    const auto exact = test_mean_identity(1.0, 1, 0.0, 1, 2000, options());
    CHECK(exact.target == doctest::Approx(-digamma(1.0)));
    CHECK(exact.passed);
    const auto r = test_mean_identity(1.0, 4, 2.0, 50, 400, options());
    CHECK(r.target == doctest::Approx(4 * 0.5772156649015329 + 2).epsilon(1e-12));
    CHECK(r.passed);
}

TEST_CASE("Dufresne: stationary Gamma law of the space increments")
{
    const auto reports = test_dufresne(2.0, 400, GridSpec{2, 1.0, 50}, options());
    CHECK(reports.size() >= 12);
    CHECK(all_passed(reports));
}

TEST_CASE("Burke: pairwise independence")
{
    CHECK(all_passed(test_burke_independence(1.0, 400, GridSpec{2, 2.0, 50}, {2.0, 1.0}, options())));
    CHECK(all_passed(test_burke_independence(1.0, 50, GridSpec{1, 1.0, 10}, {1.0}, options())));
    CHECK_THROWS_AS(test_burke_independence(1.0, 50, GridSpec{2, 2.0, 10}, {1.0, 2.0}, options()), std::invalid_argument);
}

TEST_CASE("variance identity on a small instance")
{
    const double t = 4 * trigamma(1.0);
    const auto reports = test_variance_identity(1.0, 4, t, 100, 600, options());
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].passed);
}

TEST_CASE("comparison inequalities hold pathwise")
{
    const Environment zero = zero_environment(GridSpec{4, 2.0, 16});
    const BoundaryWeights w{1.0, {0.2, -0.1, 0.5, 0.0}};
    CHECK(test_comparison(zero, w).passed);
    const auto r = run_comparison(1.0, 5, 16, 0.5, 3.0, 60, options());
    CHECK(r.passed);
    CHECK(r.statistic <= 1e-9);
}

TEST_CASE("one-level comparison in closed form")
{
    // n = 1, s < t: Z_{0,1}(t) / Z_{0,1}(s) <= Z_1^theta(t; sigma_0 < 0) / Z_1^theta(s; sigma_0 < 0) = exp(B_1(s, t))
    // reduces to sum_{j<t} e^{-B(t_j)} e^{B_1(t_j,t)} >= e^{B_1(s,t)} sum_{j<s} e^{-B(t_j)} e^{B_1(t_j,s)}.
    const Environment env = sample_environment(GridSpec{1, 1.0, 12}, 5, 5);
    const auto ax = forward_axis(env);
    const auto b1 = env.level_path(1);
    for (int s = 1; s < 12; ++s) {
        for (int t = s + 1; t <= 12; ++t) {
            CHECK(ax(1, t) - ax(1, s) >= b1[t] - b1[s] - 1e-12);
        }
    }
}

TEST_CASE("reversal transform")
{
    const GridSpec g{3, 2.0, 40};
    const Environment env = sample_environment(g, 21, 21);
    const BoundaryWeights w = sample_boundary(1.0, 3, 21, 21);
    const auto fb = forward_boundary(env, w);
    const DualEnvironment dual = build_dual(env, w, fb, g.t);
    const IncrementSeries s = increments(fb, env);
    for (int j = 1; j <= 3; ++j) CHECK(dual.weights.r(j) == doctest::Approx(s.r_at(3 + 1 - j, g.m)).epsilon(1e-14));
    CHECK(involution_error(dual.tuple) <= 1e-12);
    const IncrementTuple orig = increment_tuple(s, env);
    CHECK(involution_error(orig) <= 1e-12);
    CHECK_THROWS_AS(build_dual(env, w, fb, 1.0), std::invalid_argument);

    const Environment zero = zero_environment(g);
    const BoundaryWeights wz{1.0, {0.0, 0.0, 0.0}};
    const auto fz = forward_boundary(zero, wz);
    CHECK(involution_error(increment_tuple(increments(fz, zero), zero)) <= 1e-12);
}

TEST_CASE("dual increments look Brownian")
{
    std::vector<double> all;
    const GridSpec g{2, 1.0, 50};
    for (int rep = 0; rep < 40; ++rep) {
        const Environment env = sample_environment(g, 31, rep);
        const BoundaryWeights w = sample_boundary(1.0, 2, 31, rep);
        const DualEnvironment dual = build_dual(env, w, forward_boundary(env, w), g.t);
        const auto inc = dual.env.all_level_increments();
        all.insert(all.end(), inc.begin(), inc.end());
    }
    CHECK(std::abs(mean(all)) <= 3 * standard_error(all) + 1e-3);
    CHECK(variance(all) == doctest::Approx(g.delta()).epsilon(0.1));
}

TEST_CASE("reversal moments on a small instance")
{
    const auto reports = test_reversal(1.0, 2, 1.5, 40, 400, options());
    CHECK(all_passed(reports));
}
