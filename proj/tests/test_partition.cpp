#include "oracles.hpp"

#include "brownpoly/container.hpp"
#include "brownpoly/logspace.hpp"
#include "brownpoly/oracle.hpp"
#include "brownpoly/partition.hpp"
#include "brownpoly/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace brownpoly;

namespace {

bool log_close(double got, oracle::real want_linear, double tol = 1e-12)
{
    if (want_linear == 0) return got == kLogZero;
    const long double want = std::log(want_linear);
    return std::abs(static_cast<long double>(got) - want) <= tol * std::max<long double>(1.0L, std::abs(want));
}

/// Both unreachable, or equal to a relative tolerance.
bool same_log(double a, double b, double tol)
{
    if (a == kLogZero || b == kLogZero) return a == b;
    return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

struct Instance {
    Environment env;
    BoundaryWeights w;
};

Instance random_instance(std::uint64_t id, int max_n, int max_m)
{
    CounterRng pick(2024, id);
    const int n = 1 + static_cast<int>(pick() % max_n);
    const int m = 1 + static_cast<int>(pick() % max_m);
    const double t = 0.2 + 3.0 * pick.uniform();
    const double theta = 0.3 + 2.0 * pick.uniform();
    return {sample_environment(GridSpec{n, t, m}, 77, id), sample_boundary(theta, n, 77, id)};
}

} // namespace

TEST_CASE("logsumexp")
{
    const double a[] = {0.0, 0.0};
    CHECK(logsumexp_stream(a) == doctest::Approx(std::log(2.0)));
    const double b[] = {1000.0, 1000.0};
    CHECK(logsumexp_stream(b) == doctest::Approx(1000.0 + std::log(2.0)));
    CHECK(logsumexp_stream(std::span<const double>{}) == kLogZero);

    CounterRng rng(5, 5);
    std::vector<double> v(1000);
    long double direct = 0;
    for (auto& x : v) {
        x = 40.0 * rng.uniform() - 20.0;
        direct += std::exp(static_cast<long double>(x));
    }
    CHECK(std::abs(logsumexp_stream(v) - static_cast<double>(std::log(direct))) < 1e-12 * std::log(direct));
    CHECK(log_add(kLogZero, 3.0) == 3.0);
}

TEST_CASE("every table equals explicit enumeration on random small instances")
{
    for (std::uint64_t id = 0; id < 100; ++id) {
        const auto [env, w] = random_instance(id, 3, 10);
        const oracle::Paths p(env);
        const int n = env.levels(), m = env.cells();
        const auto ff = forward_free(env);
        const auto bw = backward(env);
        const auto ax = forward_axis(env);
        const auto fb = forward_boundary(env, w);
        for (int k = 1; k <= n; ++k) {
            for (int i = 0; i <= m; ++i) {
                CHECK(log_close(ff(k, i), oracle::free_z(p, k, i)));
                CHECK(log_close(bw(k, i), oracle::backward_z(p, k, i)));
            }
        }
        for (int k = 0; k <= n; ++k) {
            for (int i = 0; i <= m; ++i) {
                CHECK(log_close(ax(k, i), oracle::axis_z(p, k, i)));
                CHECK(log_close(fb(k, i), oracle::boundary_z(p, w, k, i).total()));
            }
        }
        const auto parts = oracle::boundary_z(p, w, n, m);
        const auto masses = restricted_boundary_masses(env, w, bw);
        CHECK(log_close(masses.log_positive, parts.continuous));
        CHECK(log_close(masses.log_negative, parts.atomic));
        const auto rt = forward_restricted(env, w);
        CHECK(log_close(rt.positive(n, m), parts.continuous));
        CHECK(log_close(rt.negative(n, m), parts.atomic));
        CHECK(log_close(brute_force_free(env), oracle::free_z(p, n, m)));
    }
}

TEST_CASE("streaming and scaled sweeps agree with the full tables")
{
    for (std::uint64_t id = 0; id < 20; ++id) {
        const auto [env, w] = random_instance(1000 + id, 12, 300);
        const double ff = forward_free(env)(env.levels(), env.cells());
        const double fb = forward_boundary(env, w)(env.levels(), env.cells());
        CHECK(log_partition_free(env) == doctest::Approx(ff).epsilon(1e-12));
        CHECK(log_partition_boundary(env, w) == doctest::Approx(fb).epsilon(1e-12));
        const ExpIncrements e(env);
        const ScaledTable s = backward_scaled(env, e);
        const auto bw = backward(env);
        for (int k = 1; k <= env.levels(); ++k) {
            for (int i = 0; i <= env.cells(); i += 7) CHECK(same_log(s.log_at(k, i), bw(k, i), 1e-12));
        }
        CHECK(bw(1, 0) == doctest::Approx(ff).epsilon(1e-10));
        CHECK(restricted_boundary_masses(env, w, bw).log_total() == doctest::Approx(fb).epsilon(1e-9));
    }
}

TEST_CASE("large instances do not overflow")
{
    const Environment env = sample_environment(GridSpec{200, 400.0, 2000}, 3, 3);
    const BoundaryWeights w = sample_boundary(1.0, 200, 3, 3);
    const double lz = log_partition_boundary(env, w);
    CHECK(std::isfinite(lz));
    const ExpIncrements e(env);
    const ScaledTable back = backward_scaled(env, e);
    CHECK(restricted_boundary_masses(env, w, back).log_total() == doctest::Approx(lz).epsilon(1e-10));
    CHECK(back.log_at(1, 0) == doctest::Approx(log_partition_free(env)).epsilon(1e-10));
}

TEST_CASE("zero-noise tables are binomial counts")
{
    const Environment env = zero_environment(GridSpec{3, 1.0, 4});
    CHECK(std::exp(forward_free(env)(3, 4)) == doctest::Approx(0.375).epsilon(1e-14));
    CHECK(std::exp(brute_force_free(env)) == doctest::Approx(0.375).epsilon(1e-14));

    const GridSpec g{5, 2.0, 9};
    const Environment z = zero_environment(g);
    const double d = g.delta();
    const auto ff = forward_free(z);
    const auto bw = backward(z);
    const auto ax = forward_axis(z);
    for (int k = 1; k <= g.n; ++k) {
        for (int i = 0; i <= g.m; ++i) {
            const double free_count = static_cast<double>(oracle::binomial(i, k - 1)) * std::pow(d, k - 1);
            const double back_count = static_cast<double>(oracle::binomial(g.m - i, g.n - k)) * std::pow(d, g.n - k);
            const double axis_count = static_cast<double>(oracle::binomial(i, k)) * std::pow(d, k);
            CHECK(std::exp(ff(k, i)) == doctest::Approx(free_count).epsilon(1e-13));
            CHECK(std::exp(bw(k, i)) == doctest::Approx(back_count).epsilon(1e-13));
            CHECK(std::exp(ax(k, i)) == doctest::Approx(axis_count).epsilon(1e-13));
        }
    }
    for (int i = 0; i <= g.m; ++i) CHECK(ax(0, i) == 0.0);
}

TEST_CASE("zero-noise boundary level 1 is a geometric sum")
{
    const GridSpec g{2, 1.5, 12};
    const Environment z = zero_environment(g);
    const BoundaryWeights w{0.9, {0.4, -0.2}};
    const auto fb = forward_boundary(z, w);
    for (int i = 0; i <= g.m; ++i) {
        double expect = std::exp(w.r(1));
        for (int j = 0; j < i; ++j) expect += std::exp(w.theta * g.time(j)) * g.delta();
        CHECK(std::exp(fb(1, i)) == doctest::Approx(expect).epsilon(1e-13));
    }
    CHECK(fb(2, 0) == doctest::Approx(w.r(1) + w.r(2)));
}

TEST_CASE("zero-noise partition functions converge to the simplex volume")
{
    const double t = 1.7;
    for (int k = 2; k <= 6; ++k) {
        const int m = 200 * k;
        const Environment z = zero_environment(GridSpec{k, t, m});
        const double exact = std::pow(t, k - 1) / std::tgamma(k);
        CHECK(std::abs(std::exp(log_partition_free(z)) / exact - 1.0) <= 0.02);
    }
}

TEST_CASE("boundary rows are exact")
{
    const Environment env = sample_environment(GridSpec{3, 2.0, 16}, 8, 8);
    const BoundaryWeights w = sample_boundary(1.3, 3, 8, 8);
    const auto fb = forward_boundary(env, w);
    const auto b = env.boundary_path();
    for (int i = 0; i <= 16; ++i) CHECK(fb(0, i) == doctest::Approx(-b[i] + 1.3 * env.grid().time(i)).epsilon(1e-15));
    CHECK(fb(1, 0) == doctest::Approx(w.r(1)));
    CHECK(fb(3, 0) == doctest::Approx(w.r(1) + w.r(2) + w.r(3)));
}

TEST_CASE("increment series reconstructs r and X")
{
    const Environment env = sample_environment(GridSpec{3, 1.0, 20}, 4, 4);
    const BoundaryWeights w = sample_boundary(1.0, 3, 4, 4);
    const auto fb = forward_boundary(env, w);
    const IncrementSeries s = increments(fb, env);
    for (int k = 1; k <= 3; ++k) {
        CHECK(s.r_at(k, 0) == doctest::Approx(w.r(k)).epsilon(1e-13));
        const auto bk = env.level_path(k);
        for (int i = 0; i <= 20; ++i) {
            CHECK(s.r_at(k, i) == doctest::Approx(fb(k, i) - fb(k - 1, i)).epsilon(1e-12));
            CHECK(s.x_at(k, i) == doctest::Approx(bk[i] + s.r_at(k, 0) - s.r_at(k, i)).epsilon(1e-12));
        }
    }
}

TEST_CASE("tables round-trip through the container")
{
    const Environment env = sample_environment(GridSpec{2, 1.0, 6}, 1, 1);
    const auto table = backward(env);
    const auto path = std::filesystem::temp_directory_path() / "brownpoly_table_test.bin";
    save_table(table, path, 1, 1);
    const auto back = load_table(path);
    CHECK(back.kind() == TableKind::backward);
    CHECK(back.grid() == table.grid());
    for (std::size_t i = 0; i < table.values().size(); ++i) CHECK(back.values()[i] == table.values()[i]);
    CHECK_THROWS_AS(load_environment(path), FormatError);
}

TEST_CASE("brute force guard")
{
    CHECK_THROWS(brute_force_free(zero_environment(GridSpec{5, 1.0, 4})));
    CHECK_THROWS(brute_force_free(zero_environment(GridSpec{2, 1.0, 13})));
    const Environment one = sample_environment(GridSpec{1, 1.0, 5}, 2, 2);
    CHECK(brute_force_free(one) == doctest::Approx(one.level_path(1).back()));
}
