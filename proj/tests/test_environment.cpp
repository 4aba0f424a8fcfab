#include "brownpoly/container.hpp"
#include "brownpoly/environment.hpp"
#include "brownpoly/rng.hpp"
#include "brownpoly/specfun.hpp"
#include "brownpoly/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace brownpoly;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "brownpoly_env_tests";
    fs::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_CASE("Philox is a pure function of counter and key")
{
    const auto a = philox4x32({1, 2, 3, 4}, {5, 6});
    const auto b = philox4x32({1, 2, 3, 4}, {5, 6});
    CHECK(a == b);
    CHECK(a != philox4x32({1, 2, 3, 5}, {5, 6}));
    CHECK(a != philox4x32({1, 2, 3, 4}, {5, 7}));
}

TEST_CASE("counter RNG streams are reproducible and distinct")
{
    CounterRng a(7, 11), b(7, 11), c(7, 12);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a();
        CHECK(x == b());
        differs = differs || x != c();
    }
    CHECK(differs);
    CounterRng u(1, 1);
    for (int i = 0; i < 1000; ++i) {
        const double v = u.uniform();
        CHECK((v > 0.0 && v < 1.0));
    }
}

TEST_CASE("cell normals depend only on the absolute cell index")
{
    std::vector<double> whole(100), tail(40);
    fill_cell_normals(3, 9, 0, whole);
    fill_cell_normals(3, 9, 60, tail);
    for (int i = 0; i < 40; ++i) CHECK(tail[i] == whole[60 + i]);
}

TEST_CASE("grid validation")
{
    CHECK_THROWS_AS((GridSpec{0, 1.0, 4}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((GridSpec{2, 0.0, 4}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((GridSpec{2, 1.0, 0}.validate()), std::invalid_argument);
    CHECK_NOTHROW((GridSpec{2, 1.0, 4}.validate()));
    CHECK(GridSpec{1, 2.0, 8}.delta() == 0.25);
}

TEST_CASE("environment increments have variance delta")
{
    const GridSpec grid{1000, 3.0, 1000}; // 1e6 level cells
    const Environment env = sample_environment(grid, 42, 0);
    const auto all = env.all_level_increments();
    CHECK(std::abs(mean(all)) < 5 * std::sqrt(grid.delta() / all.size()));
    CHECK(variance(all) == doctest::Approx(grid.delta()).epsilon(0.01));
    CHECK(variance(env.boundary_increments()) == doctest::Approx(grid.delta()).epsilon(0.15));
}

TEST_CASE("environment sampling is deterministic in (seed, stream)")
{
    const GridSpec grid{3, 1.0, 50};
    CHECK(sample_environment(grid, 5, 1) == sample_environment(grid, 5, 1));
    CHECK_FALSE(sample_environment(grid, 5, 1) == sample_environment(grid, 5, 2));
    CHECK_FALSE(sample_environment(grid, 6, 1) == sample_environment(grid, 5, 1));
}

TEST_CASE("disjoint streams are uncorrelated")
{
    const GridSpec grid{100, 1.0, 10000};
    const Environment a = sample_environment(grid, 1, 100);
    const Environment b = sample_environment(grid, 1, 101);
    CHECK(std::abs(correlation(a.all_level_increments(), b.all_level_increments())) < 0.01);
}

TEST_CASE("coarsening sums adjacent pairs")
{
    const Environment env = sample_environment(GridSpec{2, 1.0, 8}, 3, 3);
    const Environment c = env.coarsened();
    CHECK(c.cells() == 4);
    CHECK(c.grid().t == 1.0);
    for (int k = 1; k <= 2; ++k) {
        for (int i = 0; i < 4; ++i) CHECK(c.inc(k, i) == env.inc(k, 2 * i) + env.inc(k, 2 * i + 1));
    }
    CHECK(env.level_path(2).back() == doctest::Approx(c.level_path(2).back()).epsilon(1e-14));
    CHECK_THROWS_AS(sample_environment(GridSpec{1, 1.0, 3}, 1, 1).coarsened(), std::invalid_argument);
}

TEST_CASE("boundary weights follow -log Gamma(theta)")
{
    const BoundaryWeights w = sample_boundary(1.0, 1'000'000, 17, 0);
    const double m = mean(w.r0);
    const double v = variance(w.r0);
    const double se = std::sqrt(v / w.r0.size());
    CHECK(std::abs(m - (-digamma(1.0))) < 3 * se);
    // Var of the sample variance ~ (mu4 - sigma^4) / N; mu4 of -log Exp(1) is 3 sigma^4 + 6 zeta(4).
    const double se_v = std::sqrt((2 * v * v + 6 * 1.0823232337111382) / w.r0.size());
    CHECK(std::abs(v - trigamma(1.0)) < 3 * se_v);
    for (double theta : {0.3, 2.5}) {
        const BoundaryWeights g = sample_boundary(theta, 200'000, 4, 1);
        std::vector<double> x;
        for (double r : g.r0) x.push_back(std::exp(-r));
        CHECK(std::abs(mean(x) - theta) < 3 * standard_error(x));
    }
    CHECK_THROWS_AS(sample_boundary(0.0, 3, 1, 1), std::domain_error);
}

TEST_CASE("container round-trips environments bit for bit")
{
    const Environment env = sample_environment(GridSpec{3, 1.7, 21}, 99, 5);
    const BoundaryWeights w = sample_boundary(0.8, 3, 99, 5);
    const auto path = scratch("env.bin");
    save_environment(env, path, &w);
    const LoadedEnvironment back = load_environment(path);
    CHECK(back.env == env);
    REQUIRE(back.weights.has_value());
    CHECK(*back.weights == w);

    const FileHeader h = read_header(path);
    CHECK(h.grid == env.grid());
    CHECK(h.seed == 99);
    CHECK(h.stream_id == 5);
    CHECK(h.has_boundary);

    save_environment(env, path);
    CHECK_FALSE(load_environment(path).weights.has_value());
}

TEST_CASE("container rejects damaged files")
{
    const Environment env = sample_environment(GridSpec{2, 1.0, 10}, 1, 2);
    const auto path = scratch("damaged.bin");
    save_environment(env, path);
    const auto size = fs::file_size(path);

    fs::resize_file(path, size - 12);
    CHECK_THROWS_AS(load_environment(path), FormatError);

    save_environment(env, path);
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(100);
        f.put('\x7f');
    }
    try {
        load_environment(path);
        FAIL("expected a checksum error");
    } catch (const FormatError& e) {
        CHECK(e.reason() == FormatError::Reason::checksum);
    }

    save_environment(env, path);
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(8);
        const char v[4] = {9, 0, 0, 0};
        f.write(v, 4);
    }
    try {
        load_environment(path);
        FAIL("expected a version error");
    } catch (const FormatError& e) {
        CHECK(e.reason() == FormatError::Reason::version);
    }
    CHECK_THROWS_AS(load_environment(scratch("missing.bin")), FormatError);
}
