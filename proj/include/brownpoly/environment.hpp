#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace brownpoly {

/// Discretization of [0, t] into m cells of width delta, shared by n Brownian levels.
struct GridSpec {
    int n = 1;
    double t = 1.0;
    int m = 1;

    double delta() const { return t / m; }
    /// Grid time t_i = i * delta.
    double time(int i) const { return i * delta(); }
    /// Throws std::invalid_argument unless n >= 1, m >= 1 and t is positive and finite.
    void validate() const;

    bool operator==(const GridSpec&) const = default;
};

/// Brownian increments of the driving boundary motion B and of B_1..B_n over
/// the cells (t_i, t_{i+1}], plus the RNG coordinates they were drawn from.
/// Immutable once built.
class Environment {
  public:
    Environment(GridSpec grid, std::vector<double> level_increments, std::vector<double> boundary_increments,
                std::uint64_t seed = 0, std::uint64_t stream_id = 0);

    const GridSpec& grid() const { return grid_; }
    int levels() const { return grid_.n; }
    int cells() const { return grid_.m; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    /// B_level(t_{cell+1}) - B_level(t_cell), level in [1, n].
    double inc(int level, int cell) const { return db_[static_cast<std::size_t>(level - 1) * grid_.m + cell]; }
    /// B(t_{cell+1}) - B(t_cell).
    double boundary_inc(int cell) const { return db0_[cell]; }

    std::span<const double> level_increments(int level) const;
    std::span<const double> boundary_increments() const { return db0_; }
    /// All level increments, level-major ([n][m]).
    std::span<const double> all_level_increments() const { return db_; }

    /// Partial sums B_level(t_i), i = 0..m, with B_level(0) = 0.
    std::vector<double> level_path(int level) const;
    std::vector<double> boundary_path() const;

    /// Same Brownian paths on a grid with half as many cells (m must be even).
    Environment coarsened() const;

    bool operator==(const Environment&) const = default;

  private:
    GridSpec grid_;
    std::vector<double> db_;
    std::vector<double> db0_;
    std::uint64_t seed_;
    std::uint64_t stream_id_;
};

/// Values r_k(0), k = 1..n, with exp(-r_k(0)) ~ Gamma(theta, 1).
struct BoundaryWeights {
    double theta = 1.0;
    std::vector<double> r0;

    int levels() const { return static_cast<int>(r0.size()); }
    /// r_k(0) for k in [1, n].
    double r(int k) const { return r0[static_cast<std::size_t>(k - 1)]; }

    bool operator==(const BoundaryWeights&) const = default;
};

/// n*m + m independent Normal(0, delta) increments, deterministic in (seed, stream_id).
Environment sample_environment(const GridSpec& grid, std::uint64_t seed, std::uint64_t stream_id);

/// Environment with every increment equal to zero.
Environment zero_environment(const GridSpec& grid);

/// r0[k] = -log G_k with G_k iid Gamma(theta, 1).
BoundaryWeights sample_boundary(double theta, int n, std::uint64_t seed, std::uint64_t stream_id);

} // namespace brownpoly
