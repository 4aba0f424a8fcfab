#pragma once

#include "brownpoly/environment.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace brownpoly {

enum class TableKind : std::uint32_t {
    forward_free = 1,        ///< log Z_{1,k}(0, t_i)
    forward_boundary = 2,    ///< log Z_k^theta(t_i)
    backward = 3,            ///< log Z_{k,n}(t_i, t)
    forward_axis = 4,        ///< log Z_{0,k}(t_i)
    boundary_continuous = 5, ///< log Z_{k,t_i}^theta(sigma_0 > 0)
    boundary_atomic = 6,     ///< log Z_{k,t_i}^theta(sigma_0 < 0)
};

std::string_view to_string(TableKind kind);

/// Log partition values on the (level x time) grid, row-major by level:
/// values[k][i] for k = 0..levels and i = 0..m. Unreachable cells hold kLogZero.
class LogPartitionTable {
  public:
    LogPartitionTable(TableKind kind, const GridSpec& grid, int levels, std::optional<double> theta = std::nullopt);
    LogPartitionTable(TableKind kind, const GridSpec& grid, int levels, std::optional<double> theta,
                      std::vector<double> values);

    TableKind kind() const { return kind_; }
    const GridSpec& grid() const { return grid_; }
    int levels() const { return levels_; }
    int cells() const { return grid_.m; }
    std::optional<double> theta() const { return theta_; }

    double operator()(int k, int i) const { return values_[index(k, i)]; }
    double& at(int k, int i) { return values_[index(k, i)]; }
    std::span<const double> row(int k) const;
    std::span<double> row(int k);
    std::span<const double> values() const { return values_; }

  private:
    std::size_t index(int k, int i) const
    {
        return static_cast<std::size_t>(k) * static_cast<std::size_t>(grid_.m + 1) + static_cast<std::size_t>(i);
    }

    TableKind kind_;
    GridSpec grid_;
    int levels_;
    std::optional<double> theta_;
    std::vector<double> values_;
};

/// exp of every level increment, level-major like Environment. Computed once
/// per environment and shared by all sweeps; the coarse grid's factors are
/// products of adjacent fine factors.
class ExpIncrements {
  public:
    explicit ExpIncrements(const Environment& env);

    int levels() const { return n_; }
    int cells() const { return m_; }
    std::span<const double> level(int k) const
    {
        return std::span<const double>(e_).subspan(static_cast<std::size_t>(k - 1) * m_, m_);
    }
    ExpIncrements coarsened() const;

  private:
    ExpIncrements() = default;
    int n_ = 0;
    int m_ = 0;
    std::vector<double> e_;
};

/// Linear-space table with one log scale per (level, block of kBlock columns):
/// value(k, i) = exp(scale[k][i / kBlock]) * mant[k][i]. A block whose scale is
/// kLogZero holds only zeros.
struct ScaledTable {
    static constexpr int kBlock = 32;

    int levels = 0;
    int m = 0;
    std::vector<double> mant;
    std::vector<double> scale;

    ScaledTable() = default;
    ScaledTable(int levels, int m);

    int blocks() const { return m / kBlock + 1; }
    std::span<double> mant_row(int k)
    {
        return std::span<double>(mant).subspan(static_cast<std::size_t>(k) * (m + 1), static_cast<std::size_t>(m + 1));
    }
    std::span<const double> mant_row(int k) const
    {
        return std::span<const double>(mant).subspan(static_cast<std::size_t>(k) * (m + 1),
                                                     static_cast<std::size_t>(m + 1));
    }
    std::span<double> scale_row(int k)
    {
        return std::span<double>(scale).subspan(static_cast<std::size_t>(k) * blocks(),
                                                static_cast<std::size_t>(blocks()));
    }
    std::span<const double> scale_row(int k) const
    {
        return std::span<const double>(scale).subspan(static_cast<std::size_t>(k) * blocks(),
                                                      static_cast<std::size_t>(blocks()));
    }
    double log_at(int k, int i) const;
};

/// Backward sweep in scaled form; log_at(k, i) = log Z_{k,n}(t_i, t).
ScaledTable backward_scaled(const Environment& env, const ExpIncrements& e);

/// Streaming endpoints reusing precomputed increment exponentials.
double log_partition_free(const Environment& env, const ExpIncrements& e);
double log_partition_boundary(const Environment& env, const ExpIncrements& e, const BoundaryWeights& w);

// All sweeps use the left-endpoint convention: a jump from level k-1 to k at
// grid time t_j carries weight delta and the new level collects B_k(t_j, .).
// One time step of every forward table is
//   Z_k(t_i) = exp(B_k(t_{i-1}, t_i)) * (Z_k(t_{i-1}) + delta * Z_{k-1}(t_{i-1})).

/// log Z_{1,k}(0, t_i). Row 0 is unused (kLogZero).
LogPartitionTable forward_free(const Environment& env);

/// log Z_k^theta(t_i) with row 0 equal to -B(t_i) + theta t_i and column 0
/// equal to the cumulative boundary weights r_1(0) + ... + r_k(0).
LogPartitionTable forward_boundary(const Environment& env, const BoundaryWeights& w);

/// log Z_{k,n}(t_i, t) where the path leaves level k at a grid index >= i,
/// so values[1][0] coincides with forward_free values[n][m]. Row 0 unused.
LogPartitionTable backward(const Environment& env);

/// log Z_{0,k}(t_i) with Z_{0,0}(t) = exp(-B(t)).
LogPartitionTable forward_axis(const Environment& env);

/// The boundary partition function split by the sign of sigma_0.
struct RestrictedTables {
    LogPartitionTable positive; ///< sigma_0 > 0: paths entering level 1 from the time axis.
    LogPartitionTable negative; ///< sigma_0 < 0: paths entering through an atom Z_j^theta(0).
};

RestrictedTables forward_restricted(const Environment& env, const BoundaryWeights& w);

/// Unnormalized masses log Z_{n,t}^theta(sigma_0 > 0) and log Z_{n,t}^theta(sigma_0 < 0),
/// assembled from the backward table (the continuous and atomic parts of the
/// boundary decomposition).
struct RestrictedMasses {
    double log_positive;
    double log_negative;

    double log_total() const;
};

RestrictedMasses restricted_boundary_masses(const Environment& env, const BoundaryWeights& w,
                                            const LogPartitionTable& backward_table);
RestrictedMasses restricted_boundary_masses(const Environment& env, const BoundaryWeights& w,
                                            const ScaledTable& backward_table);

/// log Z_{1,n}(0, t) in two-row streaming mode.
double log_partition_free(const Environment& env);

/// log Z_n^theta(t) in two-row streaming mode.
double log_partition_boundary(const Environment& env, const BoundaryWeights& w);

/// Space increments r_k(t_i), time increments of Y_n and the reconstructed
/// processes X_k, Y_k from a forward_boundary table.
struct IncrementSeries {
    int n = 0;
    int m = 0;
    double theta = 0.0;
    double delta = 0.0;
    std::vector<double> r;   ///< [n][m+1], r_k(t_i) for k = 1..n
    std::vector<double> y_n; ///< [m], Y_n(t_{i+1}) - Y_n(t_i)
    std::vector<double> x;   ///< [n][m+1], X_k(t_i) for k = 1..n
    std::vector<double> y;   ///< [n+1][m+1], Y_k(t_i) for k = 0..n

    double r_at(int k, int i) const { return r[static_cast<std::size_t>(k - 1) * (m + 1) + i]; }
    double x_at(int k, int i) const { return x[static_cast<std::size_t>(k - 1) * (m + 1) + i]; }
    double y_at(int k, int i) const { return y[static_cast<std::size_t>(k) * (m + 1) + i]; }
};

IncrementSeries increments(const LogPartitionTable& forward_boundary_table, const Environment& env);

} // namespace brownpoly
