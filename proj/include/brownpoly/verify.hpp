#pragma once

#include "brownpoly/environment.hpp"
#include "brownpoly/partition.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace brownpoly {

/// Outcome of one check. Moment tests pass when |z_score| <= 3; pathwise
/// tests report the largest violation as the statistic and pass when it does
/// not exceed the target threshold.
struct TestReport {
    std::string name;
    double statistic = 0.0;
    double target = 0.0;
    double stderr_ = 0.0;
    double z_score = 0.0;
    bool passed = false;
    int replicas = 0;
    GridSpec grid;
    std::string notes;
};

struct VerifyOptions {
    std::uint64_t seed = 20240601;
    int workers = 1;
    bool extrapolate = true; ///< two-resolution extrapolation (m and 2m)
    int bootstrap_resamples = 1000;
};

/// Fills z_score and passed for a moment test.
TestReport moment_report(std::string name, double statistic, double target, double stderr_, int replicas,
                         const GridSpec& grid, std::string notes = {});

// --- Identity tests. `grid` carries (n, t, m) with m the coarse step count. ---

/// r_k(s) for k in {1, n} and s in {t/2, t}: mean vs -Psi0(theta), variance vs
/// Psi1(theta), KS of exp(-r) against Gamma(theta, 1); plus the exact t = 0 column.
std::vector<TestReport> test_dufresne(double theta, int replicas, const GridSpec& grid, const VerifyOptions& opt);

/// Pairwise correlations of r_j(s_j), of r_j(s_j) with X_j(s_j) and with
/// Y_n(s_n), and one standardized triple cumulant. times = (s_1, ..., s_n),
/// nonincreasing, each in [0, t].
std::vector<TestReport> test_burke_independence(double theta, int replicas, const GridSpec& grid,
                                                const std::vector<double>& times, const VerifyOptions& opt);

/// E log Z_n^theta(t) = -n Psi0(theta) + theta t. t = 0 uses the exact atom
/// log Z_n^theta(0) = r_1(0) + ... + r_n(0) with no DP.
TestReport test_mean_identity(double theta, int n, double t, int m, int replicas, const VerifyOptions& opt);

/// Var log Z_n^theta(t) = n Psi1(theta) - t + 2 E[E^Q sigma_0^+]. Also reports
/// the annealed censored mass Q(sigma_0 < 0) as a diagnostic.
std::vector<TestReport> test_variance_identity(double theta, int n, double t, int m, int replicas,
                                               const VerifyOptions& opt);

/// Pathwise ratio inequalities between boundary-model restricted partition
/// functions and the axis family, for every level pair (k, k+1) with k + 1 <= n
/// and every grid time pair s < t. statistic = largest violation in log scale.
TestReport test_comparison(const Environment& env, const BoundaryWeights& w, double slack = 1e-9);

/// test_comparison over `replicas` random environments with n_max levels and
/// horizons drawn uniformly in [t_min, t_max].
TestReport run_comparison(double theta, int n_max, int m, double t_min, double t_max, int replicas,
                          const VerifyOptions& opt);

// --- Reversal ----------------------------------------------------------------

/// Paths of the processes on the grid: y[k][i] = Y_k(t_i) (k = 0..n),
/// b, r, x [k-1][i] for k = 1..n.
struct IncrementTuple {
    int n = 0;
    int m = 0;
    std::vector<double> y;
    std::vector<double> b;
    std::vector<double> r;
    std::vector<double> x;

    double& y_at(int k, int i) { return y[static_cast<std::size_t>(k) * (m + 1) + i]; }
    double y_at(int k, int i) const { return y[static_cast<std::size_t>(k) * (m + 1) + i]; }
    double& b_at(int k, int i) { return b[static_cast<std::size_t>(k - 1) * (m + 1) + i]; }
    double b_at(int k, int i) const { return b[static_cast<std::size_t>(k - 1) * (m + 1) + i]; }
    double& r_at(int k, int i) { return r[static_cast<std::size_t>(k - 1) * (m + 1) + i]; }
    double r_at(int k, int i) const { return r[static_cast<std::size_t>(k - 1) * (m + 1) + i]; }
    double& x_at(int k, int i) { return x[static_cast<std::size_t>(k - 1) * (m + 1) + i]; }
    double x_at(int k, int i) const { return x[static_cast<std::size_t>(k - 1) * (m + 1) + i]; }
};

IncrementTuple increment_tuple(const IncrementSeries& s, const Environment& env);

/// Reflection of the tuple at the grid endpoint T = t_m:
///   Y*_j(s) = Y_{n-j}(T) - Y_{n-j}(T-s),  B*_j(s) = X_{n+1-j}(T) - X_{n+1-j}(T-s),
///   r*_j(s) = r_{n+1-j}(T-s),             X*_j(s) = B_{n+1-j}(T) - B_{n+1-j}(T-s).
/// Applying it twice returns the original tuple.
IncrementTuple dual_tuple(const IncrementTuple& tuple);

struct DualEnvironment {
    Environment env;         ///< (Y*_0, B*_1..B*_n) as boundary and level increments
    BoundaryWeights weights; ///< r*_j(0) = r_{n+1-j}(T)
    double horizon = 0.0;
    IncrementTuple tuple;
};

/// Requires T to be the grid endpoint and fb to be the forward_boundary table of (env, w).
DualEnvironment build_dual(const Environment& env, const BoundaryWeights& w, const LogPartitionTable& fb, double T);

/// Largest |dual(dual(x)) - x| over all tuple entries.
double involution_error(const IncrementTuple& tuple);

/// Mean of log Z in the dual environment vs the exact mean; variance,
/// Cov(log Z, r_1(0)) and E[E^Q sigma_0^+] original vs dual; involution error.
std::vector<TestReport> test_reversal(double theta, int n, double t, int m, int replicas, const VerifyOptions& opt);

} // namespace brownpoly
