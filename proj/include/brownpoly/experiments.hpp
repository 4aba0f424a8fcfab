#pragma once

#include "brownpoly/specfun.hpp"
#include "brownpoly/verify.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace brownpoly {

struct ExperimentConfig {
    CharacteristicPoint point = CharacteristicPoint::from_theta(1.0);
    std::vector<int> n_values{16, 32, 64, 128, 256};
    double A = 0.0;     ///< window offset: t = n Psi1(theta) + A n^{2/3}
    double gamma = 0.5; ///< path fraction for sigma_{floor(gamma n)}
    int replicas = 2000;
    int m_per_level = 50; ///< coarse steps per level; the fine grid doubles it
    std::uint64_t seed = 20240601;
    int workers = 1;
    bool extrapolate = true;
    int bootstrap_resamples = 1000;
    std::vector<double> tail_b{0.5, 1.0, 1.5, 2.0, 3.0};
    std::vector<double> fluctuation_b{2.0, 4.0, 8.0};
    int tail_n = 64;

    double horizon(int n) const;
    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Everything recorded for one (n, replica); the same environment feeds every
/// statistic below (common random numbers).
struct ReplicaRecord {
    double log_z = 0.0;      ///< boundary model log Z_n^theta(t), extrapolated
    double log_z_free = 0.0; ///< free model log Z_{1,n}(0, t), extrapolated
    double q_sigma0_plus = 0.0;
    double censored_mass = 0.0;
    std::vector<double> tail;      ///< Q(sigma_0^+ >= b n^{2/3}) for each tail_b
    double sigma_boundary = 0.0;   ///< sigma_{floor(gamma n)} - gamma t, boundary path
    bool boundary_censored = false;
    double sigma_free = 0.0;       ///< same for the free path (NaN when floor(gamma n) = 0)
    double sigma0 = 0.0;           ///< sampled sigma_0 (0 when censored)
};

struct SweepPoint {
    int n = 0;
    double t = 0.0;
    int m = 0; ///< coarse steps
    std::vector<ReplicaRecord> replicas;
};

/// Computes each (n, horizon) sweep once and hands out the stored records.
class SweepCache {
  public:
    const SweepPoint& get(const ExperimentConfig& cfg, int n);

  private:
    std::map<std::pair<int, double>, SweepPoint> points_;
};

SweepPoint run_sweep_point(const ExperimentConfig& cfg, int n);

struct FitPoint {
    int n = 0;
    double statistic = 0.0;
    double stderr_ = 0.0;
    int used = 0;     ///< replicas entering the statistic
    int censored = 0; ///< replicas excluded by censoring
    bool aborted = false;
};

struct ExponentFit {
    std::string exponent_name;
    std::vector<FitPoint> points;
    double slope = 0.0;
    double slope_stderr = 0.0;
    double intercept = 0.0;
    double target = 2.0 / 3.0;
    double window_lo = 0.55;
    double window_hi = 0.80;
    std::string status; ///< "pass", "fail" or "inconclusive"
    std::vector<std::string> flags;
};

/// Var log Z_n^theta(t) per n with bootstrap errors; weighted log-log fit.
ExponentFit run_variance_exponent(const ExperimentConfig& cfg, SweepCache& cache);

/// Interquartile range of sigma_{floor(gamma n)} - gamma t per n; fit.
ExponentFit run_path_exponent(const ExperimentConfig& cfg, SweepCache& cache, bool boundary_model);

struct FreeEnergyRow {
    int n = 0;
    double t = 0.0;
    double mean = 0.0;   ///< annealed mean of n^{-1} log Z_{1,n}(0, n tau)
    double stderr_ = 0.0;
    double spread = 0.0; ///< standard deviation of n^{-1} log Z
    double distance = 0.0;
    double beta_form = 0.0; ///< n^{-1}[-2(n-1) log beta + log Z]
};

struct FreeEnergyResult {
    double limit = 0.0;   ///< theta Psi1(theta) - Psi0(theta)
    double p_beta = 0.0;  ///< free_energy_density(beta)
    std::vector<FreeEnergyRow> rows;
    bool distance_decreasing = false;
    bool final_within = false; ///< distance < 0.1 at the largest n
};

/// Runs at t = n tau exactly (A is ignored).
FreeEnergyResult run_free_energy(const ExperimentConfig& cfg, SweepCache& cache);

struct FluctuationResult {
    std::vector<int> n_values;
    std::vector<double> b_values;
    std::vector<std::vector<double>> tail_prob; ///< [n][b] P(|log Z - n f| >= b n^{1/3})
    std::vector<std::vector<double>> normalized;  ///< [n] (log Z - n f) / n^{1/3}
    double ks_distance = 0.0; ///< between the normalized samples at the two largest n
    double median_offset = 0.0; ///< (median log Z - n f) / n^{1/3} at the largest n
    std::vector<TestReport> reports;
};

FluctuationResult run_freeZ_fluctuation(const ExperimentConfig& cfg, SweepCache& cache);

struct TailRow {
    double b = 0.0;
    double probability = 0.0; ///< annealed Q(sigma_0^+ >= b n^{2/3})
    double stderr_ = 0.0;
};

struct TailResult {
    int n = 0;
    std::vector<TailRow> rows;
    bool nonincreasing = false;
    double decay_1_to_2 = 0.0; ///< P(b=1) / P(b=2) when both b values are on the grid
    std::vector<TestReport> reports;
};

TailResult run_sigma_tail(const ExperimentConfig& cfg, SweepCache& cache);

} // namespace brownpoly
