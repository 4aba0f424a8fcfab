#pragma once

#include "brownpoly/environment.hpp"
#include "brownpoly/partition.hpp"
#include "brownpoly/rng.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

namespace brownpoly {

enum class PathModel { free, boundary };

/// Jump times of one quenched polymer path. Free model: jumps[k-1] = sigma_k
/// for k = 1..n-1. Boundary model: jumps[k] = sigma_k for k = 0..n-1; when the
/// path enters through an atom at level entry_level, sigma_0..sigma_{entry_level-1}
/// happened before time 0 and are recorded as 0 (left-censored).
struct PathSample {
    PathModel model = PathModel::free;
    std::vector<int> jump_index; ///< grid index of each jump
    std::vector<double> jumps;   ///< grid time of each jump
    std::optional<int> entry_level;

    bool censored(int k) const { return entry_level.has_value() && k < *entry_level; }
    double sigma(int k) const { return jumps[static_cast<std::size_t>(model == PathModel::free ? k - 1 : k)]; }
};

/// Read access to log Z_{k,n}(t_i, t) from either table representation.
class BackwardView {
  public:
    BackwardView(const LogPartitionTable& table) : log_(&table) {} // NOLINT(google-explicit-constructor)
    BackwardView(const ScaledTable& table) : scaled_(&table) {}    // NOLINT(google-explicit-constructor)

    double operator()(int k, int i) const { return log_ != nullptr ? (*log_)(k, i) : scaled_->log_at(k, i); }
    int levels() const { return log_ != nullptr ? log_->levels() : scaled_->levels; }
    int cells() const { return log_ != nullptr ? log_->cells() : scaled_->m; }
    RestrictedMasses restricted_masses(const Environment& env, const BoundaryWeights& w) const
    {
        return log_ != nullptr ? restricted_boundary_masses(env, w, *log_) : restricted_boundary_masses(env, w, *scaled_);
    }

  private:
    const LogPartitionTable* log_ = nullptr;
    const ScaledTable* scaled_ = nullptr;
};

/// Draws paths by sequential conditioning on the backward table: from level k
/// entered at grid index c, the next jump index j >= c has probability
/// exp(B_k(t_c, t_j)) delta exp(B_{k+1}(t_j, t_{j+1})) Z_{k+1,n}(t_{j+1}, t) / Z_{k,n}(t_c, t).
/// Each draw scans forward from c and stops once the cumulative mass passes
/// the uniform, so one path costs O(m) regardless of n.
class QuenchedSampler {
  public:
    QuenchedSampler(const Environment& env, BackwardView back);

    /// Path started on level 1 at time 0.
    PathSample free_path(CounterRng& rng) const;

    /// Boundary-model path; masses must come from the same weights and table.
    PathSample boundary_path(CounterRng& rng, const BoundaryWeights& w, const RestrictedMasses& masses) const;

  private:
    int jump_from(int k, int c, double u) const;
    void continue_from(PathSample& path, int level, int start, CounterRng& rng) const;

    const Environment& env_;
    BackwardView back_;
    double log_delta_;
    std::vector<double> boundary_path_;
};

std::vector<PathSample> sample_path_free(const Environment& env, BackwardView back, int count, std::uint64_t seed,
                                         std::uint64_t stream = 0);

std::vector<PathSample> sample_path_boundary(const Environment& env, const BoundaryWeights& w, BackwardView back,
                                             int count, std::uint64_t seed, std::uint64_t stream = 0);

/// Quenched law of sigma_0 in the boundary model, exact given the environment.
struct SigmaStats {
    double q_sigma0_plus = 0.0; ///< E^Q[sigma_0^+]
    double q_sigma0 = 0.0;      ///< continuous-part contribution to E^Q[sigma_0]; censored paths count as 0, so
                                ///< this is an upper bound whenever censored_mass > 0
    std::vector<double> q_cdf;  ///< q_cdf[i] = Q(sigma_0 <= t_i), i = 0..m, q_cdf[m] = 1
    double censored_mass = 0.0; ///< Q(sigma_0 < 0)
    double delta = 0.0;

    /// Q(sigma_0^+ >= x) for x > 0.
    double tail(double x) const;
};

SigmaStats sigma0_stats(const Environment& env, const BoundaryWeights& w, BackwardView back);

struct SigmaSeries {
    std::vector<double> values;
    int censored = 0;
};

/// sigma_k from each sample; censored jumps are skipped and counted.
SigmaSeries sigma_k_samples(const std::vector<PathSample>& samples, int k);
/// sigma_{floor(gamma n)}; gamma must lie in [0, 1).
SigmaSeries sigma_gamma_samples(const std::vector<PathSample>& samples, int n, double gamma);

/// Fraction of all samples, censored ones counting as misses, with
/// |sigma - center| <= radius. Reported as a diagnostic; no threshold applies.
double small_ball_fraction(const SigmaSeries& s, double center, double radius);

/// One row per sample: sigma columns, entry_level (empty for free paths or
/// continuous entries), replica_id.
void write_paths_csv(std::ostream& out, const std::vector<PathSample>& samples, int n,
                     const std::vector<std::int64_t>& replica_ids);

} // namespace brownpoly
