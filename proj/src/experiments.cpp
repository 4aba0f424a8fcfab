#include "brownpoly/experiments.hpp"

#include "brownpoly/parallel.hpp"
#include "brownpoly/partition.hpp"
#include "brownpoly/quenched.hpp"
#include "brownpoly/replica.hpp"
#include "brownpoly/rng.hpp"
#include "brownpoly/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace brownpoly {

namespace {

constexpr std::uint64_t kTagSweep = 201;
constexpr std::uint64_t kTagSweepPath = 202;
constexpr std::uint64_t kTagFit = 203;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// A boundary-model point is dropped when more than this fraction of its
/// sampled sigma_{floor(gamma n)} fell before time 0.
constexpr double kMaxCensoredFraction = 0.25;

double two_thirds_power(int n) { return std::cbrt(static_cast<double>(n) * n); }

/// Weighted log-log fit of the usable points; fills slope, status and flags.
void fit_exponent(ExponentFit& fit)
{
    std::vector<double> x, y, s;
    for (const auto& p : fit.points) {
        if (p.aborted) continue;
        if (!(p.statistic > 0.0)) {
            fit.flags.push_back("nonpositive statistic at n=" + std::to_string(p.n));
            continue;
        }
        if (!(p.stderr_ > 0.0)) {
            fit.flags.push_back("zero standard error at n=" + std::to_string(p.n));
            continue;
        }
        if (p.stderr_ > 0.5 * p.statistic) fit.flags.push_back("standard error dominates at n=" + std::to_string(p.n));
        x.push_back(std::log(static_cast<double>(p.n)));
        y.push_back(std::log(p.statistic));
        s.push_back(p.stderr_ / p.statistic);
    }
    if (x.size() < 3) {
        fit.status = "inconclusive";
        fit.flags.push_back("fewer than 3 usable points");
        fit.slope = fit.slope_stderr = fit.intercept = kNaN;
        return;
    }
    const LinearFit lf = weighted_fit(x, y, s);
    fit.slope = lf.slope;
    fit.slope_stderr = lf.slope_stderr;
    fit.intercept = lf.intercept;

    // Lack-of-fit screen: residuals that rise or fall monotonically along the
    // ladder indicate curvature the single power law does not capture.
    if (lf.residuals.size() >= 4) {
        bool up = true, down = true;
        for (std::size_t i = 1; i < lf.residuals.size(); ++i) {
            up = up && lf.residuals[i] > lf.residuals[i - 1];
            down = down && lf.residuals[i] < lf.residuals[i - 1];
        }
        if (up || down) fit.flags.push_back("monotone residual trend");
    }
    if (lf.dof > 0 && lf.chi2 / lf.dof > 4.0) fit.flags.push_back("chi2/dof = " + std::to_string(lf.chi2 / lf.dof));

    if (!(fit.slope_stderr <= 0.1)) {
        fit.status = "inconclusive";
    } else {
        fit.status = fit.slope >= fit.window_lo && fit.slope <= fit.window_hi ? "pass" : "fail";
    }
}

void require_ladder(const ExperimentConfig& cfg, const char* who)
{
    cfg.validate();
    if (cfg.n_values.size() < 3) {
        throw std::invalid_argument(std::string(who) + ": an exponent fit needs at least 3 values of n");
    }
}

} // namespace

double ExperimentConfig::horizon(int n) const
{
    return static_cast<double>(n) * point.tau + A * two_thirds_power(n);
}

void ExperimentConfig::validate() const
{
    if (!(point.theta > 0.0) || !std::isfinite(point.theta)) throw std::invalid_argument("theta: must be positive");
    if (n_values.empty()) throw std::invalid_argument("n_values: must not be empty");
    for (std::size_t i = 0; i < n_values.size(); ++i) {
        if (n_values[i] < 1) throw std::invalid_argument("n_values: entries must be >= 1");
        if (i > 0 && n_values[i] <= n_values[i - 1]) throw std::invalid_argument("n_values: must be increasing");
    }
    if (!(A >= 0.0) || !std::isfinite(A)) throw std::invalid_argument("A: must be nonnegative");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma: must lie in [0, 1)");
    if (replicas < 10) throw std::invalid_argument("replicas: need at least 10");
    if (m_per_level < 1) throw std::invalid_argument("m_per_level: must be >= 1");
    if (bootstrap_resamples < 10) throw std::invalid_argument("bootstrap_resamples: need at least 10");
    if (workers < 1) throw std::invalid_argument("workers: must be >= 1");
    for (double b : tail_b) {
        if (!(b > 0.0)) throw std::invalid_argument("tail_b: entries must be positive");
    }
    for (double b : fluctuation_b) {
        if (!(b > 0.0)) throw std::invalid_argument("fluctuation_b: entries must be positive");
    }
    if (tail_n < 1) throw std::invalid_argument("tail_n: must be >= 1");
}

SweepPoint run_sweep_point(const ExperimentConfig& cfg, int n)
{
    cfg.validate();
    SweepPoint point;
    point.n = n;
    point.t = cfg.horizon(n);
    point.m = cfg.m_per_level * n;
    const GridSpec grid{n, point.t, point.m};
    grid.validate();
    const double theta = cfg.point.theta;
    const int k = static_cast<int>(std::floor(cfg.gamma * n));
    const double centre = cfg.gamma * point.t;
    const double scale_b = two_thirds_power(n);

    point.replicas.resize(static_cast<std::size_t>(cfg.replicas));
    parallel_for(point.replicas.size(), cfg.workers, [&](std::size_t rep) {
        const std::uint64_t stream = stream_key({kTagSweep, static_cast<std::uint64_t>(n), rep});
        const Replica rp = make_replica(grid, theta, cfg.seed, stream, cfg.extrapolate);
        const ScaledTable back = backward_scaled(rp.fine, rp.exp_fine);
        const RestrictedMasses masses = restricted_boundary_masses(rp.fine, rp.weights, back);

        ReplicaRecord& r = point.replicas[rep];
        const double lz_f = masses.log_total();
        const double lz_c = rp.doubled ? log_partition_boundary(rp.coarse, rp.exp_coarse, rp.weights) : lz_f;
        r.log_z = rp.extrapolate(lz_f, lz_c);
        const double lf_f = back.log_at(1, 0);
        const double lf_c = rp.doubled ? log_partition_free(rp.coarse, rp.exp_coarse) : lf_f;
        r.log_z_free = rp.extrapolate(lf_f, lf_c);

        const SigmaStats stats = sigma0_stats(rp.fine, rp.weights, back);
        r.q_sigma0_plus = stats.q_sigma0_plus;
        r.censored_mass = stats.censored_mass;
        r.tail.reserve(cfg.tail_b.size());
        for (double b : cfg.tail_b) r.tail.push_back(stats.tail(b * scale_b));

        const QuenchedSampler sampler(rp.fine, back);
        CounterRng rng(cfg.seed, stream_key({kTagSweepPath, static_cast<std::uint64_t>(n), rep}), RngDomain::path);
        const PathSample bp = sampler.boundary_path(rng, rp.weights, masses);
        r.boundary_censored = bp.censored(k);
        r.sigma_boundary = r.boundary_censored ? kNaN : bp.sigma(k) - centre;
        r.sigma0 = bp.censored(0) ? 0.0 : bp.sigma(0);
        const PathSample fp = sampler.free_path(rng);
        r.sigma_free = k >= 1 && n >= 2 ? fp.sigma(k) - centre : kNaN;
    });
    return point;
}

const SweepPoint& SweepCache::get(const ExperimentConfig& cfg, int n)
{
    const auto key = std::make_pair(n, cfg.horizon(n));
    auto it = points_.find(key);
    if (it == points_.end()) it = points_.emplace(key, run_sweep_point(cfg, n)).first;
    return it->second;
}

ExponentFit run_variance_exponent(const ExperimentConfig& cfg, SweepCache& cache)
{
    require_ladder(cfg, "run_variance_exponent");
    ExponentFit fit;
    fit.exponent_name = "chi-variance";
    for (int n : cfg.n_values) {
        const SweepPoint& sp = cache.get(cfg, n);
        std::vector<double> lz;
        lz.reserve(sp.replicas.size());
        for (const auto& r : sp.replicas) lz.push_back(r.log_z);
        const auto b = bootstrap(lz, [](std::span<const double> v) { return variance(v); }, cfg.bootstrap_resamples,
                                 cfg.seed, stream_key({kTagFit, 1, static_cast<std::uint64_t>(n)}));
        fit.points.push_back(FitPoint{n, b.estimate, b.stderr_, static_cast<int>(lz.size()), 0, false});
    }
    fit_exponent(fit);
    return fit;
}

ExponentFit run_path_exponent(const ExperimentConfig& cfg, SweepCache& cache, bool boundary_model)
{
    require_ladder(cfg, "run_path_exponent");
    ExponentFit fit;
    fit.exponent_name = boundary_model ? "zeta-boundary" : "zeta-free";
    for (int n : cfg.n_values) {
        const SweepPoint& sp = cache.get(cfg, n);
        std::vector<double> d;
        int censored = 0;
        for (const auto& r : sp.replicas) {
            const double v = boundary_model ? r.sigma_boundary : r.sigma_free;
            if (std::isnan(v)) {
                ++censored;
                continue;
            }
            d.push_back(v);
        }
        FitPoint p{n, kNaN, kNaN, static_cast<int>(d.size()), censored, false};
        const double frac = static_cast<double>(censored) / static_cast<double>(sp.replicas.size());
        if (d.size() < 10 || (boundary_model && frac > kMaxCensoredFraction)) {
            p.aborted = true;
            fit.flags.push_back("point n=" + std::to_string(n) + " aborted: " + std::to_string(censored)
                                + " of " + std::to_string(sp.replicas.size()) + " samples censored or undefined");
        } else {
            const auto b = bootstrap(d, [](std::span<const double> v) { return interquartile_range(v); },
                                     cfg.bootstrap_resamples, cfg.seed,
                                     stream_key({kTagFit, boundary_model ? 2u : 3u, static_cast<std::uint64_t>(n)}));
            p.statistic = b.estimate;
            p.stderr_ = b.stderr_;
        }
        fit.points.push_back(p);
    }
    fit_exponent(fit);
    return fit;
}

FreeEnergyResult run_free_energy(const ExperimentConfig& cfg, SweepCache& cache)
{
    ExperimentConfig at_tau = cfg;
    at_tau.A = 0.0;
    at_tau.validate();
    const double theta = cfg.point.theta;
    const double beta = cfg.point.beta;

    FreeEnergyResult out;
    out.limit = free_energy_per_level(theta);
    out.p_beta = free_energy_density(beta);
    for (int n : at_tau.n_values) {
        const SweepPoint& sp = cache.get(at_tau, n);
        std::vector<double> per_level;
        per_level.reserve(sp.replicas.size());
        for (const auto& r : sp.replicas) per_level.push_back(r.log_z_free / n);
        FreeEnergyRow row;
        row.n = n;
        row.t = sp.t;
        row.mean = mean(per_level);
        row.stderr_ = standard_error(per_level);
        row.spread = std::sqrt(variance(per_level));
        row.distance = std::abs(row.mean - out.limit);
        row.beta_form = (-2.0 * (n - 1) * std::log(beta)) / n + row.mean;
        out.rows.push_back(row);
    }
    out.distance_decreasing = true;
    for (std::size_t i = 1; i < out.rows.size(); ++i) {
        if (!(out.rows[i].distance < out.rows[i - 1].distance)) out.distance_decreasing = false;
    }
    out.final_within = !out.rows.empty() && out.rows.back().distance < 0.1;
    return out;
}

FluctuationResult run_freeZ_fluctuation(const ExperimentConfig& cfg, SweepCache& cache)
{
    ExperimentConfig at_tau = cfg;
    at_tau.A = 0.0;
    at_tau.validate();
    if (at_tau.n_values.size() < 2) throw std::invalid_argument("run_freeZ_fluctuation: need at least 2 values of n");
    const double f = free_energy_per_level(cfg.point.theta);

    FluctuationResult out;
    out.n_values = at_tau.n_values;
    out.b_values = at_tau.fluctuation_b;
    for (int n : at_tau.n_values) {
        const SweepPoint& sp = cache.get(at_tau, n);
        const double scale = std::cbrt(static_cast<double>(n));
        std::vector<double> z;
        z.reserve(sp.replicas.size());
        for (const auto& r : sp.replicas) z.push_back((r.log_z_free - n * f) / scale);
        std::vector<double> tails;
        for (double b : out.b_values) {
            const auto hits = std::count_if(z.begin(), z.end(), [b](double v) { return std::abs(v) >= b; });
            tails.push_back(static_cast<double>(hits) / static_cast<double>(z.size()));
        }
        out.tail_prob.push_back(std::move(tails));
        out.normalized.push_back(std::move(z));
    }

    const std::size_t last = out.n_values.size() - 1;
    std::size_t ref = last - 1;
    for (std::size_t i = 0; i < last; ++i) {
        if (out.n_values[i] == 64) ref = i;
    }
    const GridSpec grid_last{out.n_values[last], at_tau.horizon(out.n_values[last]), at_tau.m_per_level * out.n_values[last]};
    const int R = at_tau.replicas;

    const KsResult ks = ks_two_sample(out.normalized[ref], out.normalized[last]);
    out.ks_distance = ks.statistic;
    TestReport r_ks;
    r_ks.name = "fluctuation.ks_n" + std::to_string(out.n_values[ref]) + "_vs_n" + std::to_string(out.n_values[last]);
    r_ks.statistic = ks.statistic;
    r_ks.target = 0.15;
    r_ks.z_score = ks.p_value;
    r_ks.passed = ks.statistic < 0.15;
    r_ks.replicas = R;
    r_ks.grid = grid_last;
    r_ks.notes = "Kolmogorov distance between (log Z - n f) / n^(1/3) samples; z_score holds the two-sample p-value";
    out.reports.push_back(r_ks);

    TestReport r_mono;
    r_mono.name = "fluctuation.tail_monotone";
    r_mono.passed = true;
    for (const auto& row : out.tail_prob) {
        for (std::size_t j = 1; j < row.size(); ++j) {
            if (out.b_values[j] > out.b_values[j - 1] && row[j] > row[j - 1]) r_mono.passed = false;
        }
    }
    r_mono.statistic = r_mono.passed ? 0.0 : 1.0;
    r_mono.replicas = R;
    r_mono.grid = grid_last;
    r_mono.notes = "P(|log Z - n f| >= b n^(1/3)) nonincreasing in b at every n";
    out.reports.push_back(r_mono);

    // Collapse: tails resolved by at least 10 hits at both ends of the ladder
    // agree within a factor 3.
    TestReport r_col;
    r_col.name = "fluctuation.collapse";
    r_col.target = 3.0;
    r_col.replicas = R;
    r_col.grid = grid_last;
    double worst = 1.0;
    int compared = 0;
    const double floor_p = 10.0 / R;
    for (std::size_t j = 0; j < out.b_values.size(); ++j) {
        const double a = out.tail_prob[ref][j];
        const double c = out.tail_prob[last][j];
        if (a < floor_p || c < floor_p) continue;
        worst = std::max(worst, std::max(a, c) / std::min(a, c));
        ++compared;
    }
    r_col.statistic = worst;
    r_col.passed = worst <= 3.0;
    r_col.notes = "largest tail-probability ratio over " + std::to_string(compared)
                  + " resolved b values (at least 10 exceedances at both n)";
    out.reports.push_back(r_col);

    out.median_offset = quantile(out.normalized[last], 0.5);
    TestReport r_med;
    r_med.name = "fluctuation.median_centering";
    r_med.statistic = out.median_offset;
    r_med.target = 2.0;
    r_med.passed = std::abs(out.median_offset) <= 2.0;
    r_med.replicas = R;
    r_med.grid = grid_last;
    r_med.notes = "(median log Z - n f) / n^(1/3) at the largest n must lie within +-2";
    out.reports.push_back(r_med);
    return out;
}

TailResult run_sigma_tail(const ExperimentConfig& cfg, SweepCache& cache)
{
    cfg.validate();
    TailResult out;
    out.n = cfg.tail_n;
    const SweepPoint& sp = cache.get(cfg, cfg.tail_n);
    for (std::size_t j = 0; j < cfg.tail_b.size(); ++j) {
        std::vector<double> p;
        p.reserve(sp.replicas.size());
        for (const auto& r : sp.replicas) p.push_back(r.tail[j]);
        out.rows.push_back(TailRow{cfg.tail_b[j], mean(p), standard_error(p)});
    }
    std::vector<TailRow> sorted = out.rows;
    std::sort(sorted.begin(), sorted.end(), [](const TailRow& a, const TailRow& b) { return a.b < b.b; });
    out.nonincreasing = true;
    for (std::size_t j = 1; j < sorted.size(); ++j) {
        if (sorted[j].probability > sorted[j - 1].probability) out.nonincreasing = false;
    }
    const GridSpec grid{sp.n, sp.t, sp.m};

    TestReport r_mono;
    r_mono.name = "sigma_tail.monotone";
    r_mono.statistic = out.nonincreasing ? 0.0 : 1.0;
    r_mono.passed = out.nonincreasing;
    r_mono.replicas = cfg.replicas;
    r_mono.grid = grid;
    r_mono.notes = "annealed Q(sigma_0^+ >= b n^(2/3)) nonincreasing in b";
    out.reports.push_back(r_mono);

    const auto find = [&](double b) -> const TailRow* {
        for (const auto& r : out.rows) {
            if (std::abs(r.b - b) < 1e-12) return &r;
        }
        return nullptr;
    };
    TestReport r_decay;
    r_decay.name = "sigma_tail.decay_b1_to_b2";
    r_decay.target = 2.0;
    r_decay.replicas = cfg.replicas;
    r_decay.grid = grid;
    const TailRow* one = find(1.0);
    const TailRow* two = find(2.0);
    if (one == nullptr || two == nullptr) {
        r_decay.statistic = kNaN;
        r_decay.passed = false;
        r_decay.notes = "b = 1 and b = 2 must both be on the tail grid";
    } else {
        out.decay_1_to_2 = two->probability > 0.0 ? one->probability / two->probability
                                                  : std::numeric_limits<double>::infinity();
        r_decay.statistic = out.decay_1_to_2;
        r_decay.passed = one->probability > 0.0 && out.decay_1_to_2 >= 2.0;
        r_decay.notes = "P(b=1) / P(b=2); P(b=1) = " + std::to_string(one->probability)
                        + ", P(b=2) = " + std::to_string(two->probability);
    }
    out.reports.push_back(r_decay);
    return out;
}

} // namespace brownpoly
