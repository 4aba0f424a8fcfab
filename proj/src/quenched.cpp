#include "brownpoly/quenched.hpp"

#include "brownpoly/logspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace brownpoly {

QuenchedSampler::QuenchedSampler(const Environment& env, BackwardView back)
    : env_(env), back_(back), log_delta_(std::log(env.grid().delta())), boundary_path_(env.boundary_path())
{
    if (back.levels() != env.levels() || back.cells() != env.cells()) {
        throw std::invalid_argument("QuenchedSampler: backward table does not match the environment");
    }
}

int QuenchedSampler::jump_from(int k, int c, double u) const
{
    const double log_total = back_(k, c);
    if (log_total == kLogZero) {
        throw std::logic_error("QuenchedSampler: level " + std::to_string(k) + " at index " + std::to_string(c)
                               + " carries no mass");
    }
    const int m = env_.cells();
    const auto inc = env_.level_increments(k);
    const auto inc_next = env_.level_increments(k + 1);
    double drift = 0.0; // B_k(t_c, t_j)
    double cumulative = 0.0;
    int last = -1;
    for (int j = c; j < m; ++j) {
        const double lw = drift + log_delta_ + inc_next[j] + back_(k + 1, j + 1) - log_total;
        if (lw != kLogZero) {
            cumulative += std::exp(lw);
            last = j;
            if (cumulative >= u) return j;
        }
        drift += inc[j];
    }
    // Rounding can leave the cumulative sum a hair below u.
    if (last < 0) throw std::logic_error("QuenchedSampler: empty conditional slice");
    return last;
}

void QuenchedSampler::continue_from(PathSample& path, int level, int start, CounterRng& rng) const
{
    const double delta = env_.grid().delta();
    for (int k = level; k < env_.levels(); ++k) {
        const int j = jump_from(k, start, rng.uniform());
        path.jump_index.push_back(j);
        path.jumps.push_back(j * delta);
        start = j + 1;
    }
}

PathSample QuenchedSampler::free_path(CounterRng& rng) const
{
    PathSample path;
    path.model = PathModel::free;
    continue_from(path, 1, 0, rng);
    return path;
}

PathSample QuenchedSampler::boundary_path(CounterRng& rng, const BoundaryWeights& w,
                                          const RestrictedMasses& masses) const
{
    const int n = env_.levels();
    const int m = env_.cells();
    const double delta = env_.grid().delta();
    const double log_total = masses.log_total();
    PathSample path;
    path.model = PathModel::boundary;

    const double u_part = rng.uniform();
    const double u = rng.uniform();
    if (u_part < std::exp(masses.log_positive - log_total)) {
        // sigma_0 = t_i: leave the axis at t_i and collect B_1 over cell i.
        const auto inc1 = env_.level_increments(1);
        double cumulative = 0.0;
        int chosen = -1;
        for (int i = 0; i < m; ++i) {
            const double lw = -boundary_path_[i] + w.theta * (i * delta) + log_delta_ + inc1[i] + back_(1, i + 1)
                              - masses.log_positive;
            if (lw == kLogZero) continue;
            cumulative += std::exp(lw);
            chosen = i;
            if (cumulative >= u) break;
        }
        if (chosen < 0) throw std::logic_error("QuenchedSampler: continuous part has no mass");
        path.jump_index.push_back(chosen);
        path.jumps.push_back(chosen * delta);
        continue_from(path, 1, chosen + 1, rng);
    } else {
        // Enter level j at time 0 through the atom Z_j(0) = exp(r_1(0) + ... + r_j(0)).
        double atom = 0.0;
        double cumulative = 0.0;
        int chosen = -1;
        for (int j = 1; j <= n; ++j) {
            atom += w.r(j);
            const double lw = atom + back_(j, 0) - masses.log_negative;
            if (lw == kLogZero) continue;
            cumulative += std::exp(lw);
            chosen = j;
            if (cumulative >= u) break;
        }
        if (chosen < 0) throw std::logic_error("QuenchedSampler: atomic part has no mass");
        path.entry_level = chosen;
        path.jump_index.assign(static_cast<std::size_t>(chosen), 0);
        path.jumps.assign(static_cast<std::size_t>(chosen), 0.0);
        continue_from(path, chosen, 0, rng);
    }
    return path;
}

std::vector<PathSample> sample_path_free(const Environment& env, BackwardView back, int count, std::uint64_t seed,
                                         std::uint64_t stream)
{
    if (count < 1) throw std::invalid_argument("sample_path_free: count must be >= 1");
    const QuenchedSampler sampler(env, back);
    std::vector<PathSample> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int s = 0; s < count; ++s) {
        CounterRng rng(seed, stream_key({stream, static_cast<std::uint64_t>(s)}), RngDomain::path);
        out.push_back(sampler.free_path(rng));
    }
    return out;
}

std::vector<PathSample> sample_path_boundary(const Environment& env, const BoundaryWeights& w, BackwardView back,
                                             int count, std::uint64_t seed, std::uint64_t stream)
{
    if (count < 1) throw std::invalid_argument("sample_path_boundary: count must be >= 1");
    const QuenchedSampler sampler(env, back);
    const RestrictedMasses masses = back.restricted_masses(env, w);
    std::vector<PathSample> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int s = 0; s < count; ++s) {
        CounterRng rng(seed, stream_key({stream, static_cast<std::uint64_t>(s)}), RngDomain::path);
        out.push_back(sampler.boundary_path(rng, w, masses));
    }
    return out;
}

double SigmaStats::tail(double x) const
{
    if (!(x > 0.0)) return 1.0 - censored_mass;
    const auto first = static_cast<std::size_t>(std::ceil(x / delta - 1e-9));
    if (first == 0) return 1.0 - censored_mass;
    if (first >= q_cdf.size()) return 0.0;
    return std::max(0.0, 1.0 - q_cdf[first - 1]);
}

SigmaStats sigma0_stats(const Environment& env, const BoundaryWeights& w, BackwardView back)
{
    const int m = env.cells();
    const double delta = env.grid().delta();
    const RestrictedMasses masses = back.restricted_masses(env, w);
    const double log_total = masses.log_total();
    const double log_delta = std::log(delta);
    const auto b = env.boundary_path();
    const auto inc1 = env.level_increments(1);

    SigmaStats s;
    s.delta = delta;
    s.censored_mass = std::exp(masses.log_negative - log_total);
    s.q_cdf.resize(static_cast<std::size_t>(m + 1));
    double cumulative = s.censored_mass;
    for (int i = 0; i < m; ++i) {
        const double p = std::exp(-b[i] + w.theta * (i * delta) + log_delta + inc1[i] + back(1, i + 1) - log_total);
        s.q_sigma0_plus += p * (i * delta);
        cumulative += p;
        s.q_cdf[i] = std::min(cumulative, 1.0);
    }
    s.q_cdf[m] = 1.0;
    s.q_sigma0 = s.q_sigma0_plus;
    return s;
}

SigmaSeries sigma_k_samples(const std::vector<PathSample>& samples, int k)
{
    SigmaSeries out;
    out.values.reserve(samples.size());
    for (const auto& p : samples) {
        const int lo = p.model == PathModel::free ? 1 : 0;
        const int hi = p.model == PathModel::free ? static_cast<int>(p.jumps.size()) : static_cast<int>(p.jumps.size()) - 1;
        if (k < lo || k > hi) throw std::out_of_range("sigma_k_samples: jump index " + std::to_string(k) + " out of range");
        if (p.censored(k)) {
            ++out.censored;
            continue;
        }
        out.values.push_back(p.sigma(k));
    }
    return out;
}

SigmaSeries sigma_gamma_samples(const std::vector<PathSample>& samples, int n, double gamma)
{
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::domain_error("sigma_gamma_samples: gamma must lie in [0, 1)");
    return sigma_k_samples(samples, static_cast<int>(std::floor(gamma * n)));
}

double small_ball_fraction(const SigmaSeries& s, double center, double radius)
{
    if (!(radius >= 0.0)) throw std::invalid_argument("small_ball_fraction: radius must be nonnegative");
    const std::size_t total = s.values.size() + static_cast<std::size_t>(s.censored);
    if (total == 0) return std::numeric_limits<double>::quiet_NaN();
    const auto hits = std::count_if(s.values.begin(), s.values.end(),
                                    [&](double v) { return std::abs(v - center) <= radius; });
    return static_cast<double>(hits) / static_cast<double>(total);
}

void write_paths_csv(std::ostream& out, const std::vector<PathSample>& samples, int n,
                     const std::vector<std::int64_t>& replica_ids)
{
    if (replica_ids.size() != samples.size()) throw std::invalid_argument("write_paths_csv: one replica id per sample");
    const bool boundary = !samples.empty() && samples.front().model == PathModel::boundary;
    for (int k = boundary ? 0 : 1; k < n; ++k) out << "sigma_" << k << ',';
    out << "entry_level,replica_id\n";
    out.precision(17);
    for (std::size_t s = 0; s < samples.size(); ++s) {
        for (double v : samples[s].jumps) out << v << ',';
        if (samples[s].entry_level) out << *samples[s].entry_level;
        out << ',' << replica_ids[s] << '\n';
    }
}

} // namespace brownpoly
