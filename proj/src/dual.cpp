#include "brownpoly/logspace.hpp"
#include "brownpoly/parallel.hpp"
#include "brownpoly/quenched.hpp"
#include "brownpoly/replica.hpp"
#include "brownpoly/rng.hpp"
#include "brownpoly/specfun.hpp"
#include "brownpoly/stats.hpp"
#include "brownpoly/verify.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace brownpoly {

IncrementTuple increment_tuple(const IncrementSeries& s, const Environment& env)
{
    IncrementTuple t;
    t.n = s.n;
    t.m = s.m;
    t.y = s.y;
    t.r = s.r;
    t.x = s.x;
    const auto width = static_cast<std::size_t>(s.m + 1);
    t.b.resize(static_cast<std::size_t>(s.n) * width);
    for (int k = 1; k <= s.n; ++k) {
        const auto path = env.level_path(k);
        std::copy(path.begin(), path.end(), t.b.begin() + static_cast<std::ptrdiff_t>((k - 1) * width));
    }
    return t;
}

IncrementTuple dual_tuple(const IncrementTuple& in)
{
    const int n = in.n;
    const int m = in.m;
    IncrementTuple out;
    out.n = n;
    out.m = m;
    out.y.resize(in.y.size());
    out.b.resize(in.b.size());
    out.r.resize(in.r.size());
    out.x.resize(in.x.size());
    for (int i = 0; i <= m; ++i) {
        for (int j = 0; j <= n; ++j) out.y_at(j, i) = in.y_at(n - j, m) - in.y_at(n - j, m - i);
        for (int j = 1; j <= n; ++j) {
            out.b_at(j, i) = in.x_at(n + 1 - j, m) - in.x_at(n + 1 - j, m - i);
            out.r_at(j, i) = in.r_at(n + 1 - j, m - i);
            out.x_at(j, i) = in.b_at(n + 1 - j, m) - in.b_at(n + 1 - j, m - i);
        }
    }
    return out;
}

double involution_error(const IncrementTuple& tuple)
{
    const auto twice = dual_tuple(dual_tuple(tuple));
    double err = 0.0;
    auto scan = [&err](const std::vector<double>& a, const std::vector<double>& b) {
        for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::abs(a[i] - b[i]));
    };
    scan(tuple.y, twice.y);
    scan(tuple.b, twice.b);
    scan(tuple.r, twice.r);
    scan(tuple.x, twice.x);
    return err;
}

DualEnvironment build_dual(const Environment& env, const BoundaryWeights& w, const LogPartitionTable& fb, double T)
{
    const GridSpec& g = env.grid();
    if (std::abs(T - g.t) > 1e-12 * std::max(1.0, g.t)) {
        throw std::invalid_argument("build_dual: the reversal horizon must be the grid endpoint");
    }
    if (fb.kind() != TableKind::forward_boundary || fb.theta() != w.theta) {
        throw std::invalid_argument("build_dual: expects the forward_boundary table of (env, w)");
    }
    const auto tuple = increment_tuple(increments(fb, env), env);
    auto dual = dual_tuple(tuple);
    const int n = g.n;
    const int m = g.m;
    std::vector<double> db0(static_cast<std::size_t>(m));
    std::vector<double> db(static_cast<std::size_t>(n) * m);
    for (int i = 0; i < m; ++i) db0[i] = dual.y_at(0, i + 1) - dual.y_at(0, i);
    for (int j = 1; j <= n; ++j) {
        for (int i = 0; i < m; ++i) db[static_cast<std::size_t>(j - 1) * m + i] = dual.b_at(j, i + 1) - dual.b_at(j, i);
    }
    BoundaryWeights dw{w.theta, std::vector<double>(static_cast<std::size_t>(n))};
    for (int j = 1; j <= n; ++j) dw.r0[j - 1] = dual.r_at(j, 0);
    return {Environment(g, std::move(db), std::move(db0), env.seed(), env.stream_id()), std::move(dw), T,
            std::move(dual)};
}

std::vector<TestReport> test_reversal(double theta, int n, double t, int m, int replicas, const VerifyOptions& opt)
{
    constexpr std::uint64_t kTagReversal = 106;
    const GridSpec grid{n, t, m};
    grid.validate();
    if (replicas < 10) throw std::invalid_argument("test_reversal: need at least 10 replicas");
    const auto R = static_cast<std::size_t>(replicas);
    std::vector<double> lz(R), lz_dual(R), r1(R), r1_dual(R), s0(R), s0_dual(R), involution(R);

    parallel_for(R, opt.workers, [&](std::size_t rep) {
        const Replica rp = make_replica(grid, theta, opt.seed, stream_key({kTagReversal, rep}), opt.extrapolate);
        const auto fb = forward_boundary(rp.fine, rp.weights);
        const auto dual = build_dual(rp.fine, rp.weights, fb, rp.fine.grid().t);
        // The dual of each resolution carries that resolution's own
        // discretization error, so the coarse dual is built from the coarse
        // environment rather than by coarsening the fine dual.
        std::optional<DualEnvironment> dual_coarse;
        if (rp.doubled) {
            dual_coarse.emplace(build_dual(rp.coarse, rp.weights, forward_boundary(rp.coarse, rp.weights), rp.coarse.grid().t));
        }

        auto evaluate = [&](const Environment& fine, const BoundaryWeights& wf, const Environment& coarse,
                            const BoundaryWeights& wc, double& lz_out, double& s0_out) {
            const ExpIncrements ef(fine);
            const auto back_f = backward_scaled(fine, ef);
            const double lf = restricted_boundary_masses(fine, wf, back_f).log_total();
            const double sf = sigma0_stats(fine, wf, back_f).q_sigma0_plus;
            double lc = lf;
            double sc = sf;
            if (rp.doubled) {
                const ExpIncrements ec(coarse);
                const auto back_c = backward_scaled(coarse, ec);
                lc = restricted_boundary_masses(coarse, wc, back_c).log_total();
                sc = sigma0_stats(coarse, wc, back_c).q_sigma0_plus;
            }
            lz_out = rp.extrapolate(lf, lc);
            s0_out = rp.extrapolate(sf, sc);
        };
        evaluate(rp.fine, rp.weights, rp.coarse, rp.weights, lz[rep], s0[rep]);
        if (dual_coarse) {
            evaluate(dual.env, dual.weights, dual_coarse->env, dual_coarse->weights, lz_dual[rep], s0_dual[rep]);
        } else {
            evaluate(dual.env, dual.weights, dual.env, dual.weights, lz_dual[rep], s0_dual[rep]);
        }
        r1[rep] = rp.weights.r(1);
        r1_dual[rep] = dual.weights.r(1);
        double scale = 1.0;
        for (double v : dual.tuple.y) scale = std::max(scale, std::abs(v));
        for (double v : dual.tuple.x) scale = std::max(scale, std::abs(v));
        involution[rep] = involution_error(dual.tuple) / scale;
    });

    std::vector<TestReport> out;
    const double target = -n * digamma(theta) + theta * t;
    const std::string how = opt.extrapolate ? "extrapolated 2*v(2m) - v(m)" : "single resolution";
    out.push_back(moment_report("reversal.dual_mean", mean(lz_dual), target, standard_error(lz_dual), replicas, grid,
                                "mean of log Z in the dual environment vs -n*Psi0 + theta*t; " + how));

    // The two sides are separate estimates of one law, so each gets its own
    // bootstrap error and the test uses the combined error. Per replica the
    // dual is almost a function of the original path, which makes a paired
    // error far smaller than the sampling error and turns the comparison into
    // a test of residual grid bias; that paired z is kept in the notes.
    const auto var_of = [](std::span<const double> x) { return variance(x); };
    const auto var_orig = bootstrap(lz, var_of, opt.bootstrap_resamples, opt.seed, stream_key({kTagReversal, 1}));
    const auto var_dual =
        bootstrap(lz_dual, var_of, opt.bootstrap_resamples, opt.seed, stream_key({kTagReversal, 3}));
    const auto var_paired = bootstrap_paired(
        lz, lz_dual, [](std::span<const double> a, std::span<const double> b) { return variance(a) - variance(b); },
        opt.bootstrap_resamples, opt.seed, stream_key({kTagReversal, 4}));
    out.push_back(moment_report("reversal.variance", var_orig.estimate - var_dual.estimate, 0.0,
                                std::hypot(var_orig.stderr_, var_dual.stderr_), replicas, grid,
                                "Var log Z original minus dual; combined bootstrap error; paired z = " +
                                    std::to_string(var_paired.estimate / var_paired.stderr_)));

    auto cov_of = [](const std::vector<double>& x, const std::vector<double>& y) {
        return [&x, &y](std::span<const std::size_t> idx) {
            std::vector<double> a, b;
            a.reserve(idx.size());
            b.reserve(idx.size());
            for (auto i : idx) {
                a.push_back(x[i]);
                b.push_back(y[i]);
            }
            return covariance(a, b);
        };
    };
    const auto cov_orig = bootstrap_index(R, cov_of(lz, r1), opt.bootstrap_resamples, opt.seed, stream_key({kTagReversal, 2}));
    const auto cov_dual =
        bootstrap_index(R, cov_of(lz_dual, r1_dual), opt.bootstrap_resamples, opt.seed, stream_key({kTagReversal, 5}));
    out.push_back(moment_report("reversal.cross_moment", cov_orig.estimate - cov_dual.estimate, 0.0,
                                std::hypot(cov_orig.stderr_, cov_dual.stderr_), replicas, grid,
                                "Cov(log Z, r_1(0)) original minus dual; combined bootstrap error"));

    std::vector<double> s0_diff(R);
    for (std::size_t i = 0; i < R; ++i) s0_diff[i] = s0[i] - s0_dual[i];
    out.push_back(moment_report("reversal.sigma0_plus", mean(s0_diff), 0.0, standard_error(s0_diff), replicas, grid,
                                "E[E^Q sigma_0^+] original minus dual"));

    TestReport inv;
    inv.name = "reversal.involution";
    inv.statistic = *std::max_element(involution.begin(), involution.end());
    inv.target = 1e-12;
    inv.passed = inv.statistic <= 1e-12;
    inv.z_score = inv.passed ? 0.0 : INFINITY;
    inv.replicas = replicas;
    inv.grid = grid;
    inv.notes = "max |dual(dual(x)) - x| relative to the largest tuple entry";
    out.push_back(inv);
    return out;
}

} // namespace brownpoly
