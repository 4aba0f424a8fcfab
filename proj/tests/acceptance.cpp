// End-to-end acceptance run: one PASS/FAIL line per criterion, details after
// the colon. Exit status is nonzero when any criterion fails.
//
// Criterion 9 dominates the runtime (five ladder sweeps up to n = 256 with
// 2000 replicas each); set BROWNPOLY_WORKERS to use more cores.

#include "oracles.hpp"

#include "brownpoly/cli.hpp"
#include "brownpoly/experiments.hpp"
#include "brownpoly/oracle.hpp"
#include "brownpoly/parallel.hpp"
#include "brownpoly/partition.hpp"
#include "brownpoly/report.hpp"
#include "brownpoly/rng.hpp"
#include "brownpoly/specfun.hpp"
#include "brownpoly/verify.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace brownpoly;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool passed = true;
    std::string detail;
};

std::string num(double x, int precision = 4)
{
    std::ostringstream s;
    s.precision(precision);
    s << x;
    return s.str();
}

std::string failed_names(const std::vector<TestReport>& reports)
{
    std::string out;
    for (const auto& r : reports) {
        if (!r.passed) out += (out.empty() ? "" : ",") + r.name;
    }
    return out;
}

VerifyOptions verify_options()
{
    VerifyOptions opt;
    opt.workers = default_workers();
    return opt;
}

// 1 ---------------------------------------------------------------------------
Verdict special_functions()
{
    double worst_psi = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double x = std::pow(10.0, -3.0 + 9.0 * i / 999.0);
        const long double d0 = oracle::digamma(x), d1 = oracle::trigamma(x);
        worst_psi = std::max<double>(worst_psi, std::abs(digamma(x) - d0) / std::max<long double>(1, std::abs(d0)));
        worst_psi = std::max<double>(worst_psi, std::abs(trigamma(x) - d1) / std::max<long double>(1, std::abs(d1)));
    }
    double worst_inv = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double theta = std::pow(10.0, -2.0 + 5.0 * i / 999.0);
        worst_inv = std::max(worst_inv, std::abs(inv_trigamma(trigamma(theta)) - theta) / std::max(1.0, theta));
    }
    double worst_fe = 0.0;
    for (double beta : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        const long double b2 = static_cast<long double>(beta) * beta;
        const long double inf = oracle::golden_min([&](long double t) { return t * b2 - oracle::digamma(t); }, 1e-6L, 200.0L);
        worst_fe = std::max<double>(worst_fe, std::abs(free_energy_density(beta) - (inf - 2 * std::log(static_cast<long double>(beta)))));
    }
    return {worst_psi <= 1e-10 && worst_inv <= 1e-9 && worst_fe <= 1e-10,
            "psi err " + num(worst_psi, 2) + ", inverse err " + num(worst_inv, 2) + ", free energy err " + num(worst_fe, 2)};
}

// 2 ---------------------------------------------------------------------------
Verdict oracle_equivalence()
{
    double worst = 0.0;
    const auto compare = [&](double got, long double want) {
        if (want == 0) {
            if (got != -INFINITY) worst = INFINITY;
            return;
        }
        const long double w = std::log(want);
        worst = std::max<double>(worst, std::abs(got - w) / std::max<long double>(1, std::abs(w)));
    };
    for (std::uint64_t id = 0; id < 100; ++id) {
        CounterRng pick(31337, id);
        const int n = 1 + static_cast<int>(pick() % 3);
        const int m = 1 + static_cast<int>(pick() % 10);
        const GridSpec grid{n, 0.2 + 3.0 * pick.uniform(), m};
        const Environment env = sample_environment(grid, 8, id);
        const BoundaryWeights w = sample_boundary(0.3 + 2.0 * pick.uniform(), n, 8, id);
        const oracle::Paths p(env);
        const auto ff = forward_free(env);
        const auto bw = backward(env);
        const auto ax = forward_axis(env);
        const auto fb = forward_boundary(env, w);
        for (int k = 0; k <= n; ++k) {
            for (int i = 0; i <= m; ++i) {
                if (k >= 1) {
                    compare(ff(k, i), oracle::free_z(p, k, i));
                    compare(bw(k, i), oracle::backward_z(p, k, i));
                }
                compare(ax(k, i), oracle::axis_z(p, k, i));
                compare(fb(k, i), oracle::boundary_z(p, w, k, i).total());
            }
        }
        compare(brute_force_free(env), oracle::free_z(p, n, m));
    }
    return {worst <= 1e-12, "100 instances, worst relative log error " + num(worst, 2)};
}

// 3 ---------------------------------------------------------------------------
Verdict zero_noise()
{
    const double z = std::exp(forward_free(zero_environment(GridSpec{3, 1.0, 4}))(3, 4));
    bool ok = std::abs(z - 0.375) <= 1e-15;
    double worst_count = 0.0;
    const GridSpec g{5, 2.0, 11};
    const Environment zero = zero_environment(g);
    const auto ff = forward_free(zero);
    const auto bw = backward(zero);
    for (int k = 1; k <= g.n; ++k) {
        for (int i = 0; i <= g.m; ++i) {
            const double a = static_cast<double>(oracle::binomial(i, k - 1)) * std::pow(g.delta(), k - 1);
            const double b = static_cast<double>(oracle::binomial(g.m - i, g.n - k)) * std::pow(g.delta(), g.n - k);
            if (a > 0) worst_count = std::max(worst_count, std::abs(std::exp(ff(k, i)) / a - 1));
            if (b > 0) worst_count = std::max(worst_count, std::abs(std::exp(bw(k, i)) / b - 1));
        }
    }
    ok = ok && worst_count <= 1e-12;
    double worst_limit = 0.0;
    for (int k = 2; k <= 8; ++k) {
        const double t = 1.5;
        const double exact = std::pow(t, k - 1) / std::tgamma(k);
        worst_limit = std::max(worst_limit, std::abs(std::exp(log_partition_free(zero_environment(GridSpec{k, t, 200 * k}))) / exact - 1));
    }
    ok = ok && worst_limit <= 0.02;
    return {ok, "Z(3,4) = " + num(z, 16) + ", binomial err " + num(worst_count, 2) + ", simplex-limit err " + num(worst_limit, 3)};
}

// 4 ---------------------------------------------------------------------------
Verdict mean_identity()
{
    struct Case {
        double theta;
        int n;
        double t;
        int m;
    };
    const Case cases[] = {{1.0, 4, 2.0, 200}, {1.0, 32, 32 * trigamma(1.0), 1600}, {0.5, 8, 8 * trigamma(0.5), 400}};
    Verdict v;
    for (const auto& c : cases) {
        const TestReport r = test_mean_identity(c.theta, c.n, c.t, c.m, 2000, verify_options());
        v.passed = v.passed && r.passed;
        v.detail += (v.detail.empty() ? "" : "; ") + std::string("n=") + std::to_string(c.n) + " z=" + num(r.z_score, 3);
    }
    return v;
}

// 5 ---------------------------------------------------------------------------
Verdict dufresne_burke()
{
    const auto opt = verify_options();
    auto reports = test_dufresne(1.0, 2000, GridSpec{4, 2.0, 200}, opt);
    const auto burke = test_burke_independence(1.0, 2000, GridSpec{3, 2.0, 200}, {2.0, 4.0 / 3.0, 2.0 / 3.0}, opt);
    reports.insert(reports.end(), burke.begin(), burke.end());
    double worst_z = 0.0, worst_p = 1.0;
    for (const auto& r : reports) {
        if (r.name.find("ks") != std::string::npos) {
            worst_p = std::min(worst_p, r.z_score);
        } else {
            worst_z = std::max(worst_z, std::abs(r.z_score));
        }
    }
    const std::string failed = failed_names(reports);
    return {failed.empty(), std::to_string(reports.size()) + " checks, max |z| " + num(worst_z, 3) + ", min KS p "
                                + num(worst_p, 3) + (failed.empty() ? "" : ", failed: " + failed)};
}

// 6 ---------------------------------------------------------------------------
Verdict variance_identity()
{
    const auto reports = test_variance_identity(1.0, 32, 32 * trigamma(1.0), 1600, 2000, verify_options());
    const TestReport& r = reports.front();
    return {r.passed, "Var log Z " + num(r.statistic) + " vs " + num(r.target) + " (combined se " + num(r.stderr_, 3)
                          + "), censored mass " + num(reports.back().statistic, 3)};
}

// 7 ---------------------------------------------------------------------------
Verdict comparison()
{
    const TestReport r = run_comparison(1.0, 8, 24, 0.5, 4.0, 1000, verify_options());
    return {r.passed, "worst violation " + num(r.statistic, 3) + "; " + r.notes};
}

// 8 ---------------------------------------------------------------------------
Verdict reversal()
{
    const auto reports = test_reversal(1.0, 4, 2.0, 200, 2000, verify_options());
    std::string detail;
    for (const auto& r : reports) detail += (detail.empty() ? "" : ", ") + r.name + (r.passed ? " ok" : " FAILED");
    return {failed_names(reports).empty(), detail};
}

// 9 and 10 share one set of sweeps -------------------------------------------------
struct ScalingOutcome {
    Verdict exponents{false, "scaling sweep did not complete"};
    Verdict tails{false, "scaling sweep did not complete"};
};

ScalingOutcome scaling()
{
    ExperimentConfig cfg;
    cfg.point = CharacteristicPoint::from_theta(1.0);
    cfg.workers = default_workers();
    SweepCache cache;
    const ExponentFit var = run_variance_exponent(cfg, cache);
    const ExponentFit pb = run_path_exponent(cfg, cache, true);
    const ExponentFit pf = run_path_exponent(cfg, cache, false);
    const FluctuationResult fl = run_freeZ_fluctuation(cfg, cache);
    const TailResult tail = run_sigma_tail(cfg, cache);

    const auto ok = [](const ExponentFit& f) { return f.status == "pass"; };
    const auto show = [](const ExponentFit& f) {
        return f.exponent_name + " " + num(f.slope, 3) + "+-" + num(f.slope_stderr, 2) + " (" + f.status + ")";
    };
    ScalingOutcome out;
    out.exponents.passed = ok(var) && ok(pb) && ok(pf) && fl.ks_distance < 0.15;
    out.exponents.detail = show(var) + ", " + show(pb) + ", " + show(pf) + ", KS(64,256) " + num(fl.ks_distance, 3);
    out.tails.passed = tail.nonincreasing && tail.decay_1_to_2 >= 2.0;
    out.tails.detail = std::string("nonincreasing ") + (tail.nonincreasing ? "yes" : "no") + ", P(b=1)/P(b=2) = "
                       + num(tail.decay_1_to_2, 3);
    return out;
}

// 11 --------------------------------------------------------------------------
Verdict reproducibility()
{
    const fs::path root = fs::temp_directory_path() / "brownpoly_acceptance_repro";
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path cfg = root / "small.ini";
    std::ofstream(cfg) << "[experiments]\nn_values = 4, 8, 16\nreplicas = 64\nm_per_level = 12\n"
                          "[verify]\ntests = mean, burke, reversal\nreplicas = 64\nmean_m = 40\nburke_m = 40\nreversal_m = 40\n"
                          "[sample]\ncount = 300\n[run]\nbootstrap_resamples = 100\n";
    std::ostringstream sink;
    int compared = 0;
    bool ok = true;
    for (const std::string command : {"exponent", "path", "verify", "sample"}) {
        std::vector<std::vector<OutputFile>> runs;
        for (const int workers : {1, 4, 16}) {
            const fs::path dir = root / (command + "_w" + std::to_string(workers));
            run_cli({command, "--config", cfg.string(), "--out-dir", dir.string(), "--workers", std::to_string(workers)}, sink, sink);
            std::ifstream in(dir / "manifest.json");
            runs.push_back(RunManifest::from_json(nlohmann::json::parse(in)).outputs);
        }
        for (const auto& r : runs) {
            bool same = r.size() == runs[0].size() && !r.empty();
            for (std::size_t i = 0; same && i < r.size(); ++i) same = r[i].name == runs[0][i].name && r[i].checksum == runs[0][i].checksum;
            ok = ok && same;
        }
        // replay the single-worker manifest with 16 workers
        const fs::path manifest = root / (command + "_w1") / "manifest.json";
        const int code = run_cli({"replay", manifest.string(), "--out-dir", (root / (command + "_replay")).string(), "--workers", "16"}, sink, sink);
        ok = ok && code == kExitOk;
        compared += static_cast<int>(runs[0].size());
    }
    return {ok, std::to_string(compared) + " output files identical across 1/4/16 workers and manifest replay"};
}

} // namespace

int main()
{
    int failures = 0;
    const auto report = [&](int id, const char* title, const std::function<Verdict()>& fn) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += v.passed ? 0 : 1;
        std::cout << (v.passed ? "PASS" : "FAIL") << "  criterion " << id << " " << title << ": " << v.detail << " ["
                  << num(secs, 3) << " s]" << std::endl;
    };

    report(1, "special functions", special_functions);
    report(2, "oracle equivalence", oracle_equivalence);
    report(3, "zero-noise closed forms", zero_noise);
    report(4, "mean identity", mean_identity);
    report(5, "stationarity and independence of increments", dufresne_burke);
    report(6, "variance identity", variance_identity);
    report(7, "comparison inequalities", comparison);
    report(8, "reversal duality", reversal);
    ScalingOutcome scaled;
    report(9, "scaling exponents", [&] {
        scaled = scaling();
        return scaled.exponents;
    });
    report(10, "sigma_0 tail diagnostics", [&] { return scaled.tails; });
    report(11, "reproducibility", reproducibility);

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
