#include "brownpoly/stats.hpp"

#include "brownpoly/parallel.hpp"
#include "brownpoly/rng.hpp"
#include "brownpoly/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

namespace brownpoly {

int default_workers()
{
    if (const char* env = std::getenv("BROWNPOLY_WORKERS")) {
        const int w = std::atoi(env);
        if (w >= 1) return w;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

namespace {

void require_size(std::span<const double> x, std::size_t min, const char* what)
{
    if (x.size() < min) {
        throw std::invalid_argument(std::string(what) + ": need at least " + std::to_string(min) + " values");
    }
}

} // namespace

double mean(std::span<const double> x)
{
    require_size(x, 1, "mean");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x)
{
    require_size(x, 2, "variance");
    const double mu = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - mu) * (v - mu);
    return s / static_cast<double>(x.size() - 1);
}

double covariance(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) throw std::invalid_argument("covariance: length mismatch");
    require_size(x, 2, "covariance");
    const double mx = mean(x);
    const double my = mean(y);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
    return s / static_cast<double>(x.size() - 1);
}

double correlation(std::span<const double> x, std::span<const double> y)
{
    return covariance(x, y) / std::sqrt(variance(x) * variance(y));
}

double standard_error(std::span<const double> x)
{
    return std::sqrt(variance(x) / static_cast<double>(x.size()));
}

double quantile(std::span<const double> x, double p)
{
    require_size(x, 1, "quantile");
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("quantile: p must lie in [0, 1]");
    std::vector<double> s(x.begin(), x.end());
    std::sort(s.begin(), s.end());
    const double h = p * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

double interquartile_range(std::span<const double> x)
{
    return quantile(x, 0.75) - quantile(x, 0.25);
}

BootstrapResult bootstrap(std::span<const double> x, const std::function<double(std::span<const double>)>& statistic,
                          int resamples, std::uint64_t seed, std::uint64_t stream)
{
    return bootstrap_paired(
        x, x, [&](std::span<const double> a, std::span<const double>) { return statistic(a); }, resamples, seed,
        stream);
}

BootstrapResult bootstrap_index(std::size_t n, const std::function<double(std::span<const std::size_t>)>& statistic,
                                int resamples, std::uint64_t seed, std::uint64_t stream)
{
    if (n < 2) throw std::invalid_argument("bootstrap: need at least 2 values");
    if (resamples < 2) throw std::invalid_argument("bootstrap: need at least 2 resamples");
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    BootstrapResult out;
    out.estimate = statistic(idx);
    CounterRng rng(seed, stream, RngDomain::bootstrap);
    std::vector<double> values(static_cast<std::size_t>(resamples));
    for (auto& v : values) {
        for (auto& j : idx) j = std::min(n - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)));
        v = statistic(idx);
    }
    out.stderr_ = std::sqrt(variance(values));
    return out;
}

BootstrapResult bootstrap_paired(std::span<const double> x, std::span<const double> y,
                                 const std::function<double(std::span<const double>, std::span<const double>)>& statistic,
                                 int resamples, std::uint64_t seed, std::uint64_t stream)
{
    if (x.size() != y.size()) throw std::invalid_argument("bootstrap: length mismatch");
    std::vector<double> bx(x.size());
    std::vector<double> by(y.size());
    return bootstrap_index(
        x.size(),
        [&](std::span<const std::size_t> idx) {
            for (std::size_t i = 0; i < idx.size(); ++i) {
                bx[i] = x[idx[i]];
                by[i] = y[idx[i]];
            }
            return statistic(bx, by);
        },
        resamples, seed, stream);
}

double kolmogorov_q(double lambda)
{
    if (lambda < 1e-3) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-17) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

double ks_p_value(double d, double effective_n)
{
    const double root = std::sqrt(effective_n);
    return kolmogorov_q((root + 0.12 + 0.11 / root) * d);
}

} // namespace

KsResult ks_one_sample(std::span<const double> x, const std::function<double(double)>& cdf)
{
    require_size(x, 1, "ks_one_sample");
    std::vector<double> s(x.begin(), x.end());
    std::sort(s.begin(), s.end());
    const auto n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = cdf(s[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return {d, ks_p_value(d, n)};
}

KsResult ks_two_sample(std::span<const double> x, std::span<const double> y)
{
    require_size(x, 1, "ks_two_sample");
    require_size(y, 1, "ks_two_sample");
    std::vector<double> a(x.begin(), x.end());
    std::vector<double> b(y.begin(), y.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const auto na = static_cast<double>(a.size());
    const auto nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return {d, ks_p_value(d, na * nb / (na + nb))};
}

ChiSquareResult chi_square(std::span<const double> observed, std::span<const double> expected)
{
    if (observed.size() != expected.size() || observed.size() < 2) {
        throw std::invalid_argument("chi_square: need matching observed/expected arrays with >= 2 cells");
    }
    ChiSquareResult r;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (!(expected[i] > 0.0)) throw std::invalid_argument("chi_square: expected counts must be positive");
        const double d = observed[i] - expected[i];
        r.statistic += d * d / expected[i];
    }
    r.dof = static_cast<int>(observed.size()) - 1;
    r.p_value = gamma_q(0.5 * r.dof, 0.5 * r.statistic);
    return r;
}

LinearFit weighted_fit(std::span<const double> x, std::span<const double> y, std::span<const double> sigma)
{
    if (x.size() != y.size() || x.size() != sigma.size()) throw std::invalid_argument("weighted_fit: length mismatch");
    require_size(x, 2, "weighted_fit");
    double s = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(sigma[i] > 0.0)) throw std::invalid_argument("weighted_fit: sigma must be positive");
        const double w = 1.0 / (sigma[i] * sigma[i]);
        s += w;
        sx += w * x[i];
        sy += w * y[i];
        sxx += w * x[i] * x[i];
        sxy += w * x[i] * y[i];
    }
    const double det = s * sxx - sx * sx;
    if (!(det > 0.0)) throw std::invalid_argument("weighted_fit: degenerate abscissae");
    LinearFit f;
    f.slope = (s * sxy - sx * sy) / det;
    f.intercept = (sxx * sy - sx * sxy) / det;
    f.slope_stderr = std::sqrt(s / det);
    f.intercept_stderr = std::sqrt(sxx / det);
    f.dof = static_cast<int>(x.size()) - 2;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = (y[i] - f.intercept - f.slope * x[i]) / sigma[i];
        f.residuals.push_back(r);
        f.chi2 += r * r;
    }
    return f;
}

} // namespace brownpoly
