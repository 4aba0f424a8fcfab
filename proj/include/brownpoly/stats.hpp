#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace brownpoly {

double mean(std::span<const double> x);
/// Unbiased sample variance (divides by N - 1).
double variance(std::span<const double> x);
double covariance(std::span<const double> x, std::span<const double> y);
double correlation(std::span<const double> x, std::span<const double> y);
/// Standard error of the mean.
double standard_error(std::span<const double> x);

/// Linear-interpolation quantile (the usual "type 7" definition).
double quantile(std::span<const double> x, double p);
double interquartile_range(std::span<const double> x);

struct BootstrapResult {
    double estimate = 0.0; ///< statistic on the original sample
    double stderr_ = 0.0;  ///< standard deviation over resamples
};

/// Nonparametric bootstrap with a counter-based RNG, so results depend only on
/// (data, seed, stream).
BootstrapResult bootstrap(std::span<const double> x, const std::function<double(std::span<const double>)>& statistic,
                          int resamples, std::uint64_t seed, std::uint64_t stream = 0);

/// Bootstrap over resampled index sets, for statistics of several aligned
/// samples; statistic receives the (possibly repeated) indices.
BootstrapResult bootstrap_index(std::size_t n, const std::function<double(std::span<const std::size_t>)>& statistic,
                                int resamples, std::uint64_t seed, std::uint64_t stream = 0);

/// Paired bootstrap for statistics of two aligned samples.
BootstrapResult bootstrap_paired(std::span<const double> x, std::span<const double> y,
                                 const std::function<double(std::span<const double>, std::span<const double>)>& statistic,
                                 int resamples, std::uint64_t seed, std::uint64_t stream = 0);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Kolmogorov survival function Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

/// One-sample KS against a continuous CDF; p-value from the Kolmogorov limit
/// with Stephens' finite-sample correction.
KsResult ks_one_sample(std::span<const double> x, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::span<const double> x, std::span<const double> y);

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

/// Pearson goodness of fit; dof = cells - 1.
ChiSquareResult chi_square(std::span<const double> observed, std::span<const double> expected);

struct LinearFit {
    double slope = 0.0;
    double slope_stderr = 0.0;
    double intercept = 0.0;
    double intercept_stderr = 0.0;
    double chi2 = 0.0;
    int dof = 0;
    std::vector<double> residuals; ///< standardized: (y - fit) / sigma
};

/// Weighted least squares y = a + b x with weights 1 / sigma^2. Parameter
/// errors come from the inverse normal matrix (sigma taken as known).
LinearFit weighted_fit(std::span<const double> x, std::span<const double> y, std::span<const double> sigma);

} // namespace brownpoly
