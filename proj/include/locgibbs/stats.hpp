#pragma once

#include <functional>
#include <span>
#include <vector>

namespace locgibbs {

/// Empirical quantile (linear interpolation) of an unsorted sample.
double quantile(std::vector<double> sample, double p);

/// Two-sample Kolmogorov-Smirnov statistic sup |F1 - F2|.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Asymptotic two-sample critical value c(alpha) sqrt((n+m)/(n m)).
double ks_two_sample_critical(std::size_t n, std::size_t m, double alpha);

/// One-sample KS statistic against a CDF, and its asymptotic p-value
/// (Stephens' small-sample adjustment).
double ks_one_sample(std::vector<double> sample,
                     const std::function<double(double)>& cdf);
double ks_one_sample_pvalue(double d, std::size_t n);

}  // namespace locgibbs
