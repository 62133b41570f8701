#pragma once

#include <span>

namespace locgibbs {

/// Quantile of the standard normal distribution (AS 241, double precision).
/// p must lie in (0,1); returns exactly 0 for p = 0.5.
double norm_quantile(double p);

/// Standard normal CDF.
double norm_cdf(double x);

/// Regularized lower incomplete gamma P(a,x) and its complement Q(a,x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

/// CDF of the gamma(shape, rate) distribution at x.
double gamma_cdf(double x, double shape, double rate);

double gamma_logpdf(double x, double shape, double rate);

/// Inverse of gamma_cdf: x with P(shape, rate*x) = p. Bracketed Newton on
/// the series/continued-fraction CDF, 1e-10 relative tolerance.
double gamma_quantile(double p, double shape, double rate);

/// Inverse of the upper tail: x with Q(shape, rate*x) = q. Preferred when q
/// is small; avoids the 1-q cancellation of gamma_quantile.
double gamma_quantile_upper(double q, double shape, double rate);

/// log(sum(exp(v))) with -inf entries contributing nothing. Returns -inf for
/// an empty or all-(-inf) input; exact for a single finite element.
double log_sum_exp(std::span<const double> v);

}  // namespace locgibbs
