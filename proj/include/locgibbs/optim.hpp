#pragma once

#include <functional>
#include <span>
#include <vector>

namespace locgibbs {

struct NelderMeadOptions {
  double initial_step = 0.3;
  double f_tol = 1e-7;    // relative spread of simplex values
  double x_tol = 1e-8;    // simplex diameter
  int max_evals = 0;      // 0: 500 + 250 * dim
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int evals = 0;
  int iterations = 0;
  bool converged = false;
};

/// Downhill simplex minimization. The objective may return +inf for
/// infeasible points; at least one vertex of the initial simplex must be
/// finite. Deterministic.
NelderMeadResult nelder_mead(
    const std::function<double(std::span<const double>)>& f,
    std::vector<double> x0, const NelderMeadOptions& opts = {});

}  // namespace locgibbs
