#include "locgibbs/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace locgibbs {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

NelderMeadResult nelder_mead(
    const std::function<double(std::span<const double>)>& f,
    std::vector<double> x0, const NelderMeadOptions& opts) {
  const int n = static_cast<int>(x0.size());
  const int max_evals = opts.max_evals > 0 ? opts.max_evals : 500 + 250 * n;
  // Standard coefficients: reflection, expansion, contraction, shrink.
  const double ra = 1.0, ea = 2.0, ca = 0.5, sa = 0.5;

  NelderMeadResult res;
  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (int i = 0; i < n; ++i) {
    simplex[i + 1][i] += opts.initial_step;
  }
  for (int i = 0; i <= n; ++i) {
    fv[i] = f(simplex[i]);
    ++res.evals;
  }

  std::vector<int> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  while (res.evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fv[a] < fv[b]; });
    const int best = order[0], worst = order[n];
    const int second_worst = order[n - 1];

    if (fv[best] == kInf) break;  // nowhere to go
    const double spread = fv[worst] - fv[best];
    const double f_scale = 0.5 * (std::fabs(fv[worst]) + std::fabs(fv[best]));
    double diam = 0.0;
    for (int i = 0; i <= n; ++i) {
      for (int d = 0; d < n; ++d) {
        diam = std::max(diam, std::fabs(simplex[i][d] - simplex[best][d]));
      }
    }
    if ((std::isfinite(spread) &&
         spread <= opts.f_tol * std::max(1.0, f_scale)) ||
        diam <= opts.x_tol) {
      res.converged = true;
      break;
    }

    for (int d = 0; d < n; ++d) {
      double s = 0.0;
      for (int i = 0; i <= n; ++i) {
        if (i != worst) s += simplex[i][d];
      }
      centroid[d] = s / n;
    }
    for (int d = 0; d < n; ++d) {
      xr[d] = centroid[d] + ra * (centroid[d] - simplex[worst][d]);
    }
    const double fr = f(xr);
    ++res.evals;
    if (fr < fv[best]) {
      for (int d = 0; d < n; ++d) {
        xe[d] = centroid[d] + ea * (centroid[d] - simplex[worst][d]);
      }
      const double fe = f(xe);
      ++res.evals;
      if (fe < fr) {
        simplex[worst] = xe;
        fv[worst] = fe;
      } else {
        simplex[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr < fv[second_worst]) {
      simplex[worst] = xr;
      fv[worst] = fr;
    } else {
      const bool outside = fr < fv[worst];
      if (outside) {
        for (int d = 0; d < n; ++d) {
          xc[d] = centroid[d] + ca * (xr[d] - centroid[d]);
        }
      } else {
        for (int d = 0; d < n; ++d) {
          xc[d] = centroid[d] - ca * (centroid[d] - simplex[worst][d]);
        }
      }
      const double fc = f(xc);
      ++res.evals;
      if (fc < std::min(fr, fv[worst])) {
        simplex[worst] = xc;
        fv[worst] = fc;
      } else {
        for (int i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (int d = 0; d < n; ++d) {
            simplex[i][d] =
                simplex[best][d] + sa * (simplex[i][d] - simplex[best][d]);
          }
          fv[i] = f(simplex[i]);
          ++res.evals;
        }
      }
    }
    ++res.iterations;
  }

  int best = 0;
  for (int i = 1; i <= n; ++i) {
    if (fv[i] < fv[best]) best = i;
  }
  res.x = simplex[best];
  res.f = fv[best];
  return res;
}

}  // namespace locgibbs
