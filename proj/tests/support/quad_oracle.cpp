#include "quad_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "locgibbs/special.hpp"

namespace locgibbs::testsupport {

namespace {
constexpr double kPi = std::numbers::pi;
}

GaussLegendre::GaussLegendre(int n, double a, double b) {
  nodes.resize(n);
  weights.resize(n);
  // Newton iteration on P_n, Chebyshev starting points.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    nodes[i] = 0.5 * (b + a) - 0.5 * (b - a) * x;
    nodes[n - 1 - i] = 0.5 * (b + a) + 0.5 * (b - a) * x;
    weights[i] = weights[n - 1 - i] = 0.5 * (b - a) * w;
  }
}

namespace {

// Antiderivative of sqrt(1-x^2).
double S(double x) {
  x = std::clamp(x, -1.0, 1.0);
  return 0.5 * (x * std::sqrt(std::max(0.0, 1.0 - x * x)) + std::asin(x));
}

// Area of the unit disc within the quadrant {x <= X, y <= Y}.
double unit_corner_area(double X, double Y) {
  if (X <= -1.0 || Y <= -1.0) return 0.0;
  X = std::min(X, 1.0);
  if (Y >= 1.0) return 2.0 * (S(X) + kPi / 4.0);
  const double xb = std::sqrt(std::max(0.0, 1.0 - Y * Y));
  double area = 0.0;
  if (Y >= 0.0) {
    // h = 2 sqrt(1-x^2) outside [-xb, xb], sqrt(1-x^2) + Y inside.
    const double u0 = std::min(X, -xb);
    area += 2.0 * (S(u0) + kPi / 4.0);
    if (X > -xb) {
      const double m = std::min(X, xb);
      area += (S(m) - S(-xb)) + Y * (m + xb);
      if (X > xb) area += 2.0 * (S(X) - S(xb));
    }
  } else {
    // contribution only on [-xb, xb], h = sqrt(1-x^2) + Y.
    if (X > -xb) {
      const double m = std::min(X, xb);
      area += (S(m) - S(-xb)) + Y * (m + xb);
    }
  }
  return area;
}

}  // namespace

double circle_rect_area(Point c, double r, double x0, double y0, double x1,
                        double y1) {
  const auto F = [&](double X, double Y) {
    return r * r * unit_corner_area((X - c.x) / r, (Y - c.y) / r);
  };
  const double a =
      F(x1, y1) - F(x0, y1) - F(x1, y0) + F(x0, y0);
  return std::max(0.0, a);
}

double ref_lens_area(double d, double r, int nodes) {
  if (d >= 2.0 * r) return 0.0;
  if (d == 0.0) return kPi * r * r;
  const double H = std::sqrt(r * r - 0.25 * d * d);
  const GaussLegendre gl(nodes, -H, H);
  double a = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double b = gl.nodes[i];
    a += gl.weights[i] * (2.0 * std::sqrt(std::max(0.0, r * r - b * b)) - d);
  }
  return a;
}

namespace {

double disc_availability_impl(const LogWeightField& field, Point mu, double r) {
  const HabitatRaster& raster = field.raster();
  const double cs = raster.cell_size();
  const int c_lo = std::max(
      0, static_cast<int>(std::floor((mu.x - r - raster.origin_x()) / cs)));
  const int c_hi = std::min(
      raster.n_cols() - 1,
      static_cast<int>(std::floor((mu.x + r - raster.origin_x()) / cs)));
  const int r_lo = std::max(
      0, static_cast<int>(std::floor((mu.y - r - raster.origin_y()) / cs)));
  const int r_hi = std::min(
      raster.n_rows() - 1,
      static_cast<int>(std::floor((mu.y + r - raster.origin_y()) / cs)));
  double total = 0.0;
  for (int row = r_lo; row <= r_hi; ++row) {
    for (int col = c_lo; col <= c_hi; ++col) {
      const double x0 = raster.origin_x() + col * cs;
      const double y0 = raster.origin_y() + row * cs;
      const double a = circle_rect_area(mu, r, x0, y0, x0 + cs, y0 + cs);
      if (a > 0.0) {
        total += std::exp(field.at_cell(raster.cell_index(row, col))) * a;
      }
    }
  }
  return total / (kPi * r * r);
}

}  // namespace

double disc_availability_exact(const HabitatRaster& raster,
                               const RsfParams& params, Point mu, double r) {
  const LogWeightField field(raster, params);
  return disc_availability_impl(field, mu, r);
}

double normal_availability_exact(const HabitatRaster& raster,
                                 const RsfParams& params, Point mu,
                                 double sigma) {
  const LogWeightField field(raster, params);
  const double cs = raster.cell_size();
  double total = 0.0;
  for (int row = 0; row < raster.n_rows(); ++row) {
    const double y0 = raster.origin_y() + row * cs;
    const double iy = norm_cdf((y0 + cs - mu.y) / sigma) -
                      norm_cdf((y0 - mu.y) / sigma);
    if (iy == 0.0) continue;
    for (int col = 0; col < raster.n_cols(); ++col) {
      const double x0 = raster.origin_x() + col * cs;
      const double ix = norm_cdf((x0 + cs - mu.x) / sigma) -
                        norm_cdf((x0 - mu.x) / sigma);
      total += std::exp(field.at_cell(raster.cell_index(row, col))) * ix * iy;
    }
  }
  return total;
}

namespace {

double quad_normal(const HabitatRaster& raster, const RsfParams& params,
                   double sigma, Point x, Point y, const QuadOptions& opts) {
  const LogWeightField field(raster, params);
  const double lwy = field.at(y);
  const double pad = opts.normal_pad_sigmas * sigma;
  const double lo_x = std::min(x.x, y.x) - pad, hi_x = std::max(x.x, y.x) + pad;
  const double lo_y = std::min(x.y, y.y) - pad, hi_y = std::max(x.y, y.y) + pad;
  const int n = opts.mu_nodes;
  const double hx = (hi_x - lo_x) / n;
  const double hy = (hi_y - lo_y) / n;

  // Per-axis cell integrals of phi(.|mu) for the availability denominator.
  const int C = raster.n_cols(), R = raster.n_rows();
  const double cs = raster.cell_size();
  std::vector<double> Ix(static_cast<std::size_t>(C) * n),
      Iy(static_cast<std::size_t>(R) * n);
  for (int j = 0; j < n; ++j) {
    const double mx = lo_x + (j + 0.5) * hx;
    for (int c = 0; c < C; ++c) {
      const double x0 = raster.origin_x() + c * cs;
      Ix[static_cast<std::size_t>(c) * n + j] =
          norm_cdf((x0 + cs - mx) / sigma) - norm_cdf((x0 - mx) / sigma);
    }
    const double my = lo_y + (j + 0.5) * hy;
    for (int r = 0; r < R; ++r) {
      const double y0 = raster.origin_y() + r * cs;
      Iy[static_cast<std::size_t>(r) * n + j] =
          norm_cdf((y0 + cs - my) / sigma) - norm_cdf((y0 - my) / sigma);
    }
  }
  std::vector<double> w_cell(raster.n_cells());
  for (int c = 0; c < raster.n_cells(); ++c) {
    w_cell[c] = std::exp(field.at_cell(c));
  }

  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(n) * n);
  for (int jy = 0; jy < n; ++jy) {
    const double my = lo_y + (jy + 0.5) * hy;
    for (int jx = 0; jx < n; ++jx) {
      const double mx = lo_x + (jx + 0.5) * hx;
      double avail = 0.0;
      for (int r = 0; r < R; ++r) {
        const double vy = Iy[static_cast<std::size_t>(r) * n + jy];
        if (vy == 0.0) continue;
        double row_sum = 0.0;
        for (int c = 0; c < C; ++c) {
          row_sum += w_cell[static_cast<std::size_t>(r) * C + c] *
                     Ix[static_cast<std::size_t>(c) * n + jx];
        }
        avail += vy * row_sum;
      }
      if (avail <= 0.0) continue;
      const Point mu{mx, my};
      terms.push_back(log_normal_density(y, mu, sigma) +
                      log_normal_density(mu, x, sigma) - std::log(avail));
    }
  }
  return lwy + log_sum_exp(terms) + std::log(hx) + std::log(hy);
}

// Integral over the lens of 1/availability, in frame-rotated coordinates
// with the exact section height; the integrand is smooth inside the lens.
double lens_inverse_avail_integral(const LogWeightField& field, Point x,
                                   Point y, double r, int n_theta, int n_b) {
  const double d = distance(x, y);
  const double L = r - 0.5 * d;
  if (L <= 0.0) return 0.0;
  const double rot = std::atan2(y.y - x.y, y.x - x.x);
  const double ca = std::cos(rot), sa = std::sin(rot);
  const double mx = 0.5 * (x.x + y.x), my = 0.5 * (x.y + y.y);
  const GaussLegendre gl(n_theta, -kPi / 2.0, kPi / 2.0);
  double total = 0.0;
  for (int i = 0; i < n_theta; ++i) {
    const double theta = gl.nodes[i];
    const double a = L * std::sin(theta);
    const double bmax =
        std::sqrt(std::max(0.0, r * r - (std::fabs(a) + 0.5 * d) *
                                            (std::fabs(a) + 0.5 * d)));
    if (bmax <= 0.0) continue;
    const double db = 2.0 * bmax / n_b;
    double inner = 0.0;
    for (int k = 0; k < n_b; ++k) {
      const double b = -bmax + (k + 0.5) * db;
      const Point mu{mx + a * ca - b * sa, my + a * sa + b * ca};
      // availability = integral of w phi over the disc = mean weight.
      const double avail = disc_availability_impl(field, mu, r);
      if (avail > 0.0) inner += 1.0 / avail;
    }
    total += gl.weights[i] * L * std::cos(theta) * inner * db;
  }
  return total;
}

double quad_fixed(const HabitatRaster& raster, const RsfParams& params,
                  double r, Point x, Point y, const QuadOptions& opts) {
  const LogWeightField field(raster, params);
  const double lwy = field.at(y);
  const double d = distance(x, y);
  if (d >= 2.0 * r) return -std::numeric_limits<double>::infinity();
  const double J =
      lens_inverse_avail_integral(field, x, y, r, opts.mu_nodes, opts.mu_nodes);
  return lwy - 2.0 * std::log(kPi) - 4.0 * std::log(r) + std::log(J);
}

double quad_gamma(const HabitatRaster& raster, const RsfParams& params,
                  double shape, double rate, Point x, Point y,
                  const QuadOptions& opts) {
  const LogWeightField field(raster, params);
  const double lwy = field.at(y);
  const double d = distance(x, y);
  const double q_tail = (d == 0.0) ? 1.0 : gamma_q(shape, rate * 0.5 * d);
  const GaussLegendre gl(opts.r_nodes, 0.0, q_tail);
  double integral = 0.0;
  for (int i = 0; i < opts.r_nodes; ++i) {
    const double r = gamma_quantile_upper(gl.nodes[i], shape, rate);
    if (!(d < 2.0 * r)) continue;
    const double J = lens_inverse_avail_integral(field, x, y, r, opts.mu_nodes,
                                                 opts.mu_nodes);
    integral += gl.weights[i] * J / (r * r * r * r);
  }
  return lwy - 2.0 * std::log(kPi) + std::log(integral);
}

}  // namespace

double quad_step_logdensity(const HabitatRaster& raster,
                            const RsfParams& params, const KernelSpec& kernel,
                            Point x, Point y, const QuadOptions& opts) {
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, NormalKernel>) {
          return quad_normal(raster, params, k.sigma, x, y, opts);
        } else if constexpr (std::is_same_v<T, FixedRadiusKernel>) {
          return quad_fixed(raster, params, k.radius, x, y, opts);
        } else {
          return quad_gamma(raster, params, k.shape, k.rate, x, y, opts);
        }
      },
      kernel);
}

// ---------------------------------------------------------------------------
// Discretized cell chain
// ---------------------------------------------------------------------------

namespace {

struct LatticeChainBuilder {
  const HabitatRaster& raster;
  int m;             // fine nodes per cell side
  int nx, ny;        // fine lattice size
  double h;          // fine spacing
  std::vector<double> w_cell;  // scaled weights per cell

  LatticeChainBuilder(const HabitatRaster& r, const RsfParams& p, int m_in)
      : raster(r), m(m_in) {
    nx = r.n_cols() * m;
    ny = r.n_rows() * m;
    h = r.cell_size() / m;
    const LogWeightField field(r, p);
    w_cell.resize(r.n_cells());
    for (int c = 0; c < r.n_cells(); ++c) {
      w_cell[c] = std::exp(field.at_cell(c) - field.max_log_w());
    }
  }

  int n_cells() const { return raster.n_cells(); }
  int cols() const { return raster.n_cols(); }
  int rows() const { return raster.n_rows(); }

  // Accumulate P from per-mu-node cell sums s[], where s[c] approximates
  // sum_{i in c} phi0(mu - x_i).
  void accumulate(std::vector<double>& P, const std::vector<double>& s) const {
    const int nc = n_cells();
    double denom = 0.0;
    for (int c = 0; c < nc; ++c) denom += w_cell[c] * s[c];
    if (denom <= 0.0) return;
    // t_b = w_b s_b / denom; contribution P[a][b] += s_a t_b (the common
    // factor h^2 / (N_a c_phi) is applied by finalize()).
    thread_local std::vector<double> t;
    t.assign(nc, 0.0);
    for (int b = 0; b < nc; ++b) t[b] = w_cell[b] * s[b] / denom;
    for (int a = 0; a < nc; ++a) {
      if (s[a] == 0.0) continue;
      double* row = &P[static_cast<std::size_t>(a) * nc];
      const double sa = s[a];
      for (int b = 0; b < nc; ++b) row[b] += sa * t[b];
    }
  }

  CellChain finalize(std::vector<double>& P, double c_phi) const {
    const int nc = n_cells();
    const double scale = h * h / (static_cast<double>(m) * m * c_phi);
    for (auto& v : P) v *= scale;
    CellChain chain;
    chain.n_cells = nc;
    chain.P = std::move(P);
    chain.pi.resize(nc);
    double total = 0.0;
    for (int c = 0; c < nc; ++c) total += w_cell[c];
    for (int c = 0; c < nc; ++c) chain.pi[c] = w_cell[c] / total;
    return chain;
  }
};

CellChain chain_normal(const HabitatRaster& raster, const RsfParams& params,
                       double sigma, int m, double trunc_sigmas) {
  LatticeChainBuilder B(raster, params, m);
  const double h = B.h;
  const int K = static_cast<int>(std::ceil(trunc_sigmas * sigma / h));
  // Square-truncated separable kernel: still symmetric under negation, so
  // the discrete chain keeps exact detailed balance.
  std::vector<double> g(2 * K + 1);
  double c1 = 0.0;
  for (int k = -K; k <= K; ++k) {
    g[k + K] = std::exp(-0.5 * (k * h) * (k * h) / (sigma * sigma));
    c1 += g[k + K];
  }
  c1 *= h;
  const double c_phi = c1 * c1;

  const int C = B.cols(), R = B.rows();
  const int mu_nx = B.nx + 2 * K, mu_ny = B.ny + 2 * K;
  // 1D sums of g against each cell column/row of fine nodes.
  std::vector<double> Gx(static_cast<std::size_t>(C) * mu_nx, 0.0);
  std::vector<double> Gy(static_cast<std::size_t>(R) * mu_ny, 0.0);
  for (int j = 0; j < mu_nx; ++j) {
    const int px = j - K;
    for (int c = 0; c < C; ++c) {
      double s = 0.0;
      const int lo = std::max(c * m, px - K), hi = std::min((c + 1) * m - 1, px + K);
      for (int ix = lo; ix <= hi; ++ix) s += g[px - ix + K];
      Gx[static_cast<std::size_t>(c) * mu_nx + j] = s;
    }
  }
  for (int j = 0; j < mu_ny; ++j) {
    const int py = j - K;
    for (int r = 0; r < R; ++r) {
      double s = 0.0;
      const int lo = std::max(r * m, py - K), hi = std::min((r + 1) * m - 1, py + K);
      for (int iy = lo; iy <= hi; ++iy) s += g[py - iy + K];
      Gy[static_cast<std::size_t>(r) * mu_ny + j] = s;
    }
  }

  const int nc = B.n_cells();
  std::vector<double> P(static_cast<std::size_t>(nc) * nc, 0.0);
  std::vector<double> s(nc);
  for (int jy = 0; jy < mu_ny; ++jy) {
    for (int jx = 0; jx < mu_nx; ++jx) {
      bool any = false;
      for (int r = 0; r < R; ++r) {
        const double vy = Gy[static_cast<std::size_t>(r) * mu_ny + jy];
        for (int c = 0; c < C; ++c) {
          const double v = vy * Gx[static_cast<std::size_t>(c) * mu_nx + jx];
          s[raster.cell_index(r, c)] = v;
          any |= (v != 0.0);
        }
      }
      if (any) B.accumulate(P, s);
    }
  }
  return B.finalize(P, c_phi);
}

CellChain chain_fixed(const HabitatRaster& raster, const RsfParams& params,
                      double radius, int m) {
  LatticeChainBuilder B(raster, params, m);
  const double h = B.h;
  const double rho = radius / h;  // lattice units
  const int K = static_cast<int>(std::floor(rho));
  // Half-width of the disc row at integer offset ky, identical for every
  // lattice-aligned centre; also yields the exact node count for c_phi.
  std::vector<int> fw(2 * K + 1, -1);
  double n_in_disc = 0.0;
  for (int ky = -K; ky <= K; ++ky) {
    const double wsq = rho * rho - static_cast<double>(ky) * ky;
    fw[ky + K] = static_cast<int>(std::floor(std::sqrt(std::max(0.0, wsq))));
    n_in_disc += 2 * fw[ky + K] + 1;
  }
  const double inv_area = 1.0 / (kPi * radius * radius);
  const double c_phi = h * h * n_in_disc * inv_area;

  const int C = B.cols(), R = B.rows();
  const int nc = B.n_cells();
  std::vector<double> P(static_cast<std::size_t>(nc) * nc, 0.0);
  std::vector<double> s(nc);
  std::vector<double> count(nc);
  for (int py = -K; py < B.ny + K; ++py) {
    for (int px = -K; px < B.nx + K; ++px) {
      std::fill(count.begin(), count.end(), 0.0);
      bool any = false;
      const int ky_lo = std::max(-K, -py), ky_hi = std::min(K, B.ny - 1 - py);
      for (int ky = ky_lo; ky <= ky_hi; ++ky) {
        const int iy = py + ky;
        const int rgrp = iy / m;
        const int w = fw[ky + K];
        int lo = px - w, hi = px + w;
        if (lo < 0) lo = 0;
        if (hi > B.nx - 1) hi = B.nx - 1;
        if (lo > hi) continue;
        any = true;
        // split [lo, hi] across cell columns
        int c = lo / m;
        int seg_lo = lo;
        while (seg_lo <= hi) {
          const int seg_hi = std::min(hi, (c + 1) * m - 1);
          count[raster.cell_index(rgrp, c)] += seg_hi - seg_lo + 1;
          seg_lo = seg_hi + 1;
          ++c;
        }
      }
      if (!any) continue;
      for (int c = 0; c < nc; ++c) s[c] = count[c] * inv_area;
      B.accumulate(P, s);
    }
  }
  return B.finalize(P, c_phi);
}

}  // namespace

CellChain exact_cell_chain(const HabitatRaster& raster, const RsfParams& params,
                           const KernelSpec& kernel, int fine_per_cell,
                           double normal_trunc_sigmas, int gamma_mixture_nodes,
                           double gamma_q_lo, double gamma_q_hi) {
  if (const auto* nk = std::get_if<NormalKernel>(&kernel)) {
    return chain_normal(raster, params, nk->sigma, fine_per_cell,
                        normal_trunc_sigmas);
  }
  if (const auto* fk = std::get_if<FixedRadiusKernel>(&kernel)) {
    return chain_fixed(raster, params, fk->radius, fine_per_cell);
  }
  const auto& gk = std::get<GammaRadiusKernel>(kernel);
  // Mixture of fixed-radius chains over quantile nodes of the radius law
  // (each component is reversible for pi, so the mixture is too).
  const GaussLegendre gl(gamma_mixture_nodes, gamma_q_lo, gamma_q_hi);
  CellChain chain;
  double wsum = 0.0;
  for (int i = 0; i < gamma_mixture_nodes; ++i) {
    const double r = gamma_quantile(gl.nodes[i], gk.shape, gk.rate);
    CellChain comp = chain_fixed(raster, params, r, fine_per_cell);
    if (chain.P.empty()) {
      chain.n_cells = comp.n_cells;
      chain.pi = comp.pi;
      chain.P.assign(comp.P.size(), 0.0);
    }
    for (std::size_t k = 0; k < comp.P.size(); ++k) {
      chain.P[k] += gl.weights[i] * comp.P[k];
    }
    wsum += gl.weights[i];
  }
  for (auto& v : chain.P) v /= wsum;
  return chain;
}

}  // namespace locgibbs::testsupport
