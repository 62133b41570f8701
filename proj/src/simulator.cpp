#include "locgibbs/simulator.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "locgibbs/errors.hpp"
#include "locgibbs/special.hpp"

namespace locgibbs {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxRedraws = 1000;
}  // namespace

int Track::n_observed() const {
  int n = 0;
  for (const auto& p : points) n += p.has_value();
  return n;
}

void Track::validate() const {
  if (n_observed() < 2) {
    throw ValidationError("track: needs at least 2 observed points");
  }
}

void HmmSpec::validate() const {
  if (n_states < 1) throw ValidationError("hmm: N must be >= 1");
  if (static_cast<int>(kernels.size()) != n_states) {
    throw ValidationError("hmm: expected one kernel per state");
  }
  for (const auto& k : kernels) locgibbs::validate(k);
  if (static_cast<int>(tpm.size()) != n_states * n_states) {
    throw ValidationError("hmm: transition matrix must be N x N");
  }
  if (static_cast<int>(delta0.size()) != n_states) {
    throw ValidationError("hmm: initial distribution must have N entries");
  }
  for (int i = 0; i < n_states; ++i) {
    double s = 0.0;
    for (int j = 0; j < n_states; ++j) {
      const double g = gamma(i, j);
      if (g < 0.0 || g > 1.0) {
        throw ValidationError("hmm: transition probabilities must be in [0,1]");
      }
      s += g;
    }
    if (std::fabs(s - 1.0) > 1e-12) {
      throw ValidationError("hmm: row " + std::to_string(i) +
                            " of the transition matrix sums to " +
                            std::to_string(s));
    }
  }
  const double sd = std::accumulate(delta0.begin(), delta0.end(), 0.0);
  if (std::fabs(sd - 1.0) > 1e-12) {
    throw ValidationError("hmm: initial distribution sums to " +
                          std::to_string(sd));
  }
}

HmmSpec HmmSpec::single(KernelSpec k) {
  HmmSpec h;
  h.n_states = 1;
  h.tpm = {1.0};
  h.delta0 = {1.0};
  h.kernels = {std::move(k)};
  return h;
}

std::vector<double> HmmSpec::stationary(const std::vector<double>& tpm, int n) {
  if (n == 1) return {1.0};
  // Solve d (G - I) = 0 with sum(d) = 1: Gaussian elimination on the
  // transposed system, last equation replaced by the normalization.
  std::vector<double> m(static_cast<std::size_t>(n) * (n + 1), 0.0);
  auto a = [&](int r, int c) -> double& { return m[r * (n + 1) + c]; };
  for (int r = 0; r < n - 1; ++r) {
    for (int c = 0; c < n; ++c) {
      a(r, c) = tpm[c * n + r] - (r == c ? 1.0 : 0.0);
    }
    a(r, n) = 0.0;
  }
  for (int c = 0; c < n; ++c) a(n - 1, c) = 1.0;
  a(n - 1, n) = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::fabs(a(r, col)) > std::fabs(a(piv, col))) piv = r;
    }
    if (std::fabs(a(piv, col)) < 1e-14) {
      throw NumericalError("hmm: transition matrix has no unique stationary "
                           "distribution");
    }
    for (int c = 0; c <= n; ++c) std::swap(a(col, c), a(piv, c));
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col) / a(col, col);
      for (int c = col; c <= n; ++c) a(r, c) -= f * a(col, c);
    }
  }
  std::vector<double> d(n);
  for (int r = 0; r < n; ++r) d[r] = a(r, n) / a(r, r);
  return d;
}

namespace {

Point draw_centre(Point x, const KernelSpec& kernel, Rng& rng, double* radius) {
  return std::visit(
      [&](const auto& k) -> Point {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, NormalKernel>) {
          *radius = 0.0;
          return sample_normal_step(x, k.sigma, rng.next_u01(), rng.next_u01());
        } else if constexpr (std::is_same_v<T, FixedRadiusKernel>) {
          *radius = k.radius;
          return sample_disc_uniform(x, k.radius, rng.next_u01(), rng.next_u01());
        } else {
          // Radius first: one draw of the movement parameter per time step,
          // shared by both phi draws of the step.
          *radius = sample_radius_truncated(k.shape, k.rate, 0.0, rng.next_u01());
          return sample_disc_uniform(x, *radius, rng.next_u01(), rng.next_u01());
        }
      },
      kernel);
}

Point draw_candidate(Point mu, const KernelSpec& kernel, double radius,
                     Rng& rng) {
  if (const auto* nk = std::get_if<NormalKernel>(&kernel)) {
    return sample_normal_step(mu, nk->sigma, rng.next_u01(), rng.next_u01());
  }
  return sample_disc_uniform(mu, radius, rng.next_u01(), rng.next_u01());
}

}  // namespace

Point local_gibbs_step(Point x, const KernelSpec& kernel,
                       const LogWeightField& field, int K, Rng& rng) {
  if (K < 1) throw ValidationError("local_gibbs_step: K must be >= 1");
  validate(kernel);
  std::vector<Point> z(K);
  std::vector<double> lw(K);
  for (int redraw = 0; redraw < kMaxRedraws; ++redraw) {
    double radius = 0.0;
    const Point mu = draw_centre(x, kernel, rng, &radius);
    double max_lw = -kInf;
    for (int k = 0; k < K; ++k) {
      z[k] = draw_candidate(mu, kernel, radius, rng);
      lw[k] = field.at(z[k]);
      if (lw[k] > max_lw) max_lw = lw[k];
    }
    if (max_lw == -kInf) continue;  // no candidate carries weight: redraw mu
    double total = 0.0;
    for (int k = 0; k < K; ++k) {
      lw[k] = (lw[k] == -kInf) ? 0.0 : std::exp(lw[k] - max_lw);
      total += lw[k];
    }
    const double target = rng.next_u01() * total;
    double acc = 0.0;
    for (int k = 0; k < K; ++k) {
      acc += lw[k];
      if (target <= acc) return z[k];
    }
    return z[K - 1];
  }
  throw NumericalError(
      "local_gibbs_step: no candidate with positive weight after " +
      std::to_string(kMaxRedraws) + " redraws (degenerate geometry)");
}

Point local_gibbs_step(Point x, const KernelSpec& kernel,
                       const HabitatRaster& raster, const RsfParams& params,
                       int K, Rng& rng) {
  const LogWeightField field(raster, params);
  return local_gibbs_step(x, kernel, field, K, rng);
}

namespace {

Point draw_initial(const InitSpec& init, const LogWeightField& field,
                   Rng& rng) {
  if (const auto* p = std::get_if<Point>(&init)) {
    if (field.at(*p) == -kInf) {
      throw ValidationError("simulate: initial point is outside the region");
    }
    return *p;
  }
  // Exact draw from the target: cells weighted by w (areas are equal), then
  // uniform within the chosen cell.
  const auto& raster = field.raster();
  const auto& lw = field.cells();
  const double m = field.max_log_w();
  std::vector<double> cum(lw.size());
  double acc = 0.0;
  for (std::size_t c = 0; c < lw.size(); ++c) {
    acc += std::exp(lw[c] - m);
    cum[c] = acc;
  }
  const double target = rng.next_u01() * acc;
  std::size_t cell = std::lower_bound(cum.begin(), cum.end(), target) -
                     cum.begin();
  if (cell >= lw.size()) cell = lw.size() - 1;
  const Point ll = raster.cell_lower_left(static_cast<int>(cell));
  return {ll.x + rng.next_u01() * raster.cell_size(),
          ll.y + rng.next_u01() * raster.cell_size()};
}

int draw_state(std::span<const double> probs, Rng& rng) {
  if (probs.size() == 1) return 0;
  const double u = rng.next_u01();
  double acc = 0.0;
  for (std::size_t s = 0; s + 1 < probs.size(); ++s) {
    acc += probs[s];
    if (u <= acc) return static_cast<int>(s);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace

Track simulate_track(int T, const InitSpec& init, const KernelSpec& kernel,
                     const HabitatRaster& raster, const RsfParams& params,
                     int K, std::uint64_t seed) {
  if (T < 2) throw ValidationError("simulate_track: T must be >= 2");
  validate(kernel);
  const LogWeightField field(raster, params);
  Rng rng(mix_seed({seed, 0x5157ULL}));
  Track track;
  track.points.reserve(T);
  Point x = draw_initial(init, field, rng);
  track.points.emplace_back(x);
  for (int t = 1; t < T; ++t) {
    x = local_gibbs_step(x, kernel, field, K, rng);
    track.points.emplace_back(x);
  }
  return track;
}

std::pair<Track, std::vector<int>> simulate_multistate(
    int T, const InitSpec& init, const HmmSpec& hmm,
    const HabitatRaster& raster, const RsfParams& params, int K,
    std::uint64_t seed) {
  if (T < 2) throw ValidationError("simulate_multistate: T must be >= 2");
  hmm.validate();
  const LogWeightField field(raster, params);
  Rng rng(mix_seed({seed, 0x5157ULL}));
  Track track;
  track.points.reserve(T);
  std::vector<int> states;
  states.reserve(T);
  Point x = draw_initial(init, field, rng);
  track.points.emplace_back(x);
  int s = draw_state(hmm.delta0, rng);
  states.push_back(s);
  for (int t = 1; t < T; ++t) {
    x = local_gibbs_step(x, hmm.kernels[s], field, K, rng);
    track.points.emplace_back(x);
    s = draw_state(std::span<const double>(hmm.tpm).subspan(
                       static_cast<std::size_t>(s) * hmm.n_states,
                       hmm.n_states),
                   rng);
    states.push_back(s);
  }
  return {std::move(track), std::move(states)};
}

}  // namespace locgibbs
