#include "locgibbs/likelihood.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <thread>

#include "locgibbs/errors.hpp"
#include "locgibbs/special.hpp"

namespace locgibbs {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;
}  // namespace

void McConfig::validate() const {
  if (n_c < 1 || n_z < 1 || n_r < 1) {
    throw ValidationError("mc: sample sizes must be >= 1");
  }
}

std::vector<StepPair> contributing_steps(const Track& track) {
  std::vector<StepPair> steps;
  for (std::size_t i = 0; i + 1 < track.points.size(); ++i) {
    const auto& a = track.points[i];
    const auto& b = track.points[i + 1];
    if (a && b) steps.push_back({static_cast<long>(i) + 1, *a, *b});
  }
  return steps;
}

StepLogLik step_loglik_normal(Point x, Point y, const LogWeightField& field,
                              double sigma, const McConfig& mc,
                              const BaseSamples& samples, long t) {
  mc.validate();
  if (!(sigma > 0.0)) throw ValidationError("step_loglik: sigma must be positive");
  const double lwy = field.at(y);
  if (lwy == -kInf) return {-kInf, true};

  const LhsBlock cen = samples.centres(t, 0, mc.n_c);
  std::vector<double> lw(mc.n_z);
  std::vector<double> terms(mc.n_c);
  for (int i = 0; i < mc.n_c; ++i) {
    const Point mu = sample_normal_step(x, sigma, cen.at(i, 0), cen.at(i, 1));
    const LhsBlock end = samples.endpoints(t, 0, i, mc.n_z);
    for (int j = 0; j < mc.n_z; ++j) {
      const Point z = sample_normal_step(mu, sigma, end.at(j, 0), end.at(j, 1));
      lw[j] = field.at(z);
    }
    const double avail = log_sum_exp(lw);
    if (avail == -kInf) {
      throw NumericalError(
          "step_loglik: every endpoint sample has zero weight (centre " +
          std::to_string(i) + ", step " + std::to_string(t) + ")");
    }
    terms[i] = log_normal_density(y, mu, sigma) - avail;
  }
  const double v = lwy + std::log(static_cast<double>(mc.n_z) / mc.n_c) +
                   log_sum_exp(terms);
  return {v, true};
}

namespace {

// Availability sums for one disc radius: centres uniform on the lens,
// endpoints uniform on the centred disc. Returns log sum_j 1/sum_k w(z_jk).
double disc_availability(Point x, Point y, const LogWeightField& field,
                         double radius, const McConfig& mc,
                         const BaseSamples& samples, long t, int radius_slot) {
  const LhsBlock cen = samples.centres(t, radius_slot, mc.n_c);
  std::vector<double> lw(mc.n_z);
  std::vector<double> inv_terms(mc.n_c);
  for (int j = 0; j < mc.n_c; ++j) {
    const double prefix[2] = {cen.at(j, 0), cen.at(j, 1)};
    UniformStream stream(std::span<const double>(prefix, 2),
                         samples.centre_overflow(t, radius_slot, j));
    const Point mu = sample_lens_uniform(x, y, radius, stream);
    const LhsBlock end = samples.endpoints(t, radius_slot, j, mc.n_z);
    for (int k = 0; k < mc.n_z; ++k) {
      const Point z = sample_disc_uniform(mu, radius, end.at(k, 0), end.at(k, 1));
      lw[k] = field.at(z);
    }
    const double avail = log_sum_exp(lw);
    if (avail == -kInf) {
      throw NumericalError(
          "step_loglik: every endpoint sample has zero weight (radius slot " +
          std::to_string(radius_slot) + ", centre " + std::to_string(j) +
          ", step " + std::to_string(t) + ")");
    }
    inv_terms[j] = -avail;
  }
  return log_sum_exp(inv_terms);
}

}  // namespace

StepLogLik step_loglik_fixed_radius(Point x, Point y,
                                    const LogWeightField& field, double radius,
                                    const McConfig& mc,
                                    const BaseSamples& samples, long t) {
  mc.validate();
  if (!(radius > 0.0)) throw ValidationError("step_loglik: radius must be positive");
  const double lwy = field.at(y);
  if (lwy == -kInf) return {-kInf, true};
  const double d = distance(x, y);
  if (d >= 2.0 * radius) return {-kInf, true};  // relocation disc has radius 2r
  const double area = lens_area(d, radius);
  if (!(area > 0.0)) return {-kInf, true};

  const double inv_sums = disc_availability(x, y, field, radius, mc, samples, t, 0);
  const double v = lwy - 2.0 * std::log(kPi) + std::log(area) -
                   4.0 * std::log(radius) +
                   std::log(static_cast<double>(mc.n_z) / mc.n_c) + inv_sums;
  return {v, true};
}

StepLogLik step_loglik_gamma_radius(Point x, Point y,
                                    const LogWeightField& field, double shape,
                                    double rate, const McConfig& mc,
                                    const BaseSamples& samples, long t) {
  mc.validate();
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw ValidationError("step_loglik: gamma shape and rate must be positive");
  }
  const double lwy = field.at(y);
  if (lwy == -kInf) return {-kInf, true};
  const double d = distance(x, y);

  // Radii below d/2 contribute nothing: sample from the law truncated to
  // [d/2, inf) and carry the untruncated tail mass as an explicit factor.
  const double q_tail = (d == 0.0) ? 1.0 : gamma_q(shape, rate * 0.5 * d);
  if (q_tail <= 0.0) {
    throw NumericalError("step_loglik: step " + std::to_string(t) +
                         " of length " + std::to_string(d) +
                         " is numerically impossible under the radius law");
  }
  const LhsBlock rads = samples.radii(t, mc.n_r);
  std::vector<double> terms(mc.n_r, -kInf);
  for (int i = 0; i < mc.n_r; ++i) {
    const double r = sample_radius_truncated(shape, rate, 0.5 * d, rads.at(i, 0));
    const double area = lens_area(d, r);
    if (!(area > 0.0) || d >= 2.0 * r) continue;  // boundary draw, zero measure
    const double inv_sums =
        disc_availability(x, y, field, r, mc, samples, t, i);
    terms[i] = std::log(area) - 4.0 * std::log(r) + inv_sums;
  }
  const double v = lwy - 2.0 * std::log(kPi) + std::log(q_tail) +
                   std::log(static_cast<double>(mc.n_z) /
                            (static_cast<double>(mc.n_r) * mc.n_c)) +
                   log_sum_exp(terms);
  return {v, true};
}

StepLogLik step_loglik(Point x, Point y, const LogWeightField& field,
                       const KernelSpec& kernel, const McConfig& mc,
                       const BaseSamples& samples, long t) {
  return std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, NormalKernel>) {
          return step_loglik_normal(x, y, field, k.sigma, mc, samples, t);
        } else if constexpr (std::is_same_v<T, FixedRadiusKernel>) {
          return step_loglik_fixed_radius(x, y, field, k.radius, mc, samples, t);
        } else {
          return step_loglik_gamma_radius(x, y, field, k.shape, k.rate, mc,
                                          samples, t);
        }
      },
      kernel);
}

std::vector<double> step_loglik_matrix(std::span<const StepPair> steps,
                                       const LogWeightField& field,
                                       std::span<const KernelSpec> kernels,
                                       const McConfig& mc, int threads) {
  const BaseSamples samples(mc.seed, mc.lhs);
  const auto n = steps.size();
  const auto ns = kernels.size();
  std::vector<double> out(n * ns);
  auto run = [&](std::size_t lo, std::size_t hi, std::exception_ptr& err) {
    try {
      for (std::size_t k = lo; k < hi; ++k) {
        for (std::size_t s = 0; s < ns; ++s) {
          out[k * ns + s] = step_loglik(steps[k].x, steps[k].y, field,
                                        kernels[s], mc, samples, steps[k].t)
                                .value;
        }
      }
    } catch (...) {
      err = std::current_exception();
    }
  };
  if (threads <= 1 || n < 2) {
    std::exception_ptr err;
    run(0, n, err);
    if (err) std::rethrow_exception(err);
    return out;
  }
  const int nt = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(nt);
  for (int w = 0; w < nt; ++w) {
    const std::size_t lo = n * w / nt;
    const std::size_t hi = n * (w + 1) / nt;
    pool.emplace_back(run, lo, hi, std::ref(errs[w]));
  }
  for (auto& th : pool) th.join();
  for (auto& e : errs) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

double track_loglik(const Track& track, const LogWeightField& field,
                    const KernelSpec& kernel, const McConfig& mc,
                    int threads) {
  track.validate();
  const auto steps = contributing_steps(track);
  if (steps.empty()) return 0.0;
  const KernelSpec kernels[1] = {kernel};
  const auto ll = step_loglik_matrix(steps, field, kernels, mc, threads);
  double total = 0.0;
  for (double v : ll) total += v;
  return total;
}

double track_loglik(const Track& track, const HabitatRaster& raster,
                    const RsfParams& params, const KernelSpec& kernel,
                    const McConfig& mc, int threads) {
  const LogWeightField field(raster, params);
  return track_loglik(track, field, kernel, mc, threads);
}

double hmm_forward_loglik(std::span<const double> step_ll, int n_steps,
                          int n_states, std::span<const double> tpm,
                          std::span<const double> delta0) {
  std::vector<double> alpha(n_states), next(n_states), cand(n_states);
  for (int s = 0; s < n_states; ++s) {
    alpha[s] = std::log(delta0[s]) + step_ll[s];
  }
  for (int k = 1; k < n_steps; ++k) {
    for (int j = 0; j < n_states; ++j) {
      for (int i = 0; i < n_states; ++i) {
        cand[i] = alpha[i] + std::log(tpm[i * n_states + j]);
      }
      next[j] = log_sum_exp(cand) + step_ll[static_cast<std::size_t>(k) * n_states + j];
    }
    alpha.swap(next);
  }
  return log_sum_exp(alpha);
}

namespace {

// Contiguous runs of steps (consecutive time indices) for segment-wise
// forward recursions.
std::vector<std::pair<std::size_t, std::size_t>> segment_ranges(
    std::span<const StepPair> steps) {
  std::vector<std::pair<std::size_t, std::size_t>> segs;
  std::size_t begin = 0;
  for (std::size_t k = 1; k <= steps.size(); ++k) {
    if (k == steps.size() || steps[k].t != steps[k - 1].t + 1) {
      segs.emplace_back(begin, k);
      begin = k;
    }
  }
  return segs;
}

}  // namespace

double hmm_track_loglik(const Track& track, const LogWeightField& field,
                        const HmmSpec& hmm, const McConfig& mc, int threads) {
  track.validate();
  hmm.validate();
  const auto steps = contributing_steps(track);
  if (steps.empty()) return 0.0;
  const auto ll =
      step_loglik_matrix(steps, field, hmm.kernels, mc, threads);
  const int ns = hmm.n_states;
  double total = 0.0;
  for (const auto& [lo, hi] : segment_ranges(steps)) {
    total += hmm_forward_loglik(
        std::span<const double>(ll).subspan(lo * ns, (hi - lo) * ns),
        static_cast<int>(hi - lo), ns, hmm.tpm, hmm.delta0);
  }
  return total;
}

double hmm_track_loglik(const Track& track, const HabitatRaster& raster,
                        const RsfParams& params, const HmmSpec& hmm,
                        const McConfig& mc, int threads) {
  const LogWeightField field(raster, params);
  return hmm_track_loglik(track, field, hmm, mc, threads);
}

}  // namespace locgibbs
