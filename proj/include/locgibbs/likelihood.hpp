#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "locgibbs/habitat.hpp"
#include "locgibbs/kernels.hpp"
#include "locgibbs/simulator.hpp"

namespace locgibbs {

/// Monte Carlo sample sizes for the approximate likelihood. n_r only matters
/// for the gamma-radius kernel. The seed fixes the base uniforms for the
/// lifetime of a likelihood/optimization run.
struct McConfig {
  int n_c = 50;
  int n_z = 50;
  int n_r = 30;
  std::uint64_t seed = 0;
  bool lhs = true;

  void validate() const;
};

/// Log step density (per km^2). contributing is false when either endpoint
/// of the step is missing.
struct StepLogLik {
  double value = 0.0;
  bool contributing = true;
};

/// One observed step: locations at consecutive time indices t and t+1.
struct StepPair {
  long t = 0;  // 1-based time index of the step's start point
  Point x, y;
};

/// Consecutive fully-observed pairs of a track.
std::vector<StepPair> contributing_steps(const Track& track);

// Monte Carlo step log-likelihoods. The RSF normalizer cancels between the
// numerator and the availability sums, so unnormalized log w is used
// throughout; everything is accumulated in log space. Deterministic given
// (samples.seed, t).
StepLogLik step_loglik_normal(Point x, Point y, const LogWeightField& field,
                              double sigma, const McConfig& mc,
                              const BaseSamples& samples, long t);
StepLogLik step_loglik_fixed_radius(Point x, Point y,
                                    const LogWeightField& field, double radius,
                                    const McConfig& mc,
                                    const BaseSamples& samples, long t);
StepLogLik step_loglik_gamma_radius(Point x, Point y,
                                    const LogWeightField& field, double shape,
                                    double rate, const McConfig& mc,
                                    const BaseSamples& samples, long t);

StepLogLik step_loglik(Point x, Point y, const LogWeightField& field,
                       const KernelSpec& kernel, const McConfig& mc,
                       const BaseSamples& samples, long t);

/// Per-step log-likelihoods for every kernel in `kernels`, all states sharing
/// the same base samples (common random numbers). Row k corresponds to
/// steps[k], column s to kernels[s]. Evaluations may run on several threads;
/// results are identical regardless of thread count.
std::vector<double> step_loglik_matrix(std::span<const StepPair> steps,
                                       const LogWeightField& field,
                                       std::span<const KernelSpec> kernels,
                                       const McConfig& mc, int threads = 1);

/// Sum of contributing step log-likelihoods. Per-step base samples are
/// derived from (mc.seed, t), so the value does not depend on evaluation
/// order or parallelism. A track whose gaps leave no contributing step has
/// log-likelihood 0 (empty product).
double track_loglik(const Track& track, const HabitatRaster& raster,
                    const RsfParams& params, const KernelSpec& kernel,
                    const McConfig& mc, int threads = 1);
double track_loglik(const Track& track, const LogWeightField& field,
                    const KernelSpec& kernel, const McConfig& mc,
                    int threads = 1);

/// Log-space forward recursion for one contiguous segment of per-step
/// state-wise log densities (row-major n_steps x n_states).
double hmm_forward_loglik(std::span<const double> step_ll, int n_steps,
                          int n_states, std::span<const double> tpm,
                          std::span<const double> delta0);

/// Forward-algorithm log-likelihood of the state-switching model. Gaps split
/// the track into segments; each segment restarts from delta0 and segment
/// log-likelihoods add.
double hmm_track_loglik(const Track& track, const HabitatRaster& raster,
                        const RsfParams& params, const HmmSpec& hmm,
                        const McConfig& mc, int threads = 1);
double hmm_track_loglik(const Track& track, const LogWeightField& field,
                        const HmmSpec& hmm, const McConfig& mc,
                        int threads = 1);

}  // namespace locgibbs
