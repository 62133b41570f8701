#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "locgibbs/likelihood.hpp"
#include "locgibbs/optim.hpp"

namespace locgibbs {

enum class KernelFamily { kNormal, kFixedRadius, kGammaRadius };

KernelFamily kernel_family_from_name(const std::string& name);
const char* kernel_family_to_name(KernelFamily f);

/// What to fit: the kernel family and the number of switching states.
struct ModelSpec {
  KernelFamily family = KernelFamily::kNormal;
  int n_states = 1;

  int params_per_state() const {
    return family == KernelFamily::kGammaRadius ? 2 : 1;
  }
};

/// Natural-scale parameters of a fitted or true model. For N = 1 the HMM
/// degenerates to a single kernel.
struct ModelParams {
  RsfParams rsf;
  HmmSpec hmm;
};

/// Bijection between natural parameters and the unconstrained working scale:
/// free betas as-is, movement parameters through log, transition rows
/// through a multinomial logit with the diagonal as baseline. delta0 is not
/// estimated; it is the stationary distribution of the transition matrix.
class WorkingMap {
 public:
  enum class Scale { kIdentity, kLog, kTpmLogit };

  WorkingMap(ModelSpec spec, int n_layers, std::vector<int> reference_indices);

  int dim() const { return dim_; }
  const ModelSpec& spec() const { return spec_; }
  const std::vector<int>& reference_indices() const { return reference_; }

  std::vector<double> to_working(const ModelParams& p) const;
  ModelParams to_natural(std::span<const double> w) const;

  /// Parameter names aligned with the working vector; beta entries carry the
  /// layer name when a raster is given.
  std::vector<std::string> names(const HabitatRaster* raster = nullptr) const;
  std::vector<Scale> scales() const;

 private:
  ModelSpec spec_;
  int n_layers_;
  std::vector<int> reference_;
  std::vector<bool> is_reference_;
  int dim_;
};

struct StartTrace {
  int start = 0;
  bool failed = false;
  bool converged = false;
  std::string error;
  double loglik = 0.0;
  int iterations = 0;
  int evals = 0;
  std::uint64_t samples_seed = 0;
};

struct FitResult {
  ModelSpec model;
  std::vector<std::string> param_names;
  std::vector<WorkingMap::Scale> param_scales;
  std::vector<double> working;  // optimum, working scale
  ModelParams params;           // optimum, natural scale
  double loglik = 0.0;
  McConfig mc;  // echo; mc.seed is the winning start's base-sample seed
  int starts = 0;
  std::uint64_t seed = 0;
  int best_start = -1;
  std::vector<StartTrace> trace;
  std::vector<std::string> layer_names;
  std::vector<int> reference_indices;

  // Populated by hessian_se.
  bool se_available = false;
  bool se_stabilized = false;
  int hessian_rounds = 0;
  McConfig mc_hessian;
  std::vector<double> se_working;
  std::vector<double> ci_lo, ci_hi;  // natural scale for identity/log params

  /// Natural-scale value of working parameter i.
  double natural_value(int i) const;
};

struct FitOptions {
  int threads = 1;
  NelderMeadOptions nm;
};

/// Maximize the Monte Carlo likelihood over `starts` random initial working
/// points (beta ~ U(-2,2), movement scales from step-length quantiles).
/// Base samples are fixed once per start; the best local optimum wins.
FitResult fit(const std::vector<Track>& tracks, const HabitatRaster& raster,
              const std::vector<int>& reference_indices, ModelSpec spec,
              McConfig mc, int starts, std::uint64_t seed,
              const FitOptions& opts = {});

/// Joint log-likelihood of several tracks under one parameter set, with
/// per-track sample seeds derived as mix(mc.seed, track index).
double joint_loglik(const std::vector<Track>& tracks,
                    const LogWeightField& field, const HmmSpec& hmm,
                    const McConfig& mc, int threads = 1);

/// Central finite-difference Hessian with steps h_i = h_scale*max(1,|x_i|).
std::vector<double> fd_hessian(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double h_scale = 1e-4);

/// Standard errors from the inverse of a positive definite Hessian; nullopt
/// when the Cholesky factorization fails.
std::optional<std::vector<double>> se_from_hessian(
    const std::vector<double>& hessian, int n);

struct HessianOptions {
  int threads = 1;
  double h_scale = 1e-4;
  double stabil_tol = 0.02;  // relative change between rounds
  int max_rounds = 5;
  double growth = 2.0;  // MC size multiplier per round
};

/// Hessian-based standard errors at the optimum of `fit`, recomputed at
/// growing Monte Carlo sizes (common random numbers within a round) until
/// successive SE vectors differ by less than stabil_tol. CIs are
/// estimate +/- 1.96 SE on the working scale, mapped back through exp for
/// log-scale parameters.
void hessian_se(FitResult& fit, const std::vector<Track>& tracks,
                const HabitatRaster& raster, McConfig mc_hessian,
                const HessianOptions& opts = {});

/// Most likely state sequence (max-product in log space), one entry per step
/// index t = 1..T-1; nullopt for steps with a missing endpoint. Gaps are
/// decoded per segment; ties break toward the lower state index.
std::vector<std::optional<int>> viterbi(const Track& track,
                                        const HabitatRaster& raster,
                                        const RsfParams& params,
                                        const HmmSpec& hmm, const McConfig& mc,
                                        int threads = 1);

struct GofResult {
  std::vector<double> bin_lo, bin_hi;
  std::vector<double> observed_density, simulated_density;
  double ks_stat = 0.0;
  std::size_t n_observed = 0, n_simulated = 0;
};

/// Simulate sim_length locations from the fitted model on the same raster
/// and compare binned step-length densities (bin width 0.05 km) between the
/// observed tracks and the simulation; also the two-sample KS statistic.
GofResult gof_steplengths(const std::vector<Track>& observed,
                          const HabitatRaster& raster, const ModelParams& fitted,
                          int sim_length, std::uint64_t seed, int K = 200);

/// "2.74 (2.54,2.94)" estimate/interval rendering.
std::string format_ci(double estimate, double lo, double hi);

}  // namespace locgibbs
