#include "locgibbs/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <thread>

#include "locgibbs/errors.hpp"
#include "locgibbs/special.hpp"
#include "locgibbs/stats.hpp"

namespace locgibbs {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
const double kSqrtPi = std::sqrt(std::numbers::pi);
// Mean step length of the uniform-disc self-convolution is 128 r / (45 pi).
const double kDiscStepFactor = 128.0 / (45.0 * std::numbers::pi);
}  // namespace

KernelFamily kernel_family_from_name(const std::string& name) {
  if (name == "normal") return KernelFamily::kNormal;
  if (name == "fixed-radius") return KernelFamily::kFixedRadius;
  if (name == "gamma-radius") return KernelFamily::kGammaRadius;
  throw ValidationError("unknown kernel family: " + name);
}

const char* kernel_family_to_name(KernelFamily f) {
  switch (f) {
    case KernelFamily::kNormal: return "normal";
    case KernelFamily::kFixedRadius: return "fixed-radius";
    case KernelFamily::kGammaRadius: return "gamma-radius";
  }
  return "?";
}

WorkingMap::WorkingMap(ModelSpec spec, int n_layers,
                       std::vector<int> reference_indices)
    : spec_(spec), n_layers_(n_layers), reference_(std::move(reference_indices)) {
  if (spec_.n_states < 1) throw ValidationError("model: N must be >= 1");
  is_reference_.assign(n_layers_, false);
  for (int i : reference_) {
    if (i < 0 || i >= n_layers_) {
      throw ValidationError("model: reference index out of range");
    }
    is_reference_[i] = true;
  }
  int n_free = 0;
  for (bool r : is_reference_) n_free += !r;
  dim_ = n_free + spec_.n_states * spec_.params_per_state() +
         spec_.n_states * (spec_.n_states - 1);
}

std::vector<double> WorkingMap::to_working(const ModelParams& p) const {
  std::vector<double> w;
  w.reserve(dim_);
  for (int i = 0; i < n_layers_; ++i) {
    if (!is_reference_[i]) w.push_back(p.rsf.beta[i]);
  }
  for (int s = 0; s < spec_.n_states; ++s) {
    const auto& k = p.hmm.kernels[s];
    switch (spec_.family) {
      case KernelFamily::kNormal:
        w.push_back(std::log(std::get<NormalKernel>(k).sigma));
        break;
      case KernelFamily::kFixedRadius:
        w.push_back(std::log(std::get<FixedRadiusKernel>(k).radius));
        break;
      case KernelFamily::kGammaRadius: {
        const auto& g = std::get<GammaRadiusKernel>(k);
        w.push_back(std::log(g.shape));
        w.push_back(std::log(g.rate));
        break;
      }
    }
  }
  for (int i = 0; i < spec_.n_states; ++i) {
    const double diag = p.hmm.gamma(i, i);
    for (int j = 0; j < spec_.n_states; ++j) {
      if (j == i) continue;
      w.push_back(std::log(p.hmm.gamma(i, j) / diag));
    }
  }
  return w;
}

ModelParams WorkingMap::to_natural(std::span<const double> w) const {
  if (static_cast<int>(w.size()) != dim_) {
    throw ValidationError("working vector has wrong length");
  }
  ModelParams p;
  p.rsf.beta.assign(n_layers_, 0.0);
  p.rsf.reference_indices = reference_;
  std::size_t k = 0;
  for (int i = 0; i < n_layers_; ++i) {
    if (!is_reference_[i]) p.rsf.beta[i] = w[k++];
  }
  p.hmm.n_states = spec_.n_states;
  for (int s = 0; s < spec_.n_states; ++s) {
    switch (spec_.family) {
      case KernelFamily::kNormal:
        p.hmm.kernels.emplace_back(NormalKernel{std::exp(w[k])});
        k += 1;
        break;
      case KernelFamily::kFixedRadius:
        p.hmm.kernels.emplace_back(FixedRadiusKernel{std::exp(w[k])});
        k += 1;
        break;
      case KernelFamily::kGammaRadius:
        p.hmm.kernels.emplace_back(
            GammaRadiusKernel{std::exp(w[k]), std::exp(w[k + 1])});
        k += 2;
        break;
    }
  }
  const int n = spec_.n_states;
  p.hmm.tpm.assign(static_cast<std::size_t>(n) * n, 0.0);
  if (n == 1) {
    p.hmm.tpm[0] = 1.0;
  } else {
    for (int i = 0; i < n; ++i) {
      // Softmax over the row with the diagonal as the zero-logit baseline.
      double mx = 0.0;
      std::vector<double> eta(n, 0.0);
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        eta[j] = w[k++];
        mx = std::max(mx, eta[j]);
      }
      double denom = 0.0;
      for (int j = 0; j < n; ++j) denom += std::exp(eta[j] - mx);
      for (int j = 0; j < n; ++j) {
        p.hmm.tpm[i * n + j] = std::exp(eta[j] - mx) / denom;
      }
    }
  }
  p.hmm.delta0 = HmmSpec::stationary(p.hmm.tpm, n);
  p.hmm.validate();
  return p;
}

std::vector<std::string> WorkingMap::names(const HabitatRaster* raster) const {
  std::vector<std::string> out;
  out.reserve(dim_);
  for (int i = 0; i < n_layers_; ++i) {
    if (is_reference_[i]) continue;
    const std::string layer =
        raster ? raster->layer(i).name : "layer" + std::to_string(i);
    out.push_back("beta[" + layer + "]");
  }
  for (int s = 1; s <= spec_.n_states; ++s) {
    const std::string suffix =
        spec_.n_states > 1 ? "[" + std::to_string(s) + "]" : "";
    switch (spec_.family) {
      case KernelFamily::kNormal: out.push_back("sigma" + suffix); break;
      case KernelFamily::kFixedRadius: out.push_back("radius" + suffix); break;
      case KernelFamily::kGammaRadius:
        out.push_back("alpha" + suffix);
        out.push_back("rho" + suffix);
        break;
    }
  }
  for (int i = 1; i <= spec_.n_states; ++i) {
    for (int j = 1; j <= spec_.n_states; ++j) {
      if (i != j) {
        out.push_back("eta[" + std::to_string(i) + "->" + std::to_string(j) + "]");
      }
    }
  }
  return out;
}

std::vector<WorkingMap::Scale> WorkingMap::scales() const {
  std::vector<Scale> out;
  out.reserve(dim_);
  for (int i = 0; i < n_layers_; ++i) {
    if (!is_reference_[i]) out.push_back(Scale::kIdentity);
  }
  for (int s = 0; s < spec_.n_states; ++s) {
    for (int k = 0; k < spec_.params_per_state(); ++k) out.push_back(Scale::kLog);
  }
  for (int k = 0; k < spec_.n_states * (spec_.n_states - 1); ++k) {
    out.push_back(Scale::kTpmLogit);
  }
  return out;
}

double FitResult::natural_value(int i) const {
  switch (param_scales[i]) {
    case WorkingMap::Scale::kLog: return std::exp(working[i]);
    default: return working[i];
  }
}

double joint_loglik(const std::vector<Track>& tracks,
                    const LogWeightField& field, const HmmSpec& hmm,
                    const McConfig& mc, int threads) {
  double total = 0.0;
  for (std::size_t k = 0; k < tracks.size(); ++k) {
    McConfig mck = mc;
    mck.seed = mix_seed({mc.seed, 0x77AC4ULL, static_cast<std::uint64_t>(k)});
    total += hmm_track_loglik(tracks[k], field, hmm, mck, threads);
  }
  return total;
}

namespace {

struct StepLengthStats {
  std::vector<double> lengths;
  double max = 0.0;
};

StepLengthStats observed_step_lengths(const std::vector<Track>& tracks) {
  StepLengthStats st;
  for (const auto& tr : tracks) {
    for (const auto& s : contributing_steps(tr)) {
      st.lengths.push_back(distance(s.x, s.y));
    }
  }
  for (double d : st.lengths) st.max = std::max(st.max, d);
  return st;
}

double uniform_in(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.next_u01();
}

double log_uniform_in(Rng& rng, double lo, double hi) {
  return std::exp(uniform_in(rng, std::log(lo), std::log(hi)));
}

// Random initial working point. Movement scales start around step-length
// quantiles: for the normal kernel the Rayleigh-mean relation gives
// sigma ~ step/sqrt(pi).
std::vector<double> random_start(const WorkingMap& map,
                                 const StepLengthStats& steps, Rng& rng) {
  const auto& spec = map.spec();
  std::vector<double> w;
  w.reserve(map.dim());
  const int n_free = map.dim() - spec.n_states * spec.params_per_state() -
                     spec.n_states * (spec.n_states - 1);
  for (int i = 0; i < n_free; ++i) w.push_back(uniform_in(rng, -2.0, 2.0));

  const int n_states = spec.n_states;
  for (int s = 0; s < n_states; ++s) {
    // Per-state quantile band between p25 and p75, split across states so
    // multistate starts are spread (lower state = slower movement).
    const double p_lo = 0.25 + 0.5 * s / n_states;
    const double p_hi = 0.25 + 0.5 * (s + 1) / n_states;
    double q_lo = quantile(steps.lengths, p_lo);
    double q_hi = quantile(steps.lengths, p_hi);
    q_lo = std::max(q_lo, 1e-6);
    q_hi = std::max(q_hi, q_lo * 1.1);
    switch (spec.family) {
      case KernelFamily::kNormal:
        w.push_back(std::log(log_uniform_in(rng, q_lo / kSqrtPi, q_hi / kSqrtPi)));
        break;
      case KernelFamily::kFixedRadius: {
        // The radius must exceed half the longest observed step.
        const double lo = std::max(0.525 * steps.max, q_lo / kDiscStepFactor);
        const double hi = std::max(1.5 * lo, q_hi / kDiscStepFactor);
        w.push_back(std::log(log_uniform_in(rng, lo, hi)));
        break;
      }
      case KernelFamily::kGammaRadius: {
        const double shape = log_uniform_in(rng, 0.5, 3.0);
        const double mean = log_uniform_in(rng, q_lo / kDiscStepFactor,
                                           q_hi / kDiscStepFactor);
        w.push_back(std::log(shape));
        w.push_back(std::log(shape / mean));
        break;
      }
    }
  }
  for (int k = 0; k < n_states * (n_states - 1); ++k) {
    w.push_back(uniform_in(rng, -3.0, -1.0));  // diagonally dominant rows
  }
  return w;
}

void validate_fit_inputs(const std::vector<Track>& tracks,
                         const HabitatRaster& raster,
                         const std::vector<int>& reference_indices) {
  if (tracks.empty()) throw ValidationError("fit: no tracks");
  long n_steps = 0;
  for (std::size_t k = 0; k < tracks.size(); ++k) {
    tracks[k].validate();
    n_steps += static_cast<long>(contributing_steps(tracks[k]).size());
    for (std::size_t i = 0; i < tracks[k].points.size(); ++i) {
      const auto& p = tracks[k].points[i];
      if (p && !raster.cell_of(*p)) {
        throw ValidationError("fit: track " + std::to_string(k) + " point t=" +
                              std::to_string(i + 1) + " lies outside the raster");
      }
    }
  }
  if (n_steps < 1) throw ValidationError("fit: no contributing step in the data");

  // A categorical layer with a free coefficient must be visited by at least
  // one observed endpoint, or its beta diverges.
  std::vector<bool> is_ref(raster.n_layers(), false);
  for (int i : reference_indices) is_ref[i] = true;
  for (int l = 0; l < raster.n_layers(); ++l) {
    if (raster.layer(l).group < 0 || is_ref[l]) continue;
    bool visited = false;
    for (const auto& tr : tracks) {
      for (const auto& p : tr.points) {
        if (!p) continue;
        const auto cell = raster.cell_of(*p);
        if (cell && raster.layer(l).values[*cell] == 1.0) {
          visited = true;
          break;
        }
      }
      if (visited) break;
    }
    if (!visited) {
      throw ValidationError("fit: habitat category '" + raster.layer(l).name +
                            "' is never visited; its coefficient cannot be "
                            "estimated");
    }
  }
}

}  // namespace

FitResult fit(const std::vector<Track>& tracks, const HabitatRaster& raster,
              const std::vector<int>& reference_indices, ModelSpec spec,
              McConfig mc, int starts, std::uint64_t seed,
              const FitOptions& opts) {
  mc.validate();
  if (starts < 1) throw ValidationError("fit: starts must be >= 1");
  validate_fit_inputs(tracks, raster, reference_indices);
  const WorkingMap map(spec, raster.n_layers(), reference_indices);
  const auto steps = observed_step_lengths(tracks);

  const int inner_threads =
      (opts.threads > 1 && starts == 1) ? opts.threads : 1;

  auto run_start = [&](int s, StartTrace& tr, std::vector<double>& x_out) {
    tr.start = s;
    tr.samples_seed = mix_seed({seed, 0xB5ULL, static_cast<std::uint64_t>(s)});
    McConfig mcs = mc;
    mcs.seed = tr.samples_seed;
    Rng init_rng(mix_seed({seed, 0xA11ULL, static_cast<std::uint64_t>(s)}));
    try {
      const auto x0 = random_start(map, steps, init_rng);
      auto objective = [&](std::span<const double> w) -> double {
        try {
          const ModelParams p = map.to_natural(w);
          const LogWeightField field(raster, p.rsf);
          const double ll =
              joint_loglik(tracks, field, p.hmm, mcs, inner_threads);
          return std::isfinite(ll) ? -ll : kInf;
        } catch (const Error&) {
          return kInf;  // infeasible or degenerate point
        }
      };
      const auto nm = nelder_mead(objective, x0, opts.nm);
      tr.converged = nm.converged;
      tr.iterations = nm.iterations;
      tr.evals = nm.evals;
      if (!std::isfinite(nm.f)) {
        tr.failed = true;
        tr.error = "objective not finite anywhere along the search";
        return;
      }
      tr.loglik = -nm.f;
      x_out = nm.x;
    } catch (const std::exception& e) {
      tr.failed = true;
      tr.error = e.what();
    }
  };

  std::vector<StartTrace> trace(starts);
  std::vector<std::vector<double>> xs(starts);
  if (opts.threads > 1 && starts > 1) {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    const int nt = std::min(opts.threads, starts);
    for (int w = 0; w < nt; ++w) {
      pool.emplace_back([&]() {
        for (int s = next.fetch_add(1); s < starts; s = next.fetch_add(1)) {
          run_start(s, trace[s], xs[s]);
        }
      });
    }
    for (auto& th : pool) th.join();
  } else {
    for (int s = 0; s < starts; ++s) run_start(s, trace[s], xs[s]);
  }

  int best = -1;
  for (int s = 0; s < starts; ++s) {
    if (trace[s].failed) continue;
    if (best < 0 || trace[s].loglik > trace[best].loglik) best = s;
  }
  if (best < 0) {
    std::string detail = trace.empty() ? "" : (": " + trace[0].error);
    throw NumericalError("fit: all " + std::to_string(starts) +
                         " starts failed" + detail);
  }

  FitResult res;
  res.model = spec;
  res.param_names = map.names(&raster);
  res.param_scales = map.scales();
  res.working = xs[best];
  res.params = map.to_natural(res.working);
  res.loglik = trace[best].loglik;
  res.mc = mc;
  res.mc.seed = trace[best].samples_seed;
  res.starts = starts;
  res.seed = seed;
  res.best_start = best;
  res.trace = std::move(trace);
  res.layer_names.reserve(raster.n_layers());
  for (const auto& l : raster.layers()) res.layer_names.push_back(l.name);
  res.reference_indices = reference_indices;
  return res;
}

std::vector<double> fd_hessian(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double h_scale) {
  const int n = static_cast<int>(x.size());
  std::vector<double> h(n);
  for (int i = 0; i < n; ++i) h[i] = h_scale * std::max(1.0, std::fabs(x[i]));
  std::vector<double> H(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<double> p(x.begin(), x.end());
  const double f0 = f(p);
  for (int i = 0; i < n; ++i) {
    p[i] = x[i] + h[i];
    const double fp = f(p);
    p[i] = x[i] - h[i];
    const double fm = f(p);
    p[i] = x[i];
    H[static_cast<std::size_t>(i) * n + i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      p[i] = x[i] + h[i]; p[j] = x[j] + h[j];
      const double fpp = f(p);
      p[j] = x[j] - h[j];
      const double fpm = f(p);
      p[i] = x[i] - h[i]; p[j] = x[j] + h[j];
      const double fmp = f(p);
      p[j] = x[j] - h[j];
      const double fmm = f(p);
      p[i] = x[i]; p[j] = x[j];
      const double v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
      H[static_cast<std::size_t>(i) * n + j] = v;
      H[static_cast<std::size_t>(j) * n + i] = v;
    }
  }
  return H;
}

namespace {

// Cholesky factorization; returns false if not positive definite.
bool cholesky(std::vector<double>& a, int n) {
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[static_cast<std::size_t>(i) * n + j];
      for (int k = 0; k < j; ++k) {
        s -= a[static_cast<std::size_t>(i) * n + k] *
             a[static_cast<std::size_t>(j) * n + k];
      }
      if (i == j) {
        if (s <= 0.0) return false;
        a[static_cast<std::size_t>(i) * n + j] = std::sqrt(s);
      } else {
        a[static_cast<std::size_t>(i) * n + j] =
            s / a[static_cast<std::size_t>(j) * n + j];
      }
    }
  }
  return true;
}

}  // namespace

std::optional<std::vector<double>> se_from_hessian(
    const std::vector<double>& hessian, int n) {
  std::vector<double> L = hessian;
  if (!cholesky(L, n)) return std::nullopt;
  // Invert via L: solve H x = e_i for each unit vector.
  std::vector<double> se(n);
  std::vector<double> y(n), z(n);
  for (int col = 0; col < n; ++col) {
    for (int i = 0; i < n; ++i) {
      double s = (i == col) ? 1.0 : 0.0;
      for (int k = 0; k < i; ++k) s -= L[static_cast<std::size_t>(i) * n + k] * y[k];
      y[i] = s / L[static_cast<std::size_t>(i) * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = y[i];
      for (int k = i + 1; k < n; ++k) s -= L[static_cast<std::size_t>(k) * n + i] * z[k];
      z[i] = s / L[static_cast<std::size_t>(i) * n + i];
    }
    if (z[col] <= 0.0) return std::nullopt;
    se[col] = std::sqrt(z[col]);
  }
  return se;
}

void hessian_se(FitResult& fit, const std::vector<Track>& tracks,
                const HabitatRaster& raster, McConfig mc_hessian,
                const HessianOptions& opts) {
  if (fit.best_start < 0 || !fit.trace[fit.best_start].converged) {
    throw NumericalError("hessian_se: fit did not converge");
  }
  const WorkingMap map(fit.model, raster.n_layers(), fit.reference_indices);
  mc_hessian.seed = fit.mc.seed;  // common random numbers with the fit
  mc_hessian.lhs = fit.mc.lhs;

  std::vector<double> prev_se;
  McConfig mc_round = mc_hessian;
  int round = 0;
  for (; round < opts.max_rounds; ++round) {
    const double g = std::pow(opts.growth, round);
    mc_round.n_c = std::max(1, static_cast<int>(std::lround(mc_hessian.n_c * g)));
    mc_round.n_z = std::max(1, static_cast<int>(std::lround(mc_hessian.n_z * g)));
    mc_round.n_r = std::max(1, static_cast<int>(std::lround(mc_hessian.n_r * g)));
    auto objective = [&](std::span<const double> w) -> double {
      const ModelParams p = map.to_natural(w);
      const LogWeightField field(raster, p.rsf);
      return -joint_loglik(tracks, field, p.hmm, mc_round, opts.threads);
    };
    const auto H = fd_hessian(objective, fit.working, opts.h_scale);
    const auto se = se_from_hessian(H, map.dim());
    if (!se) {
      throw NumericalError(
          "hessian_se: Hessian is not positive definite (not a maximum, or an "
          "unidentifiable parameter)");
    }
    fit.se_working = *se;
    fit.hessian_rounds = round + 1;
    fit.mc_hessian = mc_round;
    if (!prev_se.empty()) {
      double rel = 0.0;
      for (int i = 0; i < map.dim(); ++i) {
        rel = std::max(rel, std::fabs((*se)[i] - prev_se[i]) /
                                std::max(prev_se[i], 1e-12));
      }
      if (rel < opts.stabil_tol) {
        fit.se_stabilized = true;
        break;
      }
    }
    prev_se = *se;
  }

  const int n = map.dim();
  fit.ci_lo.resize(n);
  fit.ci_hi.resize(n);
  for (int i = 0; i < n; ++i) {
    const double lo = fit.working[i] - 1.96 * fit.se_working[i];
    const double hi = fit.working[i] + 1.96 * fit.se_working[i];
    if (fit.param_scales[i] == WorkingMap::Scale::kLog) {
      fit.ci_lo[i] = std::exp(lo);
      fit.ci_hi[i] = std::exp(hi);
    } else {
      fit.ci_lo[i] = lo;
      fit.ci_hi[i] = hi;
    }
  }
  fit.se_available = true;
}

std::vector<std::optional<int>> viterbi(const Track& track,
                                        const HabitatRaster& raster,
                                        const RsfParams& params,
                                        const HmmSpec& hmm, const McConfig& mc,
                                        int threads) {
  if (hmm.n_states < 2) throw ValidationError("decoding requires N >= 2");
  track.validate();
  hmm.validate();
  const LogWeightField field(raster, params);
  const auto steps = contributing_steps(track);
  std::vector<std::optional<int>> decoded(track.points.size() - 1);
  if (steps.empty()) return decoded;
  const auto ll = step_loglik_matrix(steps, field, hmm.kernels, mc, threads);
  const int ns = hmm.n_states;

  std::size_t begin = 0;
  for (std::size_t k = 1; k <= steps.size(); ++k) {
    if (k < steps.size() && steps[k].t == steps[k - 1].t + 1) continue;
    // Segment [begin, k).
    const std::size_t len = k - begin;
    std::vector<double> delta(ns), next(ns);
    std::vector<int> back(len * ns, 0);
    for (int s = 0; s < ns; ++s) {
      delta[s] = std::log(hmm.delta0[s]) + ll[begin * ns + s];
    }
    for (std::size_t r = 1; r < len; ++r) {
      for (int j = 0; j < ns; ++j) {
        int arg = 0;
        double best = -kInf;
        for (int i = 0; i < ns; ++i) {
          const double cand = delta[i] + std::log(hmm.gamma(i, j));
          if (cand > best) {  // strict: ties keep the lower state index
            best = cand;
            arg = i;
          }
        }
        next[j] = best + ll[(begin + r) * ns + j];
        back[r * ns + j] = arg;
      }
      delta.swap(next);
    }
    int state = 0;
    for (int s = 1; s < ns; ++s) {
      if (delta[s] > delta[state]) state = s;
    }
    for (std::size_t r = len; r-- > 0;) {
      decoded[steps[begin + r].t - 1] = state;
      if (r > 0) state = back[r * ns + state];
    }
    begin = k;
  }
  return decoded;
}

GofResult gof_steplengths(const std::vector<Track>& observed,
                          const HabitatRaster& raster, const ModelParams& fitted,
                          int sim_length, std::uint64_t seed, int K) {
  const auto obs = observed_step_lengths(observed);
  if (obs.lengths.size() < 2) {
    throw ValidationError("gof: too few observed steps for comparison");
  }
  if (sim_length < 2) throw ValidationError("gof: sim_length must be >= 2");

  Track sim;
  if (fitted.hmm.n_states == 1) {
    sim = simulate_track(sim_length, FromTarget{}, fitted.hmm.kernels[0],
                         raster, fitted.rsf, K, seed);
  } else {
    sim = simulate_multistate(sim_length, FromTarget{}, fitted.hmm, raster,
                              fitted.rsf, K, seed)
              .first;
  }
  std::vector<double> sim_lengths;
  for (const auto& s : contributing_steps(sim)) {
    sim_lengths.push_back(distance(s.x, s.y));
  }

  GofResult g;
  g.n_observed = obs.lengths.size();
  g.n_simulated = sim_lengths.size();
  double max_len = obs.max;
  for (double d : sim_lengths) max_len = std::max(max_len, d);
  const double width = 0.05;
  const int n_bins = std::max(1, static_cast<int>(std::ceil(max_len / width)));
  g.bin_lo.resize(n_bins);
  g.bin_hi.resize(n_bins);
  g.observed_density.assign(n_bins, 0.0);
  g.simulated_density.assign(n_bins, 0.0);
  for (int b = 0; b < n_bins; ++b) {
    g.bin_lo[b] = b * width;
    g.bin_hi[b] = (b + 1) * width;
  }
  auto bin_of = [&](double d) {
    return std::min(n_bins - 1, static_cast<int>(d / width));
  };
  for (double d : obs.lengths) g.observed_density[bin_of(d)] += 1.0;
  for (double d : sim_lengths) g.simulated_density[bin_of(d)] += 1.0;
  for (int b = 0; b < n_bins; ++b) {
    g.observed_density[b] /= obs.lengths.size() * width;
    g.simulated_density[b] /= sim_lengths.size() * width;
  }
  g.ks_stat = ks_two_sample(obs.lengths, sim_lengths);
  return g;
}

std::string format_ci(double estimate, double lo, double hi) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.2f (%.2f,%.2f)", estimate, lo, hi);
  return buf;
}

}  // namespace locgibbs
