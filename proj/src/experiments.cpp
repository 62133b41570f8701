#include "locgibbs/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include "locgibbs/errors.hpp"

namespace locgibbs {

ModelSpec ScenarioConfig::model_spec() const {
  switch (scenario) {
    case 1: return {KernelFamily::kNormal, 1};
    case 2: return {KernelFamily::kNormal, 2};
    case 3: return {KernelFamily::kGammaRadius, 1};
    default:
      throw ValidationError("experiment: scenario must be 1, 2 or 3");
  }
}

McConfig ScenarioConfig::default_mc() const {
  McConfig m;
  if (scenario == 3) {
    m.n_c = m.n_z = m.n_r = 30;
  } else {
    m.n_c = m.n_z = 50;
  }
  return m;
}

ModelParams ScenarioConfig::true_params(const HabitatRaster& raster) const {
  ModelParams p;
  if (!beta.empty()) {
    p.rsf.beta = beta;
  } else if (raster.n_layers() == 4) {
    p.rsf.beta = {3.0, 2.0, 1.0, 0.0};
  } else {
    throw ValidationError(
        "experiment: --beta is required unless the raster has 4 layers");
  }
  const int ref = reference_index < 0 ? raster.n_layers() - 1 : reference_index;
  if (ref < 0 || ref >= raster.n_layers()) {
    throw ValidationError("experiment: reference index out of range");
  }
  if (p.rsf.beta[ref] != 0.0) {
    throw ValidationError("experiment: the reference coefficient must be 0");
  }
  p.rsf.reference_indices = {ref};
  p.rsf.validate(raster.n_layers());

  switch (scenario) {
    case 1:
      p.hmm = HmmSpec::single(NormalKernel{sigma});
      break;
    case 2: {
      p.hmm.n_states = 2;
      p.hmm.kernels = {KernelSpec{NormalKernel{sigma1}},
                       KernelSpec{NormalKernel{sigma2}}};
      p.hmm.tpm = {stay, 1.0 - stay, 1.0 - stay, stay};
      p.hmm.delta0 = HmmSpec::stationary(p.hmm.tpm, 2);
      p.hmm.validate();
      break;
    }
    case 3:
      p.hmm = HmmSpec::single(GammaRadiusKernel{alpha, rho});
      break;
    default:
      throw ValidationError("experiment: scenario must be 1, 2 or 3");
  }
  return p;
}

namespace {

bool visits_all_categories(const Track& track, const HabitatRaster& raster) {
  std::vector<bool> seen(raster.n_layers(), false);
  for (const auto& p : track.points) {
    if (!p) continue;
    const auto cell = raster.cell_of(*p);
    if (!cell) continue;
    for (int l = 0; l < raster.n_layers(); ++l) {
      if (raster.layer(l).group >= 0 && raster.layer(l).values[*cell] == 1.0) {
        seen[l] = true;
      }
    }
  }
  for (int l = 0; l < raster.n_layers(); ++l) {
    if (raster.layer(l).group >= 0 && !seen[l]) return false;
  }
  return true;
}

// Relabel fitted states so that movement scales are ascending; keeps state
// accuracy well-defined when the optimizer swaps labels.
void sort_states_by_scale(ModelParams& p) {
  const int n = p.hmm.n_states;
  if (n < 2) return;
  std::vector<double> scale(n);
  for (int s = 0; s < n; ++s) {
    scale[s] = std::visit(
        [](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, NormalKernel>) return k.sigma;
          else if constexpr (std::is_same_v<T, FixedRadiusKernel>) return k.radius;
          else return k.shape / k.rate;
        },
        p.hmm.kernels[s]);
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scale[a] < scale[b]; });
  HmmSpec sorted = p.hmm;
  for (int i = 0; i < n; ++i) {
    sorted.kernels[i] = p.hmm.kernels[order[i]];
    sorted.delta0[i] = p.hmm.delta0[order[i]];
    for (int j = 0; j < n; ++j) {
      sorted.tpm[i * n + j] = p.hmm.gamma(order[i], order[j]);
    }
  }
  p.hmm = std::move(sorted);
}

}  // namespace

ExperimentResult run_experiment(const HabitatRaster& raster,
                                const ScenarioConfig& config_in) {
  ScenarioConfig config = config_in;
  if (config.reps < 1) throw ValidationError("experiment: reps must be >= 1");
  if (config.mc.n_c <= 0) config.mc = config.default_mc();
  config.mc.validate();
  if (!raster.single_categorical()) {
    throw ValidationError(
        "experiment: the scenarios need a single categorical habitat raster");
  }
  const ModelSpec spec = config.model_spec();
  const ModelParams truth = config.true_params(raster);
  const WorkingMap map(spec, raster.n_layers(),
                       truth.rsf.reference_indices);

  ExperimentResult out;
  out.config = config;
  out.param_names = map.names(&raster);
  for (const auto& l : raster.layers()) out.categories.push_back(l.name);
  {
    const auto w = map.to_working(truth);
    const auto scales = map.scales();
    out.true_values.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      out.true_values[i] =
          scales[i] == WorkingMap::Scale::kLog ? std::exp(w[i]) : w[i];
    }
  }
  const auto true_util = habitat_utilisation(raster, truth.rsf);
  out.true_log_util.resize(true_util.size());
  for (std::size_t i = 0; i < true_util.size(); ++i) {
    out.true_log_util[i] = std::log(true_util[i]);
  }

  out.reps.resize(config.reps);

  auto run_rep = [&](int rep) {
    RepResult& r = out.reps[rep];
    r.rep = rep;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const std::uint64_t rep_seed =
          mix_seed({config.seed, 0xE1ULL, static_cast<std::uint64_t>(rep)});
      // Simulate; optionally reject tracks that miss a habitat type.
      Track track;
      std::vector<int> true_states;
      bool accepted = false;
      for (int attempt = 0; attempt < config.retry_cap; ++attempt) {
        const std::uint64_t sim_seed =
            mix_seed({rep_seed, 0x51ULL, static_cast<std::uint64_t>(attempt)});
        if (spec.n_states > 1) {
          auto [tr, st] = simulate_multistate(config.T, FromTarget{}, truth.hmm,
                                              raster, truth.rsf, config.K,
                                              sim_seed);
          track = std::move(tr);
          true_states = std::move(st);
        } else {
          track = simulate_track(config.T, FromTarget{}, truth.hmm.kernels[0],
                                 raster, truth.rsf, config.K, sim_seed);
        }
        if (!config.require_all_categories ||
            visits_all_categories(track, raster)) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        throw NumericalError("no simulated track visited all categories in " +
                             std::to_string(config.retry_cap) + " attempts");
      }

      FitOptions fopts;
      fopts.threads = 1;  // replications already run concurrently
      fopts.nm = config.nm;
      FitResult fr = fit({track}, raster, truth.rsf.reference_indices, spec,
                         config.mc, config.starts,
                         mix_seed({rep_seed, 0xF17ULL}), fopts);
      ModelParams est = fr.params;
      sort_states_by_scale(est);
      r.converged = fr.trace[fr.best_start].converged;
      r.loglik = fr.loglik;
      {
        const auto w = map.to_working(est);
        const auto scales = map.scales();
        r.estimates.resize(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) {
          r.estimates[i] =
              scales[i] == WorkingMap::Scale::kLog ? std::exp(w[i]) : w[i];
        }
      }
      const auto est_util = habitat_utilisation(raster, est.rsf);
      r.log_util_error.resize(est_util.size());
      for (std::size_t i = 0; i < est_util.size(); ++i) {
        r.log_util_error[i] = std::log(est_util[i]) - out.true_log_util[i];
      }

      if (spec.n_states > 1) {
        McConfig mc_dec = fr.mc;
        const auto decoded =
            viterbi(track, raster, est.rsf, est.hmm, mc_dec, 1);
        long n_steps = 0, n_correct = 0;
        for (std::size_t t = 0; t < decoded.size(); ++t) {
          if (!decoded[t]) continue;
          ++n_steps;
          n_correct += (*decoded[t] == true_states[t]);
        }
        r.state_accuracy =
            n_steps > 0 ? static_cast<double>(n_correct) / n_steps : -1.0;
      }
      r.ok = true;
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = e.what();
    }
    r.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
  };

  if (config.threads > 1 && config.reps > 1) {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int nt = std::min(config.threads, config.reps);
    for (int w = 0; w < nt; ++w) {
      pool.emplace_back([&]() {
        for (int r = next.fetch_add(1); r < config.reps;
             r = next.fetch_add(1)) {
          run_rep(r);
        }
      });
    }
    for (auto& th : pool) th.join();
  } else {
    for (int r = 0; r < config.reps; ++r) run_rep(r);
  }
  return out;
}

}  // namespace locgibbs
