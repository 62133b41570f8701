#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "locgibbs/habitat.hpp"
#include "locgibbs/kernels.hpp"

namespace locgibbs {

/// Time-ordered locations at integer indices 1..T; Missing entries are
/// explicit nullopts.
struct Track {
  std::vector<std::optional<Point>> points;

  int length() const { return static_cast<int>(points.size()); }
  int n_observed() const;
  void validate() const;  // >= 2 observed points
};

/// N-state Markov switching specification: row-stochastic transition matrix,
/// initial distribution, one kernel per state.
struct HmmSpec {
  int n_states = 1;
  std::vector<double> tpm;     // row-major N x N
  std::vector<double> delta0;  // length N
  std::vector<KernelSpec> kernels;

  void validate() const;
  double gamma(int i, int j) const { return tpm[i * n_states + j]; }

  static HmmSpec single(KernelSpec k);
  /// Stationary distribution of a row-stochastic matrix (solves d G = d).
  static std::vector<double> stationary(const std::vector<double>& tpm, int n);
};

/// Start the chain from the target distribution: weighted cell choice by the
/// cell RSF values, then uniform within the cell.
struct FromTarget {};
using InitSpec = std::variant<Point, FromTarget>;

/// One local Gibbs transition from x: draw the intermediate centre mu from
/// phi(.|x) (radius first for the gamma kernel), draw K candidates from
/// phi(.|mu), pick one with probability w(z_i)/sum_j w(z_j). Candidates
/// outside the region get weight zero; if all K weights vanish the centre is
/// redrawn, with a hard error after 1000 redraws.
Point local_gibbs_step(Point x, const KernelSpec& kernel,
                       const LogWeightField& field, int K, Rng& rng);

/// Convenience overload matching the module surface.
Point local_gibbs_step(Point x, const KernelSpec& kernel,
                       const HabitatRaster& raster, const RsfParams& params,
                       int K, Rng& rng);

Track simulate_track(int T, const InitSpec& init, const KernelSpec& kernel,
                     const HabitatRaster& raster, const RsfParams& params,
                     int K, std::uint64_t seed);

/// Multistate simulation: S_1 ~ delta0, S_{t+1} ~ tpm row S_t, step t uses
/// kernels[S_t]. Returns the track and the full state sequence (length T;
/// the final state is the chain's continuation after the last step).
std::pair<Track, std::vector<int>> simulate_multistate(
    int T, const InitSpec& init, const HmmSpec& hmm,
    const HabitatRaster& raster, const RsfParams& params, int K,
    std::uint64_t seed);

}  // namespace locgibbs
