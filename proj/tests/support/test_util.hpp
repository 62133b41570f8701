#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "locgibbs/habitat.hpp"
#include "locgibbs/rng.hpp"

namespace locgibbs::testsupport {

/// Single-category raster (one one-hot layer): a flat target when its beta
/// is the reference.
HabitatRaster flat_raster(int n_rows, int n_cols, double cell_size,
                          double origin_x = 0.0, double origin_y = 0.0);

/// Two categories split down the middle: left columns "open", right "wood".
HabitatRaster half_and_half_raster(int n_rows, int n_cols, double cell_size);

/// Categorical map from smoothed noise, cut at the requested area shares.
/// Patch size grows with blur_radius (in cells). Deterministic given seed.
struct LandscapeSpec {
  int n_rows = 100;
  int n_cols = 100;
  double cell_size = 0.1;  // km
  std::vector<double> shares = {0.15, 0.25, 0.30, 0.30};
  std::vector<std::string> names = {"grassland", "bushed_grassland",
                                    "bushland", "woodland"};
  int blur_radius = 4;
  int blur_passes = 3;
  std::uint64_t seed = 2024;
};
HabitatRaster landscape_raster(const LandscapeSpec& spec = {});

/// Category codes (1-based, row 0 = south) of a single-categorical raster.
std::vector<int> category_codes(const HabitatRaster& raster);

/// Write a single-categorical raster as an .asc grid + JSON manifest;
/// returns the manifest path.
std::string write_raster_files(const HabitatRaster& raster,
                               const std::string& dir,
                               const std::string& stem = "veg");

double chi2_quantile(double df, double p);

double rayleigh_cdf(double x, double scale);

/// Truncated gamma mean E[r | r >= lower] by quadrature (independent of the
/// sampler under test).
double truncated_gamma_mean(double shape, double rate, double lower);

/// Forward-algorithm oracle: enumerate all state sequences (log space).
double brute_force_hmm_loglik(std::span<const double> step_ll, int n_steps,
                              int n_states, std::span<const double> tpm,
                              std::span<const double> delta0);

/// Scratch directory under the system temp dir, unique per call.
std::string make_temp_dir(const std::string& tag);

}  // namespace locgibbs::testsupport
