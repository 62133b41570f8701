#pragma once

#include <optional>
#include <string>
#include <vector>

#include "locgibbs/inference.hpp"
#include "locgibbs/simulator.hpp"

namespace locgibbs {

/// Track CSV: header `t,x,y,state`; x and y empty for missing locations,
/// state empty when there is none. Time indices must be strictly increasing;
/// skipped indices are materialized as missing rows.
Track read_track_csv(const std::string& path);
void write_track_csv(const std::string& path, const Track& track,
                     const std::vector<int>* states = nullptr);

/// Fit report (JSON): model, estimates, se, ci95, loglik, mc, starts, seed,
/// convergence trace. Round-trips through read_fit_report.
std::string fit_report_json(const FitResult& fit);
void write_fit_report(const std::string& path, const FitResult& fit);

/// The subset of a report needed to evaluate the fitted model again.
struct LoadedFit {
  ModelSpec model;
  ModelParams params;
  McConfig mc;
  std::vector<std::string> layer_names;
  std::vector<int> reference_indices;
  double loglik = 0.0;
};
LoadedFit read_fit_report(const std::string& path);

/// Human-readable estimate table ("2.74 (2.54,2.94)" style).
std::string fit_table(const FitResult& fit);

}  // namespace locgibbs
