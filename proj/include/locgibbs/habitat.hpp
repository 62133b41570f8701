#pragma once

#include <optional>
#include <string>
#include <vector>

#include "locgibbs/geom.hpp"

namespace locgibbs {

/// Covariates of one location, or Outside when the point falls off the map.
struct CovariateVector {
  bool outside = false;
  std::vector<double> values;

  static CovariateVector make_outside() { return {true, {}}; }
};

/// One covariate grid. Categorical covariates are expanded at load time into
/// one indicator layer per category; `group` identifies the parent covariate
/// (-1 for continuous layers).
struct RasterLayer {
  std::string name;
  int group = -1;
  std::vector<double> values;  // row-major, row 0 = southernmost row
};

/// Gridded covariate layers over the study region. The region is the
/// bounding rectangle; queries outside it return Outside. Immutable after
/// construction; all queries are safe to call concurrently.
class HabitatRaster {
 public:
  HabitatRaster(double origin_x, double origin_y, double cell_size,
                int n_rows, int n_cols, std::vector<RasterLayer> layers);

  double origin_x() const { return origin_x_; }
  double origin_y() const { return origin_y_; }
  double cell_size() const { return cell_size_; }
  int n_rows() const { return n_rows_; }
  int n_cols() const { return n_cols_; }
  int n_cells() const { return n_rows_ * n_cols_; }
  int n_layers() const { return static_cast<int>(layers_.size()); }
  double width() const { return n_cols_ * cell_size_; }
  double height() const { return n_rows_ * cell_size_; }

  const std::vector<RasterLayer>& layers() const { return layers_; }
  const RasterLayer& layer(int i) const { return layers_[i]; }
  int layer_index(const std::string& name) const;  // -1 if absent

  /// Cell containing p (floor division; points exactly on the upper/right
  /// boundary belong to the last cell). nullopt outside the rectangle.
  std::optional<int> cell_of(Point p) const;
  int cell_index(int row, int col) const { return row * n_cols_ + col; }
  Point cell_centre(int cell) const;
  Point cell_lower_left(int cell) const;

  /// True if every layer is a categorical indicator and they belong to a
  /// single categorical covariate.
  bool single_categorical() const;

 private:
  double origin_x_, origin_y_, cell_size_;
  int n_rows_, n_cols_;
  std::vector<RasterLayer> layers_;
};

/// Selection coefficients, one per raster layer. Coefficients of reference
/// layers are structurally fixed to zero.
struct RsfParams {
  std::vector<double> beta;
  std::vector<int> reference_indices;

  void validate(int n_layers) const;
};

CovariateVector covariates_at(const HabitatRaster& raster, Point p);

/// log w(c(p)) = sum_i beta_i c_i(p); -inf outside the region.
double log_w(const HabitatRaster& raster, const RsfParams& params, Point p);

/// log of integral_region w(c(y)) dy, computed exactly as
/// cell_size^2 * sum over cells of w (w is piecewise constant per cell).
double log_ud_normalizer(const HabitatRaster& raster, const RsfParams& params);
double ud_normalizer(const HabitatRaster& raster, const RsfParams& params);

/// Per-category utilisation values exp(beta_i)/normalizer. Requires a raster
/// whose layers are the one-hot expansion of a single categorical covariate.
std::vector<double> habitat_utilisation(const HabitatRaster& raster,
                                        const RsfParams& params);

/// Precomputed per-cell log w. The hot-path weight lookup used by the
/// simulator and the likelihood.
class LogWeightField {
 public:
  LogWeightField(const HabitatRaster& raster, const RsfParams& params);

  /// -inf outside the region.
  double at(Point p) const {
    const double fx = (p.x - x0_) * inv_cs_;
    const double fy = (p.y - y0_) * inv_cs_;
    if (fx < 0.0 || fy < 0.0 || fx > n_cols_ || fy > n_rows_) {
      return neg_inf_;
    }
    int cx = static_cast<int>(fx);
    int cy = static_cast<int>(fy);
    if (cx == n_cols_) --cx;  // right boundary belongs to the last cell
    if (cy == n_rows_) --cy;
    return cell_log_w_[cy * n_cols_ + cx];
  }

  double at_cell(int cell) const { return cell_log_w_[cell]; }
  const std::vector<double>& cells() const { return cell_log_w_; }
  const HabitatRaster& raster() const { return *raster_; }
  double max_log_w() const { return max_log_w_; }

 private:
  const HabitatRaster* raster_;
  double x0_, y0_, inv_cs_;
  int n_rows_, n_cols_;
  double max_log_w_;
  static const double neg_inf_;
  std::vector<double> cell_log_w_;
};

/// Load a raster from a manifest (JSON): layer files, continuous/categorical
/// declarations, category code -> name lists. Paths resolve relative to the
/// manifest's directory.
HabitatRaster load_raster(const std::string& manifest_path);

/// Parse one ESRI ASCII grid. Values are returned row-major with row 0 the
/// southernmost row (the file stores the top row first).
struct AscGrid {
  int n_rows = 0, n_cols = 0;
  double xllcorner = 0.0, yllcorner = 0.0, cell_size = 0.0;
  std::optional<double> nodata;
  std::vector<double> values;
};
AscGrid read_asc(const std::string& path);

}  // namespace locgibbs
