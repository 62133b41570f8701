#include "locgibbs/habitat.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"
#include "locgibbs/errors.hpp"
#include "locgibbs/special.hpp"

namespace locgibbs {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

HabitatRaster::HabitatRaster(double origin_x, double origin_y,
                             double cell_size, int n_rows, int n_cols,
                             std::vector<RasterLayer> layers)
    : origin_x_(origin_x),
      origin_y_(origin_y),
      cell_size_(cell_size),
      n_rows_(n_rows),
      n_cols_(n_cols),
      layers_(std::move(layers)) {
  if (cell_size_ <= 0.0) throw ValidationError("raster: cell_size must be positive");
  if (n_rows_ <= 0 || n_cols_ <= 0) {
    throw ValidationError("raster: grid dimensions must be positive");
  }
  if (layers_.empty()) throw ValidationError("raster: needs at least one layer");
  const auto n = static_cast<std::size_t>(n_cells());
  for (const auto& l : layers_) {
    if (l.values.size() != n) {
      throw ValidationError("raster: layer '" + l.name + "' has " +
                            std::to_string(l.values.size()) + " cells, expected " +
                            std::to_string(n));
    }
  }
  // One-hot layers of each categorical covariate must sum to 1 per cell.
  std::map<int, std::vector<const RasterLayer*>> groups;
  for (const auto& l : layers_) {
    if (l.group >= 0) groups[l.group].push_back(&l);
  }
  for (const auto& [g, ls] : groups) {
    for (std::size_t c = 0; c < n; ++c) {
      double s = 0.0;
      for (const auto* l : ls) s += l->values[c];
      if (std::fabs(s - 1.0) > 1e-9) {
        throw ValidationError("raster: categorical group " + std::to_string(g) +
                              " does not sum to 1 in cell " + std::to_string(c));
      }
    }
  }
}

int HabitatRaster::layer_index(const std::string& name) const {
  for (int i = 0; i < n_layers(); ++i) {
    if (layers_[i].name == name) return i;
  }
  return -1;
}

std::optional<int> HabitatRaster::cell_of(Point p) const {
  const double fx = (p.x - origin_x_) / cell_size_;
  const double fy = (p.y - origin_y_) / cell_size_;
  if (fx < 0.0 || fy < 0.0 || fx > n_cols_ || fy > n_rows_) return std::nullopt;
  int cx = static_cast<int>(std::floor(fx));
  int cy = static_cast<int>(std::floor(fy));
  if (cx == n_cols_) --cx;
  if (cy == n_rows_) --cy;
  return cell_index(cy, cx);
}

Point HabitatRaster::cell_centre(int cell) const {
  const int row = cell / n_cols_;
  const int col = cell % n_cols_;
  return {origin_x_ + (col + 0.5) * cell_size_,
          origin_y_ + (row + 0.5) * cell_size_};
}

Point HabitatRaster::cell_lower_left(int cell) const {
  const int row = cell / n_cols_;
  const int col = cell % n_cols_;
  return {origin_x_ + col * cell_size_, origin_y_ + row * cell_size_};
}

bool HabitatRaster::single_categorical() const {
  if (layers_.empty()) return false;
  const int g = layers_.front().group;
  if (g < 0) return false;
  return std::all_of(layers_.begin(), layers_.end(),
                     [&](const RasterLayer& l) { return l.group == g; });
}

void RsfParams::validate(int n_layers) const {
  if (static_cast<int>(beta.size()) != n_layers) {
    throw ValidationError("rsf: beta has " + std::to_string(beta.size()) +
                          " entries for " + std::to_string(n_layers) + " layers");
  }
  for (int i : reference_indices) {
    if (i < 0 || i >= n_layers) {
      throw ValidationError("rsf: reference index out of range");
    }
    if (beta[i] != 0.0) {
      throw ValidationError("rsf: reference coefficient must be 0");
    }
  }
}

CovariateVector covariates_at(const HabitatRaster& raster, Point p) {
  const auto cell = raster.cell_of(p);
  if (!cell) return CovariateVector::make_outside();
  CovariateVector cv;
  cv.values.reserve(raster.n_layers());
  for (const auto& l : raster.layers()) cv.values.push_back(l.values[*cell]);
  return cv;
}

double log_w(const HabitatRaster& raster, const RsfParams& params, Point p) {
  params.validate(raster.n_layers());
  const auto cell = raster.cell_of(p);
  if (!cell) return -kInf;
  double s = 0.0;
  for (int i = 0; i < raster.n_layers(); ++i) {
    s += params.beta[i] * raster.layer(i).values[*cell];
  }
  return s;
}

double log_ud_normalizer(const HabitatRaster& raster, const RsfParams& params) {
  const LogWeightField field(raster, params);
  const double lse = log_sum_exp(field.cells());
  if (lse == -kInf) {
    throw NumericalError("ud_normalizer: target weight is zero everywhere");
  }
  return 2.0 * std::log(raster.cell_size()) + lse;
}

double ud_normalizer(const HabitatRaster& raster, const RsfParams& params) {
  return std::exp(log_ud_normalizer(raster, params));
}

std::vector<double> habitat_utilisation(const HabitatRaster& raster,
                                        const RsfParams& params) {
  params.validate(raster.n_layers());
  if (!raster.single_categorical()) {
    throw ValidationError(
        "habitat_utilisation: requires the one-hot layers of a single "
        "categorical covariate");
  }
  const double log_z = log_ud_normalizer(raster, params);
  std::vector<double> util(raster.n_layers());
  for (int i = 0; i < raster.n_layers(); ++i) {
    util[i] = std::exp(params.beta[i] - log_z);
  }
  return util;
}

const double LogWeightField::neg_inf_ = -kInf;

LogWeightField::LogWeightField(const HabitatRaster& raster,
                               const RsfParams& params)
    : raster_(&raster),
      x0_(raster.origin_x()),
      y0_(raster.origin_y()),
      inv_cs_(1.0 / raster.cell_size()),
      n_rows_(raster.n_rows()),
      n_cols_(raster.n_cols()) {
  params.validate(raster.n_layers());
  cell_log_w_.assign(raster.n_cells(), 0.0);
  for (int i = 0; i < raster.n_layers(); ++i) {
    const double b = params.beta[i];
    if (b == 0.0) continue;
    const auto& vals = raster.layer(i).values;
    for (int c = 0; c < raster.n_cells(); ++c) cell_log_w_[c] += b * vals[c];
  }
  max_log_w_ = *std::max_element(cell_log_w_.begin(), cell_log_w_.end());
}

// ---------------------------------------------------------------------------
// File input
// ---------------------------------------------------------------------------

AscGrid read_asc(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open raster file: " + path);
  AscGrid g;
  bool have_ncols = false, have_nrows = false, have_x = false, have_y = false,
       have_cs = false;
  std::string key;
  // Header: key/value pairs until the first purely numeric token.
  while (in >> key) {
    std::string lower(key);
    std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
    double v;
    if (lower == "ncols" || lower == "nrows" || lower == "xllcorner" ||
        lower == "yllcorner" || lower == "cellsize" || lower == "nodata_value") {
      if (!(in >> v)) throw IoError(path + ": malformed header value for " + key);
      if (lower == "ncols") { g.n_cols = static_cast<int>(v); have_ncols = true; }
      else if (lower == "nrows") { g.n_rows = static_cast<int>(v); have_nrows = true; }
      else if (lower == "xllcorner") { g.xllcorner = v; have_x = true; }
      else if (lower == "yllcorner") { g.yllcorner = v; have_y = true; }
      else if (lower == "cellsize") { g.cell_size = v; have_cs = true; }
      else g.nodata = v;
    } else if (lower == "xllcenter" || lower == "yllcenter") {
      throw IoError(path + ": cell-centre registered grids are not supported");
    } else {
      // First data token.
      break;
    }
  }
  if (!have_ncols || !have_nrows || !have_x || !have_y || !have_cs) {
    throw IoError(path + ": incomplete ESRI ASCII header");
  }
  if (g.n_cols <= 0 || g.n_rows <= 0 || g.cell_size <= 0.0) {
    throw IoError(path + ": invalid grid dimensions");
  }
  const std::size_t n = static_cast<std::size_t>(g.n_cols) * g.n_rows;
  std::vector<double> top_first;
  top_first.reserve(n);
  // `key` holds the first value token already.
  try {
    top_first.push_back(std::stod(key));
  } catch (const std::exception&) {
    throw IoError(path + ": unexpected token '" + key + "' in grid body");
  }
  double v;
  while (top_first.size() < n && in >> v) top_first.push_back(v);
  if (top_first.size() != n) {
    throw IoError(path + ": expected " + std::to_string(n) + " values, got " +
                  std::to_string(top_first.size()));
  }
  // Flip to row 0 = south.
  g.values.resize(n);
  for (int r = 0; r < g.n_rows; ++r) {
    for (int c = 0; c < g.n_cols; ++c) {
      g.values[static_cast<std::size_t>(g.n_rows - 1 - r) * g.n_cols + c] =
          top_first[static_cast<std::size_t>(r) * g.n_cols + c];
    }
  }
  return g;
}

namespace {

void check_geometry(const AscGrid& g, const AscGrid& ref,
                    const std::string& path) {
  if (g.n_rows != ref.n_rows || g.n_cols != ref.n_cols ||
      std::fabs(g.xllcorner - ref.xllcorner) > 1e-9 ||
      std::fabs(g.yllcorner - ref.yllcorner) > 1e-9 ||
      std::fabs(g.cell_size - ref.cell_size) > 1e-12) {
    throw IoError(path + ": grid geometry differs from the first layer");
  }
}

void check_no_nodata(const AscGrid& g, const std::string& path) {
  if (!g.nodata) return;
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    if (g.values[i] == *g.nodata) {
      throw IoError(path + ": NODATA cell at index " + std::to_string(i) +
                    "; missing covariates are not supported");
    }
  }
}

}  // namespace

HabitatRaster load_raster(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open raster manifest: " + manifest_path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(manifest_path + ": invalid JSON: " + e.what());
  }
  if (!doc.contains("layers") || !doc["layers"].is_array() ||
      doc["layers"].empty()) {
    throw IoError(manifest_path + ": manifest must list at least one layer");
  }
  const auto base = std::filesystem::path(manifest_path).parent_path();

  std::vector<RasterLayer> layers;
  std::optional<AscGrid> ref;
  int group = 0;
  for (const auto& spec : doc["layers"]) {
    for (const char* k : {"file", "type"}) {
      if (!spec.contains(k)) {
        throw IoError(manifest_path + ": layer entry missing '" + k + "'");
      }
    }
    const std::string file = spec["file"].get<std::string>();
    const std::string type = spec["type"].get<std::string>();
    const std::string name =
        spec.contains("name") ? spec["name"].get<std::string>()
                              : std::filesystem::path(file).stem().string();
    const std::string path = (base / file).string();
    AscGrid g = read_asc(path);
    check_no_nodata(g, path);
    if (!ref) ref = g;
    else check_geometry(g, *ref, path);

    if (type == "continuous") {
      layers.push_back({name, -1, std::move(g.values)});
    } else if (type == "categorical") {
      if (!spec.contains("categories") || !spec["categories"].is_array() ||
          spec["categories"].empty()) {
        throw IoError(manifest_path + ": categorical layer '" + name +
                      "' needs a non-empty 'categories' array");
      }
      std::vector<std::pair<double, std::string>> cats;
      for (const auto& c : spec["categories"]) {
        cats.emplace_back(c.at("code").get<double>(),
                          c.at("name").get<std::string>());
      }
      // One indicator layer per declared category.
      std::vector<RasterLayer> expanded;
      expanded.reserve(cats.size());
      for (const auto& [code, cname] : cats) {
        expanded.push_back({name + ":" + cname, group,
                            std::vector<double>(g.values.size(), 0.0)});
      }
      for (std::size_t i = 0; i < g.values.size(); ++i) {
        bool matched = false;
        for (std::size_t k = 0; k < cats.size(); ++k) {
          if (g.values[i] == cats[k].first) {
            expanded[k].values[i] = 1.0;
            matched = true;
            break;
          }
        }
        if (!matched) {
          throw IoError(path + ": cell " + std::to_string(i) + " has code " +
                        std::to_string(g.values[i]) +
                        " not declared in the manifest");
        }
      }
      for (auto& l : expanded) layers.push_back(std::move(l));
      ++group;
    } else {
      throw IoError(manifest_path + ": layer type must be 'continuous' or "
                    "'categorical', got '" + type + "'");
    }
  }
  return HabitatRaster(ref->xllcorner, ref->yllcorner, ref->cell_size,
                       ref->n_rows, ref->n_cols, std::move(layers));
}

}  // namespace locgibbs
