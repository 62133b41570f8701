#include "test_util.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "locgibbs/special.hpp"
#include "quad_oracle.hpp"

namespace locgibbs::testsupport {

HabitatRaster flat_raster(int n_rows, int n_cols, double cell_size,
                          double origin_x, double origin_y) {
  RasterLayer layer{"habitat:flat", 0,
                    std::vector<double>(static_cast<std::size_t>(n_rows) * n_cols, 1.0)};
  return HabitatRaster(origin_x, origin_y, cell_size, n_rows, n_cols, {layer});
}

HabitatRaster half_and_half_raster(int n_rows, int n_cols, double cell_size) {
  const std::size_t n = static_cast<std::size_t>(n_rows) * n_cols;
  RasterLayer open{"habitat:open", 0, std::vector<double>(n, 0.0)};
  RasterLayer wood{"habitat:wood", 0, std::vector<double>(n, 0.0)};
  for (int r = 0; r < n_rows; ++r) {
    for (int c = 0; c < n_cols; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * n_cols + c;
      if (c < n_cols / 2) open.values[i] = 1.0;
      else wood.values[i] = 1.0;
    }
  }
  return HabitatRaster(0.0, 0.0, cell_size, n_rows, n_cols, {open, wood});
}

HabitatRaster landscape_raster(const LandscapeSpec& spec) {
  const int R = spec.n_rows, C = spec.n_cols;
  const std::size_t n = static_cast<std::size_t>(R) * C;
  std::vector<double> noise(n);
  Rng rng(spec.seed);
  for (auto& v : noise) v = rng.next_u01();

  // Box blur with edge clamping.
  std::vector<double> tmp(n);
  for (int pass = 0; pass < spec.blur_passes; ++pass) {
    for (int r = 0; r < R; ++r) {
      for (int c = 0; c < C; ++c) {
        double s = 0.0;
        int cnt = 0;
        for (int dc = -spec.blur_radius; dc <= spec.blur_radius; ++dc) {
          const int cc = std::clamp(c + dc, 0, C - 1);
          s += noise[static_cast<std::size_t>(r) * C + cc];
          ++cnt;
        }
        tmp[static_cast<std::size_t>(r) * C + c] = s / cnt;
      }
    }
    for (int c = 0; c < C; ++c) {
      for (int r = 0; r < R; ++r) {
        double s = 0.0;
        int cnt = 0;
        for (int dr = -spec.blur_radius; dr <= spec.blur_radius; ++dr) {
          const int rr = std::clamp(r + dr, 0, R - 1);
          s += tmp[static_cast<std::size_t>(rr) * C + c];
          ++cnt;
        }
        noise[static_cast<std::size_t>(r) * C + c] = s / cnt;
      }
    }
  }

  // Rank cut at cumulative shares.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return noise[a] < noise[b]; });
  const int k = static_cast<int>(spec.shares.size());
  std::vector<int> cat(n, k - 1);
  std::size_t pos = 0;
  double cum = 0.0;
  for (int g = 0; g < k; ++g) {
    cum += spec.shares[g];
    const std::size_t until =
        (g == k - 1) ? n : static_cast<std::size_t>(std::llround(cum * n));
    for (; pos < until && pos < n; ++pos) cat[order[pos]] = g;
  }

  std::vector<RasterLayer> layers;
  for (int g = 0; g < k; ++g) {
    layers.push_back({"vegetation:" + spec.names[g], 0,
                      std::vector<double>(n, 0.0)});
  }
  for (std::size_t i = 0; i < n; ++i) layers[cat[i]].values[i] = 1.0;
  return HabitatRaster(0.0, 0.0, spec.cell_size, R, C, std::move(layers));
}

std::vector<int> category_codes(const HabitatRaster& raster) {
  if (!raster.single_categorical()) {
    throw std::runtime_error("category_codes: raster is not single-categorical");
  }
  std::vector<int> codes(raster.n_cells(), 0);
  for (int c = 0; c < raster.n_cells(); ++c) {
    for (int l = 0; l < raster.n_layers(); ++l) {
      if (raster.layer(l).values[c] == 1.0) {
        codes[c] = l + 1;
        break;
      }
    }
  }
  return codes;
}

std::string write_raster_files(const HabitatRaster& raster,
                               const std::string& dir,
                               const std::string& stem) {
  const auto codes = category_codes(raster);
  std::filesystem::create_directories(dir);
  const std::string asc_path = dir + "/" + stem + ".asc";
  {
    std::ofstream out(asc_path);
    out << "ncols " << raster.n_cols() << "\n";
    out << "nrows " << raster.n_rows() << "\n";
    out << "xllcorner " << raster.origin_x() << "\n";
    out << "yllcorner " << raster.origin_y() << "\n";
    out << "cellsize " << raster.cell_size() << "\n";
    out << "NODATA_value -9999\n";
    for (int r = raster.n_rows() - 1; r >= 0; --r) {  // top row first
      for (int c = 0; c < raster.n_cols(); ++c) {
        out << codes[raster.cell_index(r, c)];
        out << (c + 1 == raster.n_cols() ? '\n' : ' ');
      }
    }
  }
  const std::string manifest_path = dir + "/" + stem + "_manifest.json";
  {
    std::ofstream out(manifest_path);
    out << "{\n  \"format_version\": 1,\n  \"layers\": [\n    {\n"
        << "      \"file\": \"" << stem << ".asc\",\n"
        << "      \"name\": \"" << raster.layer(0).name.substr(0, raster.layer(0).name.find(':'))
        << "\",\n      \"type\": \"categorical\",\n      \"categories\": [\n";
    for (int l = 0; l < raster.n_layers(); ++l) {
      const auto& name = raster.layer(l).name;
      const auto cat = name.substr(name.find(':') + 1);
      out << "        {\"code\": " << (l + 1) << ", \"name\": \"" << cat
          << "\"}" << (l + 1 == raster.n_layers() ? "\n" : ",\n");
    }
    out << "      ]\n    }\n  ]\n}\n";
  }
  return manifest_path;
}

double chi2_quantile(double df, double p) {
  return gamma_quantile(p, 0.5 * df, 0.5);
}

double rayleigh_cdf(double x, double scale) {
  if (x <= 0.0) return 0.0;
  return 1.0 - std::exp(-x * x / (2.0 * scale * scale));
}

double truncated_gamma_mean(double shape, double rate, double lower) {
  const double q_lower = gamma_q(shape, rate * lower);
  const double upper = gamma_quantile_upper(1e-14, shape, rate);
  const GaussLegendre gl(400, lower, upper);
  double num = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    num += gl.weights[i] * gl.nodes[i] *
           std::exp(gamma_logpdf(gl.nodes[i], shape, rate));
  }
  return num / q_lower;
}

double brute_force_hmm_loglik(std::span<const double> step_ll, int n_steps,
                              int n_states, std::span<const double> tpm,
                              std::span<const double> delta0) {
  long total = 1;
  for (int k = 0; k < n_steps; ++k) total *= n_states;
  std::vector<double> seq_ll;
  seq_ll.reserve(total);
  std::vector<int> s(n_steps, 0);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (int k = 0; k < n_steps; ++k) {
      s[k] = static_cast<int>(rem % n_states);
      rem /= n_states;
    }
    double ll = std::log(delta0[s[0]]) + step_ll[s[0]];
    for (int k = 1; k < n_steps; ++k) {
      ll += std::log(tpm[s[k - 1] * n_states + s[k]]) +
            step_ll[static_cast<std::size_t>(k) * n_states + s[k]];
    }
    seq_ll.push_back(ll);
  }
  return log_sum_exp(seq_ll);
}

std::string make_temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto dir = std::filesystem::temp_directory_path() /
                   ("locgibbs_test_" + tag + "_" +
                    std::to_string(counter.fetch_add(1)) + "_" +
                    std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace locgibbs::testsupport
