#include "locgibbs/io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "locgibbs/errors.hpp"
#include "locgibbs/version.hpp"

namespace locgibbs {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t") == std::string::npos;
}

}  // namespace

Track read_track_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open track file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty file");
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "t" || header[1] != "x" ||
      header[2] != "y") {
    throw IoError(path + ": expected header t,x,y[,state]");
  }
  Track track;
  long prev_t = 0;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const auto f = split_csv_line(line);
    if (f.size() < 3) {
      throw IoError(path + ":" + std::to_string(lineno) + ": too few fields");
    }
    long t;
    try {
      t = std::stol(f[0]);
    } catch (const std::exception&) {
      throw IoError(path + ":" + std::to_string(lineno) + ": bad time index");
    }
    if (t <= prev_t) {
      throw IoError(path + ":" + std::to_string(lineno) +
                    ": time indices must be strictly increasing");
    }
    while (prev_t + 1 < t) {
      track.points.emplace_back(std::nullopt);
      ++prev_t;
    }
    if (blank(f[1]) != blank(f[2])) {
      throw IoError(path + ":" + std::to_string(lineno) +
                    ": x and y must be both present or both empty");
    }
    if (blank(f[1])) {
      track.points.emplace_back(std::nullopt);
    } else {
      try {
        track.points.emplace_back(Point{std::stod(f[1]), std::stod(f[2])});
      } catch (const std::exception&) {
        throw IoError(path + ":" + std::to_string(lineno) + ": bad coordinate");
      }
    }
    prev_t = t;
  }
  track.validate();
  return track;
}

void write_track_csv(const std::string& path, const Track& track,
                     const std::vector<int>* states) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write track file: " + path);
  out << "t,x,y,state\n";
  out.precision(10);
  for (std::size_t i = 0; i < track.points.size(); ++i) {
    out << (i + 1) << ',';
    if (track.points[i]) {
      out << track.points[i]->x << ',' << track.points[i]->y;
    } else {
      out << ',';
    }
    out << ',';
    if (states && i < states->size()) out << (*states)[i] + 1;  // 1-based
    out << '\n';
  }
}

namespace {

nlohmann::json kernel_to_json(const KernelSpec& k) {
  nlohmann::json j;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, NormalKernel>) {
          j["sigma"] = v.sigma;
        } else if constexpr (std::is_same_v<T, FixedRadiusKernel>) {
          j["radius"] = v.radius;
        } else {
          j["alpha"] = v.shape;
          j["rho"] = v.rate;
        }
      },
      k);
  return j;
}

KernelSpec kernel_from_json(KernelFamily f, const nlohmann::json& j) {
  switch (f) {
    case KernelFamily::kNormal:
      return NormalKernel{j.at("sigma").get<double>()};
    case KernelFamily::kFixedRadius:
      return FixedRadiusKernel{j.at("radius").get<double>()};
    case KernelFamily::kGammaRadius:
      return GammaRadiusKernel{j.at("alpha").get<double>(),
                               j.at("rho").get<double>()};
  }
  throw ValidationError("bad kernel family");
}

nlohmann::json mc_to_json(const McConfig& mc) {
  return {{"nc", mc.n_c},
          {"nz", mc.n_z},
          {"nr", mc.n_r},
          {"seed", mc.seed},
          {"lhs", mc.lhs}};
}

McConfig mc_from_json(const nlohmann::json& j) {
  McConfig mc;
  mc.n_c = j.at("nc").get<int>();
  mc.n_z = j.at("nz").get<int>();
  mc.n_r = j.at("nr").get<int>();
  mc.seed = j.at("seed").get<std::uint64_t>();
  mc.lhs = j.at("lhs").get<bool>();
  return mc;
}

}  // namespace

std::string fit_report_json(const FitResult& fit) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["tool_version"] = kVersion;
  j["model"] = {{"kernel", kernel_family_to_name(fit.model.family)},
                {"states", fit.model.n_states}};
  j["layers"] = fit.layer_names;
  j["reference_indices"] = fit.reference_indices;

  nlohmann::json est = nlohmann::json::object();
  nlohmann::json se = nlohmann::json::object();
  nlohmann::json ci = nlohmann::json::object();
  for (std::size_t i = 0; i < fit.param_names.size(); ++i) {
    const auto& name = fit.param_names[i];
    est[name] = fit.natural_value(static_cast<int>(i));
    if (fit.se_available) {
      se[name] = fit.se_working[i];
      ci[name] = {fit.ci_lo[i], fit.ci_hi[i]};
    }
  }
  // Full natural-scale beta (including reference zeros) and transition matrix.
  est["beta"] = fit.params.rsf.beta;
  if (fit.model.n_states > 1) {
    est["tpm"] = fit.params.hmm.tpm;
    est["delta0"] = fit.params.hmm.delta0;
  }
  nlohmann::json kernels = nlohmann::json::array();
  for (const auto& k : fit.params.hmm.kernels) kernels.push_back(kernel_to_json(k));
  est["kernels"] = kernels;

  j["estimates"] = est;
  if (fit.se_available) {
    j["se"] = se;  // working scale (log scale for positive parameters)
    j["ci95"] = ci;
    j["se_stabilized"] = fit.se_stabilized;
    j["hessian_rounds"] = fit.hessian_rounds;
    j["mc_hessian"] = mc_to_json(fit.mc_hessian);
  }
  j["loglik"] = fit.loglik;
  j["mc"] = mc_to_json(fit.mc);
  j["starts"] = fit.starts;
  j["seed"] = fit.seed;
  j["best_start"] = fit.best_start;
  nlohmann::json conv = nlohmann::json::array();
  for (const auto& t : fit.trace) {
    conv.push_back({{"start", t.start},
                    {"converged", t.converged},
                    {"failed", t.failed},
                    {"error", t.error},
                    {"loglik", t.loglik},
                    {"iterations", t.iterations},
                    {"evals", t.evals},
                    {"samples_seed", t.samples_seed}});
  }
  j["convergence"] = conv;
  return j.dump(2);
}

void write_fit_report(const std::string& path, const FitResult& fit) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write fit report: " + path);
  out << fit_report_json(fit) << '\n';
}

LoadedFit read_fit_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open fit report: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": invalid JSON: " + e.what());
  }
  LoadedFit lf;
  try {
    lf.model.family =
        kernel_family_from_name(j.at("model").at("kernel").get<std::string>());
    lf.model.n_states = j.at("model").at("states").get<int>();
    lf.layer_names = j.at("layers").get<std::vector<std::string>>();
    lf.reference_indices = j.at("reference_indices").get<std::vector<int>>();
    lf.loglik = j.at("loglik").get<double>();
    lf.mc = mc_from_json(j.at("mc"));
    const auto& est = j.at("estimates");
    lf.params.rsf.beta = est.at("beta").get<std::vector<double>>();
    lf.params.rsf.reference_indices = lf.reference_indices;
    lf.params.hmm.n_states = lf.model.n_states;
    for (const auto& k : est.at("kernels")) {
      lf.params.hmm.kernels.push_back(kernel_from_json(lf.model.family, k));
    }
    if (lf.model.n_states > 1) {
      lf.params.hmm.tpm = est.at("tpm").get<std::vector<double>>();
      lf.params.hmm.delta0 = est.at("delta0").get<std::vector<double>>();
    } else {
      lf.params.hmm.tpm = {1.0};
      lf.params.hmm.delta0 = {1.0};
    }
    lf.params.hmm.validate();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": malformed fit report: " + e.what());
  }
  return lf;
}

std::string fit_table(const FitResult& fit) {
  std::ostringstream out;
  std::size_t width = 9;
  for (const auto& n : fit.param_names) width = std::max(width, n.size());
  out << "parameter";
  for (std::size_t i = 9; i < width; ++i) out << ' ';
  out << "  estimate (95% CI)\n";
  for (std::size_t i = 0; i < fit.param_names.size(); ++i) {
    out << fit.param_names[i];
    for (std::size_t k = fit.param_names[i].size(); k < width; ++k) out << ' ';
    out << "  ";
    if (fit.se_available) {
      out << format_ci(fit.natural_value(static_cast<int>(i)), fit.ci_lo[i],
                       fit.ci_hi[i]);
    } else {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.2f", fit.natural_value(static_cast<int>(i)));
      out << buf;
    }
    out << '\n';
  }
  for (int i : fit.reference_indices) {
    out << "beta[" << fit.layer_names[i] << "]";
    for (std::size_t k = 5 + fit.layer_names[i].size() + 1; k < width; ++k) {
      out << ' ';
    }
    out << "  0 (reference)\n";
  }
  return out.str();
}

}  // namespace locgibbs
