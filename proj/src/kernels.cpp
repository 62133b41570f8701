#include "locgibbs/kernels.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "locgibbs/errors.hpp"
#include "locgibbs/special.hpp"

namespace locgibbs {

namespace {
constexpr double kPi = std::numbers::pi;

// Sample-layer tags for seed derivation.
constexpr std::uint64_t kLayerRadius = 0x11;
constexpr std::uint64_t kLayerCentre = 0x22;
constexpr std::uint64_t kLayerCentreOverflow = 0x33;
constexpr std::uint64_t kLayerEndpoint = 0x44;
}  // namespace

void validate(const KernelSpec& k) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, NormalKernel>) {
          if (!(v.sigma > 0.0)) throw ValidationError("kernel: sigma must be positive");
        } else if constexpr (std::is_same_v<T, FixedRadiusKernel>) {
          if (!(v.radius > 0.0)) throw ValidationError("kernel: radius must be positive");
        } else {
          if (!(v.shape > 0.0) || !(v.rate > 0.0)) {
            throw ValidationError("kernel: gamma shape and rate must be positive");
          }
        }
      },
      k);
}

const char* kernel_family_name(const KernelSpec& k) {
  if (std::holds_alternative<NormalKernel>(k)) return "normal";
  if (std::holds_alternative<FixedRadiusKernel>(k)) return "fixed-radius";
  return "gamma-radius";
}

LhsBlock lhs_uniform(int count, int dims, std::uint64_t seed, bool lhs) {
  if (count < 1 || dims < 1) {
    throw ValidationError("lhs_uniform: count and dims must be >= 1");
  }
  LhsBlock b;
  b.count = count;
  b.dims = dims;
  b.u.resize(static_cast<std::size_t>(count) * dims);
  Rng rng(seed);
  if (!lhs) {
    for (auto& x : b.u) x = rng.next_u01();
    return b;
  }
  for (int d = 0; d < dims; ++d) {
    const auto perm = rng.permutation(static_cast<std::uint32_t>(count));
    for (int k = 0; k < count; ++k) {
      b.u[static_cast<std::size_t>(k) * dims + d] =
          (perm[k] + rng.next_u01()) / count;
    }
  }
  return b;
}

Point sample_normal_step(Point x, double sigma, double u1, double u2) {
  return {x.x + sigma * norm_quantile(u1), x.y + sigma * norm_quantile(u2)};
}

double log_normal_density(Point y, Point centre, double sigma) {
  const double s2 = sigma * sigma;
  return -std::log(2.0 * kPi * s2) - squared_norm(y - centre) / (2.0 * s2);
}

double normal_density(Point y, Point centre, double sigma) {
  return std::exp(log_normal_density(y, centre, sigma));
}

double sample_radius_truncated(double shape, double rate, double lower,
                               double u) {
  if (lower < 0.0) throw ValidationError("sample_radius_truncated: lower < 0");
  if (lower == 0.0 && u == 0.0) return 0.0;
  const double q_lower = (lower == 0.0) ? 1.0 : gamma_q(shape, rate * lower);
  if (q_lower <= 0.0) {
    throw NumericalError(
        "sample_radius_truncated: upper tail mass underflows at lower bound " +
        std::to_string(lower) + "; step is numerically impossible");
  }
  // Solving in the upper tail keeps precision when q_lower is small:
  // Q(r) = (1-u) Q(lower) is the same draw as F^-1[F(lower)+u(1-F(lower))].
  const double q_target = (1.0 - u) * q_lower;
  if (q_target <= 0.0) {
    throw NumericalError("sample_radius_truncated: quantile target underflows");
  }
  const double r = gamma_quantile_upper(q_target, shape, rate);
  return std::max(r, lower);
}

double lens_area(double d, double r) {
  if (!(r > 0.0)) throw ValidationError("lens_area: radius must be positive");
  if (d < 0.0) throw ValidationError("lens_area: distance must be >= 0");
  if (d == 0.0) return kPi * r * r;
  if (d >= 2.0 * r) return 0.0;
  const double disc = std::max(0.0, 4.0 * r * r - d * d);
  return 2.0 * r * r * std::acos(d / (2.0 * r)) - 0.5 * d * std::sqrt(disc);
}

Point sample_disc_uniform(Point centre, double r, double u1, double u2) {
  const double l = u1 * r * r;
  const double theta = -kPi + u2 * 2.0 * kPi;
  const double s = std::sqrt(l);
  return {centre.x + s * std::cos(theta), centre.y + s * std::sin(theta)};
}

Point sample_lens_uniform(Point a, Point b, double r, UniformStream& u,
                          long max_proposals) {
  const double d = distance(a, b);
  if (!(d < 2.0 * r)) {
    throw ValidationError("sample_lens_uniform: centres are 2r or more apart");
  }
  const double half_w = 0.5 * (2.0 * r - d);
  const double half_h = std::sqrt(r * r - 0.25 * d * d);
  const double rot = std::atan2(b.y - a.y, b.x - a.x);
  const double mx = 0.5 * (a.x + b.x);
  const double my = 0.5 * (a.y + b.y);
  const double r2 = r * r;
  for (long k = 0; k < max_proposals; ++k) {
    const double ux = 2.0 * half_w * (u.next() - 0.5);
    const double uy = 2.0 * half_h * (u.next() - 0.5);
    const double l = std::sqrt(ux * ux + uy * uy);
    const double theta = std::atan2(uy, ux) + rot;
    const Point p{l * std::cos(theta) + mx, l * std::sin(theta) + my};
    if (squared_norm(p - a) <= r2 && squared_norm(p - b) <= r2) return p;
  }
  throw NumericalError("sample_lens_uniform: proposal cap exceeded");
}

LhsBlock BaseSamples::radii(long t, int n) const {
  return lhs_uniform(n, 1,
                     mix_seed({seed_, static_cast<std::uint64_t>(t), kLayerRadius}),
                     lhs_);
}

LhsBlock BaseSamples::centres(long t, int i, int n) const {
  return lhs_uniform(
      n, 2,
      mix_seed({seed_, static_cast<std::uint64_t>(t), kLayerCentre,
                static_cast<std::uint64_t>(i)}),
      lhs_);
}

Rng BaseSamples::centre_overflow(long t, int i, int j) const {
  return Rng(mix_seed({seed_, static_cast<std::uint64_t>(t),
                       kLayerCentreOverflow, static_cast<std::uint64_t>(i),
                       static_cast<std::uint64_t>(j)}));
}

LhsBlock BaseSamples::endpoints(long t, int i, int j, int n) const {
  return lhs_uniform(
      n, 2,
      mix_seed({seed_, static_cast<std::uint64_t>(t), kLayerEndpoint,
                static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)}),
      lhs_);
}

}  // namespace locgibbs
