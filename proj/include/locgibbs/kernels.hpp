#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "locgibbs/geom.hpp"
#include "locgibbs/rng.hpp"

namespace locgibbs {

/// Movement-parameter variants of the symmetric transition density.
struct NormalKernel {
  double sigma;  // km
};
struct FixedRadiusKernel {
  double radius;  // km
};
struct GammaRadiusKernel {
  double shape;
  double rate;  // per km
};

using KernelSpec = std::variant<NormalKernel, FixedRadiusKernel, GammaRadiusKernel>;

void validate(const KernelSpec& k);
const char* kernel_family_name(const KernelSpec& k);

/// A Latin hypercube block: `count` points in (0,1)^dims with exactly one
/// point per margin stratum [k/count, (k+1)/count).
struct LhsBlock {
  int count = 0;
  int dims = 0;
  std::vector<double> u;  // row-major: u[point * dims + dim]

  double at(int point, int dim) const { return u[point * dims + dim]; }
};

/// Deterministic given the seed; set lhs=false for plain iid uniforms.
LhsBlock lhs_uniform(int count, int dims, std::uint64_t seed, bool lhs = true);

/// x + sigma * (Phi^-1(u1), Phi^-1(u2)); exactly x at u = (0.5, 0.5).
Point sample_normal_step(Point x, double sigma, double u1, double u2);

/// Circular bivariate normal density centred on `centre`, per km^2.
double normal_density(Point y, Point centre, double sigma);
double log_normal_density(Point y, Point centre, double sigma);

/// Quantile draw from gamma(shape, rate) truncated to [lower, inf):
/// F^-1[F(lower) + u (1 - F(lower))]. Throws NumericalError if the upper
/// tail mass at `lower` underflows (a numerically impossible step).
double sample_radius_truncated(double shape, double rate, double lower,
                               double u);

/// Area of the intersection of two discs of radius r whose centres are a
/// distance d apart: 2 r^2 acos(d/2r) - (d/2) sqrt(4r^2 - d^2) for d < 2r,
/// 0 beyond, pi r^2 at d = 0.
double lens_area(double d, double r);

/// Uniform draw on the disc of radius r: l ~ U(0, r^2), theta ~ U(-pi, pi),
/// centre + sqrt(l) (cos theta, sin theta).
Point sample_disc_uniform(Point centre, double r, double u1, double u2);

/// Uniform stream consumed by rejection samplers: an optional stratified
/// prefix followed by an unstratified tail.
class UniformStream {
 public:
  UniformStream(std::span<const double> prefix, Rng tail)
      : prefix_(prefix), tail_(tail) {}
  explicit UniformStream(Rng tail) : tail_(tail) {}

  double next() {
    if (pos_ < prefix_.size()) return prefix_[pos_++];
    return tail_.next_u01();
  }

 private:
  std::span<const double> prefix_;
  std::size_t pos_ = 0;
  Rng tail_{0};
};

/// Uniform draw on the lens D_r(a) intersect D_r(b): proposals uniform on
/// the smallest enclosing rectangle (scaled unit square, rotated to the step
/// direction, translated to the midpoint), rejected if farther than r from
/// either centre. Requires |b - a| < 2r.
Point sample_lens_uniform(Point a, Point b, double r, UniformStream& u,
                          long max_proposals = 1000000);

/// Pre-generated base uniforms for one likelihood/optimization run,
/// addressed by (step index, sample layer, nesting indices). Values are
/// derived deterministically from the seed, so the object is just a handle:
/// slices can be regenerated on demand and two handles with equal seeds give
/// identical samples.
class BaseSamples {
 public:
  explicit BaseSamples(std::uint64_t seed, bool lhs = true)
      : seed_(seed), lhs_(lhs) {}

  std::uint64_t seed() const { return seed_; }
  bool lhs() const { return lhs_; }

  /// Radius layer: n stratified uniforms for step t.
  LhsBlock radii(long t, int n) const;
  /// Centre layer: n (u1,u2) pairs for step t, radius slot i (0 when the
  /// kernel has no radius layer).
  LhsBlock centres(long t, int i, int n) const;
  /// Overflow stream for rejection proposals past the stratified prefix.
  Rng centre_overflow(long t, int i, int j) const;
  /// Endpoint layer: n (u1,u2) pairs for step t, radius slot i, centre j.
  LhsBlock endpoints(long t, int i, int j, int n) const;

 private:
  std::uint64_t seed_;
  bool lhs_;
};

}  // namespace locgibbs
