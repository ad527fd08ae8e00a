#include "synthctl/random.hpp"

#include <cmath>
#include <string>

namespace synthctl {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(mix(seed, stream_id)) {}

RngStream RngStream::substream(std::uint64_t key) const {
  return RngStream(seed_, mix(stream_id_, key));
}

double RngStream::uniform() {
  // 53 random bits, shifted half a step so 0 and 1 are never returned.
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) throw InputError("below(0) is empty");
  // Lemire-style rejection to avoid modulo bias.
  const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

double RngStream::gamma(double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw InputError("gamma shape must be positive");
  if (shape < 1.0) {
    // Boost: Gamma(a) = Gamma(a + 1) * U^{1/a}.
    const double g = gamma(shape + 1.0);
    return g * std::pow(uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double draw_normal(double mean, double variance, RngStream& rng) {
  if (!(variance > 0.0) || !std::isfinite(variance) || !std::isfinite(mean))
    throw InputError("normal variance must be finite and positive");
  return mean + std::sqrt(variance) * rng.normal();
}

double draw_inverse_gamma(double shape, double scale, RngStream& rng) {
  if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) || !std::isfinite(scale))
    throw InputError("inverse gamma needs shape > 0 and scale > 0 (got shape=" +
                     std::to_string(shape) + ", scale=" + std::to_string(scale) + ")");
  return scale / rng.gamma(shape);
}

bool draw_bernoulli(double p, RngStream& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("bernoulli probability must lie in [0, 1]");
  if (p == 0.0) return false;
  if (p == 1.0) return true;
  return rng.uniform() < p;
}

double draw_student_t(double dof, RngStream& rng) {
  if (!(dof > 0.0) || !std::isfinite(dof)) throw InputError("student-t degrees of freedom must be positive");
  // t = Z / sqrt(chi2_nu / nu), chi2_nu = 2 Gamma(nu / 2). No moment assumptions.
  const double z = rng.normal();
  const double chi2 = 2.0 * rng.gamma(0.5 * dof);
  return z / std::sqrt(chi2 / dof);
}

double draw(const Distribution& d, RngStream& rng) {
  struct Visitor {
    RngStream& rng;
    double operator()(const dist::Normal& n) const { return draw_normal(n.mean, n.variance, rng); }
    double operator()(const dist::InverseGamma& g) const {
      return draw_inverse_gamma(g.shape, g.scale, rng);
    }
    double operator()(const dist::Bernoulli& b) const { return draw_bernoulli(b.p, rng) ? 1.0 : 0.0; }
    double operator()(const dist::StudentT& t) const { return draw_student_t(t.dof, rng); }
  };
  return std::visit(Visitor{rng}, d);
}

Vector draw_mvn_cholesky(const Vector& mean, const Matrix& lower_factor, RngStream& rng) {
  Vector z(mean.size());
  for (Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return mean + lower_factor.triangularView<Eigen::Lower>() * z;
}

}  // namespace synthctl
