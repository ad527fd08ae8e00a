#pragma once

#include <cstdint>
#include <random>
#include <variant>

#include "synthctl/types.hpp"

namespace synthctl {

/// Reproducible random stream identified by (seed, stream_id).
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard; all variates below are generated by hand from its raw output, so
/// a given (seed, stream_id) yields the same numbers on every platform.
/// Streams are values: copy one to fork it, call substream() to derive an
/// independent child for a replication or placebo unit.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Child stream; distinct `key`s give distinct, non-overlapping seeds.
  RngStream substream(std::uint64_t key) const;

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  /// Gamma(shape, 1), Marsaglia-Tsang.
  double gamma(double shape);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  /// Fisher-Yates shuffle of an index vector.
  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = below(i);
      std::iter_swap(first + static_cast<std::ptrdiff_t>(i - 1), first + static_cast<std::ptrdiff_t>(j));
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

namespace dist {

struct Normal {
  double mean = 0.0;
  double variance = 1.0;
};

/// Density proportional to x^{-(shape+1)} exp(-scale / x).
struct InverseGamma {
  double shape;
  double scale;
};

struct Bernoulli {
  double p;
};

struct StudentT {
  double dof;
};

}  // namespace dist

using Distribution = std::variant<dist::Normal, dist::InverseGamma, dist::Bernoulli, dist::StudentT>;

/// One variate. Throws InputError on invalid parameters.
double draw(const Distribution& d, RngStream& rng);

double draw_normal(double mean, double variance, RngStream& rng);
double draw_inverse_gamma(double shape, double scale, RngStream& rng);
bool draw_bernoulli(double p, RngStream& rng);
double draw_student_t(double dof, RngStream& rng);

/// Multivariate normal N(mean, cov) via the lower Cholesky factor of `cov`.
Vector draw_mvn_cholesky(const Vector& mean, const Matrix& lower_factor, RngStream& rng);

}  // namespace synthctl
