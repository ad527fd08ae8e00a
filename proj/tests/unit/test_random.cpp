#include <doctest.h>

#include <cmath>
#include <vector>

#include "synthctl/random.hpp"

using namespace synthctl;

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments moments(const std::vector<double>& x) {
  Moments m;
  for (double v : x) m.mean += v;
  m.mean /= static_cast<double>(x.size());
  for (double v : x) m.var += (v - m.mean) * (v - m.mean);
  m.var /= static_cast<double>(x.size() - 1);
  return m;
}

}  // namespace

TEST_CASE("bernoulli endpoints") {
  RngStream rng(1);
  for (int i = 0; i < 100; ++i) {
    CHECK(draw(dist::Bernoulli{0.0}, rng) == 0.0);
    CHECK(draw(dist::Bernoulli{1.0}, rng) == 1.0);
  }
}

TEST_CASE("inverse gamma(3, 2) mean within 3 standard errors") {
  RngStream rng(2);
  const int n = 100000;
  std::vector<double> x(n);
  for (auto& v : x) v = draw(dist::InverseGamma{3.0, 2.0}, rng);
  const Moments m = moments(x);
  // mean = scale / (shape - 1) = 1, variance = scale^2 / ((shape-1)^2 (shape-2)) = 1.
  CHECK(std::abs(m.mean - 1.0) < 3.0 * std::sqrt(1.0 / n));
}

TEST_CASE("normal(0, 4) variance within 3 standard errors") {
  RngStream rng(3);
  const int n = 100000;
  std::vector<double> x(n);
  for (auto& v : x) v = draw(dist::Normal{0.0, 4.0}, rng);
  const Moments m = moments(x);
  // Var of the sample variance for a normal: 2 sigma^4 / (n - 1).
  CHECK(std::abs(m.var - 4.0) < 3.0 * std::sqrt(2.0 * 16.0 / (n - 1)));
  CHECK(std::abs(m.mean) < 3.0 * std::sqrt(4.0 / n));
}

TEST_CASE("gamma shape below one keeps the right mean") {
  RngStream rng(4);
  const int n = 100000;
  std::vector<double> x(n);
  for (auto& v : x) v = rng.gamma(0.3);
  const Moments m = moments(x);
  CHECK(std::abs(m.mean - 0.3) < 3.0 * std::sqrt(0.3 / n));
}

TEST_CASE("student t with dof 0.99 is finite and heavy tailed") {
  RngStream rng(5);
  int big = 0;
  for (int i = 0; i < 20000; ++i) {
    const double v = draw(dist::StudentT{0.99}, rng);
    CHECK(std::isfinite(v));
    if (std::abs(v) > 100.0) ++big;
  }
  // P(|t_1| > 100) is about 0.0064 for Cauchy.
  CHECK(big > 50);
  // Median of |t| with one degree of freedom is 1.
  RngStream r2(6);
  std::vector<double> a(20001);
  for (auto& v : a) v = std::abs(draw_student_t(1.0, r2));
  std::nth_element(a.begin(), a.begin() + 10000, a.end());
  CHECK(std::abs(a[10000] - 1.0) < 0.05);
}

TEST_CASE("streams are reproducible and distinct") {
  RngStream a(42, 1), b(42, 1), c(42, 2);
  bool differs = false;
  for (int i = 0; i < 50; ++i) {
    const double x = a.normal();
    CHECK(x == b.normal());
    if (x != c.normal()) differs = true;
  }
  CHECK(differs);
  const RngStream root(7, 0);
  RngStream s1 = root.substream(1), s1b = root.substream(1), s2 = root.substream(2);
  CHECK(s1.next_u64() == s1b.next_u64());
  CHECK(s1.next_u64() != s2.next_u64());
}

TEST_CASE("independent streams show no correlation") {
  RngStream a(9, 1), b(9, 2);
  const int n = 50000;
  double sxy = 0.0;
  for (int i = 0; i < n; ++i) sxy += a.normal() * b.normal();
  CHECK(std::abs(sxy / n) < 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("invalid parameters are rejected") {
  RngStream rng(10);
  CHECK_THROWS_AS(draw(dist::Normal{0.0, 0.0}, rng), InputError);
  CHECK_THROWS_AS(draw(dist::InverseGamma{0.0, 1.0}, rng), InputError);
  CHECK_THROWS_AS(draw(dist::InverseGamma{1.0, -1.0}, rng), InputError);
  CHECK_THROWS_AS(draw(dist::Bernoulli{1.5}, rng), InputError);
  CHECK_THROWS_AS(draw(dist::StudentT{0.0}, rng), InputError);
}

TEST_CASE("multivariate normal: covariance recovered") {
  RngStream rng(11);
  Matrix S(2, 2);
  S << 2.0, 0.6, 0.6, 1.0;
  const Matrix L = Eigen::LLT<Matrix>(S).matrixL();
  const int n = 50000;
  Matrix acc = Matrix::Zero(2, 2);
  for (int i = 0; i < n; ++i) {
    const Vector x = draw_mvn_cholesky(Vector::Zero(2), L, rng);
    acc += x * x.transpose();
  }
  acc /= n;
  CHECK((acc - S).cwiseAbs().maxCoeff() < 0.05);
}
