#include <doctest.h>

#include "oracles.hpp"
#include "synthctl/linalg.hpp"

using namespace synthctl;

namespace {

Matrix random_matrix(Index r, Index c, std::uint64_t seed) {
  RngStream rng(seed, 5);
  Matrix M(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) M(i, j) = rng.normal();
  return M;
}

}  // namespace

TEST_CASE("least squares: identity and normal-equations oracle") {
  Vector y(3);
  y << 1, 2, 3;
  CHECK((solve_least_squares(Matrix::Identity(3, 3), y) - y).norm() < 1e-14);

  const Matrix X = random_matrix(50, 5, 1);
  const Vector b = random_matrix(50, 1, 2).col(0);
  const Vector beta = solve_least_squares(X, b);
  CHECK((beta - oracle::normal_equations(X, b)).cwiseAbs().maxCoeff() < 1e-8);
  const Vector resid = b - X * beta;
  CHECK((X.transpose() * resid).cwiseAbs().maxCoeff() < 1e-8 * b.norm());
}

TEST_CASE("least squares: duplicated column is singular") {
  Matrix X = random_matrix(20, 3, 3);
  X.col(2) = X.col(0);
  CHECK_THROWS_AS(solve_least_squares(X, Vector::Ones(20)), SingularMatrixError);
  CHECK_THROWS_AS(solve_least_squares(random_matrix(2, 3, 4), Vector::Ones(2)), InputError);
}

TEST_CASE("principal components: dominant direction matches power iteration") {
  RngStream rng(7, 1);
  Vector dir = random_matrix(8, 1, 8).col(0).normalized();
  Matrix Y(40, 8);
  for (Index t = 0; t < 40; ++t) Y.row(t) = (5.0 * rng.normal()) * dir.transpose() + 0.01 * random_matrix(1, 8, 100 + t);
  const PrincipalComponents pc = principal_components(Y, 2);
  const Vector ref = oracle::power_iteration(Y.transpose() * Y);
  CHECK(std::abs(pc.loadings.col(0).dot(ref)) > 0.999);
  CHECK(std::abs(pc.loadings.col(0).dot(dir)) > 0.999);
  CHECK((pc.scores - Y * pc.loadings).norm() < 1e-10);
}

TEST_CASE("principal components: orthonormal, diagonal scores, sign convention") {
  const Matrix Y = random_matrix(6, 6, 9);
  const PrincipalComponents pc = principal_components(Y, 6);
  CHECK((pc.loadings * pc.loadings.transpose() - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-8);
  Matrix S = pc.scores.transpose() * pc.scores;
  S.diagonal().setZero();
  CHECK(S.cwiseAbs().maxCoeff() < 1e-8);
  for (Index k = 0; k < 6; ++k) {
    Index arg = 0;
    pc.loadings.col(k).cwiseAbs().maxCoeff(&arg);
    CHECK(pc.loadings(arg, k) > 0.0);
  }
  // Ill-conditioned input still gives orthonormal loadings.
  Matrix Z = random_matrix(30, 5, 10);
  Z.col(4) = Z.col(3) + 1e-9 * Z.col(2);
  const PrincipalComponents pz = principal_components(Z, 5);
  CHECK((pz.loadings.transpose() * pz.loadings - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-8);
  CHECK_THROWS_AS(principal_components(Z, 0), InputError);
  CHECK_THROWS_AS(principal_components(Z, 6), InputError);
}

TEST_CASE("simplex least squares: vertex and interior solutions") {
  const Matrix Y = random_matrix(25, 5, 11);
  const SimplexSolution v = simplex_constrained_ls(Y, Y.col(3));
  CHECK(v.weights(3) == doctest::Approx(1.0).epsilon(1e-6));

  const Vector mid = 0.5 * Y.col(0) + 0.5 * Y.col(1);
  const SimplexSolution m = simplex_constrained_ls(Y, mid);
  CHECK(std::abs(m.weights(0) - 0.5) < 1e-4);
  CHECK(std::abs(m.weights(1) - 0.5) < 1e-4);
  CHECK(m.weights.tail(3).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("simplex least squares: grid-search oracle and KKT conditions") {
  for (std::uint64_t seed = 20; seed < 25; ++seed) {
    const Matrix Y = random_matrix(20, 4, seed);
    const Vector y = random_matrix(20, 1, seed + 1000).col(0);
    const SimplexSolution s = simplex_constrained_ls(Y, y);
    CHECK(s.weights.minCoeff() >= -1e-12);
    CHECK(std::abs(s.weights.sum() - 1.0) <= 1e-10);

    double best = INFINITY;
    for (int a = 0; a <= 100; ++a)
      for (int b = 0; a + b <= 100; ++b)
        for (int c = 0; a + b + c <= 100; ++c) {
          Vector w(4);
          w << a, b, c, 100 - a - b - c;
          w /= 100.0;
          best = std::min(best, (y - Y * w).squaredNorm());
        }
    CHECK(s.objective <= best + 1e-10);
    CHECK(s.objective == doctest::Approx((y - Y * s.weights).squaredNorm()));

    const Vector grad = -2.0 * Y.transpose() * (y - Y * s.weights);
    const double gmin = grad.minCoeff();
    for (Index j = 0; j < 4; ++j)
      if (s.weights(j) > 1e-6) CHECK(std::abs(grad(j) - gmin) <= 1e-5 * std::max(1.0, std::abs(gmin)));
  }
}

TEST_CASE("simplex least squares: wide collinear problem keeps invariants") {
  const Matrix base = random_matrix(30, 3, 40);
  Matrix Y(30, 60);
  for (Index j = 0; j < 60; ++j) Y.col(j) = base * random_matrix(3, 1, 50 + j).col(0).cwiseAbs();
  const SimplexSolution s = simplex_constrained_ls(Y, base.col(0) + 0.1 * random_matrix(30, 1, 41).col(0));
  CHECK(s.weights.minCoeff() >= -1e-12);
  CHECK(std::abs(s.weights.sum() - 1.0) <= 1e-10);
}

TEST_CASE("simplex projection") {
  Vector v(3);
  v << 0.2, 0.2, 0.6;
  CHECK((project_to_simplex(v) - v).norm() < 1e-15);
  v << 5, -1, -2;
  const Vector p = project_to_simplex(v);
  CHECK(p(0) == doctest::Approx(1.0));
  CHECK(p(1) == 0.0);
}

TEST_CASE("mahalanobis distance") {
  Vector a(3), b(3);
  a << 1, 2, 3;
  b << 3, 0, 4;
  CHECK(mahalanobis(a, a, Matrix::Identity(3, 3)) == 0.0);
  CHECK(mahalanobis(a, b, Matrix::Identity(3, 3)) == doctest::Approx((a - b).norm()));
  Matrix S = Matrix::Zero(3, 3);
  S.diagonal() << 4, 1, 1;
  // Scaled coordinates: (-2/2, 2/1, -1/1).
  CHECK(mahalanobis(a, b, S) == doctest::Approx(std::sqrt(1.0 + 4.0 + 1.0)));
  Matrix bad = Matrix::Identity(3, 3);
  bad(2, 2) = -1.0;
  CHECK_THROWS_AS(mahalanobis(a, b, bad), NotPositiveDefiniteError);
}

TEST_CASE("regularized covariance adds a trace-scaled ridge") {
  const Matrix obs = random_matrix(3, 5, 60);  // fewer observations than dimensions
  const Matrix C = regularized_covariance(obs);
  const Eigen::LLT<Matrix> llt(C);
  CHECK(llt.info() == Eigen::Success);
  const Matrix centered = obs.rowwise() - obs.colwise().mean();
  const Matrix sample = centered.transpose() * centered / 2.0;
  const Matrix ridge = C - sample;
  CHECK(ridge.diagonal().minCoeff() == doctest::Approx(1e-8 * sample.trace() / 5.0));
}
