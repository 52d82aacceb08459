#include <doctest.h>

#include "locdens/linalg.hpp"
#include "locdens/montecarlo.hpp"

using namespace locdens;

namespace {

Mat random_spd(CounterRng& rng, int p) {
  Mat a(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) a(i, j) = 2.0 * rng.next_unit() - 1.0;
  return Mat(a * a.transpose() + 0.1 * Mat::Identity(p, p));
}

}  // namespace

TEST_CASE("sqrt, inverse, solve on simple matrices") {
  Mat d(2, 2);
  d << 4.0, 0.0, 0.0, 9.0;
  const Mat s = sqrt_pd(d);
  CHECK(s(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s(1, 1) == doctest::Approx(3.0).epsilon(1e-14));

  CHECK(inv_pd(Mat::Identity(3, 3)).isApprox(Mat::Identity(3, 3), 1e-14));

  Mat m(2, 2);
  m << 2.0, 1.0, 1.0, 2.0;
  const Vec lam = eigvals_sym(m);
  CHECK(lam[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(lam[1] == doctest::Approx(3.0).epsilon(1e-14));

  Vec b(2);
  b << 3.0, 3.0;
  CHECK(solve_pd(m, b).isApprox(Vec::Ones(2), 1e-12));
}

TEST_CASE("sqrt_pd squares back to the input on random SPD matrices") {
  CounterRng rng(101, 0);
  for (int rep = 0; rep < 30; ++rep) {
    const Mat a = random_spd(rng, 4);
    const Mat s = sqrt_pd(a);
    CHECK((s * s - a).norm() / a.norm() < 1e-10);
  }
}

TEST_CASE("non-PD input raises with the offending eigenvalue") {
  Mat m(2, 2);
  m << 1.0, 2.0, 2.0, 1.0;  // eigenvalues -1, 3
  CHECK_THROWS_WITH_AS(sqrt_pd(m), doctest::Contains("NotPositiveDefinite"),
                       Error);
  CHECK_THROWS_AS(inv_pd(Mat::Zero(2, 2)), Error);
}

TEST_CASE("eigenvalue interval: identical matrices give [1,1]") {
  CounterRng rng(5, 0);
  const Mat a = random_spd(rng, 3);
  CHECK(eigenvalue_interval_check(a, a, 1.0, 1.0));
}

TEST_CASE("eigenvalue interval on quadrature-built operator pairs") {
  // A^2 = int Psi lam_A Psi^T, B^2 = int Psi lam_B Psi^T with the ratio
  // lam_A/lam_B inside [1/2, 2]; the quotient spectrum must follow.
  const BasisSpec basis = make_basis(BasisKind::polynomial, 4, 1);
  const QuadRule rule = gauss_legendre(24);
  CounterRng rng(77, 0);
  Vec psi(4);
  auto build = [&](auto&& lam) {
    return integrate_mat(
        [&](const double* t, Mat& out) {
          eval_basis(basis, t, psi);
          out = lam(t[0]) * psi * psi.transpose();
        },
        rule, 4);
  };
  const Mat b2 = build([](double) { return 1.0; });
  for (int rep = 0; rep < 20; ++rep) {
    const double alpha = 0.1 + 0.35 * rng.next_unit();  // ratio in [0.55, 1.45]
    const double beta = 1.0 + 2.0 * rng.next_unit();
    const Mat a2 =
        build([&](double t) { return 1.0 + alpha * std::sin(beta * t); });
    CHECK(eigenvalue_interval_check(a2, b2, 0.5, 2.0));
  }
  // proportional operators: quotient spectrum collapses to the ratio
  const Mat a2p = build([](double) { return 2.0; });
  CHECK(eigenvalue_interval_check(a2p, b2, 2.0, 2.0));
}

TEST_CASE("matrix Cauchy-Schwarz gap") {
  const BasisSpec basis = make_basis(BasisKind::polynomial, 3, 1);
  const QuadRule rule = gauss_legendre(24);
  auto psi_fn = [&](const double* t, Vec& out) { eval_basis(basis, t, out); };

  SUBCASE("zero delta gives zero gap") {
    const double gap =
        matrix_cauchy_gap(psi_fn, [](const double*) { return 0.0; }, rule, 3);
    CHECK(std::abs(gap) < 1e-12);
  }

  SUBCASE("delta proportional to a basis component is the equality case") {
    const double gap =
        matrix_cauchy_gap(psi_fn, [](const double* t) { return t[0]; }, rule, 3);
    CHECK(gap >= -1e-10);
    CHECK(gap < 1e-8);
  }

  SUBCASE("random degree-4 integrands stay nonnegative") {
    const BasisSpec b5 = make_basis(BasisKind::polynomial, 5, 1);
    CounterRng rng(13, 0);
    Vec psi5(5);
    for (int rep = 0; rep < 100; ++rep) {
      Vec coef(5);
      for (int k = 0; k < 5; ++k) coef[k] = 2.0 * rng.next_unit() - 1.0;
      const double gap = matrix_cauchy_gap(
          psi_fn,
          [&](const double* t) {
            eval_basis(b5, t, psi5);
            return coef.dot(psi5);
          },
          rule, 3);
      CHECK(gap >= -1e-10);
    }
  }
}

TEST_CASE("Sherman-Morrison inverse") {
  SUBCASE("identity with a unit-vector update") {
    Vec u = Vec::Zero(2);
    u[0] = 1.0;
    const Mat got = sherman_morrison_inv(Mat::Identity(2, 2), u, 0.5);
    CHECK(got(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(got(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(got(0, 1) == doctest::Approx(0.0).epsilon(1e-14));
  }

  SUBCASE("lam = 0 returns the plain inverse") {
    CounterRng rng(3, 0);
    const Mat a = random_spd(rng, 3);
    CHECK(
        sherman_morrison_inv(a, Vec::Ones(3), 0.0).isApprox(inv_pd(a), 1e-12));
  }

  SUBCASE("matches the dense inverse on random rank-one updates") {
    CounterRng rng(9, 0);
    for (int rep = 0; rep < 100; ++rep) {
      const int p = 2 + static_cast<int>(rng.next_u64() % 4);
      const Mat a = random_spd(rng, p);
      Vec u(p);
      for (int k = 0; k < p; ++k) u[k] = 2.0 * rng.next_unit() - 1.0;
      // keep a - lam u u^T inside the PD cone of the dense oracle
      const double lam = 0.05 * rng.next_unit() / std::max(1.0, u.squaredNorm());
      const Mat direct = inv_pd(Mat(a - lam * u * u.transpose()));
      const Mat viasm = sherman_morrison_inv(a, u, lam);
      CHECK((direct - viasm).norm() / direct.norm() < 1e-10);
    }
  }

  SUBCASE("singular update raises") {
    Vec u = Vec::Zero(2);
    u[0] = 1.0;
    CHECK_THROWS_AS(sherman_morrison_inv(Mat::Identity(2, 2), u, 1.0), Error);
  }
}
