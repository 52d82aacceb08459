#include <doctest.h>

#include <cmath>

#include "locdens/linalg.hpp"
#include "locdens/montecarlo.hpp"
#include "locdens/population.hpp"

using namespace locdens;

namespace {

const DensityOracle std_normal =
    DensityOracle::gaussian(Vec::Zero(1), Vec::Ones(1));

DensityOracle skewed_mixture() {
  Vec m1(1), m2(1), s1(1), s2(1);
  m1 << -1.0;
  m2 << 1.2;
  s1 << 0.8;
  s2 << 1.1;
  return DensityOracle::gaussian_mixture({0.5, 0.5}, {m1, m2}, {s1, s2});
}

DensityOracle wide_uniform(double f0) {
  Vec lo(1), hi(1);
  lo << -0.5 / f0;
  hi << 0.5 / f0;
  return DensityOracle::uniform(lo, hi);
}

// composite Gauss-Legendre over [a,b] for normalization checks
double integrate_box(const DensityOracle& oracle, double a, double b,
                     int panels) {
  const QuadRule rule = gauss_legendre(20);
  double total = 0.0;
  const double w = (b - a) / panels;
  for (int k = 0; k < panels; ++k) {
    const double mid = a + (k + 0.5) * w;
    total += integrate(
                 [&](const double* t) {
                   const double x = mid + 0.5 * w * t[0];
                   return oracle.density(&x);
                 },
                 rule) *
             0.5 * w;
  }
  return total;
}

}  // namespace

TEST_CASE("oracle densities integrate to one") {
  CHECK(integrate_box(std_normal, -10.0, 10.0, 20) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK(integrate_box(skewed_mixture(), -14.0, 14.0, 28) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK(integrate_box(wide_uniform(0.25), -3.0, 3.0, 12) ==
        doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("gaussian log-density derivatives: closed forms and FD agreement") {
  Vec x0(1);
  x0 << 0.4;
  CHECK(std_normal.log_density_deriv(x0, {1}) == doctest::Approx(-0.4));
  CHECK(std_normal.log_density_deriv(x0, {2}) == doctest::Approx(-1.0));
  CHECK(std_normal.log_density_deriv(x0, {3}) == 0.0);

  // one-component mixture runs the FD fallback; must match the closed forms
  const DensityOracle as_mixture = DensityOracle::gaussian_mixture(
      {1.0}, {Vec::Zero(1)}, {Vec::Ones(1)});
  for (int k = 1; k <= 4; ++k) {
    const double closed = std_normal.log_density_deriv(x0, {k});
    const double fd = as_mixture.log_density_deriv(x0, {k});
    CHECK(std::abs(fd - closed) < 1e-7 * (1.0 + std::abs(closed)));
  }
}

TEST_CASE("mixture FD derivatives agree with plain central differences") {
  const DensityOracle mix = skewed_mixture();
  Vec x0(1);
  x0 << 0.25;
  const double step = 1e-4;
  auto phi = [&](double x) { return mix.log_density(&x); };
  const double fd1 = (phi(0.25 + step) - phi(0.25 - step)) / (2.0 * step);
  const double fd2 =
      (phi(0.25 + step) - 2.0 * phi(0.25) + phi(0.25 - step)) / (step * step);
  CHECK(mix.log_density_deriv(x0, {1}) ==
        doctest::Approx(fd1).epsilon(1e-5));
  CHECK(mix.log_density_deriv(x0, {2}) ==
        doctest::Approx(fd2).epsilon(1e-5));

  DensityOracle no_fd = mix;
  no_fd.set_fd_fallback(false);
  CHECK_THROWS_WITH_AS(no_fd.log_density_deriv(x0, {1}),
                       doctest::Contains("DerivativeUnavailable"), Error);
}

TEST_CASE("theta_bullet for the standard normal") {
  const ModelSpec model = make_model(Vec::Zero(1), 0.5, 3, KernelKind::indicator);
  const Vec bullet = theta_bullet(std_normal, model).theta;
  CHECK(bullet[0] == doctest::Approx(-0.9189385332046727).epsilon(1e-12));
  CHECK(bullet[1] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(bullet[2] == doctest::Approx(-0.125).epsilon(1e-12));
}

TEST_CASE("uniform oracle is fully degenerate") {
  const DensityOracle uni = wide_uniform(0.5);
  const ModelSpec model = make_model(Vec::Zero(1), 0.25, 2, KernelKind::indicator);
  const PopulationSummary pop = population_summary(uni, model, 1000);

  const double logf0 = std::log(0.5);
  CHECK(pop.f0 == doctest::Approx(0.5).epsilon(1e-14));
  for (int k = 0; k < 2; ++k) {
    const double want = k == 0 ? logf0 : 0.0;
    CHECK(std::abs(pop.theta_star.theta[k] - want) < 1e-10);
    CHECK(std::abs(pop.theta_bullet.theta[k] - want) < 1e-10);
    CHECK(std::abs(pop.theta_circ.theta[k] - want) < 1e-14);
  }
  CHECK(pop.B_ph == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pop.c_fh == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(pop.d02.isApprox(pop.D2 / (1000.0 * 0.25), 1e-12));

  // expected likelihood closed form at theta-circle
  const double el =
      expected_likelihood(pop.theta_circ.theta, uni, model, 1000.0);
  const double want = 1000.0 * 0.25 * (2.0 * 0.5 * logf0 - 2.0 * 0.5);
  CHECK(el == doctest::Approx(want).epsilon(1e-12));

  // uniform p=1 variance identity: V2/n = pr1 (1 - pr1)
  const ModelSpec m1 = make_model(Vec::Zero(1), 0.5, 1, KernelKind::indicator);
  const Mat v2 = variance_matrix(uni, m1, 1.0);
  const auto [pr1, pr2] = window_moments(uni, m1);
  CHECK(pr1 == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(v2(0, 0) == doctest::Approx(pr1 * (1.0 - pr1)).epsilon(1e-12));
}

TEST_CASE("theta_star behaviour") {
  SUBCASE("global maximum against perturbations and a theta cloud") {
    const ModelSpec model =
        make_model(Vec::Zero(1), 0.5, 3, KernelKind::indicator);
    const Vec star = theta_star(std_normal, model).theta;
    const double at_star = expected_likelihood(star, std_normal, model, 1.0);
    for (int k = 0; k < 3; ++k)
      for (double step : {1e-4, 1e-2, 0.3}) {
        Vec up = star, dn = star;
        up[k] += step;
        dn[k] -= step;
        CHECK(at_star >= expected_likelihood(up, std_normal, model, 1.0));
        CHECK(at_star >= expected_likelihood(dn, std_normal, model, 1.0));
      }
    CounterRng rng(404, 0);
    for (int rep = 0; rep < 200; ++rep) {
      Vec cand = star;
      for (int k = 0; k < 3; ++k) cand[k] += 0.8 * (2.0 * rng.next_unit() - 1.0);
      CHECK(expected_likelihood(cand, std_normal, model, 1.0) <=
            at_star + 1e-9);
    }
  }

  SUBCASE("gradient residual at the solution is tiny in the d0 metric") {
    const ModelSpec model =
        make_model(Vec::Zero(1), 0.4, 4, KernelKind::indicator);
    const Vec star = theta_star(std_normal, model).theta;
    const double step = 1e-6;
    Vec g(4);
    for (int k = 0; k < 4; ++k) {
      Vec up = star, dn = star;
      up[k] += step;
      dn[k] -= step;
      g[k] = (expected_likelihood(up, std_normal, model, 1.0) -
              expected_likelihood(dn, std_normal, model, 1.0)) /
             (2.0 * step);
    }
    CHECK(g.norm() < 1e-8);
  }

  SUBCASE("odd components vanish for a symmetric density at its center") {
    const ModelSpec model =
        make_model(Vec::Zero(1), 0.5, 4, KernelKind::indicator);
    const Vec star = theta_star(std_normal, model).theta;
    CHECK(std::abs(star[1]) < 1e-10);
    CHECK(std::abs(star[3]) < 1e-10);
  }

  SUBCASE("theta* approaches theta-bullet as h shrinks") {
    Vec x0(1);
    x0 << 0.5;  // off-center so the slope component is nonzero
    double prev = 1e9;
    for (double h : {0.4, 0.2, 0.1, 0.05}) {
      const ModelSpec model = make_model(x0, h, 2, KernelKind::indicator);
      const Vec star = theta_star(std_normal, model).theta;
      const Vec bullet = theta_bullet(std_normal, model).theta;
      const double rel = std::abs(star[1] / bullet[1] - 1.0);
      CHECK(rel < prev);
      prev = rel;
    }
    CHECK(prev < 0.05);
  }
}

TEST_CASE("information matrices") {
  SUBCASE("d0 at theta-circle with the {1,t} basis is f0 diag(2, 2/3)") {
    const ModelSpec model =
        make_model(Vec::Zero(1), 0.5, 2, KernelKind::indicator);
    const Vec circ = theta_circ(std_normal, model).theta;
    const double f0 = std_normal.density(model.x0);
    const Mat d02 = d0_matrix(circ, model);
    CHECK(d02(0, 0) == doctest::Approx(2.0 * f0).epsilon(1e-12));
    CHECK(d02(1, 1) == doctest::Approx(2.0 / 3.0 * f0).epsilon(1e-12));
    CHECK(std::abs(d02(0, 1)) < 1e-14);
  }

  SUBCASE("d0 is free of n and h") {
    Vec theta(3);
    theta << -0.7, 0.1, -0.3;
    const ModelSpec m1 = make_model(Vec::Zero(1), 0.5, 3, KernelKind::indicator);
    const ModelSpec m2 = make_model(Vec::Zero(1), 0.125, 3, KernelKind::indicator);
    CHECK(d0_matrix(theta, m1).isApprox(d0_matrix(theta, m2), 1e-14));
    CHECK(info_matrix(theta, m1, 100.0)
              .isApprox(Mat(100.0 * 0.5 * d0_matrix(theta, m1)), 1e-13));
  }

  SUBCASE("D2 matches the finite-difference Hessian of E L") {
    const ModelSpec model =
        make_model(Vec::Zero(1), 0.5, 3, KernelKind::indicator);
    const Vec star = theta_star(std_normal, model).theta;
    const double n = 1000.0;
    const Mat d2 = info_matrix(star, model, n);
    auto fd_hess = [&](double step) {
      Mat fd(3, 3);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          Vec pp = star, pm = star, mp = star, mm = star;
          pp[i] += step; pp[j] += step;
          pm[i] += step; pm[j] -= step;
          mp[i] -= step; mp[j] += step;
          mm[i] -= step; mm[j] -= step;
          fd(i, j) = -(expected_likelihood(pp, std_normal, model, n) -
                       expected_likelihood(pm, std_normal, model, n) -
                       expected_likelihood(mp, std_normal, model, n) +
                       expected_likelihood(mm, std_normal, model, n)) /
                     (4.0 * step * step);
        }
      return fd;
    };
    // Richardson pair keeps both truncation and rounding below 1e-6
    const Mat fd = (4.0 * fd_hess(1e-2) - fd_hess(2e-2)) / 3.0;
    CHECK((d2 - fd).norm() / d2.norm() < 1e-6);
  }
}

TEST_CASE("variance matrix against a Monte-Carlo covariance oracle") {
  const ModelSpec model = make_model(Vec::Zero(1), 0.5, 2, KernelKind::indicator);
  const Mat v2_per_obs = variance_matrix(std_normal, model, 1.0);

  const long n = 1000000;
  const Sample s = sample(std_normal, n, 2718);
  Vec mean = Vec::Zero(2);
  Mat second = Mat::Zero(2, 2);
  Vec t(1), psi(2);
  for (long i = 0; i < n; ++i) {
    t[0] = (s.points(i, 0) - 0.0) / 0.5;
    const double k = eval_kernel(model.kernel, t.data(), 1);
    if (k <= 0.0) continue;
    eval_basis(model.basis, t.data(), psi);
    mean += k * psi;
    second += (k * k) * psi * psi.transpose();
  }
  mean /= static_cast<double>(n);
  second /= static_cast<double>(n);
  const Mat emp_cov = second - mean * mean.transpose();
  CHECK((emp_cov - v2_per_obs).norm() / v2_per_obs.norm() < 0.01);
}

TEST_CASE("oscillation constant") {
  const ModelSpec model = make_model(Vec::Zero(1), 0.5, 3, KernelKind::indicator);
  CHECK(oscillation(std_normal, model) ==
        doctest::Approx(0.11750309741540454).epsilon(1e-10));
  CHECK(oscillation(wide_uniform(0.5), model) == doctest::Approx(0.0));

  double prev = 0.0;
  for (double h : {0.1, 0.2, 0.4, 0.8}) {
    const ModelSpec m = make_model(Vec::Zero(1), h, 3, KernelKind::indicator);
    const double c = oscillation(std_normal, m);
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("bias constant") {
  SUBCASE("closed form for p = 2 at h = 0.5") {
    const ModelSpec model =
        make_model(Vec::Zero(1), 0.5, 2, KernelKind::indicator);
    CHECK(bias_constant(std_normal, model) ==
          doctest::Approx(1.1331484530668263).epsilon(1e-10));
  }

  SUBCASE("uniform remainder vanishes") {
    const ModelSpec model =
        make_model(Vec::Zero(1), 0.25, 3, KernelKind::indicator);
    CHECK(bias_constant(wide_uniform(0.5), model) == doctest::Approx(1.0));
  }

  SUBCASE("log B scales as h^p: halving h divides it by about 2^p") {
    const DensityOracle mix = skewed_mixture();
    Vec x0(1);
    x0 << -0.25;
    for (int p : {2, 3}) {
      const DensityOracle& oracle = p == 2 ? std_normal : mix;
      double prev = 0.0;
      for (double h : {0.25, 0.125, 0.0625}) {
        const ModelSpec model = make_model(x0, h, p, KernelKind::indicator);
        const double logb = std::log(bias_constant(oracle, model));
        if (prev > 0.0) {
          const double ratio = prev / logb;
          const double want = std::pow(2.0, p);
          CHECK(ratio > 0.75 * want);
          CHECK(ratio < 1.25 * want);
        }
        prev = logb;
      }
    }
  }
}

TEST_CASE("window moments") {
  SUBCASE("uniform mass of the window") {
    Vec lo(1), hi(1);
    lo << -1.0;
    hi << 1.0;
    const DensityOracle uni = DensityOracle::uniform(lo, hi);
    const ModelSpec model =
        make_model(Vec::Zero(1), 0.5, 2, KernelKind::indicator);
    const auto [pr1, pr2] = window_moments(uni, model);
    CHECK(pr1 == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(pr2 == doctest::Approx(0.25).epsilon(1e-13));
  }

  SUBCASE("pointwise bounds across oracles and bandwidths") {
    const DensityOracle mix = skewed_mixture();
    for (const DensityOracle* oracle : {&std_normal, &mix}) {
      for (double h : {0.1, 0.5, 1.0}) {
        const ModelSpec model =
            make_model(Vec::Zero(1), h, 2, KernelKind::indicator);
        const auto [pr1, pr2] = window_moments(*oracle, model);
        const double f0 = oracle->density(model.x0);
        const double c = oscillation(*oracle, model);
        CHECK(pr1 > 0.0);
        CHECK(pr1 <= 1.0);
        CHECK(pr2 > 0.0);
        CHECK(pr2 <= f0 * (1.0 + c) * pr1 + 1e-12);
      }
    }
  }
}

TEST_CASE("eigenvalue lemma on information matrices near theta*") {
  const ModelSpec model = make_model(Vec::Zero(1), 0.4, 3, KernelKind::indicator);
  const Vec star = theta_star(std_normal, model).theta;
  const Mat d2_star = info_matrix(star, model, 100.0);
  CounterRng rng(55, 0);
  Vec psi(3);
  for (int rep = 0; rep < 20; ++rep) {
    Vec theta = star;
    for (int k = 0; k < 3; ++k) theta[k] += 0.4 * (2.0 * rng.next_unit() - 1.0);
    const Mat d2_theta = info_matrix(theta, model, 100.0);
    const Vec diff = theta - star;
    const double hi = sup_on_cube(
                          [&](const double* t) {
                            eval_basis(model.basis, t, psi);
                            return std::exp(psi.dot(diff));
                          },
                          1)
                          .value;
    const double lo = 1.0 / sup_on_cube(
                                [&](const double* t) {
                                  eval_basis(model.basis, t, psi);
                                  return std::exp(-psi.dot(diff));
                                },
                                1)
                                .value;
    CHECK(eigenvalue_interval_check(d2_theta, d2_star, lo, hi));
  }
}

namespace {

// left and right sides of the appendix small-bias inequalities for one cell
struct LemmaSides {
  double smb_lhs, smb_rhs;
  double capx_matrix_lhs, capx_matrix_rhs;
  double graddiff_lhs, graddiff_rhs;
  double thm4_lhs, thm4_rhs;
};

LemmaSides lemma_sides(const DensityOracle& oracle, const ModelSpec& model) {
  const PopulationSummary pop = population_summary(oracle, model, 1000);
  const Mat d0_circ = sqrt_pd(d0_matrix(pop.theta_circ.theta, model));
  const double ik = pop.IK;
  const double f0 = pop.f0;
  const double c = pop.c_fh;
  const double B = pop.B_ph;
  const double c1 = std::sqrt(c1_squared(model));

  LemmaSides out{};
  const PhiConstants phi = phi_constants(f0, c, B, model);

  out.smb_lhs =
      (d0_circ * (pop.theta_circ.theta - pop.theta_star.theta)).squaredNorm();
  out.smb_rhs = f0 * phi.phi1 * phi.phi1 / (1.0 - c1 * phi.phi1);

  const Mat d_bullet = sqrt_pd(d0_matrix(pop.theta_bullet.theta, model));
  const Mat d0_circ_inv2 = inv_pd(d0_matrix(pop.theta_circ.theta, model));
  const Mat m = Mat::Identity(model.p(), model.p()) -
                d_bullet * d0_circ_inv2 * d_bullet;
  out.capx_matrix_lhs = eigvals_sym(Mat(0.5 * (m + m.transpose())))
                            .cwiseAbs()
                            .maxCoeff();
  out.capx_matrix_rhs = (1.0 + c) * B - 1.0;

  // gradient difference: grad g(theta*) = 0, so the difference is the
  // gradient of the normalized expected likelihood at theta-bullet.
  const double step = 1e-6;
  Vec grad_bullet(model.p());
  for (int k = 0; k < model.p(); ++k) {
    Vec up = pop.theta_bullet.theta, dn = pop.theta_bullet.theta;
    up[k] += step;
    dn[k] -= step;
    grad_bullet[k] = (expected_likelihood(up, oracle, model, 1.0) -
                      expected_likelihood(dn, oracle, model, 1.0)) /
                     (2.0 * step);
  }
  const double hd = std::pow(model.h, model.dim());
  out.graddiff_lhs =
      solve_pd(d0_matrix(pop.theta_circ.theta, model), grad_bullet)
          .dot(grad_bullet);
  out.graddiff_rhs =
      model.p() * (1.0 - B) * (1.0 - B) * pop.pr2 / hd;

  out.thm4_lhs =
      (d0_circ * (pop.theta_star.theta - pop.theta_bullet.theta)).norm();
  out.thm4_rhs = std::sqrt(static_cast<double>(model.p())) * std::sqrt(ik) /
                 (1.0 - phi.epsilon) * (1.0 + c) * f0 * std::abs(B - 1.0);
  return out;
}

}  // namespace

TEST_CASE("small-bias lemma suite on the oracle sweep") {
  const DensityOracle mix = skewed_mixture();
  Vec x0m(1);
  x0m << -0.25;
  for (int p : {2, 3}) {
    for (double h : {0.5, 0.25, 0.125}) {
      // gaussian sweep at the origin
      const ModelSpec mg = make_model(Vec::Zero(1), h, p, KernelKind::indicator);
      const LemmaSides g = lemma_sides(std_normal, mg);
      CHECK(g.smb_lhs <= g.smb_rhs + 1e-12);
      CHECK(g.capx_matrix_lhs <= g.capx_matrix_rhs + 1e-10);
      CHECK(g.graddiff_lhs <= g.graddiff_rhs + 1e-9);
      CHECK(g.thm4_lhs <= g.thm4_rhs + 1e-9);

      // mixture sweep off-center
      const ModelSpec mm = make_model(x0m, h, p, KernelKind::indicator);
      const LemmaSides q = lemma_sides(mix, mm);
      CHECK(q.smb_lhs <= q.smb_rhs + 1e-12);
      CHECK(q.capx_matrix_lhs <= q.capx_matrix_rhs + 1e-10);
      CHECK(q.graddiff_lhs <= q.graddiff_rhs + 1e-9);
      CHECK(q.thm4_lhs <= q.thm4_rhs + 1e-9);
    }
  }
}

TEST_CASE("O(h^p) bias rate") {
  SUBCASE("gaussian p = 2: slope 2 within 0.3") {
    std::vector<double> lh, lhs;
    for (double h : {0.5, 0.25, 0.125}) {
      const ModelSpec model =
          make_model(Vec::Zero(1), h, 2, KernelKind::indicator);
      const PopulationSummary pop = population_summary(std_normal, model, 100);
      const Mat d0c = sqrt_pd(d0_matrix(pop.theta_circ.theta, model));
      lh.push_back(std::log(h));
      lhs.push_back(std::log(
          (d0c * (pop.theta_star.theta - pop.theta_bullet.theta)).norm()));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < lh.size(); ++i) {
      sx += lh[i];
      sy += lhs[i];
      sxx += lh[i] * lh[i];
      sxy += lh[i] * lhs[i];
    }
    const double n = static_cast<double>(lh.size());
    const double slope = (sxy - sx * sy / n) / (sxx - sx * sx / n);
    CHECK(slope > 1.7);
    CHECK(slope < 2.3);
  }

  SUBCASE("gaussian p = 3 bias vanishes identically (quadratic log-density)") {
    for (double h : {0.5, 0.25, 0.125}) {
      const ModelSpec model =
          make_model(Vec::Zero(1), h, 3, KernelKind::indicator);
      const PopulationSummary pop = population_summary(std_normal, model, 100);
      const Mat d0c = sqrt_pd(d0_matrix(pop.theta_circ.theta, model));
      CHECK((d0c * (pop.theta_star.theta - pop.theta_bullet.theta)).norm() <
            1e-9);
    }
  }

  SUBCASE("mixture p = 3: slope 3 within 0.3") {
    const DensityOracle mix = skewed_mixture();
    Vec x0(1);
    x0 << -0.25;
    std::vector<double> lh, lhs;
    for (double h : {0.5, 0.25, 0.125}) {
      const ModelSpec model = make_model(x0, h, 3, KernelKind::indicator);
      const PopulationSummary pop = population_summary(mix, model, 100);
      const Mat d0c = sqrt_pd(d0_matrix(pop.theta_circ.theta, model));
      lh.push_back(std::log(h));
      lhs.push_back(std::log(
          (d0c * (pop.theta_star.theta - pop.theta_bullet.theta)).norm()));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < lh.size(); ++i) {
      sx += lh[i];
      sy += lhs[i];
      sxx += lh[i] * lh[i];
      sxy += lh[i] * lhs[i];
    }
    const double n = static_cast<double>(lh.size());
    const double slope = (sxy - sx * sy / n) / (sxx - sx * sx / n);
    CHECK(slope > 2.7);
    CHECK(slope < 3.3);
  }
}
