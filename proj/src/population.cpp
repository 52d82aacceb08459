#include "locdens/population.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>

namespace locdens {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_normal_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) -
         0.5 * std::log(2.0 * std::numbers::pi);
}

}  // namespace

DensityOracle DensityOracle::uniform(const Vec& lo, const Vec& hi) {
  if (lo.size() != hi.size() || lo.size() < 1)
    raise(Errc::bad_input, "uniform oracle needs matching lo/hi");
  double log_vol = 0.0;
  for (long j = 0; j < lo.size(); ++j) {
    if (!(hi[j] > lo[j])) raise(Errc::bad_input, "uniform needs hi > lo");
    log_vol += std::log(hi[j] - lo[j]);
  }
  DensityOracle o;
  o.kind_ = Kind::uniform;
  o.dim_ = static_cast<int>(lo.size());
  o.lo_ = lo;
  o.hi_ = hi;
  o.log_f0_ = -log_vol;
  return o;
}

DensityOracle DensityOracle::gaussian(const Vec& mu, const Vec& sigma) {
  if (mu.size() != sigma.size() || mu.size() < 1)
    raise(Errc::bad_input, "gaussian oracle needs matching mu/sigma");
  for (long j = 0; j < sigma.size(); ++j)
    if (!(sigma[j] > 0.0)) raise(Errc::bad_input, "sigma must be positive");
  DensityOracle o;
  o.kind_ = Kind::gaussian;
  o.dim_ = static_cast<int>(mu.size());
  o.weights_ = {1.0};
  o.means_ = {mu};
  o.sigmas_ = {sigma};
  o.sigma_min_ = sigma.minCoeff();
  return o;
}

DensityOracle DensityOracle::gaussian_mixture(
    const std::vector<double>& weights, const std::vector<Vec>& means,
    const std::vector<Vec>& sigmas) {
  if (weights.empty() || weights.size() != means.size() ||
      weights.size() != sigmas.size())
    raise(Errc::bad_input, "mixture needs matching component lists");
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) raise(Errc::bad_input, "mixture weights must be positive");
    wsum += w;
  }
  DensityOracle o;
  o.kind_ = Kind::gaussian_mixture;
  o.dim_ = static_cast<int>(means[0].size());
  o.weights_ = weights;
  for (double& w : o.weights_) w /= wsum;
  o.means_ = means;
  o.sigmas_ = sigmas;
  o.sigma_min_ = std::numeric_limits<double>::infinity();
  for (const Vec& s : sigmas) {
    if (s.size() != o.dim_)
      raise(Errc::bad_input, "mixture components must share the dimension");
    for (long j = 0; j < s.size(); ++j)
      if (!(s[j] > 0.0)) raise(Errc::bad_input, "sigma must be positive");
    o.sigma_min_ = std::min(o.sigma_min_, s.minCoeff());
  }
  for (const Vec& m : means)
    if (m.size() != o.dim_)
      raise(Errc::bad_input, "mixture components must share the dimension");
  return o;
}

double DensityOracle::log_density(const double* x) const {
  switch (kind_) {
    case Kind::uniform:
      for (int j = 0; j < dim_; ++j)
        if (x[j] < lo_[j] || x[j] > hi_[j]) return kNegInf;
      return log_f0_;
    case Kind::gaussian: {
      double s = 0.0;
      for (int j = 0; j < dim_; ++j)
        s += log_normal_pdf(x[j], means_[0][j], sigmas_[0][j]);
      return s;
    }
    case Kind::gaussian_mixture: {
      // log-sum-exp over components
      double best = kNegInf;
      std::vector<double> terms(weights_.size());
      for (size_t c = 0; c < weights_.size(); ++c) {
        double s = std::log(weights_[c]);
        for (int j = 0; j < dim_; ++j)
          s += log_normal_pdf(x[j], means_[c][j], sigmas_[c][j]);
        terms[c] = s;
        best = std::max(best, s);
      }
      double acc = 0.0;
      for (double s : terms) acc += std::exp(s - best);
      return best + std::log(acc);
    }
  }
  return kNegInf;
}

double DensityOracle::density(const double* x) const {
  const double lp = log_density(x);
  return lp == kNegInf ? 0.0 : std::exp(lp);
}

namespace {

// Central-difference coefficients for the k-th derivative on the symmetric
// stencil -M..M, chosen wide enough for 8th-order accuracy. Solved from the
// moment conditions sum_s c_s s^j = k! [j == k] in extended precision.
std::vector<double> fd_coefficients(int k, int& m_out) {
  const int m = (k + 1) / 2 + 4;
  m_out = m;
  const int npts = 2 * m + 1;
  using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using LVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  LMat v(npts, npts);
  for (int s = -m; s <= m; ++s) {
    long double pw = 1.0L;
    for (int j = 0; j < npts; ++j) {
      v(j, s + m) = pw;
      pw *= s;
    }
  }
  LVec rhs = LVec::Zero(npts);
  long double kfact = 1.0L;
  for (int i = 2; i <= k; ++i) kfact *= i;
  rhs[k] = kfact;
  LVec c = v.fullPivLu().solve(rhs);
  std::vector<double> out(static_cast<size_t>(npts));
  for (int i = 0; i < npts; ++i) out[static_cast<size_t>(i)] = static_cast<double>(c[i]);
  return out;
}

}  // namespace

double DensityOracle::fd_deriv(const Vec& x0, const MultiIndex& alpha) const {
  // Differentiate axis by axis; each level applies a 1-D stencil and the
  // remaining axes are handled recursively inside the stencil evaluations.
  int axis = -1;
  for (size_t j = 0; j < alpha.size(); ++j)
    if (alpha[j] > 0) {
      axis = static_cast<int>(j);
      break;
    }
  if (axis < 0) return log_density(x0);

  const int k = alpha[static_cast<size_t>(axis)];
  MultiIndex rest = alpha;
  rest[static_cast<size_t>(axis)] = 0;
  int m = 0;
  const std::vector<double> coef = fd_coefficients(k, m);

  auto stencil = [&](double step) {
    double acc = 0.0;
    Vec x = x0;
    for (int s = -m; s <= m; ++s) {
      const double c = coef[static_cast<size_t>(s + m)];
      if (c == 0.0) continue;
      x[axis] = x0[axis] + s * step;
      acc += c * fd_deriv(x, rest);
    }
    return acc / std::pow(step, k);
  };

  // Accuracy order of the symmetric stencil is even and >= 8; Richardson
  // with halved step removes the leading term.
  const double h1 = 1e-2 * sigma_min_;
  const double d1 = stencil(h1);
  const double d2 = stencil(0.5 * h1);
  const double w = 256.0;
  return (w * d2 - d1) / (w - 1.0);
}

double DensityOracle::log_density_deriv(const Vec& x0,
                                        const MultiIndex& alpha) const {
  if (static_cast<int>(alpha.size()) != dim_)
    raise(Errc::bad_input, "multi-index dimension mismatch");
  int order = 0;
  for (int a : alpha) order += a;
  if (order == 0) return log_density(x0);

  switch (kind_) {
    case Kind::uniform:
      return 0.0;  // log f constant on the support
    case Kind::gaussian: {
      // log f = sum_j [-(x_j-mu_j)^2/(2 sigma_j^2)] + const: only pure first
      // and second axis derivatives survive.
      int axis = -1;
      for (int j = 0; j < dim_; ++j)
        if (alpha[static_cast<size_t>(j)] > 0) {
          if (axis >= 0) return 0.0;  // mixed partial
          axis = j;
        }
      const double sig2 = sigmas_[0][axis] * sigmas_[0][axis];
      if (order == 1) return -(x0[axis] - means_[0][axis]) / sig2;
      if (order == 2) return -1.0 / sig2;
      return 0.0;
    }
    case Kind::gaussian_mixture:
      if (!fd_enabled_)
        raise(Errc::derivative_unavailable,
              "mixture derivatives need the finite-difference fallback");
      return fd_deriv(x0, alpha);
  }
  return 0.0;
}

namespace {

double hd(const ModelSpec& model) { return std::pow(model.h, model.dim()); }

// int K Psi f(x0 + t h) dt
Vec window_mean_f(const DensityOracle& oracle, const ModelSpec& model,
                  const QuadRule& rule) {
  const int d = model.dim();
  const int p = model.p();
  Vec x(d);
  return integrate_vec(
      [&](const double* t, Vec& out) {
        const double k = eval_kernel(model.kernel, t, d);
        if (k <= 0.0) {
          out.setZero();
          return;
        }
        for (int j = 0; j < d; ++j) x[j] = model.x0[j] + t[j] * model.h;
        eval_basis(model.basis, t, out);
        out *= k * oracle.density(x.data());
      },
      rule, p);
}

}  // namespace

double expected_likelihood(const Vec& theta, const DensityOracle& oracle,
                           const ModelSpec& model, double n) {
  const QuadRule rule = model_rule(model);
  const int d = model.dim();
  Vec x(d), psi(model.p());
  const double lin = integrate(
      [&](const double* t) {
        const double k = eval_kernel(model.kernel, t, d);
        if (k <= 0.0) return 0.0;
        for (int j = 0; j < d; ++j) x[j] = model.x0[j] + t[j] * model.h;
        eval_basis(model.basis, t, psi);
        return k * psi.dot(theta) * oracle.density(x.data());
      },
      rule);
  const ExpMoments mom = exp_moments(theta, model, rule);
  return n * hd(model) * (lin - mom.mass);
}

ParamVector theta_circ(const DensityOracle& oracle, const ModelSpec& model) {
  const double f0 = oracle.density(model.x0);
  if (!(f0 > 0.0)) raise(Errc::bad_input, "density vanishes at x0");
  Vec theta = Vec::Zero(model.p());
  theta[0] = std::log(f0);
  return {theta, ParamRole::auxiliary};
}

ParamVector theta_star(const DensityOracle& oracle, const ModelSpec& model) {
  const QuadRule rule = model_rule(model);
  const double ik = kernel_mass(model);
  const Vec b = window_mean_f(oracle, model, rule);
  if (!(b[0] > 0.0))
    raise(Errc::bad_input, "density has no mass on the window");

  // Same machinery as the empirical fit, with E L / (n h^d) as objective.
  detail::NewtonProblem prob;
  prob.value = [&](const Vec& th) {
    const ExpMoments mom = exp_moments(th, model, rule);
    return b.dot(th) - mom.mass;
  };
  prob.grad = [&](const Vec& th) {
    const ExpMoments mom = exp_moments(th, model, rule);
    return Vec(b - mom.mean);
  };
  prob.neg_hess = [&](const Vec& th) {
    const ExpMoments mom = exp_moments(th, model, rule);
    return mom.gram;
  };
  Vec theta0 = Vec::Zero(model.p());
  theta0[0] = std::log(b[0] / ik);
  const auto res = detail::newton_maximize(prob, theta0, 1e-12, true, 200);
  if (!res.converged)
    raise(Errc::max_iter_exceeded, "population solver did not converge");
  return {res.theta, ParamRole::target};
}

ParamVector theta_bullet(const DensityOracle& oracle, const ModelSpec& model) {
  const int p = model.p();
  Vec theta(p);
  for (int k = 0; k < p; ++k) {
    const MultiIndex& alpha = model.basis.index_set[static_cast<size_t>(k)];
    int order = 0;
    double fact = 1.0;
    for (int a : alpha) {
      order += a;
      for (int i = 2; i <= a; ++i) fact *= i;
    }
    theta[k] = std::pow(model.h, order) / fact *
               oracle.log_density_deriv(model.x0, alpha);
  }
  return {theta, ParamRole::unbiased};
}

Mat info_matrix(const Vec& theta, const ModelSpec& model, double n) {
  const QuadRule rule = model_rule(model);
  const ExpMoments mom = exp_moments(theta, model, rule);
  Mat d2 = n * hd(model) * mom.gram;
  // surfacing degeneracy early: the information matrix must be PD
  (void)sqrt_pd(d2);
  return d2;
}

Mat d0_matrix(const Vec& theta, const ModelSpec& model) {
  const QuadRule rule = model_rule(model);
  return exp_moments(theta, model, rule).gram;
}

Mat variance_matrix(const DensityOracle& oracle, const ModelSpec& model,
                    double n) {
  const QuadRule rule = model_rule(model);
  const int d = model.dim();
  const int p = model.p();
  Vec x(d), psi(p);
  const Mat gram_k2f = integrate_mat(
      [&](const double* t, Mat& out) {
        const double k = eval_kernel(model.kernel, t, d);
        if (k <= 0.0) {
          out.setZero();
          return;
        }
        for (int j = 0; j < d; ++j) x[j] = model.x0[j] + t[j] * model.h;
        eval_basis(model.basis, t, psi);
        out = (k * k * oracle.density(x.data())) * psi * psi.transpose();
      },
      rule, p);
  const Vec u = window_mean_f(oracle, model, rule);
  const double hdv = hd(model);
  return n * (hdv * gram_k2f - hdv * hdv * u * u.transpose());
}

double oscillation(const DensityOracle& oracle, const ModelSpec& model) {
  const double f0 = oracle.density(model.x0);
  if (!(f0 > 0.0)) raise(Errc::bad_input, "density vanishes at x0");
  const int d = model.dim();
  Vec x(d);
  const auto sup = sup_on_cube(
      [&](const double* t) {
        for (int j = 0; j < d; ++j) x[j] = model.x0[j] + t[j] * model.h;
        return std::abs(1.0 - oracle.density(x.data()) / f0);
      },
      d);
  return sup.value;
}

double bias_constant(const DensityOracle& oracle, const ModelSpec& model) {
  const Vec bullet = theta_bullet(oracle, model).theta;
  const int d = model.dim();
  Vec x(d), psi(model.p());
  // Symmetric sup of the Taylor remainder, so both B and 1/B bound the ratio.
  const auto sup = sup_on_cube(
      [&](const double* t) {
        for (int j = 0; j < d; ++j) x[j] = model.x0[j] + t[j] * model.h;
        eval_basis(model.basis, t, psi);
        const double phi = oracle.log_density(x.data());
        if (!std::isfinite(phi)) return std::numeric_limits<double>::infinity();
        return std::abs(phi - psi.dot(bullet));
      },
      d);
  return std::exp(sup.value);
}

std::pair<double, double> window_moments(const DensityOracle& oracle,
                                         const ModelSpec& model) {
  const QuadRule rule = model_rule(model);
  const int d = model.dim();
  Vec x(d);
  const double m1 = integrate(
      [&](const double* t) {
        const double k = eval_kernel(model.kernel, t, d);
        if (k <= 0.0) return 0.0;
        for (int j = 0; j < d; ++j) x[j] = model.x0[j] + t[j] * model.h;
        return k * oracle.density(x.data());
      },
      rule);
  const double m2 = integrate(
      [&](const double* t) {
        const double k = eval_kernel(model.kernel, t, d);
        if (k <= 0.0) return 0.0;
        for (int j = 0; j < d; ++j) x[j] = model.x0[j] + t[j] * model.h;
        const double f = oracle.density(x.data());
        return k * f * f;
      },
      rule);
  const double hdv = hd(model);
  return {hdv * m1, hdv * m2};
}

PopulationSummary population_summary(const DensityOracle& oracle,
                                     const ModelSpec& model, long n) {
  PopulationSummary s;
  s.n = n;
  s.theta_circ = theta_circ(oracle, model);
  s.f0 = oracle.density(model.x0);
  s.theta_star = theta_star(oracle, model);
  s.theta_bullet = theta_bullet(oracle, model);
  s.D2 = info_matrix(s.theta_star.theta, model, static_cast<double>(n));
  s.V2 = variance_matrix(oracle, model, static_cast<double>(n));
  s.d02 = s.D2 / (static_cast<double>(n) * hd(model));
  s.c_fh = oscillation(oracle, model);
  s.B_ph = bias_constant(oracle, model);
  std::tie(s.pr1, s.pr2) = window_moments(oracle, model);
  const QuadRule rule = model_rule(model);
  const int d = model.dim();
  const int p = model.p();
  Vec x(d), psi(p);
  s.gram_f = integrate_mat(
      [&](const double* t, Mat& out) {
        const double k = eval_kernel(model.kernel, t, d);
        if (k <= 0.0) {
          out.setZero();
          return;
        }
        for (int j = 0; j < d; ++j) x[j] = model.x0[j] + t[j] * model.h;
        eval_basis(model.basis, t, psi);
        out = (k * oracle.density(x.data())) * psi * psi.transpose();
      },
      rule, p);
  s.win_mean_f = window_mean_f(oracle, model, rule);
  s.IK = kernel_mass(model);
  return s;
}

}  // namespace locdens
