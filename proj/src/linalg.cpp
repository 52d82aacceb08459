#include "locdens/linalg.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

namespace locdens {

namespace {

void check_symmetric(const Mat& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale)
    raise(Errc::bad_input, "matrix is not symmetric");
}

Eigen::SelfAdjointEigenSolver<Mat> eigensolve(const Mat& m) {
  check_symmetric(m);
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  if (es.info() != Eigen::Success)
    raise(Errc::bad_input, "symmetric eigensolver failed");
  return es;
}

void require_pd(const Vec& eigvals) {
  const double lam_min = eigvals[0];
  const double lam_max = eigvals[eigvals.size() - 1];
  if (!(lam_min > 1e-12 * std::max(lam_max, 0.0)))
    raise(Errc::not_positive_definite,
          "smallest eigenvalue " + std::to_string(lam_min));
}

}  // namespace

Vec eigvals_sym(const Mat& m) { return eigensolve(m).eigenvalues(); }

Mat sqrt_pd(const Mat& m) {
  auto es = eigensolve(m);
  require_pd(es.eigenvalues());
  return es.operatorSqrt();
}

Mat inv_pd(const Mat& m) {
  auto es = eigensolve(m);
  require_pd(es.eigenvalues());
  return es.eigenvectors() *
         es.eigenvalues().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

Vec solve_pd(const Mat& m, const Vec& v) {
  auto es = eigensolve(m);
  require_pd(es.eigenvalues());
  return es.eigenvectors() *
         (es.eigenvectors().transpose() * v).cwiseQuotient(es.eigenvalues());
}

double lambda_max_quotient(const Mat& a2, const Mat& b2) {
  const Mat binv = inv_pd(sqrt_pd(b2));
  const Mat q = binv * a2 * binv;
  const Vec lam = eigvals_sym(0.5 * (q + q.transpose()));
  return lam[lam.size() - 1];
}

bool eigenvalue_interval_check(const Mat& a2, const Mat& b2,
                               double lam_ratio_min, double lam_ratio_max) {
  if (!(lam_ratio_min <= lam_ratio_max) || !std::isfinite(lam_ratio_min) ||
      !std::isfinite(lam_ratio_max))
    raise(Errc::bad_input, "invalid ratio interval");
  const Mat binv = inv_pd(sqrt_pd(b2));
  const Mat q = binv * a2 * binv;
  const Vec lam = eigvals_sym(0.5 * (q + q.transpose()));
  for (long i = 0; i < lam.size(); ++i) {
    const double tol = 1e-8 * (1.0 + std::abs(lam[i]));
    if (lam[i] < lam_ratio_min - tol || lam[i] > lam_ratio_max + tol)
      return false;
  }
  return true;
}

double matrix_cauchy_gap(const std::function<void(const double*, Vec&)>& psi,
                         const std::function<double(const double*)>& delta,
                         const QuadRule& rule, int p) {
  Mat gram = Mat::Zero(p, p);
  Vec cross = Vec::Zero(p);
  double d2 = 0.0;
  Vec buf(p);
  for (long i = 0; i < rule.size(); ++i) {
    const double* t = rule.nodes.row(i).data();
    psi(t, buf);
    const double dv = delta(t);
    detail::check_finite(dv);
    detail::check_finite(buf.sum());
    const double w = rule.weights[i];
    gram.noalias() += w * buf * buf.transpose();
    cross.noalias() += w * dv * buf;
    d2 += w * dv * dv;
  }
  const Mat gap = gram * d2 - cross * cross.transpose();
  const Vec lam = eigvals_sym(0.5 * (gap + gap.transpose()));
  return lam[0];
}

Mat sherman_morrison_inv(const Mat& a, const Vec& u, double lam) {
  const Mat ainv = inv_pd(a);
  const Vec au = ainv * u;
  const double denom = 1.0 - lam * u.dot(au);
  if (std::abs(denom) < 1e-12)
    raise(Errc::singular_update,
          "rank-one denominator " + std::to_string(denom));
  return ainv + (lam / denom) * (au * au.transpose());
}

}  // namespace locdens
