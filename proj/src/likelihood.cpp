#include "locdens/likelihood.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace locdens {

Sample load_sample(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) raise(Errc::bad_input, "cannot open data file '" + path + "'");
  std::vector<double> values;
  std::string line;
  long rows = 0;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    for (int j = 0; j < dim; ++j) {
      double v;
      if (!(ls >> v) || !std::isfinite(v))
        raise(Errc::bad_input, "bad value on data line " + std::to_string(rows + 1));
      values.push_back(v);
    }
    double extra;
    if (ls >> extra)
      raise(Errc::bad_input, "too many columns on data line " + std::to_string(rows + 1));
    ++rows;
  }
  if (rows == 0) raise(Errc::bad_input, "data file '" + path + "' is empty");
  Sample s;
  s.points.resize(rows, dim);
  for (long i = 0; i < rows; ++i)
    for (int j = 0; j < dim; ++j)
      s.points(i, j) = values[static_cast<size_t>(i * dim + j)];
  s.source = path;
  return s;
}

LocalData localize(const Sample& sample, const ModelSpec& model) {
  if (sample.dim() != model.dim())
    raise(Errc::bad_input, "sample dimension does not match model");
  const int d = model.dim();
  const int p = model.p();
  LocalData data;
  data.n = sample.n();
  data.sum_kpsi = Vec::Zero(p);

  // Neumaier-compensated accumulation keeps the score usable down to the
  // 1e-8 two-path identity even at n = 1e6.
  Vec comp = Vec::Zero(p);
  Vec t(d), psi(p);
  for (long i = 0; i < sample.n(); ++i) {
    for (int j = 0; j < d; ++j) t[j] = (sample.points(i, j) - model.x0[j]) / model.h;
    const double k = eval_kernel(model.kernel, t.data(), d);
    if (k <= 0.0) continue;
    ++data.window_count;
    eval_basis(model.basis, t.data(), psi);
    for (int c = 0; c < p; ++c) {
      const double term = k * psi[c];
      const double sum = data.sum_kpsi[c] + term;
      if (std::abs(data.sum_kpsi[c]) >= std::abs(term))
        comp[c] += (data.sum_kpsi[c] - sum) + term;
      else
        comp[c] += (term - sum) + data.sum_kpsi[c];
      data.sum_kpsi[c] = sum;
    }
  }
  data.sum_kpsi += comp;
  return data;
}

ExpMoments exp_moments(const Vec& theta, const ModelSpec& model,
                       const QuadRule& rule) {
  const int p = model.p();
  ExpMoments mom;
  mom.mean = Vec::Zero(p);
  mom.gram = Mat::Zero(p, p);
  Vec psi(p);
  for (long i = 0; i < rule.size(); ++i) {
    const double* t = rule.nodes.row(i).data();
    const double k = eval_kernel(model.kernel, t, model.dim());
    if (k <= 0.0) continue;
    eval_basis(model.basis, t, psi);
    double expo = psi.dot(theta);
    if (expo > 700.0) {
      expo = 700.0;
      mom.clamped = true;
    }
    const double w = rule.weights[i] * k * std::exp(expo);
    detail::check_finite(w);
    mom.mass += w;
    mom.mean.noalias() += w * psi;
    mom.gram.noalias() += w * psi * psi.transpose();
  }
  return mom;
}

double kernel_mass(const ModelSpec& model) {
  const QuadRule rule = model_rule(model);
  return integrate(
      [&](const double* t) { return eval_kernel(model.kernel, t, model.dim()); },
      rule);
}

namespace {

double hd(const ModelSpec& model) {
  return std::pow(model.h, model.dim());
}

}  // namespace

double log_likelihood(const Vec& theta, const LocalData& data,
                      const ModelSpec& model) {
  const QuadRule rule = model_rule(model);
  const ExpMoments mom = exp_moments(theta, model, rule);
  return data.sum_kpsi.dot(theta) -
         static_cast<double>(data.n) * hd(model) * mom.mass;
}

double log_likelihood(const Vec& theta, const Sample& sample,
                      const ModelSpec& model) {
  return log_likelihood(theta, localize(sample, model), model);
}

Vec gradient(const Vec& theta, const LocalData& data, const ModelSpec& model) {
  const QuadRule rule = model_rule(model);
  const ExpMoments mom = exp_moments(theta, model, rule);
  return data.sum_kpsi -
         static_cast<double>(data.n) * hd(model) * mom.mean;
}

Vec gradient(const Vec& theta, const Sample& sample, const ModelSpec& model) {
  return gradient(theta, localize(sample, model), model);
}

Mat hessian(const Vec& theta, const ModelSpec& model, long n) {
  const QuadRule rule = model_rule(model);
  const ExpMoments mom = exp_moments(theta, model, rule);
  return -static_cast<double>(n) * hd(model) * mom.gram;
}

namespace detail {

NewtonResult newton_maximize(const NewtonProblem& prob, const Vec& theta0,
                             double tol, bool tol_absolute, int max_iter) {
  NewtonResult res;
  res.theta = theta0;
  double value = prob.value(res.theta);
  for (int iter = 0; iter < max_iter; ++iter) {
    const Vec g = prob.grad(res.theta);
    const Mat nh = prob.neg_hess(res.theta);
    const Vec step = solve_pd(nh, g);
    const double g_norm = std::sqrt(std::max(0.0, g.dot(step)));
    res.grad_norm = g_norm;
    res.iterations = iter;
    const double thresh = tol_absolute ? tol : tol * (1.0 + std::abs(value));
    if (g_norm <= thresh) {
      res.converged = true;
      return res;
    }
    // Once the predicted gain g^T H^-1 g drops below the rounding
    // resolution of the objective, function comparisons are noise; the
    // iterate is in the quadratic basin and the bare Newton step converges.
    const double slope = g.dot(step);
    const double fp_noise = 64.0 * std::numeric_limits<double>::epsilon() *
                            (1.0 + std::abs(value));
    if (slope <= fp_noise) {
      res.theta += step;
      value = prob.value(res.theta);
      continue;
    }
    // Backtracking with the Armijo rule; the full step is kept whenever it
    // improves the objective.
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Vec cand = res.theta + t * step;
      const double cand_value = prob.value(cand);
      if (std::isfinite(cand_value) &&
          (cand_value > value || cand_value >= value + 0.1 * t * slope)) {
        res.theta = cand;
        value = cand_value;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      // No ascent direction left at line-search resolution: accept as
      // converged only if the gradient is already tiny.
      res.converged = g_norm <= std::max(thresh, 1e-8);
      return res;
    }
  }
  res.iterations = max_iter;
  return res;
}

}  // namespace detail

std::pair<ParamVector, FitDiagnostics> fit_mle(const LocalData& data,
                                               const ModelSpec& model,
                                               FitOptions opts) {
  if (data.window_count < 1)
    raise(Errc::empty_window, "no observation with positive kernel weight");
  const int p = model.p();
  const QuadRule rule = model_rule(model);
  const double ik = kernel_mass(model);
  const double nhd = static_cast<double>(data.n) * hd(model);

  // Exact local-constant solution as the starting point.
  Vec theta0 = Vec::Zero(p);
  theta0[0] = std::log(static_cast<double>(std::max<long>(data.window_count, 1)) /
                       (nhd * ik));

  detail::NewtonProblem prob;
  prob.value = [&](const Vec& th) {
    const ExpMoments mom = exp_moments(th, model, rule);
    return data.sum_kpsi.dot(th) - nhd * mom.mass;
  };
  prob.grad = [&](const Vec& th) {
    const ExpMoments mom = exp_moments(th, model, rule);
    return Vec(data.sum_kpsi - nhd * mom.mean);
  };
  prob.neg_hess = [&](const Vec& th) {
    const ExpMoments mom = exp_moments(th, model, rule);
    return Mat(nhd * mom.gram);
  };

  const double tol = opts.tol >= 0.0 ? opts.tol : 1e-10;
  const bool absolute = opts.tol >= 0.0 ? opts.tol_absolute : false;
  const auto res = detail::newton_maximize(prob, theta0, tol, absolute,
                                           opts.max_iter);

  FitDiagnostics diag;
  diag.iterations = res.iterations;
  diag.final_grad_norm = res.grad_norm;
  diag.window_count = data.window_count;
  diag.converged = res.converged;
  diag.log_likelihood = prob.value(res.theta);
  const ExpMoments final_mom = exp_moments(res.theta, model, rule);
  diag.clamp_active = final_mom.clamped;
  if (!res.converged)
    raise(Errc::max_iter_exceeded,
          "Newton did not converge in " + std::to_string(opts.max_iter) +
              " iterations (grad " + std::to_string(res.grad_norm) + ")");
  if (diag.clamp_active)
    raise(Errc::non_finite_integrand,
          "exp overflow guard active at convergence");
  return {ParamVector{res.theta, ParamRole::mle}, diag};
}

std::pair<ParamVector, FitDiagnostics> fit_mle(const Sample& sample,
                                               const ModelSpec& model,
                                               FitOptions opts) {
  return fit_mle(localize(sample, model), model, opts);
}

double excess(const LocalData& data, const ModelSpec& model,
              const Vec& theta_mle, const Vec& theta_ref) {
  return log_likelihood(theta_mle, data, model) -
         log_likelihood(theta_ref, data, model);
}

double excess(const Sample& sample, const ModelSpec& model,
              const Vec& theta_mle, const Vec& theta_ref) {
  return excess(localize(sample, model), model, theta_mle, theta_ref);
}

}  // namespace locdens
