#pragma once

#include <string>
#include <utility>

#include "locdens/linalg.hpp"
#include "locdens/model.hpp"
#include "locdens/quadrature.hpp"

namespace locdens {

struct Sample {
  Mat points;  // n x d
  std::string source;

  long n() const { return points.rows(); }
  int dim() const { return static_cast<int>(points.cols()); }
};

// Plain text, one observation per line, d whitespace-separated decimal
// floats; lines beginning with '#' are ignored.
Sample load_sample(const std::string& path, int dim);

enum class ParamRole { mle, target, unbiased, auxiliary, free };

struct ParamVector {
  Vec theta;
  ParamRole role = ParamRole::free;
};

struct FitDiagnostics {
  int iterations = 0;
  double final_grad_norm = 0.0;  // in the inverse-Hessian metric
  long window_count = 0;
  bool converged = false;
  bool clamp_active = false;     // exp overflow guard fired at the optimum
  double log_likelihood = 0.0;
};

struct FitOptions {
  // tol < 0 selects the default rule 1e-10 * (1 + |L|); tol_absolute uses
  // the given value directly, which the simulation engine relies on.
  double tol = -1.0;
  bool tol_absolute = false;
  int max_iter = 100;
};

// Sufficient statistics of the sample for the localized likelihood: the
// stochastic part is linear in theta, so sum_i K_i Psi_i is all that the
// data contributes.
struct LocalData {
  Vec sum_kpsi;
  long window_count = 0;
  long n = 0;
};

LocalData localize(const Sample& sample, const ModelSpec& model);

// Exponential moments of the model over the window: integrals of
// K exp(Psi^T theta) times {1, Psi, Psi Psi^T}. Exponents are clamped at 700
// and the clamp is reported so diverging iterates surface as errors.
struct ExpMoments {
  double mass = 0.0;
  Vec mean;
  Mat gram;
  bool clamped = false;
};

ExpMoments exp_moments(const Vec& theta, const ModelSpec& model,
                       const QuadRule& rule);

double kernel_mass(const ModelSpec& model);  // I_K = integral of K over the cube

double log_likelihood(const Vec& theta, const LocalData& data,
                      const ModelSpec& model);
double log_likelihood(const Vec& theta, const Sample& sample,
                      const ModelSpec& model);

Vec gradient(const Vec& theta, const LocalData& data, const ModelSpec& model);
Vec gradient(const Vec& theta, const Sample& sample, const ModelSpec& model);

// Hessian of L is data-free: -n h^d int K Psi Psi^T exp(Psi^T theta) dt.
Mat hessian(const Vec& theta, const ModelSpec& model, long n);

std::pair<ParamVector, FitDiagnostics> fit_mle(const LocalData& data,
                                               const ModelSpec& model,
                                               FitOptions opts = {});
std::pair<ParamVector, FitDiagnostics> fit_mle(const Sample& sample,
                                               const ModelSpec& model,
                                               FitOptions opts = {});

double excess(const LocalData& data, const ModelSpec& model,
              const Vec& theta_mle, const Vec& theta_ref);
double excess(const Sample& sample, const ModelSpec& model,
              const Vec& theta_mle, const Vec& theta_ref);

namespace detail {

// Damped Newton ascent for strictly concave objectives; shared between the
// empirical fit and the population solver.
struct NewtonProblem {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
  std::function<Mat(const Vec&)> neg_hess;  // positive definite
};

struct NewtonResult {
  Vec theta;
  int iterations = 0;
  double grad_norm = 0.0;  // sqrt(g^T H^-1 g)
  bool converged = false;
};

NewtonResult newton_maximize(const NewtonProblem& prob, const Vec& theta0,
                             double tol, bool tol_absolute, int max_iter);

}  // namespace detail

}  // namespace locdens
