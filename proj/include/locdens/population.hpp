#pragma once

#include <utility>
#include <vector>

#include "locdens/likelihood.hpp"
#include "locdens/model.hpp"

namespace locdens {

// Known density with analytic log-density derivatives where available.
// Gaussian and uniform families carry closed forms; mixtures fall back to
// high-order central finite differences with Richardson extrapolation.
class DensityOracle {
public:
  enum class Kind { uniform, gaussian, gaussian_mixture };

  static DensityOracle uniform(const Vec& lo, const Vec& hi);
  static DensityOracle gaussian(const Vec& mu, const Vec& sigma);
  static DensityOracle gaussian_mixture(const std::vector<double>& weights,
                                        const std::vector<Vec>& means,
                                        const std::vector<Vec>& sigmas);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }

  double density(const double* x) const;
  double density(const Vec& x) const { return density(x.data()); }
  double log_density(const double* x) const;
  double log_density(const Vec& x) const { return log_density(x.data()); }

  // d^alpha log f at x0. Throws DerivativeUnavailable for mixtures when the
  // finite-difference fallback has been disabled.
  double log_density_deriv(const Vec& x0, const MultiIndex& alpha) const;

  void set_fd_fallback(bool enabled) { fd_enabled_ = enabled; }

  // Components exposed for the samplers and report serialization.
  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<Vec>& means() const { return means_; }
  const std::vector<Vec>& sigmas() const { return sigmas_; }

private:
  DensityOracle() = default;

  double fd_deriv(const Vec& x0, const MultiIndex& alpha) const;

  Kind kind_ = Kind::uniform;
  int dim_ = 1;
  bool fd_enabled_ = true;
  Vec lo_, hi_;             // uniform box
  double log_f0_ = 0.0;     // uniform log-density value
  std::vector<double> weights_;
  std::vector<Vec> means_;
  std::vector<Vec> sigmas_;
  double sigma_min_ = 1.0;
};

struct PopulationSummary {
  ParamVector theta_star;
  ParamVector theta_bullet;
  ParamVector theta_circ;
  Mat D2;    // information matrix at theta_star
  Mat V2;    // variance of the score
  Mat d02;   // D2 / (n h^d)
  double c_fh = 0.0;
  double B_ph = 1.0;
  double pr1 = 0.0;
  double pr2 = 0.0;
  double f0 = 0.0;
  // Internal extras reused by the certificate stack.
  Mat gram_f;      // int K f Psi Psi^T dt
  Vec win_mean_f;  // int K f Psi dt
  double IK = 0.0;
  long n = 0;
};

double expected_likelihood(const Vec& theta, const DensityOracle& oracle,
                           const ModelSpec& model, double n);

ParamVector theta_star(const DensityOracle& oracle, const ModelSpec& model);
ParamVector theta_bullet(const DensityOracle& oracle, const ModelSpec& model);
ParamVector theta_circ(const DensityOracle& oracle, const ModelSpec& model);

Mat info_matrix(const Vec& theta, const ModelSpec& model, double n);
Mat d0_matrix(const Vec& theta, const ModelSpec& model);
Mat variance_matrix(const DensityOracle& oracle, const ModelSpec& model,
                    double n);

double oscillation(const DensityOracle& oracle, const ModelSpec& model);
double bias_constant(const DensityOracle& oracle, const ModelSpec& model);
std::pair<double, double> window_moments(const DensityOracle& oracle,
                                         const ModelSpec& model);

PopulationSummary population_summary(const DensityOracle& oracle,
                                     const ModelSpec& model, long n);

}  // namespace locdens
