#pragma once

#include <limits>

#include "locdens/population.hpp"

namespace locdens {

struct ConditionFlags {
  bool I = false;
  bool L0 = false;
  bool ED0 = false;
  bool C = false;
  bool small_bandwidth = false;
  bool eff_sample_size = false;
};

// Finite-sample constant stack for one (model, n, z) cell.
struct Certificate {
  int p = 0;
  int d = 1;
  long n = 0;
  double h = 0.0;
  double f0 = 0.0;
  double IK = 0.0;
  double eff_sample = 0.0;  // n h^d
  double c_fh = 0.0;
  double B_ph = 1.0;

  double c1 = 0.0;
  double c2 = 0.0;
  double phi1 = 0.0;
  double phi2 = 0.0;
  bool phi1_clamped = false;
  double epsilon = 0.0;
  double a = 0.0;
  double a_exact = std::numeric_limits<double>::quiet_NaN();
  double C_Vf = 0.0;
  double C_Vf_bound = 0.0;
  double g = 0.0;
  double nu0 = 0.0;
  double zeta = 0.0;
  double r0 = 0.0;
  double delta_n = 0.0;
  double diamond = 0.0;

  ConditionFlags conditions;
  double prob_bound = 0.0;
  double z = 0.0;
  bool degraded = false;
  double zeta_n = std::numeric_limits<double>::quiet_NaN();
  double r_n = std::numeric_limits<double>::quiet_NaN();
  bool z_within_g = true;
  double zeta_factor = 1.0;
};

struct CertOptions {
  double zeta_factor = 1.0;  // quantile prefactor override
  // When set, z above g^2/4 raises ZExceedsG2Over4 instead of being recorded
  // as a failed gate; the theorem bound formula stays valid (it merely
  // becomes vacuous), which the simulation harness relies on.
  bool strict_z = false;
};

// sup_t Psi^T [int K Psi Psi^T]^{-1} Psi over the cube; for the 1-D
// polynomial basis with the indicator kernel the closed form p^2/2 is
// cross-checked against the grid value.
double c1_squared(const ModelSpec& model);
// Same with the K(t)^2 weight in front.
double c2_squared(const ModelSpec& model);

struct PhiConstants {
  double phi1 = 0.0;
  double phi2 = 0.0;
  double epsilon = 0.0;
  bool phi1_clamped = false;
};

PhiConstants phi_constants(double f0, double c_fh, double B_ph,
                           const ModelSpec& model);

double a_bound(double B_ph, double c_fh, double f0, double epsilon,
               const ModelSpec& model);
double a_exact(const Mat& D2, const Mat& V2);

struct CvfResult {
  double exact = 0.0;
  double bound = 0.0;
};

// Exact value via the rank-one update of the f-weighted Gram matrix, plus
// the model-only inequality bound.
CvfResult c_vf(const PopulationSummary& summary, const ModelSpec& model);
double c_vf_bound(double c_fh, double f0, double pr1, const ModelSpec& model);

// g chosen so that nu0^2 = p + 16 g C^3 / sqrt(n h^{3d}) collapses to 2p.
std::pair<double, double> choose_g_nu0(double C_Vf, double n, double h, int d,
                                       int p);

double zeta_fn(int p, double z, double a, double nu0, double factor = 1.0);
double r0_fn(int p, double z, double a, double nu0, double factor = 1.0);

double delta_n_fn(double r0, double c1, double phi1, double f0, double n,
                  double h, int d);

Certificate check_conditions(const PopulationSummary& summary,
                             const ModelSpec& model, long n, double z,
                             CertOptions opts = {});

struct TheoremBounds {
  double concentration_prob = 0.0;
  double fisher_bound = 0.0;
  double wilks_bound_theta = 0.0;  // 2 diamond
  double wilks_bound_xi = 0.0;     // 3 diamond
};

TheoremBounds theorem_bounds(const Certificate& cert);

}  // namespace locdens
