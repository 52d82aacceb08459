#include "locdens/certificates.hpp"

#include <cmath>

#include "locdens/linalg.hpp"

namespace locdens {

namespace {

double hd(const ModelSpec& model) { return std::pow(model.h, model.dim()); }

Mat kernel_gram(const ModelSpec& model) {
  const QuadRule rule = model_rule(model);
  const int d = model.dim();
  const int p = model.p();
  Vec psi(p);
  return integrate_mat(
      [&](const double* t, Mat& out) {
        const double k = eval_kernel(model.kernel, t, d);
        if (k <= 0.0) {
          out.setZero();
          return;
        }
        eval_basis(model.basis, t, psi);
        out = k * psi * psi.transpose();
      },
      rule, p);
}

double sup_quadratic_form(const ModelSpec& model, const Mat& minv,
                          bool kernel_sq_weight) {
  const int d = model.dim();
  const int p = model.p();
  Vec psi(p);
  return sup_on_cube(
             [&](const double* t) {
               eval_basis(model.basis, t, psi);
               double v = psi.dot(minv * psi);
               if (kernel_sq_weight) {
                 const double k = eval_kernel(model.kernel, t, d);
                 v *= k * k;
               }
               return v;
             },
             d)
      .value;
}

}  // namespace

double c1_squared(const ModelSpec& model) {
  const Mat minv = inv_pd(kernel_gram(model));
  const double sup = sup_quadratic_form(model, minv, false);
  if (model.dim() == 1 && model.kernel.kind == KernelKind::indicator &&
      model.basis.kind == BasisKind::polynomial) {
    const double closed = 0.5 * model.p() * model.p();
    if (std::abs(sup - closed) > 1e-8 * std::max(1.0, closed))
      raise(Errc::bad_input, "c1^2 grid value drifted from p^2/2: " +
                                 std::to_string(sup));
    return closed;
  }
  return sup;
}

double c2_squared(const ModelSpec& model) {
  // K = 1 on the whole support cube, so the K^2 weight changes nothing.
  if (model.kernel.kind == KernelKind::indicator) return c1_squared(model);
  const Mat minv = inv_pd(kernel_gram(model));
  return sup_quadratic_form(model, minv, true);
}

PhiConstants phi_constants(double f0, double c_fh, double B_ph,
                           const ModelSpec& model) {
  if (!(f0 > 0.0)) raise(Errc::bad_input, "f0 must be positive");
  if (c_fh < 0.0 || B_ph < 1.0)
    raise(Errc::bad_input, "need c_fh >= 0 and B_ph >= 1");
  if (c_fh >= 1.0)
    raise(Errc::oscillation_too_large,
          "c_fh = " + std::to_string(c_fh) + " >= 1");
  const double ik = kernel_mass(model);
  const double logf0 = std::log(f0);

  double bracket = -std::numeric_limits<double>::infinity();
  for (const double s : {+1.0, -1.0}) {
    const double v = (1.0 + s) * c_fh * logf0 - s * c_fh +
                     (1.0 + s * c_fh) * std::log1p(s * c_fh);
    bracket = std::max(bracket, v);
  }

  PhiConstants out;
  double phi1_sq = 2.0 * ik * bracket;
  if (phi1_sq < 0.0) {
    // The bracket can dip below zero for f0 < 1; a squared norm bound is
    // clamped at zero and the clamp recorded in the certificate.
    phi1_sq = 0.0;
    out.phi1_clamped = true;
  }
  out.phi1 = std::sqrt(phi1_sq);
  const double dB = c_fh - std::log(B_ph);
  out.phi2 = std::sqrt(ik * f0 * f0 * f0 * dB * dB);

  const double c1 = std::sqrt(c1_squared(model));
  const double c1p1 = c1 * out.phi1;
  double eps1 = std::numeric_limits<double>::infinity();
  if (c1p1 < 1.0) eps1 = c1p1 / std::sqrt(1.0 - c1p1);
  out.epsilon = std::max(eps1, c1 * out.phi2);
  return out;
}

double a_bound(double B_ph, double c_fh, double f0, double epsilon,
               const ModelSpec& model) {
  if (!(epsilon < 1.0))
    raise(Errc::epsilon_too_large,
          "epsilon = " + std::to_string(epsilon) + " >= 1");
  const double c1 = std::sqrt(c1_squared(model));
  const double ik = kernel_mass(model);
  const double p = model.p();
  const double expo = c1 * std::sqrt(p) * std::sqrt(ik) /
                      (1.0 - epsilon) * (1.0 + c_fh) * f0 *
                      std::abs(B_ph - 1.0);
  return std::sqrt(B_ph * std::exp(expo));
}

double a_exact(const Mat& D2, const Mat& V2) {
  return std::sqrt(std::max(0.0, lambda_max_quotient(V2, D2)));
}

double c_vf_bound(double c_fh, double f0, double pr1, const ModelSpec& model) {
  if (c_fh >= 1.0)
    raise(Errc::oscillation_too_large,
          "c_fh = " + std::to_string(c_fh) + " >= 1");
  if (pr1 >= 1.0 - 1e-12)
    raise(Errc::window_mass_one, "pr1 = " + std::to_string(pr1));
  return std::sqrt(c2_squared(model) / ((1.0 - c_fh) * f0) +
                   hd(model) / (1.0 - pr1));
}

CvfResult c_vf(const PopulationSummary& summary, const ModelSpec& model) {
  if (summary.pr1 >= 1.0 - 1e-12)
    raise(Errc::window_mass_one, "pr1 = " + std::to_string(summary.pr1));
  const Mat vinv =
      sherman_morrison_inv(summary.gram_f, summary.win_mean_f, hd(model));
  const int d = model.dim();
  const int p = model.p();
  Vec psi(p);
  CvfResult out;
  out.exact = std::sqrt(sup_on_cube(
                            [&](const double* t) {
                              const double k =
                                  eval_kernel(model.kernel, t, d);
                              if (k <= 0.0) return 0.0;
                              eval_basis(model.basis, t, psi);
                              return k * k * psi.dot(vinv * psi);
                            },
                            d)
                            .value);
  out.bound = c_vf_bound(summary.c_fh, summary.f0, summary.pr1, model);
  if (out.exact > out.bound + 1e-8)
    raise(Errc::bad_input,
          "C_Vf exact exceeds its inequality bound: " +
              std::to_string(out.exact) + " > " + std::to_string(out.bound));
  return out;
}

std::pair<double, double> choose_g_nu0(double C_Vf, double n, double h, int d,
                                       int p) {
  const double nh3d = n * std::pow(h, 3 * d);
  if (!(nh3d > 0.0)) raise(Errc::bad_input, "need n h^d > 0");
  const double g = p * std::sqrt(nh3d) / (16.0 * C_Vf * C_Vf * C_Vf);
  const double nu0 = std::sqrt(2.0 * p);
  return {g, nu0};
}

double zeta_fn(int p, double z, double a, double nu0, double factor) {
  if (!(z > 0.0)) raise(Errc::bad_input, "z must be positive");
  return factor * a * nu0 * (std::sqrt(static_cast<double>(p)) +
                             std::sqrt(2.0 * z));
}

double r0_fn(int p, double z, double a, double nu0, double factor) {
  return 4.0 * zeta_fn(p, z, a, nu0, factor);
}

double delta_n_fn(double r0, double c1, double phi1, double f0, double n,
                  double h, int d) {
  const double c1p1 = c1 * phi1;
  if (!(c1p1 < 1.0))
    raise(Errc::phi1_too_large, "c1*phi1 = " + std::to_string(c1p1));
  const double eff = f0 * n * std::pow(h, d);
  return std::expm1(c1 * r0 / (std::sqrt(1.0 - c1p1) * std::sqrt(eff)));
}

Certificate check_conditions(const PopulationSummary& summary,
                             const ModelSpec& model, long n, double z,
                             CertOptions opts) {
  Certificate cert;
  cert.p = model.p();
  cert.d = model.dim();
  cert.n = n;
  cert.h = model.h;
  cert.f0 = summary.f0;
  cert.IK = summary.IK;
  cert.eff_sample = static_cast<double>(n) * hd(model);
  cert.c_fh = summary.c_fh;
  cert.B_ph = summary.B_ph;
  cert.z = z;
  cert.zeta_factor = opts.zeta_factor;

  cert.c1 = std::sqrt(c1_squared(model));
  cert.c2 = std::sqrt(c2_squared(model));

  const PhiConstants phi =
      phi_constants(summary.f0, summary.c_fh, summary.B_ph, model);
  cert.phi1 = phi.phi1;
  cert.phi2 = phi.phi2;
  cert.phi1_clamped = phi.phi1_clamped;
  cert.epsilon = phi.epsilon;

  cert.a = a_bound(summary.B_ph, summary.c_fh, summary.f0, phi.epsilon, model);
  cert.a_exact = a_exact(summary.D2, summary.V2);

  const CvfResult cvf = c_vf(summary, model);
  cert.C_Vf = cvf.exact;
  cert.C_Vf_bound = cvf.bound;

  std::tie(cert.g, cert.nu0) = choose_g_nu0(
      cvf.exact, static_cast<double>(n), model.h, model.dim(), model.p());

  cert.z_within_g = z <= cert.g * cert.g / 4.0;
  if (!cert.z_within_g && opts.strict_z)
    raise(Errc::z_exceeds_g2_over_4,
          "z = " + std::to_string(z) + " > g^2/4 = " +
              std::to_string(cert.g * cert.g / 4.0));

  cert.zeta = zeta_fn(cert.p, z, cert.a, cert.nu0, opts.zeta_factor);
  cert.r0 = 4.0 * cert.zeta;
  cert.delta_n = delta_n_fn(cert.r0, cert.c1, cert.phi1, summary.f0,
                            static_cast<double>(n), model.h, model.dim());
  cert.diamond = cert.r0 * cert.delta_n;

  cert.conditions.I = cert.a_exact <= cert.a + 1e-8;
  cert.conditions.L0 = std::isfinite(cert.delta_n) && cert.delta_n >= 0.0;
  cert.conditions.ED0 = cert.g > 0.0 && std::isfinite(cert.nu0);
  // Tested directly rather than through the printed sample-size threshold.
  cert.conditions.C = cert.r0 * (1.0 - cert.delta_n) >= 2.0 * cert.zeta;
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  cert.conditions.small_bandwidth =
      cert.c1 * cert.phi1 < golden && cert.c1 * cert.phi2 < 1.0;
  cert.conditions.eff_sample_size =
      std::sqrt(cert.eff_sample) >=
      summary.f0 * 4.0 * cert.c1 * cert.zeta /
          (std::log(1.5) * std::sqrt(1.0 - cert.c1 * cert.phi1));

  if (!cert.conditions.C) {
    cert.degraded = true;
    cert.zeta_n = std::sqrt(1.0 - cert.c1 * cert.phi1) *
                  std::sqrt(cert.eff_sample) * std::log(1.5) /
                  (4.0 * cert.c1 * summary.f0);
    cert.r_n = 4.0 * cert.zeta_n;
  }

  cert.prob_bound =
      2.0 * std::exp(-z) + 8.4 * std::exp(-cert.g * cert.g / 4.0);
  return cert;
}

TheoremBounds theorem_bounds(const Certificate& cert) {
  TheoremBounds b;
  b.concentration_prob = cert.prob_bound;
  b.fisher_bound = cert.diamond;
  b.wilks_bound_theta = 2.0 * cert.diamond;
  b.wilks_bound_xi = 3.0 * cert.diamond;
  return b;
}

}  // namespace locdens
