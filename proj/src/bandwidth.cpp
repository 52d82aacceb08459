#include "locdens/bandwidth.hpp"

#include <cmath>

namespace locdens {

std::vector<double> geometric_grid(double h_min, double h_max, int count) {
  if (!(h_min > 0.0) || !(h_max >= h_min) || count < 1)
    raise(Errc::bad_input, "bad bandwidth grid");
  std::vector<double> grid;
  grid.reserve(static_cast<size_t>(count));
  if (count == 1) {
    grid.push_back(h_min);
    return grid;
  }
  const double ratio = std::log(h_max / h_min) / (count - 1);
  for (int i = 0; i < count; ++i)
    grid.push_back(h_min * std::exp(ratio * i));
  return grid;
}

namespace {

struct LocalConstants {
  double f0, c_fh, B_ph;
};

std::pair<double, double> components_from(const LocalConstants& lc,
                                          const ModelSpec& model, double z,
                                          long n) {
  const PhiConstants phi = phi_constants(lc.f0, lc.c_fh, lc.B_ph, model);
  const double c1 = std::sqrt(c1_squared(model));
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  if (!(c1 * phi.phi1 < golden && c1 * phi.phi2 < 1.0))
    raise(Errc::infeasible_bandwidth,
          "small-bandwidth gate fails at h = " + std::to_string(model.h));
  const double p = model.p();
  const double ik = kernel_mass(model);
  const double bias = std::sqrt(p) * std::sqrt(ik) / (1.0 - phi.epsilon) *
                      (1.0 + lc.c_fh) * lc.f0 * std::abs(lc.B_ph - 1.0);
  const double a = a_bound(lc.B_ph, lc.c_fh, lc.f0, phi.epsilon, model);
  const double nu0 = std::sqrt(2.0 * p);
  const double r0 = r0_fn(model.p(), z, a, nu0);
  const double stoch =
      r0 / std::sqrt(static_cast<double>(n) * std::pow(model.h, model.dim()));
  return {bias, stoch};
}

BandwidthReport select_from(
    const std::vector<double>& h_grid, const std::string& mode,
    const std::function<std::pair<double, double>(double)>& components) {
  if (h_grid.empty()) raise(Errc::bad_input, "empty bandwidth grid");
  BandwidthReport report;
  report.mode = mode;
  for (double h : h_grid) {
    BandwidthPoint pt;
    pt.h = h;
    try {
      std::tie(pt.bias_term, pt.stoch_term) = components(h);
      pt.total = pt.bias_term + pt.stoch_term;
      pt.feasible = true;
    } catch (const Error& e) {
      pt.feasible = false;
      pt.infeasible_reason = errc_name(e.code());
    }
    report.grid.push_back(pt);
  }
  // Ties break toward smaller h; the grid is ascending.
  for (size_t i = 0; i < report.grid.size(); ++i) {
    const auto& pt = report.grid[i];
    if (!pt.feasible) continue;
    if (report.star_index < 0 ||
        pt.total < report.grid[static_cast<size_t>(report.star_index)].total)
      report.star_index = static_cast<int>(i);
  }
  if (report.star_index < 0)
    raise(Errc::no_feasible_bandwidth, "no feasible bandwidth on the grid");
  report.h_star = report.grid[static_cast<size_t>(report.star_index)].h;
  return report;
}

}  // namespace

std::pair<double, double> bound_components(double h,
                                           const DensityOracle& oracle,
                                           const ModelTemplate& tmpl, double z,
                                           long n) {
  const ModelSpec model = tmpl.at(h);
  LocalConstants lc;
  lc.f0 = oracle.density(model.x0);
  lc.c_fh = oscillation(oracle, model);
  lc.B_ph = bias_constant(oracle, model);
  return components_from(lc, model, z, n);
}

BandwidthReport select_bandwidth(const DensityOracle& oracle,
                                 const ModelTemplate& tmpl, long n, double z,
                                 const std::vector<double>& h_grid) {
  return select_from(h_grid, "oracle", [&](double h) {
    return bound_components(h, oracle, tmpl, z, n);
  });
}

PilotSummary plugin_pilot(const Sample& sample, const ModelTemplate& tmpl,
                          double pilot_h) {
  ModelTemplate pilot_tmpl = tmpl;
  pilot_tmpl.degree = tmpl.degree + 1;
  const ModelSpec pilot_model = pilot_tmpl.at(pilot_h);
  auto [fit, diag] = fit_mle(sample, pilot_model);

  PilotSummary pilot;
  pilot.theta = fit.theta;
  pilot.h_pilot = pilot_h;
  pilot.pilot_degree = pilot_tmpl.degree;
  pilot.f0_hat = std::exp(fit.theta[0]);
  pilot.n = sample.n();
  pilot.window_count = diag.window_count;
  return pilot;
}

PluginLocal plugin_local_constants(const PilotSummary& pilot,
                                   const ModelTemplate& tmpl, double h) {
  const int d = static_cast<int>(tmpl.x0.size());
  const BasisSpec pilot_basis =
      make_basis(BasisKind::polynomial, pilot.pilot_degree, d);
  const BasisSpec target_basis =
      make_basis(BasisKind::polynomial, tmpl.degree, d);
  const int p = target_basis.size();
  const double scale = h / pilot.h_pilot;

  // The target basis index set is a prefix of the pilot's (degree-major
  // ordering), so the surrogate Taylor coefficients rescale directly.
  Vec bullet(p);
  for (int k = 0; k < p; ++k) {
    int order = 0;
    for (int a : target_basis.index_set[static_cast<size_t>(k)]) order += a;
    bullet[k] = pilot.theta[k] * std::pow(scale, order);
  }

  Vec tp(d), psi_pilot(pilot_basis.size()), psi_target(p);
  auto phi_hat = [&](const double* t) {
    for (int j = 0; j < d; ++j) tp[j] = t[j] * scale;
    eval_basis(pilot_basis, tp.data(), psi_pilot);
    return psi_pilot.dot(pilot.theta);
  };

  PluginLocal lc;
  lc.f0 = pilot.f0_hat;
  lc.c_fh = sup_on_cube(
                [&](const double* t) {
                  return std::abs(1.0 - std::exp(phi_hat(t) - pilot.theta[0]));
                },
                d)
                .value;
  lc.B_ph = std::exp(sup_on_cube(
                         [&](const double* t) {
                           eval_basis(target_basis, t, psi_target);
                           return std::abs(phi_hat(t) - psi_target.dot(bullet));
                         },
                         d)
                         .value);
  return lc;
}

std::pair<double, double> bound_components_plugin(double h,
                                                  const PilotSummary& pilot,
                                                  const ModelTemplate& tmpl,
                                                  double z, long n) {
  const ModelSpec model = tmpl.at(h);
  const PluginLocal plc = plugin_local_constants(pilot, tmpl, h);
  LocalConstants lc{plc.f0, plc.c_fh, plc.B_ph};
  return components_from(lc, model, z, n);
}

BandwidthReport select_bandwidth_plugin(const Sample& sample,
                                        const ModelTemplate& tmpl, double z,
                                        const std::vector<double>& h_grid) {
  if (h_grid.empty()) raise(Errc::bad_input, "empty bandwidth grid");
  const double pilot_h = 2.0 * h_grid.back();
  const PilotSummary pilot = plugin_pilot(sample, tmpl, pilot_h);
  return select_from(h_grid, "plugin", [&](double h) {
    return bound_components_plugin(h, pilot, tmpl, z, sample.n());
  });
}

}  // namespace locdens
