#pragma once

#include <string>
#include <utility>
#include <vector>

#include "locdens/certificates.hpp"
#include "locdens/montecarlo.hpp"
#include "locdens/population.hpp"

namespace locdens {

// Model with the bandwidth left open.
struct ModelTemplate {
  Vec x0 = Vec::Zero(1);
  int degree = 2;
  KernelKind kernel = KernelKind::indicator;
  int quad_order = 0;

  ModelSpec at(double h) const {
    return make_model(x0, h, degree, kernel, quad_order);
  }
};

struct BandwidthPoint {
  double h = 0.0;
  double bias_term = 0.0;
  double stoch_term = 0.0;
  double total = 0.0;
  bool feasible = false;
  std::string infeasible_reason;
};

struct BandwidthReport {
  std::vector<BandwidthPoint> grid;
  int star_index = -1;
  double h_star = 0.0;
  std::string mode;  // "oracle" or "plugin"
};

std::vector<double> geometric_grid(double h_min, double h_max, int count);

// bias = the small-bias theorem right-hand side (an O(h^p) quantity);
// stoch = r0(z)/sqrt(n h^d), the concentration radius in the d0 metric.
// Throws InfeasibleBandwidth when the small-bandwidth gate fails at h.
std::pair<double, double> bound_components(double h,
                                           const DensityOracle& oracle,
                                           const ModelTemplate& tmpl, double z,
                                           long n);

BandwidthReport select_bandwidth(const DensityOracle& oracle,
                                 const ModelTemplate& tmpl, long n, double z,
                                 const std::vector<double>& h_grid);

// Local fit of degree p+1 at a generous pilot bandwidth; everything the
// bound needs (f0, oscillation, bias) is then read off the fitted local
// polynomial surrogate for log f.
struct PilotSummary {
  Vec theta;        // pilot coefficients, p+1 of them in 1-D
  double h_pilot = 0.0;
  int pilot_degree = 0;
  double f0_hat = 0.0;
  long n = 0;
  long window_count = 0;
};

PilotSummary plugin_pilot(const Sample& sample, const ModelTemplate& tmpl,
                          double pilot_h);

struct PluginLocal {
  double f0 = 0.0;
  double c_fh = 0.0;
  double B_ph = 1.0;
};

PluginLocal plugin_local_constants(const PilotSummary& pilot,
                                   const ModelTemplate& tmpl, double h);

std::pair<double, double> bound_components_plugin(double h,
                                                  const PilotSummary& pilot,
                                                  const ModelTemplate& tmpl,
                                                  double z, long n);

BandwidthReport select_bandwidth_plugin(const Sample& sample,
                                        const ModelTemplate& tmpl, double z,
                                        const std::vector<double>& h_grid);

}  // namespace locdens
