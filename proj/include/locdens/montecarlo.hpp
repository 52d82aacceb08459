#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "locdens/certificates.hpp"
#include "locdens/likelihood.hpp"
#include "locdens/population.hpp"

namespace locdens {

// Counter-based stream: every value is a pure function of (seed, stream,
// counter), so parallel execution order cannot change results.
class CounterRng {
public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  double next_unit();       // [0, 1)
  double next_unit_open();  // (0, 1]
  double next_gaussian();   // Box-Muller, pair-cached

private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Deterministic i.i.d. draws; stream 0 is the conventional whole-sample
// stream, the replication engine uses stream = rep_index + 1.
Sample sample(const DensityOracle& oracle, long n, std::uint64_t seed,
              std::uint64_t stream = 0);

struct ExperimentPlan {
  DensityOracle oracle = DensityOracle::gaussian(Vec::Zero(1), Vec::Ones(1));
  Vec x0 = Vec::Zero(1);
  double h = 0.5;
  int degree = 3;
  KernelKind kernel = KernelKind::indicator;
  int quad_order = 0;
  std::vector<long> n_values = {10000};
  long reps = 100;
  std::vector<double> z_values = {2.0};
  std::uint64_t seed = 1;
  int threads = 1;
  bool allow_degraded = true;
  double zeta_factor = 1.0;
};

struct ReplicationRecord {
  Vec theta_mle;
  Vec xi;
  double fisher_residual = 0.0;       // ||Dn(theta~ - theta*) - xi||
  double wilks_residual_xi = 0.0;     // |sqrt(2 dL) - ||xi|||
  double wilks_residual_theta = 0.0;  // |sqrt(2 dL) - ||Dn(theta~ - theta*)|||
  double wilks_residual_theta_circ = 0.0;  // same against theta-circle
  double two_delta_l = 0.0;
  double dn_dist = 0.0;  // ||Dn(theta~ - theta*)||
  double xi_two_path_gap = 0.0;
  long window_count = 0;
  bool converged = false;
};

// Per-z aggregate for one cell against the certificate bounds.
struct VerifyRow {
  double z = 0.0;
  double r0 = 0.0;
  double prob_bound = 0.0;
  double diamond = 0.0;
  double escape_freq = 0.0;
  double frac_fisher_ok = 0.0;
  double frac_wilks_xi_ok = 0.0;
  double frac_wilks_theta_ok = 0.0;
  double binom_se = 0.0;  // at the clamped theoretical bound
  bool pass_concentration = false;
  bool pass_fisher = false;
  bool pass_wilks = false;
  bool degraded = false;
};

struct CellResult {
  long n = 0;
  double h = 0.0;
  int p = 0;
  double eff_sample = 0.0;
  PopulationSummary summary;
  std::vector<Certificate> certs;  // one per z
  std::vector<ReplicationRecord> records;
  long nonconverged = 0;
  std::vector<VerifyRow> rows;
  double mean_two_delta_l = 0.0;
  double mean_xi_sq = 0.0;
  double median_d0_dist = 0.0;         // median ||d0 (theta~ - theta*)||
  double median_fisher_norm = 0.0;     // median fisher_residual / sqrt(n h^d)
  double max_xi_two_path_gap = 0.0;
};

struct RateSlopes {
  double theta_err = 0.0;     // vs log(n h^d), expect about -1/2
  double fisher_resid = 0.0;  // normalized, expect about -1
  bool available = false;
};

struct SimulationReport {
  ExperimentPlan plan;
  std::vector<CellResult> cells;
  RateSlopes slopes;
};

ModelSpec plan_model(const ExperimentPlan& plan);

ReplicationRecord run_replication(const ExperimentPlan& plan,
                                  const ModelSpec& model,
                                  const PopulationSummary& summary,
                                  const Mat& dn, const Mat& dn_inv, long n,
                                  long rep_index);

CellResult run_cell(const ExperimentPlan& plan, long n);

VerifyRow verify_concentration(const CellResult& cell, const Certificate& cert,
                               bool allow_degraded);
VerifyRow verify_fisher(const CellResult& cell, const Certificate& cert,
                        bool allow_degraded);
VerifyRow verify_wilks(const CellResult& cell, const Certificate& cert,
                       bool allow_degraded);

SimulationReport simulate(const ExperimentPlan& plan);

// Least-squares slopes over the n-sweep; needs at least 4 cells.
RateSlopes rate_scan(const SimulationReport& report);

}  // namespace locdens
