#include "locdens/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

namespace locdens {

namespace {

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : base_(mix64(seed ^ mix64(stream + 0x6A09E667F3BCC909ULL))) {}

std::uint64_t CounterRng::next_u64() {
  return mix64(base_ + 0x9E3779B97F4A7C15ULL * ++counter_);
}

double CounterRng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::next_unit_open() {
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double CounterRng::next_gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = next_unit_open();
  const double u2 = next_unit();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(angle);
  have_spare_ = true;
  return r * std::cos(angle);
}

Sample sample(const DensityOracle& oracle, long n, std::uint64_t seed,
              std::uint64_t stream) {
  if (n < 1) raise(Errc::bad_input, "sample size must be >= 1");
  CounterRng rng(seed, stream);
  const int d = oracle.dim();
  Sample s;
  s.points.resize(n, d);
  s.source = "simulator";
  switch (oracle.kind()) {
    case DensityOracle::Kind::uniform:
      for (long i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
          s.points(i, j) =
              oracle.lo()[j] + (oracle.hi()[j] - oracle.lo()[j]) * rng.next_unit();
      break;
    case DensityOracle::Kind::gaussian:
      for (long i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
          s.points(i, j) =
              oracle.means()[0][j] + oracle.sigmas()[0][j] * rng.next_gaussian();
      break;
    case DensityOracle::Kind::gaussian_mixture: {
      const auto& w = oracle.weights();
      for (long i = 0; i < n; ++i) {
        const double u = rng.next_unit();
        size_t c = 0;
        double acc = 0.0;
        for (; c + 1 < w.size(); ++c) {
          acc += w[c];
          if (u < acc) break;
        }
        for (int j = 0; j < d; ++j)
          s.points(i, j) =
              oracle.means()[c][j] + oracle.sigmas()[c][j] * rng.next_gaussian();
      }
      break;
    }
  }
  return s;
}

ModelSpec plan_model(const ExperimentPlan& plan) {
  return make_model(plan.x0, plan.h, plan.degree, plan.kernel, plan.quad_order);
}

ReplicationRecord run_replication(const ExperimentPlan& plan,
                                  const ModelSpec& model,
                                  const PopulationSummary& summary,
                                  const Mat& dn, const Mat& dn_inv, long n,
                                  long rep_index) {
  ReplicationRecord rec;
  const Sample s = sample(plan.oracle, n, plan.seed,
                          static_cast<std::uint64_t>(rep_index) + 1);
  const LocalData data = localize(s, model);
  rec.window_count = data.window_count;

  FitOptions opts;
  opts.tol = 1e-10;
  opts.tol_absolute = true;
  ParamVector mle;
  try {
    auto [fit, diag] = fit_mle(data, model, opts);
    mle = fit;
    rec.converged = diag.converged;
  } catch (const Error&) {
    rec.converged = false;
    return rec;  // recorded as an escape, never aborts the sweep
  }
  rec.theta_mle = mle.theta;

  const Vec& star = summary.theta_star.theta;
  const Vec& circ = summary.theta_circ.theta;

  // Score two ways: the direct empirical gradient at theta*, and the
  // deterministic-part difference driven by theta~ only. Both share the
  // same data sums, so their gap is exactly the converged gradient.
  const Vec grad_star = gradient(star, data, model);
  const Vec xi_direct = dn_inv * grad_star;
  const QuadRule rule = model_rule(model);
  const double nhd = static_cast<double>(n) * std::pow(model.h, model.dim());
  const Vec mean_star = exp_moments(star, model, rule).mean;
  const Vec mean_mle = exp_moments(mle.theta, model, rule).mean;
  const Vec xi_from_mle = dn_inv * (nhd * (mean_mle - mean_star));
  rec.xi = xi_direct;
  rec.xi_two_path_gap = (xi_direct - xi_from_mle).norm();

  const Vec dn_diff = dn * (mle.theta - star);
  rec.dn_dist = dn_diff.norm();
  rec.fisher_residual = (dn_diff - rec.xi).norm();

  rec.two_delta_l = 2.0 * excess(data, model, mle.theta, star);
  const double sqrt_2dl = std::sqrt(std::max(0.0, rec.two_delta_l));
  rec.wilks_residual_xi = std::abs(sqrt_2dl - rec.xi.norm());
  rec.wilks_residual_theta = std::abs(sqrt_2dl - rec.dn_dist);
  rec.wilks_residual_theta_circ =
      std::abs(sqrt_2dl - (dn * (mle.theta - circ)).norm());
  return rec;
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double binom_se(double prob, long reps) {
  const double p = std::clamp(prob, 0.0, 1.0);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(reps));
}

void require_runnable(const Certificate& cert, bool allow_degraded) {
  if (!allow_degraded && (!cert.conditions.C || !cert.z_within_g))
    raise(Errc::cell_skipped,
          "conditions fail at z = " + std::to_string(cert.z) +
              " and degraded mode is off");
}

}  // namespace

VerifyRow verify_concentration(const CellResult& cell, const Certificate& cert,
                               bool allow_degraded) {
  require_runnable(cert, allow_degraded);
  VerifyRow row;
  row.z = cert.z;
  row.r0 = cert.r0;
  row.prob_bound = cert.prob_bound;
  row.diamond = cert.diamond;
  row.degraded = cert.degraded;
  const long reps = static_cast<long>(cell.records.size());
  long escapes = 0;
  for (const auto& rec : cell.records)
    if (!rec.converged || rec.dn_dist > cert.r0) ++escapes;
  row.escape_freq = static_cast<double>(escapes) / static_cast<double>(reps);
  row.binom_se = binom_se(cert.prob_bound, reps);
  row.pass_concentration =
      row.escape_freq <= cert.prob_bound + 3.0 * row.binom_se;
  return row;
}

VerifyRow verify_fisher(const CellResult& cell, const Certificate& cert,
                        bool allow_degraded) {
  VerifyRow row = verify_concentration(cell, cert, allow_degraded);
  const long reps = static_cast<long>(cell.records.size());
  long ok = 0;
  for (const auto& rec : cell.records)
    if (rec.converged && rec.fisher_residual <= cert.diamond) ++ok;
  row.frac_fisher_ok = static_cast<double>(ok) / static_cast<double>(reps);
  row.pass_fisher =
      row.frac_fisher_ok >= 1.0 - cert.prob_bound - 3.0 * row.binom_se;
  return row;
}

VerifyRow verify_wilks(const CellResult& cell, const Certificate& cert,
                       bool allow_degraded) {
  VerifyRow row = verify_fisher(cell, cert, allow_degraded);
  const long reps = static_cast<long>(cell.records.size());
  long ok_xi = 0, ok_theta = 0;
  for (const auto& rec : cell.records) {
    if (!rec.converged) continue;
    if (rec.wilks_residual_xi <= 3.0 * cert.diamond) ++ok_xi;
    if (rec.wilks_residual_theta <= 2.0 * cert.diamond) ++ok_theta;
  }
  row.frac_wilks_xi_ok = static_cast<double>(ok_xi) / static_cast<double>(reps);
  row.frac_wilks_theta_ok =
      static_cast<double>(ok_theta) / static_cast<double>(reps);
  row.pass_wilks =
      row.frac_wilks_xi_ok >= 1.0 - cert.prob_bound - 3.0 * row.binom_se;
  return row;
}

CellResult run_cell(const ExperimentPlan& plan, long n) {
  CellResult cell;
  ModelSpec model = plan_model(plan);
  cell.n = n;
  cell.h = model.h;
  cell.p = model.p();
  const double nhd = static_cast<double>(n) * std::pow(model.h, model.dim());
  cell.eff_sample = nhd;
  cell.summary = population_summary(plan.oracle, model, n);

  CertOptions copts;
  copts.zeta_factor = plan.zeta_factor;
  copts.strict_z = false;
  for (double z : plan.z_values)
    cell.certs.push_back(check_conditions(cell.summary, model, n, z, copts));

  const Mat dn = sqrt_pd(cell.summary.D2);
  const Mat dn_inv = inv_pd(dn);

  cell.records.resize(static_cast<size_t>(plan.reps));
  const int workers = std::max(1, plan.threads);
  auto worker = [&](int w) {
    for (long r = w; r < plan.reps; r += workers)
      cell.records[static_cast<size_t>(r)] =
          run_replication(plan, model, cell.summary, dn, dn_inv, n, r);
  };
  if (workers == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }

  // Aggregation is a sequential fold over the rep-indexed vector, so the
  // report is independent of the worker count.
  std::vector<double> d0_dists, fisher_norms;
  double sum_2dl = 0.0, sum_xi_sq = 0.0;
  long converged = 0;
  for (const auto& rec : cell.records) {
    if (!rec.converged) {
      ++cell.nonconverged;
      continue;
    }
    ++converged;
    sum_2dl += rec.two_delta_l;
    sum_xi_sq += rec.xi.squaredNorm();
    d0_dists.push_back(rec.dn_dist / std::sqrt(nhd));
    fisher_norms.push_back(rec.fisher_residual / std::sqrt(nhd));
    cell.max_xi_two_path_gap =
        std::max(cell.max_xi_two_path_gap, rec.xi_two_path_gap);
  }
  if (converged > 0) {
    cell.mean_two_delta_l = sum_2dl / static_cast<double>(converged);
    cell.mean_xi_sq = sum_xi_sq / static_cast<double>(converged);
  }
  cell.median_d0_dist = median_of(d0_dists);
  cell.median_fisher_norm = median_of(fisher_norms);

  for (const auto& cert : cell.certs)
    cell.rows.push_back(verify_wilks(cell, cert, plan.allow_degraded));
  return cell;
}

SimulationReport simulate(const ExperimentPlan& plan) {
  if (plan.reps < 1) raise(Errc::bad_input, "reps must be >= 1");
  if (plan.z_values.empty()) raise(Errc::bad_input, "need at least one z");
  SimulationReport report;
  report.plan = plan;
  for (long n : plan.n_values) report.cells.push_back(run_cell(plan, n));
  if (report.cells.size() >= 4) report.slopes = rate_scan(report);
  return report;
}

RateSlopes rate_scan(const SimulationReport& report) {
  if (report.cells.size() < 4)
    raise(Errc::insufficient_cells,
          "rate scan needs >= 4 cells, got " +
              std::to_string(report.cells.size()));
  const size_t m = report.cells.size();
  Vec x(m), y_theta(m), y_fisher(m);
  for (size_t i = 0; i < m; ++i) {
    const auto& cell = report.cells[i];
    x[static_cast<long>(i)] = std::log(cell.eff_sample);
    y_theta[static_cast<long>(i)] = std::log(cell.median_d0_dist);
    y_fisher[static_cast<long>(i)] = std::log(cell.median_fisher_norm);
  }
  const double xbar = x.mean();
  const double sxx = (x.array() - xbar).square().sum();
  RateSlopes slopes;
  slopes.theta_err =
      ((x.array() - xbar) * (y_theta.array() - y_theta.mean())).sum() / sxx;
  slopes.fisher_resid =
      ((x.array() - xbar) * (y_fisher.array() - y_fisher.mean())).sum() / sxx;
  slopes.available = true;
  return slopes;
}

}  // namespace locdens
