#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "locdens/bandwidth.hpp"
#include "locdens/certificates.hpp"
#include "locdens/likelihood.hpp"
#include "locdens/montecarlo.hpp"
#include "locdens/population.hpp"
#include "locdens/report.hpp"

namespace {

using namespace locdens;

std::vector<double> parse_reals(const std::string& csv, const char* what) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size() || !std::isfinite(v)) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      raise(Errc::bad_input, std::string(what) + ": bad number '" + item + "'");
    }
  }
  if (out.empty()) raise(Errc::bad_input, std::string(what) + " is empty");
  return out;
}

DensityOracle make_oracle(const std::string& density, const std::string& params,
                          int dim) {
  const std::vector<double> v = parse_reals(params, "--params");
  const auto need = [&](size_t k, const char* msg) {
    if (v.size() != k) raise(Errc::bad_input, msg);
  };
  if (density == "uniform") {
    need(static_cast<size_t>(2 * dim), "uniform expects lo...,hi... per axis");
    Vec lo(dim), hi(dim);
    for (int j = 0; j < dim; ++j) {
      lo[j] = v[static_cast<size_t>(j)];
      hi[j] = v[static_cast<size_t>(dim + j)];
    }
    return DensityOracle::uniform(lo, hi);
  }
  if (density == "normal") {
    need(static_cast<size_t>(2 * dim), "normal expects mu...,sigma... per axis");
    Vec mu(dim), sigma(dim);
    for (int j = 0; j < dim; ++j) {
      mu[j] = v[static_cast<size_t>(j)];
      sigma[j] = v[static_cast<size_t>(dim + j)];
    }
    return DensityOracle::gaussian(mu, sigma);
  }
  if (density == "mixture") {
    const size_t stride = 1 + 2 * static_cast<size_t>(dim);
    if (v.size() % stride != 0 || v.empty())
      raise(Errc::bad_input,
            "mixture expects weight,mu...,sigma... groups per component");
    std::vector<double> w;
    std::vector<Vec> mus, sigmas;
    for (size_t c = 0; c < v.size(); c += stride) {
      w.push_back(v[c]);
      Vec mu(dim), sigma(dim);
      for (int j = 0; j < dim; ++j) {
        mu[j] = v[c + 1 + static_cast<size_t>(j)];
        sigma[j] = v[c + 1 + static_cast<size_t>(dim + j)];
      }
      mus.push_back(mu);
      sigmas.push_back(sigma);
    }
    return DensityOracle::gaussian_mixture(w, mus, sigmas);
  }
  raise(Errc::bad_input, "unknown density '" + density + "'");
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) raise(Errc::bad_input, "cannot write to '" + out_path + "'");
  out << text << "\n";
}

int threads_from_env() {
  const char* env = std::getenv("LOCDENS_THREADS");
  if (env == nullptr) return 1;
  const int k = std::atoi(env);
  return k >= 1 ? k : 1;
}

struct ModelFlags {
  std::vector<double> x0{0.0};
  double h = 0.5;
  int degree = 3;
  std::string kernel = "indicator";
  int quad_order = 0;
  int grid = 0;

  void add_to(CLI::App* cmd, bool with_h = true) {
    cmd->add_option("--x0", x0, "estimation point, one value per axis");
    if (with_h) cmd->add_option("--h", h, "bandwidth")->check(CLI::PositiveNumber);
    cmd->add_option("--degree", degree, "basis degree")->check(CLI::PositiveNumber);
    cmd->add_option("--kernel", kernel, "indicator|epanechnikov|tgauss");
    cmd->add_option("--quad-order", quad_order, "Gauss-Legendre nodes per axis");
    cmd->add_option("--grid", grid, "sup-grid points per axis");
  }

  Vec x0_vec() const {
    Vec v(static_cast<long>(x0.size()));
    for (size_t j = 0; j < x0.size(); ++j) v[static_cast<long>(j)] = x0[j];
    return v;
  }

  ModelSpec model() const {
    if (grid > 0) set_sup_grid_override(grid);
    return make_model(x0_vec(), h, degree, kernel_from_string(kernel),
                      quad_order);
  }
};

int run_cli(int argc, char** argv) {
  CLI::App app{"local log-density estimation with finite-sample certificates"};
  app.require_subcommand(1);
  // '--h' is the bandwidth flag, so help stays on '--help' only
  app.set_help_flag("--help", "print usage");

  std::string out_path;
  app.add_option("--out", out_path, "output path for the JSON report")
      ->capture_default_str();

  // ---- estimate ----
  auto* est = app.add_subcommand("estimate", "fit the local MLE on a data file");
  est->set_help_flag("--help", "print usage");
  ModelFlags est_model;
  std::string est_data;
  est->add_option("--data", est_data, "data file")->required();
  est_model.add_to(est);

  // ---- constants ----
  auto* con = app.add_subcommand("constants", "model-only constants c1, c2");
  con->set_help_flag("--help", "print usage");
  ModelFlags con_model;
  int con_dim = 1;
  con->add_option("--dim", con_dim, "dimension")->check(CLI::PositiveNumber);
  con_model.add_to(con, false);

  // ---- certify ----
  auto* cer = app.add_subcommand("certify", "certificate stack for an oracle");
  cer->set_help_flag("--help", "print usage");
  ModelFlags cer_model;
  std::string cer_density = "normal", cer_params = "0,1";
  long cer_n = 10000;
  double cer_z = 2.0, cer_zeta_factor = 1.0;
  bool cer_strict = false;
  cer->add_option("--density", cer_density, "uniform|normal|mixture");
  cer->add_option("--params", cer_params, "oracle parameters");
  cer->add_option("--n", cer_n, "sample size")->check(CLI::PositiveNumber);
  cer->add_option("--z", cer_z, "quantile argument z");
  cer->add_option("--zeta-factor", cer_zeta_factor, "quantile prefactor");
  cer->add_flag("--strict", cer_strict, "raise when z exceeds g^2/4");
  cer_model.add_to(cer);

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "replication study of the theorems");
  sim->set_help_flag("--help", "print usage");
  ModelFlags sim_model;
  std::string sim_density = "normal", sim_params = "0,1", sim_dump;
  std::string sim_n = "10000", sim_z = "2";
  long sim_reps = 200;
  std::uint64_t sim_seed = 1;
  int sim_threads = 0;
  double sim_zeta_factor = 1.0;
  bool sim_require_conditions = false;
  sim->add_option("--density", sim_density, "uniform|normal|mixture");
  sim->add_option("--params", sim_params, "oracle parameters");
  sim->add_option("--n", sim_n, "sample size, or comma list for a sweep");
  sim->add_option("--reps", sim_reps, "replications per cell")->check(CLI::PositiveNumber);
  sim->add_option("--z", sim_z, "quantile argument(s)");
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--threads", sim_threads, "worker cap (default LOCDENS_THREADS or 1)");
  sim->add_option("--zeta-factor", sim_zeta_factor, "quantile prefactor");
  sim->add_option("--dump-reps", sim_dump, "CSV path for per-replication records");
  sim->add_flag("--require-conditions", sim_require_conditions,
                "skip cells whose conditions fail instead of running degraded");
  sim_model.add_to(sim);

  // ---- bandwidth ----
  auto* bw = app.add_subcommand("bandwidth", "bias/stochastic trade-off scan");
  bw->set_help_flag("--help", "print usage");
  ModelFlags bw_model;
  std::string bw_density = "normal", bw_params = "0,1", bw_mode = "oracle";
  std::string bw_data;
  long bw_n = 10000;
  double bw_z = 2.0, bw_hmin = 0.05, bw_hmax = 0.8;
  int bw_count = 64;
  std::uint64_t bw_seed = 1;
  bw->add_option("--density", bw_density, "uniform|normal|mixture");
  bw->add_option("--params", bw_params, "oracle parameters");
  bw->add_option("--n", bw_n, "sample size")->check(CLI::PositiveNumber);
  bw->add_option("--z", bw_z, "quantile argument z");
  bw->add_option("--h-min", bw_hmin, "grid lower end")->check(CLI::PositiveNumber);
  bw->add_option("--h-max", bw_hmax, "grid upper end")->check(CLI::PositiveNumber);
  bw->add_option("--h-count", bw_count, "grid size")->check(CLI::PositiveNumber);
  bw->add_option("--mode", bw_mode, "oracle|plugin");
  bw->add_option("--data", bw_data, "data file for plugin mode");
  bw->add_option("--seed", bw_seed, "seed when plugin mode simulates its data");
  bw_model.add_to(bw, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;  // usage errors exit 1, --help exits 0
  }

  if (est->parsed()) {
    const ModelSpec model = est_model.model();
    const Sample data = load_sample(est_data, model.dim());
    auto [fit, diag] = fit_mle(data, model);
    Json j = Json::object();
    j.set("theta_mle", to_json(fit.theta));
    j.set("f_hat", Json::number(std::exp(fit.theta[0])));
    Json derivs = Json::array();
    for (int k = 0; k < model.p(); ++k) {
      int order = 0;
      double fact = 1.0;
      for (int a : model.basis.index_set[static_cast<size_t>(k)]) {
        order += a;
        for (int i = 2; i <= a; ++i) fact *= i;
      }
      derivs.push_back(Json::number(fact * fit.theta[k] /
                                    std::pow(model.h, order)));
    }
    j.set("log_density_derivs", std::move(derivs));
    Json d = Json::object();
    d.set("iterations", Json::integer(diag.iterations));
    d.set("final_grad_norm", Json::number(diag.final_grad_norm));
    d.set("window_count", Json::integer(diag.window_count));
    d.set("converged", Json::boolean(diag.converged));
    d.set("log_likelihood", Json::number(diag.log_likelihood));
    if (diag.window_count < model.p())
      d.set("warning", Json::string("window_count below basis size"));
    j.set("diagnostics", std::move(d));
    emit(j.dump(2), out_path);
    return 0;
  }

  if (con->parsed()) {
    if (con_model.grid > 0) set_sup_grid_override(con_model.grid);
    const BasisSpec basis =
        make_basis(BasisKind::polynomial, con_model.degree, con_dim);
    ModelSpec model;
    model.x0 = Vec::Zero(con_dim);
    model.h = 1.0;
    model.basis = basis;
    model.kernel.kind = kernel_from_string(con_model.kernel);
    model.quad_order = con_model.quad_order > 0
                           ? con_model.quad_order
                           : default_quad_order(con_model.degree);
    Json j = Json::object();
    j.set("p", Json::integer(model.p()));
    j.set("dim", Json::integer(con_dim));
    j.set("kernel", Json::string(kernel_name(model.kernel.kind)));
    j.set("c1_squared", Json::number(c1_squared(model)));
    j.set("c2_squared", Json::number(c2_squared(model)));
    j.set("IK", Json::number(kernel_mass(model)));
    emit(j.dump(2), out_path);
    return 0;
  }

  if (cer->parsed()) {
    const ModelSpec model = cer_model.model();
    const DensityOracle oracle =
        make_oracle(cer_density, cer_params, model.dim());
    const PopulationSummary summary =
        population_summary(oracle, model, cer_n);
    CertOptions opts;
    opts.zeta_factor = cer_zeta_factor;
    opts.strict_z = cer_strict;
    const Certificate cert =
        check_conditions(summary, model, cer_n, cer_z, opts);
    const TheoremBounds bounds = theorem_bounds(cert);
    Json j = Json::object();
    j.set("population", to_json(summary));
    j.set("certificate", to_json(cert));
    Json b = Json::object();
    b.set("concentration_prob", Json::number(bounds.concentration_prob));
    b.set("fisher_bound", Json::number(bounds.fisher_bound));
    b.set("wilks_bound_theta", Json::number(bounds.wilks_bound_theta));
    b.set("wilks_bound_xi", Json::number(bounds.wilks_bound_xi));
    j.set("theorem_bounds", std::move(b));
    emit(j.dump(2), out_path);
    return 0;
  }

  if (sim->parsed()) {
    ExperimentPlan plan;
    plan.x0 = sim_model.x0_vec();
    plan.h = sim_model.h;
    plan.degree = sim_model.degree;
    plan.kernel = kernel_from_string(sim_model.kernel);
    plan.quad_order = sim_model.quad_order;
    if (sim_model.grid > 0) set_sup_grid_override(sim_model.grid);
    plan.oracle =
        make_oracle(sim_density, sim_params, static_cast<int>(plan.x0.size()));
    plan.n_values.clear();
    for (double v : parse_reals(sim_n, "--n"))
      plan.n_values.push_back(static_cast<long>(v));
    plan.z_values = parse_reals(sim_z, "--z");
    plan.reps = sim_reps;
    plan.seed = sim_seed;
    plan.threads = sim_threads > 0 ? sim_threads : threads_from_env();
    plan.zeta_factor = sim_zeta_factor;
    plan.allow_degraded = !sim_require_conditions;
    const SimulationReport report = simulate(plan);
    // worker count must not leak into the report bytes
    emit(to_json(report).dump(2), out_path);
    if (!sim_dump.empty()) {
      std::ofstream csv(sim_dump, std::ios::binary);
      if (!csv) raise(Errc::bad_input, "cannot write to '" + sim_dump + "'");
      for (const auto& cell : report.cells)
        csv << dump_reps_csv(cell, plan.z_values.front());
    }
    return 0;
  }

  if (bw->parsed()) {
    ModelTemplate tmpl;
    tmpl.x0 = bw_model.x0_vec();
    tmpl.degree = bw_model.degree;
    tmpl.kernel = kernel_from_string(bw_model.kernel);
    tmpl.quad_order = bw_model.quad_order;
    if (bw_model.grid > 0) set_sup_grid_override(bw_model.grid);
    const std::vector<double> grid = geometric_grid(bw_hmin, bw_hmax, bw_count);
    BandwidthReport report;
    if (bw_mode == "oracle") {
      const DensityOracle oracle =
          make_oracle(bw_density, bw_params, static_cast<int>(tmpl.x0.size()));
      report = select_bandwidth(oracle, tmpl, bw_n, bw_z, grid);
    } else if (bw_mode == "plugin") {
      Sample data;
      if (!bw_data.empty()) {
        data = load_sample(bw_data, static_cast<int>(tmpl.x0.size()));
      } else {
        const DensityOracle oracle = make_oracle(
            bw_density, bw_params, static_cast<int>(tmpl.x0.size()));
        data = sample(oracle, bw_n, bw_seed);
      }
      report = select_bandwidth_plugin(data, tmpl, bw_z, grid);
    } else {
      raise(Errc::bad_input, "unknown mode '" + bw_mode + "'");
    }
    emit(to_json(report).dump(2), out_path);
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const locdens::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
