#include "locdens/report.hpp"

#include <cmath>
#include <cstdio>

namespace locdens {

Json Json::boolean(bool b) {
  Json j;
  j.type_ = Type::boolean;
  j.bool_ = b;
  return j;
}

Json Json::integer(std::int64_t v) {
  Json j;
  j.type_ = Type::integer;
  j.int_ = v;
  return j;
}

Json Json::number(double v) {
  Json j;
  j.type_ = Type::number;
  j.num_ = v;
  return j;
}

Json Json::string(std::string s) {
  Json j;
  j.type_ = Type::string;
  j.str_ = std::move(s);
  return j;
}

Json Json::array() {
  Json j;
  j.type_ = Type::array;
  return j;
}

Json Json::object() {
  Json j;
  j.type_ = Type::object;
  return j;
}

void Json::push_back(Json v) { items_.push_back(std::move(v)); }

void Json::set(const std::string& key, Json v) {
  fields_.emplace_back(key, std::move(v));
}

namespace {

void append_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  out += '"';
}

void append_number(std::string& out, double v) {
  if (std::isnan(v)) {
    out += "null";
    return;
  }
  if (std::isinf(v)) {
    out += v > 0 ? "1e999" : "-1e999";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void indent_to(std::string& out, int indent, int depth) {
  if (indent <= 0) return;
  out += '\n';
  out.append(static_cast<size_t>(indent * depth), ' ');
}

}  // namespace

void Json::dump_to(std::string& out, int indent, int depth) const {
  switch (type_) {
    case Type::null: out += "null"; return;
    case Type::boolean: out += bool_ ? "true" : "false"; return;
    case Type::integer: out += std::to_string(int_); return;
    case Type::number: append_number(out, num_); return;
    case Type::string: append_escaped(out, str_); return;
    case Type::array: {
      out += '[';
      for (size_t i = 0; i < items_.size(); ++i) {
        if (i) out += ',';
        indent_to(out, indent, depth + 1);
        items_[i].dump_to(out, indent, depth + 1);
      }
      if (!items_.empty()) indent_to(out, indent, depth);
      out += ']';
      return;
    }
    case Type::object: {
      out += '{';
      for (size_t i = 0; i < fields_.size(); ++i) {
        if (i) out += ',';
        indent_to(out, indent, depth + 1);
        append_escaped(out, fields_[i].first);
        out += indent > 0 ? ": " : ":";
        fields_[i].second.dump_to(out, indent, depth + 1);
      }
      if (!fields_.empty()) indent_to(out, indent, depth);
      out += '}';
      return;
    }
  }
}

std::string Json::dump(int indent) const {
  std::string out;
  dump_to(out, indent, 0);
  return out;
}

Json to_json(const Vec& v) {
  Json arr = Json::array();
  for (long i = 0; i < v.size(); ++i) arr.push_back(Json::number(v[i]));
  return arr;
}

Json to_json(const Mat& m) {
  Json arr = Json::array();
  for (long i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (long j = 0; j < m.cols(); ++j) row.push_back(Json::number(m(i, j)));
    arr.push_back(std::move(row));
  }
  return arr;
}

Json to_json(const ConditionFlags& flags) {
  Json j = Json::object();
  j.set("I", Json::boolean(flags.I));
  j.set("L0", Json::boolean(flags.L0));
  j.set("ED0", Json::boolean(flags.ED0));
  j.set("C", Json::boolean(flags.C));
  j.set("small_bandwidth", Json::boolean(flags.small_bandwidth));
  j.set("eff_sample_size", Json::boolean(flags.eff_sample_size));
  return j;
}

Json to_json(const Certificate& cert) {
  Json j = Json::object();
  j.set("p", Json::integer(cert.p));
  j.set("d", Json::integer(cert.d));
  j.set("n", Json::integer(cert.n));
  j.set("h", Json::number(cert.h));
  j.set("f0", Json::number(cert.f0));
  j.set("IK", Json::number(cert.IK));
  j.set("eff_sample", Json::number(cert.eff_sample));
  j.set("c_fh", Json::number(cert.c_fh));
  j.set("B_ph", Json::number(cert.B_ph));
  j.set("c1", Json::number(cert.c1));
  j.set("c2", Json::number(cert.c2));
  j.set("phi1", Json::number(cert.phi1));
  j.set("phi2", Json::number(cert.phi2));
  j.set("phi1_clamped", Json::boolean(cert.phi1_clamped));
  j.set("epsilon", Json::number(cert.epsilon));
  j.set("a", Json::number(cert.a));
  j.set("a_exact", Json::number(cert.a_exact));
  j.set("C_Vf", Json::number(cert.C_Vf));
  j.set("C_Vf_bound", Json::number(cert.C_Vf_bound));
  j.set("g", Json::number(cert.g));
  j.set("nu0", Json::number(cert.nu0));
  j.set("zeta", Json::number(cert.zeta));
  j.set("r0", Json::number(cert.r0));
  j.set("delta_n", Json::number(cert.delta_n));
  j.set("diamond", Json::number(cert.diamond));
  j.set("conditions", to_json(cert.conditions));
  j.set("prob_bound", Json::number(cert.prob_bound));
  j.set("z", Json::number(cert.z));
  j.set("degraded", Json::boolean(cert.degraded));
  if (cert.degraded) {
    j.set("zeta_n", Json::number(cert.zeta_n));
    j.set("r_n", Json::number(cert.r_n));
  }
  j.set("z_within_g", Json::boolean(cert.z_within_g));
  j.set("zeta_factor", Json::number(cert.zeta_factor));
  return j;
}

Json to_json(const PopulationSummary& summary) {
  Json j = Json::object();
  j.set("theta_star", to_json(summary.theta_star.theta));
  j.set("theta_bullet", to_json(summary.theta_bullet.theta));
  j.set("theta_circ", to_json(summary.theta_circ.theta));
  j.set("D2", to_json(summary.D2));
  j.set("V2", to_json(summary.V2));
  j.set("d02", to_json(summary.d02));
  j.set("c_fh", Json::number(summary.c_fh));
  j.set("B_ph", Json::number(summary.B_ph));
  j.set("pr1", Json::number(summary.pr1));
  j.set("pr2", Json::number(summary.pr2));
  j.set("f0", Json::number(summary.f0));
  return j;
}

Json to_json(const DensityOracle& oracle) {
  Json j = Json::object();
  switch (oracle.kind()) {
    case DensityOracle::Kind::uniform:
      j.set("kind", Json::string("uniform"));
      j.set("lo", to_json(oracle.lo()));
      j.set("hi", to_json(oracle.hi()));
      break;
    case DensityOracle::Kind::gaussian:
      j.set("kind", Json::string("normal"));
      j.set("mu", to_json(oracle.means()[0]));
      j.set("sigma", to_json(oracle.sigmas()[0]));
      break;
    case DensityOracle::Kind::gaussian_mixture: {
      j.set("kind", Json::string("mixture"));
      Json comps = Json::array();
      for (size_t c = 0; c < oracle.weights().size(); ++c) {
        Json comp = Json::object();
        comp.set("weight", Json::number(oracle.weights()[c]));
        comp.set("mu", to_json(oracle.means()[c]));
        comp.set("sigma", to_json(oracle.sigmas()[c]));
        comps.push_back(std::move(comp));
      }
      j.set("components", std::move(comps));
      break;
    }
  }
  return j;
}

Json to_json(const VerifyRow& row) {
  Json j = Json::object();
  j.set("z", Json::number(row.z));
  j.set("r0", Json::number(row.r0));
  j.set("prob_bound", Json::number(row.prob_bound));
  j.set("diamond", Json::number(row.diamond));
  j.set("empirical_escape_freq", Json::number(row.escape_freq));
  j.set("frac_fisher_ok", Json::number(row.frac_fisher_ok));
  j.set("frac_wilks_ok", Json::number(row.frac_wilks_xi_ok));
  j.set("frac_wilks_theta_ok", Json::number(row.frac_wilks_theta_ok));
  j.set("binom_se", Json::number(row.binom_se));
  j.set("pass_concentration", Json::boolean(row.pass_concentration));
  j.set("pass_fisher", Json::boolean(row.pass_fisher));
  j.set("pass_wilks", Json::boolean(row.pass_wilks));
  j.set("degraded", Json::boolean(row.degraded));
  return j;
}

Json to_json(const CellResult& cell, bool with_summary) {
  Json j = Json::object();
  j.set("n", Json::integer(cell.n));
  j.set("h", Json::number(cell.h));
  j.set("p", Json::integer(cell.p));
  j.set("eff_sample", Json::number(cell.eff_sample));
  if (with_summary) j.set("population", to_json(cell.summary));
  Json certs = Json::array();
  for (const auto& cert : cell.certs) certs.push_back(to_json(cert));
  j.set("certificates", std::move(certs));
  Json rows = Json::array();
  for (const auto& row : cell.rows) rows.push_back(to_json(row));
  j.set("verification", std::move(rows));
  j.set("reps", Json::integer(static_cast<std::int64_t>(cell.records.size())));
  j.set("nonconverged", Json::integer(cell.nonconverged));
  j.set("mean_two_delta_l", Json::number(cell.mean_two_delta_l));
  j.set("mean_xi_sq", Json::number(cell.mean_xi_sq));
  j.set("median_d0_dist", Json::number(cell.median_d0_dist));
  j.set("median_fisher_norm", Json::number(cell.median_fisher_norm));
  j.set("max_xi_two_path_gap", Json::number(cell.max_xi_two_path_gap));
  return j;
}

Json to_json(const SimulationReport& report) {
  Json j = Json::object();
  Json plan = Json::object();
  plan.set("oracle", to_json(report.plan.oracle));
  plan.set("x0", to_json(report.plan.x0));
  plan.set("h", Json::number(report.plan.h));
  plan.set("degree", Json::integer(report.plan.degree));
  plan.set("kernel", Json::string(kernel_name(report.plan.kernel)));
  Json ns = Json::array();
  for (long n : report.plan.n_values)
    ns.push_back(Json::integer(n));
  plan.set("n", std::move(ns));
  plan.set("reps", Json::integer(report.plan.reps));
  Json zs = Json::array();
  for (double z : report.plan.z_values) zs.push_back(Json::number(z));
  plan.set("z", std::move(zs));
  plan.set("seed", Json::integer(static_cast<std::int64_t>(report.plan.seed)));
  plan.set("zeta_factor", Json::number(report.plan.zeta_factor));
  j.set("plan", std::move(plan));

  Json cells = Json::array();
  for (const auto& cell : report.cells) cells.push_back(to_json(cell, true));
  j.set("cells", std::move(cells));

  if (report.slopes.available) {
    Json slopes = Json::object();
    slopes.set("theta_err", Json::number(report.slopes.theta_err));
    slopes.set("fisher_resid", Json::number(report.slopes.fisher_resid));
    j.set("slopes", std::move(slopes));
  }
  return j;
}

Json to_json(const BandwidthReport& report) {
  Json j = Json::object();
  j.set("mode", Json::string(report.mode));
  Json grid = Json::array();
  for (const auto& pt : report.grid) {
    Json row = Json::object();
    row.set("h", Json::number(pt.h));
    row.set("feasible", Json::boolean(pt.feasible));
    if (pt.feasible) {
      row.set("bias_term", Json::number(pt.bias_term));
      row.set("stoch_term", Json::number(pt.stoch_term));
      row.set("total", Json::number(pt.total));
    } else {
      row.set("reason", Json::string(pt.infeasible_reason));
    }
    grid.push_back(std::move(row));
  }
  j.set("h_grid", std::move(grid));
  j.set("h_star", Json::number(report.h_star));
  return j;
}

std::string dump_reps_csv(const CellResult& cell, double primary_z) {
  const Certificate* cert = nullptr;
  for (const auto& c : cell.certs)
    if (c.z == primary_z) cert = &c;
  std::string out =
      "rep,converged,window_count,two_delta_l,dn_dist,fisher_residual,"
      "wilks_residual_xi,wilks_residual_theta,wilks_residual_theta_circ,"
      "xi_two_path_gap,in_concentration_set\n";
  char buf[64];
  for (size_t i = 0; i < cell.records.size(); ++i) {
    const auto& rec = cell.records[i];
    out += std::to_string(i);
    out += rec.converged ? ",1," : ",0,";
    out += std::to_string(rec.window_count);
    for (double v : {rec.two_delta_l, rec.dn_dist, rec.fisher_residual,
                     rec.wilks_residual_xi, rec.wilks_residual_theta,
                     rec.wilks_residual_theta_circ, rec.xi_two_path_gap}) {
      std::snprintf(buf, sizeof(buf), ",%.17g", v);
      out += buf;
    }
    const bool inside =
        cert != nullptr && rec.converged && rec.dn_dist <= cert->r0;
    out += inside ? ",1\n" : ",0\n";
  }
  return out;
}

}  // namespace locdens
