#include "locdens/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace locdens {

QuadRule gauss_legendre(int m) {
  if (m < 2) raise(Errc::bad_input, "Gauss-Legendre order must be >= 2");
  QuadRule rule;
  rule.order = m;
  rule.dim = 1;
  rule.nodes.resize(m, 1);
  rule.weights.resize(m);

  // Newton iteration on P_m with the Chebyshev-like initial guess; symmetric
  // pairs are filled together.
  const int half = (m + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes(i, 0) = -x;
    rule.weights[i] = w;
    rule.nodes(m - 1 - i, 0) = x;
    rule.weights[m - 1 - i] = w;
  }
  return rule;
}

QuadRule tensorize(const QuadRule& rule1d, int d) {
  if (d < 1) raise(Errc::bad_input, "dimension must be >= 1");
  if (d == 1) return rule1d;
  const long m = rule1d.size();
  long total = 1;
  for (int j = 0; j < d; ++j) total *= m;

  QuadRule rule;
  rule.order = rule1d.order;
  rule.dim = d;
  rule.nodes.resize(total, d);
  rule.weights.resize(total);
  std::vector<long> idx(static_cast<size_t>(d), 0);
  for (long i = 0; i < total; ++i) {
    double w = 1.0;
    for (int j = 0; j < d; ++j) {
      rule.nodes(i, j) = rule1d.nodes(idx[static_cast<size_t>(j)], 0);
      w *= rule1d.weights[idx[static_cast<size_t>(j)]];
    }
    rule.weights[i] = w;
    int axis = 0;
    while (axis < d && ++idx[static_cast<size_t>(axis)] == m) {
      idx[static_cast<size_t>(axis)] = 0;
      ++axis;
    }
  }
  return rule;
}

QuadRule model_rule(const ModelSpec& model) {
  return tensorize(gauss_legendre(model.quad_order), model.dim());
}

namespace {
int sup_grid_override = 0;
}

int default_sup_grid(int dim) {
  if (sup_grid_override > 1) return sup_grid_override;
  if (dim == 1) return 2049;
  if (dim == 2) return 257;
  return 65;
}

void set_sup_grid_override(int n) { sup_grid_override = n; }

}  // namespace locdens
