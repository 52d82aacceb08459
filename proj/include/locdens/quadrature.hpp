#pragma once

#include <Eigen/Core>
#include <cmath>
#include <utility>

#include "locdens/errors.hpp"
#include "locdens/model.hpp"

namespace locdens {

// Tensor-product Gauss-Legendre rule on [-1,1]^d.
struct QuadRule {
  RowMat nodes;  // N x d
  Vec weights;   // N, all positive, summing to 2^d
  int order = 0;
  int dim = 1;

  long size() const { return nodes.rows(); }
};

QuadRule gauss_legendre(int m);
QuadRule tensorize(const QuadRule& rule1d, int d);

// Rule matching the model's quad_order and dimension.
QuadRule model_rule(const ModelSpec& model);

namespace detail {
inline void check_finite(double v) {
  if (!std::isfinite(v))
    raise(Errc::non_finite_integrand, "integrand not finite at a node");
}
}  // namespace detail

// f takes a pointer to the node coordinates (d doubles).
template <typename F>
double integrate(F&& f, const QuadRule& rule) {
  double acc = 0.0;
  for (long i = 0; i < rule.size(); ++i) {
    const double v = f(rule.nodes.row(i).data());
    detail::check_finite(v);
    acc += rule.weights[i] * v;
  }
  return acc;
}

// f(t, out) fills a length-p vector.
template <typename F>
Vec integrate_vec(F&& f, const QuadRule& rule, int p) {
  Vec acc = Vec::Zero(p);
  Vec buf(p);
  for (long i = 0; i < rule.size(); ++i) {
    f(rule.nodes.row(i).data(), buf);
    for (int k = 0; k < p; ++k) detail::check_finite(buf[k]);
    acc += rule.weights[i] * buf;
  }
  return acc;
}

// f(t, out) fills a p x p matrix.
template <typename F>
Mat integrate_mat(F&& f, const QuadRule& rule, int p) {
  Mat acc = Mat::Zero(p, p);
  Mat buf(p, p);
  for (long i = 0; i < rule.size(); ++i) {
    f(rule.nodes.row(i).data(), buf);
    detail::check_finite(buf.sum());
    acc += rule.weights[i] * buf;
  }
  return acc;
}

struct SupResult {
  double value = 0.0;
  Vec argmax;
};

int default_sup_grid(int dim);
// CLI override for the sup-grid resolution; 0 restores the defaults.
void set_sup_grid_override(int n);

// Supremum of f on [-1,1]^d: dense grid scan followed by per-axis
// golden-section refinement around the grid argmax. The grid always contains
// the cube boundary, where the quantities of interest peak.
template <typename F>
SupResult sup_on_cube(F&& f, int dim, int grid_per_axis = 0) {
  const int n = grid_per_axis > 0 ? grid_per_axis : default_sup_grid(dim);
  Vec t = Vec::Constant(dim, -1.0);
  SupResult best;
  best.value = -std::numeric_limits<double>::infinity();
  best.argmax = t;

  // Odd counts put a node at 0; endpoints +-1 are nodes for any n >= 2.
  const double step = 2.0 / (n - 1);
  std::vector<int> idx(static_cast<size_t>(dim), 0);
  while (true) {
    for (int j = 0; j < dim; ++j) t[j] = -1.0 + step * idx[static_cast<size_t>(j)];
    const double v = f(t.data());
    if (v > best.value) {
      best.value = v;
      best.argmax = t;
    }
    int axis = 0;
    while (axis < dim && ++idx[static_cast<size_t>(axis)] == n) {
      idx[static_cast<size_t>(axis)] = 0;
      ++axis;
    }
    if (axis == dim) break;
  }

  // Golden-section sweeps along each axis within one grid cell of the argmax.
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  Vec x = best.argmax;
  for (int sweep = 0; sweep < 2; ++sweep) {
    for (int axis = 0; axis < dim; ++axis) {
      double lo = std::max(-1.0, x[axis] - step);
      double hi = std::min(1.0, x[axis] + step);
      double a = lo, b = hi;
      double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
      Vec xt = x;
      xt[axis] = c1;
      double f1 = f(xt.data());
      xt[axis] = c2;
      double f2 = f(xt.data());
      for (int it = 0; it < 80 && (b - a) > 1e-14; ++it) {
        if (f1 < f2) {
          a = c1;
          c1 = c2;
          f1 = f2;
          c2 = a + gr * (b - a);
          xt[axis] = c2;
          f2 = f(xt.data());
        } else {
          b = c2;
          c2 = c1;
          f2 = f1;
          c1 = b - gr * (b - a);
          xt[axis] = c1;
          f1 = f(xt.data());
        }
      }
      const double xm = 0.5 * (a + b);
      xt[axis] = xm;
      const double fm = f(xt.data());
      if (fm > best.value) {
        best.value = fm;
        x[axis] = xm;
        best.argmax = x;
      }
    }
  }
  return best;
}

}  // namespace locdens
