#include "locdens/model.hpp"

#include <algorithm>
#include <cmath>

namespace locdens {

KernelKind kernel_from_string(const std::string& name) {
  if (name == "indicator") return KernelKind::indicator;
  if (name == "epanechnikov" || name == "epanechnikov_product")
    return KernelKind::epanechnikov_product;
  if (name == "tgauss" || name == "truncated_gaussian")
    return KernelKind::truncated_gaussian;
  raise(Errc::bad_input, "unknown kernel '" + name + "'");
}

const char* kernel_name(KernelKind k) {
  switch (k) {
    case KernelKind::indicator: return "indicator";
    case KernelKind::epanechnikov_product: return "epanechnikov";
    case KernelKind::truncated_gaussian: return "tgauss";
  }
  return "?";
}

namespace {

void enumerate_indices(int dim, int total, MultiIndex& cur, int axis,
                       std::vector<MultiIndex>& out) {
  if (axis == dim - 1) {
    cur[axis] = total;
    out.push_back(cur);
    return;
  }
  // Descending exponent on the leading axis gives the conventional
  // {t1, t2, t1^2, t1 t2, t2^2, ...} layout after the degree-major sort.
  for (int e = total; e >= 0; --e) {
    cur[axis] = e;
    enumerate_indices(dim, total - e, cur, axis + 1, out);
  }
}

}  // namespace

BasisSpec make_basis(BasisKind kind, int degree, int dim) {
  if (kind != BasisKind::polynomial)
    raise(Errc::bad_input, "unsupported basis kind");
  if (degree < 1) raise(Errc::bad_input, "basis degree must be >= 1");
  if (dim < 1) raise(Errc::bad_input, "dimension must be >= 1");

  BasisSpec basis;
  basis.kind = kind;
  basis.degree = degree;
  basis.dim = dim;

  if (dim == 1) {
    for (int e = 0; e < degree; ++e) basis.index_set.push_back({e});
  } else {
    MultiIndex cur(static_cast<size_t>(dim), 0);
    for (int total = 0; total <= degree; ++total)
      enumerate_indices(dim, total, cur, 0, basis.index_set);
  }
  return basis;
}

void eval_basis(const BasisSpec& basis, const double* t, Vec& out) {
  const int p = basis.size();
  out.resize(p);
  if (basis.dim == 1) {
    // index_set is {0,1,...,p-1} by construction; iterate the powers.
    double v = 1.0;
    for (int k = 0; k < p; ++k) {
      out[k] = v;
      v *= t[0];
    }
    return;
  }
  for (int k = 0; k < p; ++k) {
    double v = 1.0;
    const MultiIndex& mi = basis.index_set[static_cast<size_t>(k)];
    for (int j = 0; j < basis.dim; ++j)
      for (int e = 0; e < mi[static_cast<size_t>(j)]; ++e) v *= t[j];
    out[k] = v;
  }
}

Vec eval_basis(const BasisSpec& basis, const Vec& t) {
  Vec out;
  eval_basis(basis, t.data(), out);
  return out;
}

double eval_kernel(const KernelSpec& kernel, const double* t, int dim) {
  for (int j = 0; j < dim; ++j)
    if (t[j] < -1.0 || t[j] > 1.0) return 0.0;
  switch (kernel.kind) {
    case KernelKind::indicator:
      return 1.0;
    case KernelKind::epanechnikov_product: {
      double v = 1.0;
      for (int j = 0; j < dim; ++j) v *= 0.75 * (1.0 - t[j] * t[j]);
      return v;
    }
    case KernelKind::truncated_gaussian: {
      double s = 0.0;
      for (int j = 0; j < dim; ++j) s += t[j] * t[j];
      return std::exp(-0.5 * s);
    }
  }
  return 0.0;
}

double eval_kernel(const KernelSpec& kernel, const Vec& t) {
  return eval_kernel(kernel, t.data(), static_cast<int>(t.size()));
}

int default_quad_order(int degree) { return std::max(20, 2 * degree + 8); }

ModelSpec make_model(const Vec& x0, double h, int degree, KernelKind kernel,
                     int quad_order) {
  if (!(h > 0.0)) raise(Errc::bad_input, "bandwidth must be positive");
  if (x0.size() < 1) raise(Errc::bad_input, "x0 must have at least one axis");
  ModelSpec m;
  m.x0 = x0;
  m.h = h;
  m.basis = make_basis(BasisKind::polynomial, degree,
                       static_cast<int>(x0.size()));
  m.kernel.kind = kernel;
  m.quad_order = quad_order > 0 ? quad_order : default_quad_order(degree);
  if (m.quad_order < 2) raise(Errc::bad_input, "quad order must be >= 2");
  return m;
}

}  // namespace locdens
