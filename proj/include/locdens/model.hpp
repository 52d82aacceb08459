#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "locdens/errors.hpp"

namespace locdens {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
// Row-major storage for point lists whose rows are handed out as pointers.
using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Exponent tuple of a monomial, one entry per axis.
using MultiIndex = std::vector<int>;

enum class BasisKind { polynomial };
enum class KernelKind { indicator, epanechnikov_product, truncated_gaussian };

KernelKind kernel_from_string(const std::string& name);
const char* kernel_name(KernelKind k);

// Monomial basis on the unit cube [-1,1]^d. The first element is always the
// constant monomial, so theta_0 carries the log-density value.
struct BasisSpec {
  BasisKind kind = BasisKind::polynomial;
  int degree = 1;
  int dim = 1;
  std::vector<MultiIndex> index_set;

  int size() const { return static_cast<int>(index_set.size()); }
};

struct KernelSpec {
  KernelKind kind = KernelKind::indicator;
};

// Everything that defines one local estimation problem.
struct ModelSpec {
  Vec x0;
  double h = 0.0;
  BasisSpec basis;
  KernelSpec kernel;
  int quad_order = 0;  // Gauss-Legendre nodes per axis

  int dim() const { return basis.dim; }
  int p() const { return basis.size(); }
};

// 1-D: monomials t^0..t^(degree-1), p = degree.
// d-D: all monomials of total degree <= degree, p = C(degree+d, d).
// Ordered by (total degree, lexicographically descending exponents) so theta
// component indices are stable across runs.
BasisSpec make_basis(BasisKind kind, int degree, int dim);

void eval_basis(const BasisSpec& basis, const double* t, Vec& out);
Vec eval_basis(const BasisSpec& basis, const Vec& t);

double eval_kernel(const KernelSpec& kernel, const double* t, int dim);
double eval_kernel(const KernelSpec& kernel, const Vec& t);

int default_quad_order(int degree);

ModelSpec make_model(const Vec& x0, double h, int degree, KernelKind kernel,
                     int quad_order = 0);

}  // namespace locdens
