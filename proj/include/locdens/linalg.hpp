#pragma once

#include <functional>

#include "locdens/model.hpp"
#include "locdens/quadrature.hpp"

namespace locdens {

// Dense symmetric kit for p x p certificate matrices (p stays small).
// Positive definiteness is rejected when lambda_min <= 1e-12 * lambda_max,
// which flags a linearly dependent basis on the kernel support.

Vec eigvals_sym(const Mat& m);            // ascending
Mat sqrt_pd(const Mat& m);
Mat inv_pd(const Mat& m);
Vec solve_pd(const Mat& m, const Vec& v);
double lambda_max_quotient(const Mat& a2, const Mat& b2);  // of B^-1 A^2 B^-1

// Numerical oracle for the eigenvalue-interval fact: all eigenvalues of
// B^-1 A^2 B^-1 must lie in [lam_ratio_min, lam_ratio_max] up to a relative
// tolerance of 1e-8.
bool eigenvalue_interval_check(const Mat& a2, const Mat& b2,
                               double lam_ratio_min, double lam_ratio_max);

// lambda_min( int(psi psi^T) * int(delta^2) - int(psi delta) int(psi delta)^T ).
// Nonnegative up to -1e-10 certifies the matrix Cauchy-Schwarz inequality.
double matrix_cauchy_gap(const std::function<void(const double*, Vec&)>& psi,
                         const std::function<double(const double*)>& delta,
                         const QuadRule& rule, int p);

// (A - lam u u^T)^{-1} through the rank-one update of A^{-1}.
Mat sherman_morrison_inv(const Mat& a, const Vec& u, double lam);

}  // namespace locdens
