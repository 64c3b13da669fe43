#pragma once

#include <span>
#include <vector>

#include "cgn/matrix.hpp"

namespace cgn::linalg {

// Thin SVD: m = u * diag(sigma) * v^T with u (rows x k), v (cols x k),
// k = min(rows, cols). Singular values are non-negative and non-increasing;
// u and v have orthonormal columns.
struct SvdResult {
    Matrix u;
    std::vector<double> sigma;
    Matrix v;
};

// One-sided Jacobi. Throws NumericalFailure if the sweep budget is exhausted.
SvdResult svd(const Matrix& m);

// Moore-Penrose pseudoinverse. Singular values below rank_tol * max(sigma)
// are truncated to zero. rank_tol < 0 selects the standard numerical-rank
// convention max(rows, cols) * machine epsilon.
Matrix pinv(const Matrix& m, double rank_tol = -1.0);

// Minimum-Frobenius-norm minimizer A (m x n) of ||diag(w) (dx^T A^T - dy^T)||_F
// for dx (n x N), dy (m x N), w length N with non-negative entries:
// A = (dy D) (dx D)^+ with D = diag(w).
Matrix weighted_minnorm_ls(const Matrix& dx, const Matrix& dy, std::span<const double> weights,
                           double rank_tol = -1.0);

// Unique minimizer of ||a * delta - residual||^2 + lambda * ||delta||^2,
// lambda > 0. Computed through the SVD of a, so the result is finite even
// when a is rank deficient.
std::vector<double> regularized_solve(const Matrix& a, std::span<const double> residual,
                                      double lambda);

} // namespace cgn::linalg
