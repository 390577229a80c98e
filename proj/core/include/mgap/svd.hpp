#pragma once

#include "mgap/linalg.hpp"

namespace mgap {

// Thin SVD a = u * diag(sigma) * v^T with k = min(rows, cols):
// u is rows x k, v is cols x k, sigma descending and non-negative.
struct SvdResult {
  Mat u;
  Vec sigma;
  Mat v;
};

// One-sided Jacobi (Hestenes) rotations; tall-and-skinny inputs go
// through the Gram matrix of the columns. Sweep cap 100 * max(rows, cols),
// after which ConvergenceFailure is thrown.
SvdResult svd(const Mat& a);

}  // namespace mgap
