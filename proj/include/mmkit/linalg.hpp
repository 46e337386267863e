#pragma once

#include <cstddef>
#include <variant>

#include "mmkit/types.hpp"

namespace mmkit::linalg {

inline constexpr double kDefaultRankTol = 1e-8;

struct SvdResult {
  Matrix left;    // rows x p, orthonormal columns
  Vector values;  // p = min(rows, cols), nonincreasing
  Matrix right;   // cols x p, orthonormal columns
  std::size_t numerical_rank = 0;
};

// Thin SVD with a deterministic sign convention: the largest-magnitude entry of
// every left singular vector is positive (ties go to the lowest row index), and
// the matching right singular vector is flipped with it.
SvdResult svd(const Matrix& b, double rank_tol = kDefaultRankTol);

// Completes the orthonormal columns of `basis` (n x k) to an orthonormal basis
// of R^n by Gram-Schmidt against e_1, e_2, ... in index order. Returns only the
// n x (n - k) completion.
Matrix complete_basis(const Matrix& basis, std::size_t n);

/// argmax of tr(O^T B) over d x r matrices with orthonormal columns.
///
/// Every maximizer has the form base + null_left * Z * null_right^T with Z a
/// (d - k) x (r - k) matrix with orthonormal columns, k the numerical rank of B.
/// When k == r the set is the singleton {base}.
struct MaximizerParameterization {
  Matrix base;        // P_1 Q_1^T, d x r
  Matrix null_left;   // d x (d - k)
  Matrix null_right;  // r x (r - k)
  std::size_t rank = 0;
  double max_trace = 0.0;  // sum of singular values of B

  bool singleton() const { return null_right.cols() == 0; }
  /// The maximizer for a given Z; Z must be (d - k) x (r - k) with orthonormal
  /// columns.
  Matrix element(const Matrix& z) const;
};

MaximizerParameterization trace_maximizer_set(const Matrix& b,
                                              double rank_tol = kDefaultRankTol);

struct CanonicalBranch {};
struct NearestBranch {
  Matrix target;
};
using BranchPolicy = std::variant<CanonicalBranch, NearestBranch>;

/// Picks one element of the maximizer set. Canonical takes Z = [I; 0];
/// NearestBranch takes the element closest to `target` in Frobenius norm.
Matrix select_maximizer(const MaximizerParameterization& params,
                        const BranchPolicy& policy);

// U V^T from the thin SVD of m (nearest matrix with orthonormal columns).
Matrix polar_factor(const Matrix& m);

bool has_orthonormal_columns(const Matrix& m, double tol = 1e-10);

}  // namespace mmkit::linalg
