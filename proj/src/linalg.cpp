#include "mmkit/linalg.hpp"

#include <cmath>

#include "mmkit/errors.hpp"

namespace mmkit::linalg {

namespace {

// Index of the largest-magnitude entry; magnitudes within a relative 1e-12 of
// the maximum count as ties and resolve to the lowest index.
Eigen::Index sign_pivot(const Eigen::Ref<const Vector>& v) {
  const double peak = v.cwiseAbs().maxCoeff();
  const double cutoff = peak - 1e-12 * peak;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= cutoff) return i;
  }
  return 0;
}

}  // namespace

SvdResult svd(const Matrix& b, double rank_tol) {
  require_finite(b, "svd");
  require(rank_tol > 0.0, ErrorKind::InvalidParameter, "svd: rank_tol must be positive");

  Eigen::JacobiSVD<Matrix> jacobi(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult out;
  out.left = jacobi.matrixU();
  out.values = jacobi.singularValues();
  out.right = jacobi.matrixV();

  for (Eigen::Index l = 0; l < out.left.cols(); ++l) {
    const Eigen::Index pivot = sign_pivot(out.left.col(l));
    if (out.left(pivot, l) < 0.0) {
      out.left.col(l) *= -1.0;
      out.right.col(l) *= -1.0;
    }
  }

  const double top = out.values.size() > 0 ? out.values(0) : 0.0;
  out.numerical_rank = 0;
  if (top > 0.0) {
    for (Eigen::Index l = 0; l < out.values.size(); ++l) {
      if (out.values(l) > rank_tol * top) ++out.numerical_rank;
    }
  }
  return out;
}

Matrix complete_basis(const Matrix& basis, std::size_t n) {
  const auto k = static_cast<std::size_t>(basis.cols());
  require(basis.rows() == static_cast<Eigen::Index>(n) || k == 0, ErrorKind::Shape,
          "complete_basis: basis row count differs from n");
  require(k <= n, ErrorKind::Shape, "complete_basis: more columns than dimensions");

  Matrix all(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < k; ++j) all.col(j) = basis.col(j);
  std::size_t have = k;

  for (std::size_t j = 0; j < n && have < n; ++j) {
    Vector v = Vector::Unit(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j));
    // two passes of modified Gram-Schmidt
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t c = 0; c < have; ++c) v -= all.col(c).dot(v) * all.col(c);
    }
    const double norm = v.norm();
    if (norm > 1e-6) {
      all.col(have) = v / norm;
      ++have;
    }
  }
  require(have == n, ErrorKind::Numerical, "complete_basis: failed to complete basis");
  return all.rightCols(static_cast<Eigen::Index>(n - k));
}

Matrix MaximizerParameterization::element(const Matrix& z) const {
  require(z.rows() == null_left.cols() && z.cols() == null_right.cols(), ErrorKind::Shape,
          "maximizer element: Z has the wrong shape");
  if (z.size() == 0) return base;
  return base + null_left * z * null_right.transpose();
}

MaximizerParameterization trace_maximizer_set(const Matrix& b, double rank_tol) {
  const auto d = b.rows();
  const auto r = b.cols();
  require(d >= r, ErrorKind::Shape, "trace_maximizer_set: needs rows >= cols");

  const SvdResult s = svd(b, rank_tol);
  const auto k = static_cast<Eigen::Index>(s.numerical_rank);

  MaximizerParameterization out;
  out.rank = s.numerical_rank;
  out.max_trace = s.values.sum();
  const Matrix p1 = s.left.leftCols(k);
  const Matrix q1 = s.right.leftCols(k);
  out.base = p1 * q1.transpose();
  if (k == 0) out.base = Matrix::Zero(d, r);
  out.null_left = complete_basis(p1, static_cast<std::size_t>(d));
  out.null_right = complete_basis(q1, static_cast<std::size_t>(r));
  return out;
}

Matrix polar_factor(const Matrix& m) {
  if (m.size() == 0) return m;
  const SvdResult s = svd(m);
  return s.left * s.right.transpose();
}

Matrix select_maximizer(const MaximizerParameterization& params,
                        const BranchPolicy& policy) {
  const auto free_rows = params.null_left.cols();
  const auto free_cols = params.null_right.cols();
  if (free_cols == 0) return params.base;

  if (std::holds_alternative<CanonicalBranch>(policy)) {
    return params.element(Matrix::Identity(free_rows, free_cols));
  }
  const Matrix& target = std::get<NearestBranch>(policy).target;
  require(target.rows() == params.base.rows() && target.cols() == params.base.cols(),
          ErrorKind::Shape, "select_maximizer: target has the wrong shape");
  require_finite(target, "select_maximizer target");
  const Matrix projected = params.null_left.transpose() * target * params.null_right;
  return params.element(polar_factor(projected));
}

bool has_orthonormal_columns(const Matrix& m, double tol) {
  if (m.cols() == 0) return true;
  const Matrix gram = m.transpose() * m;
  return (gram - Matrix::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace mmkit::linalg
