#pragma once

#include <Eigen/Dense>

#include <string>

namespace mmkit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline bool all_finite(const Vector& v) { return v.allFinite(); }
inline bool all_finite(const Matrix& m) { return m.allFinite(); }

/// Throws InvalidInput when any entry is NaN or infinite.
void require_finite(const Vector& v, const std::string& what);
void require_finite(const Matrix& m, const std::string& what);

}  // namespace mmkit
