#pragma once

#include <Eigen/Dense>

namespace liborforge {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Symmetric PSD up to tolerance (smallest eigenvalue >= -tol).
bool is_symmetric_psd(const Matrix& m, double tol = 1e-12);

// Returns G with G * G^T == m for a symmetric PSD m.
Matrix psd_factor(const Matrix& m);

}  // namespace liborforge
