#include "liborforge/linalg.hpp"

#include <cmath>

namespace liborforge {

bool is_symmetric_psd(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    if (m.size() == 0) return true;
    if (!m.allFinite()) return false;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (((m - m.transpose()).cwiseAbs().maxCoeff()) > tol * scale) return false;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff() >= -tol;
}

Matrix psd_factor(const Matrix& m) {
    if (m.size() == 0) return m;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
    Vector roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return solver.eigenvectors() * roots.asDiagonal();
}

}  // namespace liborforge
