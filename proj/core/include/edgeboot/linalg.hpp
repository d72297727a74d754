#pragma once

#include <Eigen/Core>

namespace edgeboot {

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns are eigenvectors
};

/// Cyclic Jacobi rotations. Intended for the small matrices (q <= 4, kd <= 8)
/// used throughout; converges quadratically and keeps eigenvectors orthonormal.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& a, double tol = 1e-15, int max_sweeps = 100);

double lambda_min(const Eigen::MatrixXd& a);
double lambda_max(const Eigen::MatrixXd& a);

/// Positive definite with smallest eigenvalue above `floor`.
bool is_spd(const Eigen::MatrixXd& a, double floor = 1e-10);
/// Throws std::domain_error naming `what` unless is_spd(a, floor).
void require_spd(const Eigen::MatrixXd& a, const char* what, double floor = 1e-10);

/// Symmetric square root and inverse square root via eigendecomposition.
/// Both throw std::domain_error when an eigenvalue is below `floor`.
Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& a, double floor = 1e-10);
Eigen::MatrixXd sym_inv_sqrt(const Eigen::MatrixXd& a, double floor = 1e-10);

/// Lower Cholesky factor (a = L L^T); throws std::domain_error if not SPD.
Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a);

}  // namespace edgeboot
