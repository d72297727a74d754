#include "edgeboot/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

namespace edgeboot {

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& a_in, double tol, int max_sweeps) {
  const Eigen::Index n = a_in.rows();
  if (a_in.cols() != n) throw std::invalid_argument("jacobi_eigen: matrix must be square");
  Eigen::MatrixXd a = 0.5 * (a_in + a_in.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= tol * scale) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) < a(j, j); });
  SymmetricEigen out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = a(order[i], order[i]);
    out.vectors.col(i) = v.col(order[i]);
  }
  return out;
}

double lambda_min(const Eigen::MatrixXd& a) { return jacobi_eigen(a).values(0); }

double lambda_max(const Eigen::MatrixXd& a) {
  const auto e = jacobi_eigen(a);
  return e.values(e.values.size() - 1);
}

bool is_spd(const Eigen::MatrixXd& a, double floor) {
  if (a.rows() == 0 || a.rows() != a.cols() || !a.allFinite()) return false;
  return lambda_min(a) > floor;
}

void require_spd(const Eigen::MatrixXd& a, const char* what, double floor) {
  if (!is_spd(a, floor))
    throw std::domain_error(std::string(what) + ": matrix is not symmetric positive definite");
}

namespace {

Eigen::MatrixXd spectral_power(const Eigen::MatrixXd& a, double power, double floor) {
  const auto e = jacobi_eigen(a);
  if (e.values(0) < floor)
    throw std::domain_error("spectral_power: eigenvalue below floor (matrix is singular)");
  Eigen::VectorXd p = e.values.array().pow(power);
  return e.vectors * p.asDiagonal() * e.vectors.transpose();
}

}  // namespace

Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& a, double floor) {
  return spectral_power(a, 0.5, floor);
}

Eigen::MatrixXd sym_inv_sqrt(const Eigen::MatrixXd& a, double floor) {
  return spectral_power(a, -0.5, floor);
}

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw std::domain_error("cholesky_lower: matrix is not SPD");
  return llt.matrixL();
}

}  // namespace edgeboot
