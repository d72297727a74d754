#pragma once

#include <vector>

namespace edgeboot {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite rule for the probabilists' weight exp(-x^2/2)/sqrt(2 pi),
/// so that sum w_i f(x_i) approximates E f(Z), Z ~ N(0,1).
QuadratureRule gauss_hermite_normal(int n);

/// Gauss-Legendre rule on [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// Gauss-Laguerre rule for the weight exp(-x) on [0, inf).
QuadratureRule gauss_laguerre(int n);

double normal_pdf(double x);
double normal_cdf(double x);

}  // namespace edgeboot
