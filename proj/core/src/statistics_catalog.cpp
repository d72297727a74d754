#include <cmath>
#include <stdexcept>

#include "edgeboot/smooth_model.hpp"

namespace edgeboot {

namespace {

MultiPolynomial var(int nvars, int i) { return MultiPolynomial::variable(nvars, i); }

SmoothStatistic mean_statistic(int d) {
  SmoothStatistic s;
  s.name = "mean";
  s.k = 1;
  s.d = s.q = s.raw_dim = d;
  s.value = [](const Eigen::VectorXd& x, const Eigen::VectorXd& a) -> Eigen::VectorXd { return x - a; };
  s.taylor = [d](const Eigen::VectorXd&, int order) {
    std::vector<MultiPolynomial> out;
    for (int c = 0; c < d; ++c) out.push_back(order >= 1 ? var(d, c) : MultiPolynomial(d));
    return out;
  };
  return s;
}

SmoothStatistic mean_difference_statistic(int d) {
  SmoothStatistic s;
  s.name = "mean_difference";
  s.k = 2;
  s.d = s.q = s.raw_dim = d;
  s.value = [d](const Eigen::VectorXd& x, const Eigen::VectorXd& a) -> Eigen::VectorXd {
    return (x.head(d) - x.tail(d)) - (a.head(d) - a.tail(d));
  };
  s.taylor = [d](const Eigen::VectorXd&, int order) {
    std::vector<MultiPolynomial> out;
    for (int c = 0; c < d; ++c)
      out.push_back(order >= 1 ? var(2 * d, c) - var(2 * d, d + c) : MultiPolynomial(2 * d));
    return out;
  };
  return s;
}

Eigen::VectorXd lift_squares(const Eigen::VectorXd& raw) {
  Eigen::VectorXd z(2 * raw.size());
  z << raw, raw.array().square().matrix();
  return z;
}

SmoothStatistic variance_statistic() {
  SmoothStatistic s;
  s.name = "variance";
  s.k = 1;
  s.d = 2;
  s.q = 1;
  s.raw_dim = 1;
  s.lift = lift_squares;
  s.value = [](const Eigen::VectorXd& x, const Eigen::VectorXd& a) {
    Eigen::VectorXd v(1);
    v(0) = (x(1) - x(0) * x(0)) - (a(1) - a(0) * a(0));
    return v;
  };
  s.taylor = [](const Eigen::VectorXd& a, int order) {
    MultiPolynomial p = var(2, 1) - var(2, 0) * (2.0 * a(0)) - var(2, 0) * var(2, 0);
    return std::vector<MultiPolynomial>{p.truncated(order)};
  };
  return s;
}

SmoothStatistic studentized_mean_statistic(int p) {
  SmoothStatistic s;
  s.name = "studentized_mean";
  s.k = 1;
  s.d = 2 * p;
  s.q = p;
  s.raw_dim = p;
  s.lift = lift_squares;
  s.value = [p](const Eigen::VectorXd& x, const Eigen::VectorXd& a) {
    Eigen::VectorXd v(p);
    for (int c = 0; c < p; ++c) {
      const double var_c = x(p + c) - x(c) * x(c);
      if (!(var_c > 0.0)) throw std::domain_error("studentized_mean: nonpositive variance");
      v(c) = (x(c) - a(c)) / std::sqrt(var_c);
    }
    return v;
  };
  // delta_c * s^{-1/2} with s = s0 + e, expanded by the binomial series in e / s0.
  s.taylor = [p](const Eigen::VectorXd& a, int order) {
    const int nv = 2 * p;
    std::vector<MultiPolynomial> out;
    for (int c = 0; c < p; ++c) {
      const double s0 = a(p + c) - a(c) * a(c);
      if (!(s0 > 0.0)) throw std::domain_error("studentized_mean: nonpositive variance at anchor");
      const MultiPolynomial dx = var(nv, c);
      const MultiPolynomial e = (var(nv, p + c) - dx * (2.0 * a(c)) - dx * dx) * (1.0 / s0);
      MultiPolynomial series = MultiPolynomial::constant(nv, 1.0);
      MultiPolynomial power = MultiPolynomial::constant(nv, 1.0);
      double coef = 1.0;
      for (int m = 1; m <= order - 1; ++m) {
        coef *= (-0.5 - (m - 1)) / m;
        power = power.multiply_truncated(e, order - 1);
        series += power * coef;
      }
      out.push_back((dx * series).truncated(order) * (1.0 / std::sqrt(s0)));
    }
    return out;
  };
  return s;
}

SmoothStatistic square_statistic() {
  SmoothStatistic s;
  s.name = "square";
  s.centered = false;
  s.value = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) -> Eigen::VectorXd {
    return x.array().square().matrix();
  };
  s.taylor = [](const Eigen::VectorXd& a, int order) {
    MultiPolynomial p = MultiPolynomial::constant(1, a(0) * a(0)) + var(1, 0) * (2.0 * a(0)) + var(1, 0) * var(1, 0);
    return std::vector<MultiPolynomial>{p.truncated(order)};
  };
  return s;
}

SmoothStatistic exp_statistic() {
  SmoothStatistic s;
  s.name = "exp";
  s.value = [](const Eigen::VectorXd& x, const Eigen::VectorXd& a) -> Eigen::VectorXd {
    return ((x - a).array().exp() - 1.0).matrix();
  };
  s.taylor = [](const Eigen::VectorXd&, int order) {
    MultiPolynomial p(1);
    double f = 1.0;
    for (int m = 1; m <= order; ++m) {
      f *= m;
      p.add_term({m}, 1.0 / f);
    }
    return std::vector<MultiPolynomial>{p};
  };
  return s;
}

}  // namespace

std::vector<std::string> statistic_names() {
  return {"mean", "mean_difference", "studentized_mean", "variance", "square", "exp"};
}

SmoothStatistic make_statistic(const std::string& name, int dim) {
  if (dim < 1) throw std::invalid_argument("make_statistic: dimension must be positive");
  if (name == "mean") return mean_statistic(dim);
  if (name == "mean_difference") return mean_difference_statistic(dim);
  if (name == "studentized_mean") return studentized_mean_statistic(dim);
  if ((name == "variance" || name == "square" || name == "exp") && dim != 1)
    throw std::invalid_argument("statistic '" + name + "' is univariate");
  if (name == "variance") return variance_statistic();
  if (name == "square") return square_statistic();
  if (name == "exp") return exp_statistic();
  throw std::invalid_argument("unknown statistic '" + name + "'");
}

}  // namespace edgeboot
