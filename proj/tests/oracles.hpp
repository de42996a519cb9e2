#pragma once
// Reference values computed without the library's own machinery: matrix models, std special functions,
// and plain quadrature.

#include "jbessel/bessel_operator.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using jb::Mat;
using jb::Pair;
using jb::Vec;

// Delta(x, y): det(I - X Y^*) in the matrix model, 1 - q(x,y) + q(x) q(y) for spin factors.
inline double pair_det(const Pair& jp, const Vec& x, const Vec& y) {
  if (jp.spec().family == jb::Family::spin) {
    const Mat& G = jp.gram();
    return 1 - x.dot(G * y) + 0.25 * x.dot(G * x) * y.dot(G * y);
  }
  Eigen::MatrixXcd X = jp.to_complex(x), Y = jp.to_complex(y);
  Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(X.rows(), X.rows());
  return (I - X * Y.adjoint()).determinant().real();
}

// {x, y, z} = X Y^* Z + Z Y^* X in the matrix model (not for spin factors).
inline Eigen::MatrixXcd triple(const Pair& jp, const Vec& x, const Vec& y, const Vec& z) {
  Eigen::MatrixXcd X = jp.to_complex(x), Y = jp.to_complex(y), Z = jp.to_complex(z);
  return X * Y.adjoint() * Z + Z * Y.adjoint() * X;
}

// 2 x^{(1-lambda)/2} K_{1-lambda}(2 sqrt x)
inline double macdonald(double lambda, double x) {
  return 2 * std::pow(x, (1 - lambda) / 2) * std::cyl_bessel_k(std::abs(1 - lambda), 2 * std::sqrt(x));
}

// (2 pi)^{(n-k)/2} prod_j Gamma(s - (j-1) d/2)
inline double gindikin_gamma(int k, double d, double s) {
  double n = k + k * (k - 1) * d / 2;
  double g = std::pow(2 * M_PI, (n - k) / 2);
  for (int j = 0; j < k; ++j) g *= std::tgamma(s - j * d / 2);
  return g;
}

// Convergence of the two cone Gamma integrals in the proof of integrability: each argument must exceed (k-1)d/2.
inline bool integrable(int k, double d, double lambda, double mu, bool l2) {
  const double nk = 1 + (k - 1) * d / 2, bound = (k - 1) * d / 2;
  if (!(mu + nk > bound)) return false;
  return l2 ? (mu - 2 * lambda + 3 * nk > bound) : (mu - lambda + 2 * nk > bound);
}

// int_0^inf K_lambda(x) x^mu dx in rank one, trapezoid in u = log x.
inline double rank1_l1(double lambda, double mu) {
  const double h = 1.0 / 64;
  double s = 0;
  for (double u = -60; u <= 6; u += h) {
    double x = std::exp(u);
    s += macdonald(lambda, x) * std::pow(x, mu) * x;
  }
  return s * h;
}

// 2 sqrt(pi) / Gamma(nu + 1/2) (x/2)^nu K_nu(x): Fourier transform of (1 + y^2)^{-nu - 1/2}.
inline double fourier_rank1(double nu, double x) {
  return 2 * std::sqrt(M_PI) / std::tgamma(nu + 0.5) * std::pow(x / 2, nu) * std::cyl_bessel_k(nu, x);
}

// exp(1 - 1/(1 - |x-c|^2/rho^2)) (a0 + l.(x-c)) with exact jet; support is the ball of radius rho.
struct Bump {
  Vec c, l;
  double rho = 1, a0 = 1;

  jb::FieldJet jet(const Vec& x) const {
    const int n = static_cast<int>(x.size());
    Vec w = x - c;
    double u = w.squaredNorm() / (rho * rho);
    jb::FieldJet j;
    j.grad = Vec::Zero(n);
    j.hess = Mat::Zero(n, n);
    if (u >= 1) return j;
    const double v = 1 - u, h = std::exp(1 - 1 / v);
    const double h1 = -h / (v * v), h2 = h / (v * v * v * v) - 2 * h / (v * v * v);
    const double p = a0 + l.dot(w), s = 2 / (rho * rho);
    j.value = h * p;
    j.grad = h * l + p * h1 * s * w;
    j.hess = h1 * s * (l * w.transpose() + w * l.transpose()) + p * (h2 * s * s * w * w.transpose() + h1 * s * Mat::Identity(n, n));
    return j;
  }
};

inline std::pair<std::vector<double>, std::vector<double>> legendre(int n, double a, double b) {
  std::vector<double> xs(n), ws(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5)), dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
      double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    xs[i] = 0.5 * (a + b) + 0.5 * (b - a) * z;
    ws[i] = (b - a) / ((1 - z * z) * dp * dp);
  }
  return {xs, ws};
}

// Points +-e_i and (+-e_i +- e_j)/sqrt2 on the unit sphere, weights normalized to total mass one.
// Exact for polynomials of degree <= 5 in the direction.
struct SphereRule {
  std::vector<Vec> u;
  std::vector<double> w;
};
inline SphereRule sphere_rule5(int n) {
  SphereRule r;
  const double B = 1.0 / (n * (n + 2.0)), A = (4.0 - n) / (2.0 * n * (n + 2.0));
  for (int i = 0; i < n; ++i)
    for (double s : {-1.0, 1.0}) {
      r.u.push_back(s * Vec::Unit(n, i));
      r.w.push_back(A);
    }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (double s : {-1.0, 1.0})
        for (double t : {-1.0, 1.0}) {
          r.u.push_back((s * Vec::Unit(n, i) + t * Vec::Unit(n, j)) / std::sqrt(2.0));
          r.w.push_back(B);
        }
  return r;
}

// int_{ball(c, rho)} F(x) dx for F radial in |x - c| times a polynomial of degree <= 5 in the direction.
template <typename F>
Vec ball_integral(const Vec& c, double rho, int dim_out, F&& f, int nr = 160) {
  const int n = static_cast<int>(c.size());
  const double area = 2 * std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0);
  SphereRule sr = sphere_rule5(n);
  auto [rs, rw] = legendre(nr, 0, rho);
  Vec acc = Vec::Zero(dim_out);
  for (int i = 0; i < nr; ++i) {
    Vec shell = Vec::Zero(dim_out);
    for (size_t k = 0; k < sr.u.size(); ++k) shell += sr.w[k] * f(Vec(c + rs[i] * sr.u[k]));
    acc += rw[i] * std::pow(rs[i], n - 1) * area * shell;
  }
  return acc;
}

}  // namespace oracle
