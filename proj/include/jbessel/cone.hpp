#pragma once

#include "jbessel/jordan_pair.hpp"
#include "jbessel/quadrature.hpp"

#include <complex>
#include <functional>
#include <memory>
#include <random>

namespace jb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

// A^(k) = Fix(x -> Q_e conj x) inside V2(e) for e = e1 + ... + ek, or an abstract cone of rank k
// and multiplicity d when no parent pair is attached.
struct ConeContext {
  int k = 1;
  double d = 1;
  double n = 1;  // dimension k + k(k-1)d/2
  std::shared_ptr<const JordanPair<double>> parent;
  Vec e;      // identity of A^(k) in V+
  Vec e_bar;  // conj e in V-
  Mat basis;  // columns: basis of A^(k) in V+, orthonormal for tr(x o y)

  double n_over_k() const { return n / k; }
};

ConeContext make_cone(std::shared_ptr<const JordanPair<double>> parent, int k);
ConeContext make_cone(int k, double d);

struct ConeSpectrum {
  std::vector<double> values;  // with multiplicity, descending, length k
  std::vector<Vec> idempotents;
  std::vector<int> ranks;
};

Vec jordan_mul(const ConeContext& c, const Vec& x, const Vec& y);
double cone_trace(const ConeContext& c, const Vec& x);
ConeSpectrum cone_spectrum(const ConeContext& c, const Vec& x);
double cone_det(const ConeContext& c, const Vec& x);
bool cone_contains(const ConeContext& c, const Vec& x, double tol = 1e-10);
Vec cone_inverse(const ConeContext& c, const Vec& x);
// P(x)y = 2 x o (x o y) - x^2 o y
Vec cone_quadratic(const ConeContext& c, const Vec& x, const Vec& y);
bool in_subalgebra(const ConeContext& c, const Vec& x, double tol = 1e-9);

std::complex<double> complex_gamma(std::complex<double> z);
std::complex<double> gindikin_gamma(int k, double d, std::complex<double> lambda);
double gindikin_gamma(int k, double d, double lambda);

// Constant c0 in  int_A f dx = c0 * int_{R^k} F(s) prod_{i<j} |s_i - s_j|^d ds  for K-invariant f.
double polar_constant(int k, double d);

// K-invariant integrand given through its spectral values (any order).
using RadialIntegrand = std::function<double(const std::vector<double>&)>;
// Integrand on the abstract matrix model (real symmetric for d=1, complex Hermitian for d=2).
using MatrixIntegrand = std::function<double(const CMat&)>;

struct ConeIntegral {
  double value = 0;
  double error = 0;
  std::string method;
  double polar_constant = 0;
};

// Ordered chamber s1 > ... > sk > 0 parametrized by s1 = exp(u), s_{j+1} = s_j w_j.
ConeIntegral cone_integrate_radial(const ConeContext& c, const RadialIntegrand& f, const QuadratureSpec& q);
// Importance sampling from the cone Gamma distribution of shape alpha (default n/k).
ConeIntegral cone_integrate_mc(const ConeContext& c, const MatrixIntegrand& f, const QuadratureSpec& q,
                               double alpha = -1);
ConeIntegral cone_integrate(const ConeContext& c, const RadialIntegrand& f, const QuadratureSpec& q);

// Bartlett sample of the cone Gamma distribution with density prop. to exp(-tr v) det(v)^(alpha - n/k).
CMat sample_cone_gamma(int k, double d, double alpha, std::mt19937_64& rng);
std::vector<double> hermitian_eigenvalues(const CMat& m);

}  // namespace jb
