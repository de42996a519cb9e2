#pragma once

#include "jbessel/bessel_operator.hpp"
#include "jbessel/kbessel.hpp"

#include <complex>
#include <map>

namespace jb {

struct RepParams {
  PairPtr jp;
  double nu = 0;

  double lambda() const { return jp->constants().p - 2 * nu; }
  // nu_k = p/2 - k d/2 for k = 0..r-1
  std::vector<double> nu_k() const;
};

// Delta(-conj y, y)^{-nu - p/2} for y in V-.
double phi_nu(const RepParams& rp, const Vec& y);

// Polynomial with complex coefficients in the coordinates of V+ or V-.
class Poly {
 public:
  using C = std::complex<double>;
  explicit Poly(int n = 0) : n_(n) {}
  static Poly constant(int n, C c);
  static Poly variable(int n, int i);
  static Poly linear(int n, const Vec& coeff);
  static Poly random(int n, int degree, std::uint64_t seed);

  int vars() const { return n_; }
  C operator()(const Vec& x) const;
  Poly derivative(int i) const;
  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly operator*(C s) const;
  const std::map<std::vector<int>, C>& terms() const { return terms_; }

 private:
  int n_;
  std::map<std::vector<int>, C> terms_;
  void add(const std::vector<int>& m, C c);
};

// B_lambda on a polynomial, one polynomial per V- coordinate.
std::vector<Poly> bessel_poly(const Pair& jp, double lambda, const Poly& f);

enum class Picture { noncompact, fourier };

// Generators of g = V- + l + V+; an l-element is a pair (T on V+, T on V-).
struct LieGen {
  enum class Kind { a, T, b };
  Kind kind = Kind::a;
  Vec v;
  Mat plus, minus;

  static LieGen from_a(const Vec& a);
  static LieGen from_b(const Vec& b);
  // the derivation (D_{u,v}, -D_{v,u})
  static LieGen from_D(const Pair& jp, const Vec& u, const Vec& v);
  static LieGen from_pair(const Mat& plus, const Mat& minus);
};

// Graded bracket: [a, b] = (D_{b,a}, -D_{a,b}), [T, a] = T^- a, [T, b] = T^+ b, [T, T'] = commutator.
// Returns nullopt when the bracket vanishes by grading ([a,a'] and [b,b']).
std::optional<LieGen> bracket(const Pair& jp, const LieGen& X, const LieGen& Y);

Poly dpi_action(const RepParams& rp, Picture pic, const LieGen& g, const Poly& f);
// First-order noncompact action on an arbitrary function through finite differences.
double dpi_noncompact_fd(const RepParams& rp, const LieGen& g, const std::function<double(const Vec&)>& f,
                         const Vec& y);

// max over points of |[dpi X, dpi Y] f - dpi([X,Y]) f| / max |dpi X dpi Y f|.
double commutator_residual(const RepParams& rp, Picture pic, const LieGen& X, const LieGen& Y, const Poly& f,
                           const std::vector<Vec>& points);

// |dpi(a + conj a) phi_nu| relative to |dpi(a) phi_nu| at y: phi_nu is annihilated by k.
double phi_k_invariance(const RepParams& rp, const Vec& a, const Vec& y);

struct SphericalityResult {
  bool refused = false;
  std::string reason;
  std::vector<std::vector<double>> t;
  std::vector<double> residual;    // |B^i Psi - t_i Psi| over i <= k, relative to |Psi| |t|
  std::vector<double> transverse;  // |B^i Psi| over i > k, relative to |Psi| |t|
  double max_residual = 0;
};
// Full picture (k = r): Psi_nu(t) = K^{(r)}_{(p-e+1)/2 - nu}((t/2)^2) with lambda = p - 2 nu.
SphericalityResult sphericality_full(const RepParams& rp, const std::vector<std::vector<double>>& ts,
                                     bool enforce_hypothesis = true);
// Orbit picture: Psi_k(t) = K^{(k)}_{(kd-e+1)/2}((t/2)^2) with lambda = kd.
SphericalityResult sphericality_orbit(const PairPtr& jp, int k, const std::vector<std::vector<double>>& ts,
                                      bool enforce_hypothesis = true);

struct NormMembership {
  bool finite = false;
  std::optional<double> value;
  // reduced cone problem: K^{(k)}_lambda Delta^mu on a rank-k cone with multiplicity d_cone
  int k = 0;
  double d_cone = 0, lambda = 0, mu = 0;
  bool symbolic_ok = false;  // mu > -1 and the integrability exponent inequalities hold
  std::optional<double> orbit_value;  // direct orbit quadrature (k = 1), times the substitution constant
  std::optional<double> reduction_gap;
};
NormMembership norm_membership(const PairPtr& jp, int k, NormMode mode, bool orbit_crosscheck = false);

// <T_k f, g> = int_{O_k} f g dmu_k.
double intertwiner_restrict(const OrbitContext& c, const ScalarField& f, const ScalarField& g, const OrbitQuad& q = {});
// <(B_{kd} - conj x) f, g> against <f, (B_{kd} - conj x) g> on the orbit, at lambda(nu_k) = kd.
SymmetryResult intertwiner_spot_check(const OrbitContext& c, const ScalarField& f, const ScalarField& g,
                                      const OrbitQuad& q = {});
// max |f(m b_t)| / (|w| |m b_t|) for chart vanishing fields at polar points.
double intertwiner_kernel_check(const OrbitContext& c, int trials = 20, std::uint64_t seed = 17);

struct FourierRank1 {
  std::vector<double> nu, x;
  std::vector<std::vector<double>> ratio;  // F phi_nu(x) / Psi_nu(x)
  std::vector<double> c_gamma;             // mean ratio times Gamma(nu + 1/2)
  double within_nu = 0;                    // worst relative spread of the ratio in x
  double across_nu = 0;                    // relative spread of c_gamma
  double max_error_estimate = 0;
};
FourierRank1 fourier_rank1_check(const std::vector<double>& nus, const std::vector<double>& xs = {0.5, 1, 2, 3});
// 2 int_0^inf (1 + y^2)^{-nu - 1/2} cos(x y) dy by half-period panels and Wynn's epsilon algorithm.
Estimate fourier_phi_rank1(double nu, double x);

}  // namespace jb
