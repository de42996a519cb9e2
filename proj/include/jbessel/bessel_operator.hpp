#pragma once

#include "jbessel/orbits.hpp"

#include <functional>
#include <optional>

namespace jb {

// Value, coordinate gradient and coordinate Hessian of a scalar field on V+.
struct FieldJet {
  double value = 0;
  Vec grad;
  Mat hess;
};

enum class SupportKind { compact, radial, general };

struct ScalarField {
  std::function<double(const Vec&)> value;
  std::function<FieldJet(const Vec&)> jet;  // analytic derivatives, optional
  SupportKind support = SupportKind::general;
  bool allow_fd = true;
};

// Central differences with one Richardson level: gradient step 1e-5 (1 + |x|), Hessian step 1e-3 (1 + |x|).
FieldJet fd_jet(const std::function<double(const Vec&)>& f, const Vec& x);
FieldJet field_jet(const ScalarField& f, const Vec& x);
// Relative mismatch between the analytic and the finite-difference gradient.
double jet_self_check(const ScalarField& f, const Vec& x);

// exp(-(x-m)^T A (x-m) / 2) (a0 + l . (x - m)) with exact derivatives.
struct GaussPoly {
  Vec center;
  Mat A;
  double a0 = 1;
  Vec l;

  double operator()(const Vec& x) const;
  FieldJet jet(const Vec& x) const;
  ScalarField field() const;
};
// Random instance; `isotropic` gives A = c I and center 0, which keeps orbit integrals polynomial on the group.
GaussPoly random_gauss_poly(int n, std::uint64_t seed, bool isotropic = false);

struct BesselApplication {
  double lambda = 0;
  Vec value;          // in V-
  Vec second_order;   // 1/2 sum H_ab {c_a, x, c_b}
  Vec gradient_part;  // lambda * gradient
};

// Optional `basis` (columns in V+) replaces the coordinate basis; its dual basis is taken through tau.
BesselApplication apply_bessel(const Pair& jp, double lambda, const FieldJet& j, const Vec& x,
                               const Mat* basis = nullptr);
BesselApplication apply_bessel(const Pair& jp, double lambda, const ScalarField& f, const Vec& x,
                               const Mat* basis = nullptr);

// Relative residuals of the cosine and sine parts of B(exp(-i tau(x,y))) = -exp(-i tau(x,y)) (Q_y x + i lambda y).
struct ExponentialProbe {
  double cos_residual = 0, sin_residual = 0;
};
ExponentialProbe exponential_probe(const Pair& jp, double lambda, const Vec& x, const Vec& y);

// Radial operators on (M cap K)-invariant fields f(m b_t) = F(t).
using RadialFunction = std::function<double(const std::vector<double>&)>;
struct RadialApplication {
  std::vector<double> components;  // coefficient of conj e_i, i = 1..r
  Vec expected;                    // sum_i components_i conj e_i
  Vec full;                        // apply_bessel on the invariant extension at b_t
  double rel_error = 0;
};
// Coefficients of the radial operators alone (no cross-check).
std::vector<double> radial_components(const Pair& jp, double lambda, const RadialFunction& F,
                                      const std::vector<double>& t);
std::vector<double> orbit_radial_components(const Pair& jp, int k, const RadialFunction& F,
                                            const std::vector<double>& t);
// Full rank: t has r strictly descending positive entries.
RadialApplication apply_bessel_radial(const Pair& jp, double lambda, const RadialFunction& F, const std::vector<double>& t);
// Orbit of rank k at lambda = kd: F depends on k variables and the extension uses the top k singular values.
RadialApplication apply_bessel_orbit_radial(const Pair& jp, int k, const RadialFunction& F, const std::vector<double>& t);

// Right-hand side of the pullback formula at x = x2 + x1 for F given on the chart side.
struct PullbackApplication {
  Vec value;
  Vec normal_part;  // (lambda - kd) B_{x2^{-1}, x1} grad_0 F
  Mat normal_operator;  // B_{x2^{-1}, x1} on V-
};
PullbackApplication pullback_bessel(const OrbitContext& c, double lambda, const FieldJet& F, const Vec& x);
// Chain-rule oracle: the jet of F o phi^{-1} at phi(x) from the jet of F at x.
FieldJet pushforward_jet(const OrbitContext& c, const FieldJet& F, const Vec& x);

// w . (P0 y - offset(y)): vanishes on the orbit inside the chart domain.
ScalarField vanishing_field(const OrbitContext& c, const Vec& w);

struct TangencyScan {
  std::vector<double> lambda, residual;
  double argmin = 0;
  int zeros = 0;  // grid points with residual <= 1e-8
  bool unique_zero_at_kd = false;
};
// max over chart points and vanishing fields of |B_lambda f| / (|grad f| (1 + |x|)).
double tangency_residual(const OrbitContext& c, double lambda, int trials = 8, std::uint64_t seed = 3);
TangencyScan tangency_scan(const OrbitContext& c, const std::vector<double>& grid, int trials = 8);

struct AdjointResult {
  Vec lhs, rhs;
  double residual = 0;  // max |lhs - rhs| / max(|lhs|, |rhs|)
};
// int B_lambda f . g dx against int f . B_{2p - lambda} g dx, exact Gauss-Hermite on the product Gaussian.
AdjointResult adjoint_residual_lebesgue(const Pair& jp, double lambda, const GaussPoly& f, const GaussPoly& g,
                                        int nodes = 4);
// Same identity for compactly supported fields on the box [lo, hi]^n (Gauss-Legendre per coordinate).
AdjointResult adjoint_residual_lebesgue(const Pair& jp, double lambda, const ScalarField& f, const ScalarField& g,
                                        double lo, double hi, int nodes = 24);

struct SymmetryResult {
  Vec lhs, rhs;
  double residual = 0;
};
// int B f . g dmu_k against int f . B g dmu_k with the orbit's character exponent.
SymmetryResult orbit_symmetry_residual(const OrbitContext& c, const ScalarField& f, const ScalarField& g,
                                       const OrbitQuad& q = {});

// |B(f o h^{-1})(x) - h^- (B f)(h^{-1} x)| / |B f| for a structure automorphism h on V+.
double equivariance_residual(const Pair& jp, double lambda, const ScalarField& f, const Mat& h_plus, const Vec& x);

}  // namespace jb
