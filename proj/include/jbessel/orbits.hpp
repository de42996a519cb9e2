#pragma once

#include "jbessel/cone.hpp"

#include <memory>
#include <string>
#include <vector>

namespace jb {

using Pair = JordanPair<double>;
using PairPtr = std::shared_ptr<const Pair>;

struct MeasureVerdict {
  bool exists = false;
  double lambda_char = 0;
  // "k=0", "interior-k", "open-unital", "open-nonunital", "rect-exception"
  std::string case_id;
  std::string reason;
  // trace certificate on the stabilizer directions (only for 1 <= k <= r-1)
  bool certified = false;
  int certificate_dim = 0;
  double certificate_max_trace = 0;
  std::vector<std::string> trace;
};

struct OrbitContext {
  PairPtr jp;
  int k = 0;
  Vec e, e_bar;
  PeirceDecomposition<double> pd;
  Mat B2, B1, B0;  // orthonormal coordinate bases of the Peirce spaces in V+
  MeasureVerdict verdict;
};

OrbitContext make_orbit(PairPtr jp, int k);

// Chart phi_e(x2 + x1) = x2 + x1 + Q_{x1} x2^{-1}; the inverse subtracts the same offset.
Vec chart_offset(const OrbitContext& c, const Vec& x);
Vec chart_forward(const OrbitContext& c, const Vec& x);
Vec chart_inverse(const OrbitContext& c, const Vec& y);
// Columns d(offset)[E_a].
Mat chart_offset_jacobian(const OrbitContext& c, const Vec& x);
// Entry (a,b) is tau-free contraction w . d^2(offset)[E_a, E_b].
Mat chart_offset_hessian(const OrbitContext& c, const Vec& x, const Vec& w);
// x2^{-1} in V2-, with the conditioning check of the Peirce-2 inverse.
Vec v2_inverse(const OrbitContext& c, const Vec& x2);

// xi(B_{v, conj e})(x2 + x1) = x2 + x1 - {v, conj e, x2}, v in V1+.
Vec pullback_translate(const OrbitContext& c, const Vec& v, const Vec& x);
// xi(h)x = hx for h in the Levi factor fixing the Peirce spaces.
Vec pullback_levi(const OrbitContext& c, const Mat& h, const Vec& x);

// m * b_t with t strictly descending and positive; m = nullptr gives b_t.
Vec polar_point(const OrbitContext& c, const std::vector<double>& t, const Mat* m = nullptr);

MeasureVerdict measure_existence(const Pair& jp, int k, const PeirceDecomposition<double>& pd);
std::string measure_verdict_table(const OrbitContext& c);

double jacobian_J(const OrbitContext& c, const std::vector<double>& t, double lambda_char);
double jacobian_J(const OrbitContext& c, const std::vector<double>& t);
double jacobian_J_degree(const OrbitContext& c, double lambda_char);
double fiber_jacobian(const OrbitContext& c, const std::vector<double>& tau);

// |Delta(x2)| for the Jordan algebra V2+ with unit e: |Det_{V2}(Q_{x2} Q_{conj e})|^{k/(2 dim V2)}.
double v2_determinant(const OrbitContext& c, const Vec& x2);
double pullback_density(const OrbitContext& c, const Vec& x2);

// Quadrature for the compact group acting on V+ (sym: SO(r) by conjugation, herm_c: SU(r),
// spin: SO(a) x SO(b), rect: SO(p) x SO(q)), as action matrices on V+ coordinates with weights
// summing to one. Exact for the orbit integrals of matrix-coefficient polynomials up to `degree`;
// Haar Monte Carlo with `samples` points when no product rule is available.
struct GroupRule {
  std::vector<Mat> act;
  std::vector<double> w;
  bool exact = true;
};
GroupRule compact_group_rule(const Pair& jp, int degree = 10, int samples = 4096, std::uint64_t seed = 7);
// Same group acting on V- (the contragredient through tau).
Mat minus_action(const Pair& jp, const Mat& h_plus);

struct OrbitQuad {
  int radial_nodes = 32;
  int angle_nodes = 16;
  int group_degree = 10;
  double drop = 40;  // log-range kept when choosing the radial cut
};

// int_{M cap K} int_{C_k^+} f(m b_t) J(t) dt dm, componentwise for vector-valued f (k <= 2).
Vec orbit_integrate_vec(const OrbitContext& c, const std::function<Vec(const Vec&)>& f, int dim,
                        const OrbitQuad& q = {});
double orbit_integrate(const OrbitContext& c, const std::function<double(const Vec&)>& f, const OrbitQuad& q = {});

// Ratio of int f(s x) dmu to int f dmu against s^{-n lambda / p}.
struct EquivarianceCheck {
  double s = 2, measured = 0, expected = 0, rel_error = 0;
};
EquivarianceCheck orbit_scaling_check(const OrbitContext& c, const std::function<double(const Vec&)>& f, double s,
                                      const OrbitQuad& q = {});

// Smooth bump exp(-1/(1 - |x - x0|^2 / rho^2)) centred at a point x0 = phi(y0) of the orbit.
struct BumpField {
  Vec y0;  // chart coordinates of the centre, in V2 + V1
  Vec x0;
  double rho = 1;
  Vec tilt;  // the bump is multiplied by 1 + tilt . (x - x0)
  double operator()(const Vec& x) const;
};
// Bumps whose support stays inside the chart domain (x2 component near a multiple of e).
std::vector<BumpField> make_bumps(const OrbitContext& c, int count, std::uint64_t seed = 11);

// Chart integral int f(phi(x2+x1)) |Delta(x2)|^{kd-p} dx against the polar integral (k = 1).
struct ConsistencyQuad {
  int chart_nodes = 28;  // Gauss-Legendre nodes per chart coordinate
  int radial_nodes = 96;
  int group_degree = 64;
};
struct MeasureConsistency {
  std::vector<double> polar, chart, ratio;
  double dispersion = 0;  // (max - min) / mean of polar / chart
};
MeasureConsistency measure_consistency(const OrbitContext& c, const std::vector<BumpField>& fs,
                                       const ConsistencyQuad& q = {});

}  // namespace jb
