#include "jbessel/orbits.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace jb {

OrbitContext make_orbit(PairPtr jp, int k) {
  if (k < 0 || k > jp->rank()) throw JordanError("orbit rank k must lie in [0, r]");
  OrbitContext c;
  c.jp = jp;
  c.k = k;
  c.e = jp->frame_sum(k);
  c.e_bar = jp->theta(c.e);
  c.pd = jp->peirce(c.e, c.e_bar);
  c.B2 = range_basis<double>(c.pd.P2);
  c.B1 = range_basis<double>(c.pd.P1);
  c.B0 = range_basis<double>(c.pd.P0);
  c.verdict = measure_existence(*jp, k, c.pd);
  return c;
}

Vec v2_inverse(const OrbitContext& c, const Vec& x2) {
  Mat A = c.B2.transpose() * c.jp->Q(Side::plus, x2) * range_basis<double>(c.pd.P2m);
  Eigen::JacobiSVD<Mat> svd(A);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(s.size() - 1) <= 1e-12 * std::max(1.0, s(0)))
    throw JordanError("x2 is singular in V2");
  return c.jp->peirce2_inverse(x2, c.pd);
}

Vec chart_offset(const OrbitContext& c, const Vec& x) {
  Vec x2 = c.pd.P2 * x, x1 = c.pd.P1 * x;
  return c.jp->quad(Side::plus, x1, v2_inverse(c, x2));
}

Vec chart_forward(const OrbitContext& c, const Vec& x) {
  Vec y = c.pd.P2 * x + c.pd.P1 * x;
  return y + chart_offset(c, y);
}

Vec chart_inverse(const OrbitContext& c, const Vec& y) { return y - chart_offset(c, y); }

namespace {

struct OffsetJet {
  const OrbitContext& c;
  Vec x1, u;
  explicit OffsetJet(const OrbitContext& ctx, const Vec& x) : c(ctx) {
    x1 = c.pd.P1 * x;
    u = v2_inverse(c, c.pd.P2 * x);
  }
  // derivative of x2 -> x2^{-1}
  Vec du(const Vec& h) const { return -c.jp->quad(Side::minus, u, c.pd.P2 * h); }
  Vec d2u(const Vec& h, const Vec& hp) const {
    return c.jp->triple(Side::minus, u, c.pd.P2 * h, c.jp->quad(Side::minus, u, c.pd.P2 * hp));
  }
  Vec d1(const Vec& h) const {
    return c.jp->triple(Side::plus, x1, u, c.pd.P1 * h) + c.jp->quad(Side::plus, x1, du(h));
  }
  Vec d2(const Vec& h, const Vec& hp) const {
    const auto& J = *c.jp;
    Vec h1 = c.pd.P1 * h, hp1 = c.pd.P1 * hp;
    return J.triple(Side::plus, hp1, u, h1) + J.triple(Side::plus, x1, du(hp), h1) +
           J.triple(Side::plus, x1, du(h), hp1) + J.quad(Side::plus, x1, d2u(h, hp));
  }
};

}  // namespace

Mat chart_offset_jacobian(const OrbitContext& c, const Vec& x) {
  OffsetJet g(c, x);
  const int n = c.jp->dim();
  Mat J(n, n);
  for (int a = 0; a < n; ++a) J.col(a) = g.d1(Vec::Unit(n, a));
  return J;
}

Mat chart_offset_hessian(const OrbitContext& c, const Vec& x, const Vec& w) {
  OffsetJet g(c, x);
  const int n = c.jp->dim();
  Mat H(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) H(a, b) = H(b, a) = w.dot(g.d2(Vec::Unit(n, a), Vec::Unit(n, b)));
  return H;
}

Vec pullback_translate(const OrbitContext& c, const Vec& v, const Vec& x) {
  if ((c.pd.P1 * v - v).norm() > 1e-9 * std::max(1.0, v.norm()))
    throw JordanError("translation parameter must lie in V1+");
  return x - c.jp->triple(Side::plus, v, c.e_bar, c.pd.P2 * x);
}

Vec pullback_levi(const OrbitContext& c, const Mat& h, const Vec& x) {
  for (const Mat* P : {&c.pd.P2, &c.pd.P1, &c.pd.P0})
    if ((*P * h * *P - h * *P).norm() > 1e-8 * std::max(1.0, h.norm()))
      throw JordanError("Levi element must preserve the Peirce spaces of e");
  return h * x;
}

Vec polar_point(const OrbitContext& c, const std::vector<double>& t, const Mat* m) {
  if (static_cast<int>(t.size()) != c.k) throw JordanError("polar_point: t must have k entries");
  for (size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0)) throw JordanError("polar_point: t must be positive");
    if (i > 0 && !(t[i - 1] > t[i])) throw JordanError("polar_point: t must be strictly descending");
  }
  Vec b = c.jp->b_t(t);
  return m ? Vec(*m * b) : b;
}

MeasureVerdict measure_existence(const Pair& jp, int k, const PeirceDecomposition<double>& pd) {
  const auto& C = jp.constants();
  const int r = C.r, n = jp.dim();
  MeasureVerdict v;
  std::ostringstream os;
  if (k == 0) {
    v.exists = true;
    v.case_id = "k=0";
    v.reason = "point orbit carries the Dirac measure with trivial character";
    return v;
  }
  if (k == r) {
    v.exists = true;
    v.lambda_char = C.p;
    v.case_id = C.unital ? "open-unital" : "open-nonunital";
    v.reason = C.unital ? "open orbit of a unital pair: every real character occurs; lambda = p is Lebesgue measure"
                        : "open orbit of a non-unital pair: only lambda = p";
    return v;
  }
  const bool table = !jp.spec().is_rect_exception();
  v.lambda_char = k * C.d;
  v.case_id = table ? "interior-k" : "rect-exception";

  // basis of the structure algebra acting on V+: span of D_{E_a, E_b}
  const int g = n * n;
  Mat gens(n * n, g);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Mat D = jp.D(Side::plus, Vec::Unit(n, a), Vec::Unit(n, b));
      gens.col(a * n + b) = Eigen::Map<const Vec>(D.data(), n * n);
    }
  Mat L = range_basis<double>(gens);
  const int dimL = static_cast<int>(L.cols());
  Mat I = Mat::Identity(n, n);
  Mat A(3 * n * n, dimL);
  for (int j = 0; j < dimL; ++j) {
    Mat T = Eigen::Map<const Mat>(L.col(j).data(), n, n);
    Mat c1 = T * pd.P2, c2 = T * pd.P0, c3 = (I - pd.P1) * T * pd.P1;
    A.col(j) << Eigen::Map<const Vec>(c1.data(), n * n), Eigen::Map<const Vec>(c2.data(), n * n),
        Eigen::Map<const Vec>(c3.data(), n * n);
  }
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > 1e-9 * std::max(1.0, smax)) ++rank;
  Mat null = svd.matrixV().rightCols(dimL - rank);
  v.certificate_dim = static_cast<int>(null.cols());
  for (int j = 0; j < null.cols(); ++j) {
    Vec coeff = L * null.col(j);
    Mat T = Eigen::Map<const Mat>(coeff.data(), n, n);
    double tr = std::abs(T.trace()) / std::max(T.norm(), 1e-300);
    v.certificate_max_trace = std::max(v.certificate_max_trace, tr);
  }
  const bool certificate = v.certificate_max_trace <= 1e-8;
  v.certified = true;
  os << "dim l = " << dimL << ", stabilizer directions vanishing on V2+V0: " << v.certificate_dim
     << ", max |Tr_V1| / |T| = " << v.certificate_max_trace;
  v.trace.push_back(os.str());
  if (certificate != table)
    throw JordanError("measure classification table and trace certificate disagree for " + jp.spec().str() +
                      " k=" + std::to_string(k));
  v.exists = table;
  v.reason = table ? "1 <= k <= r-1 with lambda = kd"
                   : "no equivariant measure: rectangular pair with p != q at 1 <= k <= r-1 (a stabilizer "
                     "direction has nonzero trace on V1+)";
  return v;
}

std::string measure_verdict_table(const OrbitContext& c) {
  std::ostringstream os;
  os << c.k << "," << (c.verdict.exists ? "true" : "false") << "," << c.verdict.lambda_char << ","
     << c.verdict.case_id;
  return os.str();
}

static void check_chamber(const std::vector<double>& t) {
  for (size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0)) throw JordanError("t must be positive");
    if (i > 0 && !(t[i - 1] > t[i])) throw JordanError("t must be strictly descending");
  }
}

double jacobian_J(const OrbitContext& c, const std::vector<double>& t, double lambda_char) {
  check_chamber(t);
  const auto& C = c.jp->constants();
  const int k = static_cast<int>(t.size());
  const double a = lambda_char + (C.r - 2 * k + 1) * C.d + C.b / 2 - 1;
  double J = 1;
  for (int j = 0; j < k; ++j) J *= std::pow(t[j], a);
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) J *= std::pow(t[i] - t[j], C.d_plus) * std::pow(t[i] + t[j], C.d_minus);
  return J;
}

double jacobian_J(const OrbitContext& c, const std::vector<double>& t) {
  if (!c.verdict.exists) throw JordanError(c.verdict.reason);
  return jacobian_J(c, t, c.verdict.lambda_char);
}

double jacobian_J_degree(const OrbitContext& c, double lambda_char) {
  const auto& C = c.jp->constants();
  const int k = c.k;
  return k * (lambda_char + (C.r - 2 * k + 1) * C.d + C.b / 2 - 1) + 0.5 * k * (k - 1) * (C.d_plus + C.d_minus);
}

double fiber_jacobian(const OrbitContext& c, const std::vector<double>& tau) {
  for (size_t i = 1; i < tau.size(); ++i)
    if (!(tau[i - 1] > tau[i])) throw JordanError("tau must be strictly descending");
  const auto& C = c.jp->constants();
  double J = 1;
  for (size_t i = 0; i < tau.size(); ++i)
    for (size_t j = i + 1; j < tau.size(); ++j) {
      double h = 0.5 * (tau[i] - tau[j]);
      J *= std::pow(std::sinh(h), C.d_plus) * std::pow(std::cosh(h), C.d_minus);
    }
  return J;
}

double v2_determinant(const OrbitContext& c, const Vec& x2) {
  const int n2 = static_cast<int>(c.B2.cols());
  if (n2 == 0) return 1;
  Mat M = c.B2.transpose() * c.jp->Q(Side::plus, x2) * c.jp->Q(Side::minus, c.e_bar) * c.B2;
  return std::pow(std::abs(M.determinant()), c.k / (2.0 * n2));
}

double pullback_density(const OrbitContext& c, const Vec& x2) {
  double D = v2_determinant(c, x2);
  if (!(D > 0)) throw JordanError("x2 is singular in V2");
  const auto& C = c.jp->constants();
  return std::pow(D, c.k * C.d - C.p);
}

// ---------------------------------------------------------------------------
// compact group rules

namespace {

struct Factor {
  std::vector<CMat> g;
  std::vector<double> w;
  bool exact = true;
};

CMat rot2(double a) {
  CMat m(2, 2);
  m << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return m;
}

Factor trivial_factor(int m) {
  Factor f;
  f.g.push_back(CMat::Identity(m, m));
  f.w.push_back(1);
  return f;
}

Factor so2_factor(int degree) {
  Factor f;
  const int N = degree + 2;
  for (int j = 0; j < N; ++j) f.g.push_back(rot2(2 * M_PI * j / N)), f.w.push_back(1.0 / N);
  return f;
}

// Euler angles R_z(alpha) R_y(beta) R_z(gamma): trapezoid in alpha, gamma and Gauss-Legendre in cos(beta).
template <typename Build>
Factor euler_factor(int degree, Build build) {
  Factor f;
  const int N = degree + 2;
  Rule gl = gauss_legendre(degree / 2 + 2, -1, 1);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < gl.size(); ++j)
      for (int l = 0; l < N; ++l) {
        f.g.push_back(build(2 * M_PI * i / N, std::acos(gl.x[j]), 2 * M_PI * l / N));
        f.w.push_back(0.5 * gl.w[j] / (N * N));
      }
  return f;
}

Factor so3_factor(int degree) {
  return euler_factor(degree, [](double a, double b, double g) {
    auto rz = [](double t) {
      CMat m = CMat::Identity(3, 3);
      m.block(0, 0, 2, 2) = rot2(t);
      return m;
    };
    CMat ry = CMat::Identity(3, 3);
    ry(0, 0) = ry(2, 2) = std::cos(b);
    ry(0, 2) = std::sin(b);
    ry(2, 0) = -std::sin(b);
    return CMat(rz(a) * ry * rz(g));
  });
}

Factor su2_factor(int degree) {
  using C = std::complex<double>;
  return euler_factor(degree, [](double a, double b, double g) {
    auto ph = [](double t) {
      CMat m = CMat::Zero(2, 2);
      m(0, 0) = std::exp(C(0, t / 2));
      m(1, 1) = std::exp(C(0, -t / 2));
      return m;
    };
    return CMat(ph(a) * rot2(b / 2) * ph(g));
  });
}

Factor haar_factor(int m, bool complex, int samples, std::mt19937_64& rng) {
  Factor f;
  f.exact = false;
  std::normal_distribution<double> N(0, 1);
  for (int s = 0; s < samples; ++s) {
    CMat Z(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) Z(i, j) = complex ? std::complex<double>(N(rng), N(rng)) : N(rng);
    Eigen::HouseholderQR<CMat> qr(Z);
    CMat Q = qr.householderQ();
    CMat R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < m; ++j) {
      auto d = R(j, j);
      Q.col(j) *= d / std::abs(d);
    }
    if (!complex && Q.determinant().real() < 0) Q.col(0) *= -1;
    f.g.push_back(Q);
    f.w.push_back(1.0 / samples);
  }
  return f;
}

Factor orthogonal_factor(int m, int degree, int samples, std::mt19937_64& rng) {
  if (m == 1) {
    Factor f;
    f.g = {CMat::Identity(1, 1), -CMat::Identity(1, 1)};
    f.w = {0.5, 0.5};
    return f;
  }
  if (m == 2) return so2_factor(degree);
  if (m == 3) return so3_factor(degree);
  return haar_factor(m, false, samples, rng);
}

}  // namespace

GroupRule compact_group_rule(const Pair& jp, int degree, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto& spec = jp.spec();
  const int n = jp.dim();
  Factor f1, f2 = trivial_factor(1);
  switch (spec.family) {
    case Family::sym:
      f1 = orthogonal_factor(spec.a, degree, samples, rng);
      if (spec.a == 1) f1 = trivial_factor(1);
      break;
    case Family::herm_c:
      f1 = spec.a == 1 ? trivial_factor(1) : spec.a == 2 ? su2_factor(degree) : haar_factor(spec.a, true, samples, rng);
      break;
    case Family::spin: {
      int a = jp.spin_split();
      f1 = orthogonal_factor(a, degree, samples, rng);
      f2 = orthogonal_factor(spec.a - a, degree, samples, rng);
      break;
    }
    case Family::rect:
      f1 = orthogonal_factor(spec.a, degree, samples, rng);
      f2 = orthogonal_factor(spec.b, degree, samples, rng);
      break;
  }
  GroupRule rule;
  rule.exact = f1.exact && f2.exact;
  const size_t total = f1.g.size() * f2.g.size();
  std::vector<std::pair<size_t, size_t>> picks;
  if (total > 200000) {
    rule.exact = false;
    std::uniform_int_distribution<size_t> U1(0, f1.g.size() - 1), U2(0, f2.g.size() - 1);
    for (int s = 0; s < samples; ++s) picks.push_back({U1(rng), U2(rng)});
  } else {
    for (size_t i = 0; i < f1.g.size(); ++i)
      for (size_t j = 0; j < f2.g.size(); ++j) picks.push_back({i, j});
  }
  double wsum = 0;
  for (auto [i, j] : picks) {
    Mat A(n, n);
    for (int c = 0; c < n; ++c) {
      Vec E = Vec::Unit(n, c);
      if (spec.family == Family::spin) {
        int a = jp.spin_split();
        Vec out(n);
        out.head(a) = (f1.g[i].real() * E.head(a));
        out.tail(n - a) = (f2.g[j].real() * E.tail(n - a));
        A.col(c) = out;
      } else if (spec.family == Family::rect) {
        A.col(c) = jp.from_complex(f1.g[i] * jp.to_complex(E) * f2.g[j].transpose());
      } else {
        A.col(c) = jp.from_complex(f1.g[i] * jp.to_complex(E) * f1.g[i].adjoint());
      }
    }
    double w = picks.size() == total ? f1.w[i] * f2.w[j] : 1.0;
    rule.act.push_back(A);
    rule.w.push_back(w);
    wsum += w;
  }
  for (double& w : rule.w) w /= wsum;
  return rule;
}

Mat minus_action(const Pair& jp, const Mat& h_plus) {
  return jp.gram_inverse() * h_plus.transpose().inverse() * jp.gram();
}

// ---------------------------------------------------------------------------
// orbit integration

namespace {

// Nodes of the chamber in radial form: t = s^2 * direction, with dt expressed in (s, psi).
struct ChamberNode {
  std::vector<double> t;
  double w;
};

std::vector<ChamberNode> chamber_nodes(const OrbitContext& c, double s_max, const OrbitQuad& q) {
  std::vector<ChamberNode> out;
  Rule rs = gauss_legendre(q.radial_nodes, 0, s_max);
  if (c.k == 1) {
    for (int i = 0; i < rs.size(); ++i) {
      double s = rs.x[i], t = s * s;
      out.push_back({{t}, rs.w[i] * 2 * s * jacobian_J(c, {t})});
    }
  } else {
    Rule ra = tanh_sinh(2 * q.angle_nodes + 1, 0, M_PI / 4);
    for (int i = 0; i < rs.size(); ++i)
      for (int j = 0; j < ra.size(); ++j) {
        double s = rs.x[i], rho = s * s, psi = ra.x[j];
        std::vector<double> t{rho * std::cos(psi), rho * std::sin(psi)};
        out.push_back({t, rs.w[i] * ra.w[j] * 2 * s * rho * jacobian_J(c, t)});
      }
  }
  return out;
}

double radial_cut(const OrbitContext& c, const GroupRule& g, const std::function<double(const Vec&)>& mag,
                  const OrbitQuad& q) {
  std::vector<double> dir = c.k == 1 ? std::vector<double>{1.0}
                                     : std::vector<double>{std::cos(M_PI / 8), std::sin(M_PI / 8)};
  const size_t probes = std::min<size_t>(g.act.size(), 9);
  std::vector<double> ss, ls;
  double best = -INFINITY;
  for (double s = 0.02; s < 400; s *= 1.08) {
    std::vector<double> t;
    for (double v : dir) t.push_back(s * s * v);
    double J = jacobian_J(c, t);
    double m = 0;
    for (size_t i = 0; i < probes; ++i) {
      size_t idx = i * (g.act.size() / probes);
      m = std::max(m, mag(g.act[idx] * c.jp->b_t(t)));
    }
    double l = (m > 0 && J > 0) ? std::log(m * J * s) : -INFINITY;
    ss.push_back(s);
    ls.push_back(l);
    best = std::max(best, l);
  }
  if (!std::isfinite(best)) return 1.0;
  double cut = ss.front();
  for (size_t i = 0; i < ss.size(); ++i)
    if (ls[i] > best - q.drop) cut = ss[std::min(i + 1, ss.size() - 1)];
  if (cut >= ss.back()) throw JordanError("orbit integrand does not decay inside the radial scan");
  return cut;
}

}  // namespace

Vec orbit_integrate_vec(const OrbitContext& c, const std::function<Vec(const Vec&)>& f, int dim, const OrbitQuad& q) {
  if (!c.verdict.exists) throw JordanError(c.verdict.reason);
  if (c.k == 0) return f(Vec::Zero(c.jp->dim()));
  if (c.k > 2) throw JordanError("orbit integration is implemented for k <= 2");
  GroupRule g = compact_group_rule(*c.jp, q.group_degree);
  double s_max = radial_cut(c, g, [&](const Vec& x) { return f(x).norm(); }, q);
  auto nodes = chamber_nodes(c, s_max, q);
  std::vector<Vec> partial(nodes.size(), Vec::Zero(dim));
  for (size_t i = 0; i < nodes.size(); ++i) {
    Vec b = c.jp->b_t(nodes[i].t);
    Vec acc = Vec::Zero(dim);
    for (size_t m = 0; m < g.act.size(); ++m) acc += g.w[m] * f(g.act[m] * b);
    partial[i] = nodes[i].w * acc;
  }
  Vec out(dim);
  std::vector<double> col(nodes.size());
  for (int d = 0; d < dim; ++d) {
    for (size_t i = 0; i < nodes.size(); ++i) col[i] = partial[i](d);
    out(d) = pairwise_sum(col);
  }
  return out;
}

double orbit_integrate(const OrbitContext& c, const std::function<double(const Vec&)>& f, const OrbitQuad& q) {
  return orbit_integrate_vec(c, [&](const Vec& x) { return Vec::Constant(1, f(x)); }, 1, q)(0);
}

EquivarianceCheck orbit_scaling_check(const OrbitContext& c, const std::function<double(const Vec&)>& f, double s,
                                      const OrbitQuad& q) {
  EquivarianceCheck out;
  out.s = s;
  double base = orbit_integrate(c, f, q);
  double scaled = orbit_integrate(c, [&](const Vec& x) { return f(s * x); }, q);
  const auto& C = c.jp->constants();
  out.measured = scaled / base;
  out.expected = std::pow(s, -c.jp->dim() * c.verdict.lambda_char / C.p);
  out.rel_error = std::abs(out.measured / out.expected - 1);
  return out;
}

double BumpField::operator()(const Vec& x) const {
  Vec dx = x - x0;
  double s = dx.squaredNorm() / (rho * rho);
  if (s >= 1) return 0;
  return std::exp(1 - 1 / (1 - s)) * (1 + tilt.dot(dx));
}

std::vector<BumpField> make_bumps(const OrbitContext& c, int count, std::uint64_t seed) {
  if (c.k != 1) throw JordanError("bump fields are built for rank-1 orbits");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0, 1);
  std::normal_distribution<double> N(0, 1);
  const int n = c.jp->dim();
  const double enorm = c.e.norm();
  std::vector<BumpField> out;
  for (int i = 0; i < count; ++i) {
    BumpField b;
    double a0 = 1 + U(rng);
    Vec zeta(c.B1.cols());
    for (int j = 0; j < zeta.size(); ++j) zeta(j) = 0.4 * N(rng);
    b.y0 = a0 * c.e + c.B1 * zeta;
    b.x0 = chart_forward(c, b.y0);
    b.rho = a0 * enorm * (0.5 + 0.3 * U(rng));
    Vec dir(n);
    for (int j = 0; j < n; ++j) dir(j) = N(rng);
    b.tilt = (0.5 * U(rng) / b.rho) * dir.normalized();
    out.push_back(b);
  }
  return out;
}

MeasureConsistency measure_consistency(const OrbitContext& c, const std::vector<BumpField>& fs,
                                       const ConsistencyQuad& q) {
  if (c.k != 1) throw JordanError("measure consistency is implemented for rank-1 orbits");
  if (!c.verdict.exists) throw JordanError(c.verdict.reason);
  for (const Mat* P : {&c.pd.P2, &c.pd.P1})
    if ((*P - P->transpose()).norm() > 1e-9) throw JordanError("Peirce projectors are not orthogonal in coordinates");
  const int n = c.jp->dim();
  Mat B(n, c.B2.cols() + c.B1.cols());
  B << c.B2, c.B1;
  const int m = static_cast<int>(B.cols());
  GroupRule g = compact_group_rule(*c.jp, q.group_degree);
  const double e1 = c.jp->b_t({1.0}).norm();
  Rule unit = gauss_legendre(q.chart_nodes, -1, 1);
  MeasureConsistency out;
  for (const auto& f : fs) {
    double tlo = std::max(0.0, (f.x0.norm() - f.rho) / e1), thi = (f.x0.norm() + f.rho) / e1;
    Rule rt = gauss_legendre(q.radial_nodes, tlo, thi);
    std::vector<double> terms;
    for (int i = 0; i < rt.size(); ++i) {
      Vec b = c.jp->b_t({rt.x[i]});
      double acc = 0;
      for (size_t a = 0; a < g.act.size(); ++a) acc += g.w[a] * f(g.act[a] * b);
      terms.push_back(rt.w[i] * jacobian_J(c, {rt.x[i]}) * acc);
    }
    out.polar.push_back(pairwise_sum(terms));

    // the ball |y - y0| <= rho contains the chart preimage of the support, since phi only adds a V0 part
    terms.clear();
    long total = 1;
    for (int j = 0; j < m; ++j) total *= unit.size();
    for (long it = 0; it < total; ++it) {
      long rem = it;
      Vec xi(m);
      double w = 1;
      for (int j = 0; j < m; ++j) {
        int idx = rem % unit.size();
        rem /= unit.size();
        xi(j) = f.rho * unit.x[idx];
        w *= f.rho * unit.w[idx];
      }
      if (xi.squaredNorm() >= f.rho * f.rho) continue;
      Vec y = f.y0 + B * xi;
      double v = f(chart_forward(c, y));
      if (v != 0) terms.push_back(w * v * pullback_density(c, c.pd.P2 * y));
    }
    out.chart.push_back(pairwise_sum(terms));
    out.ratio.push_back(out.polar.back() / out.chart.back());
  }
  double lo = *std::min_element(out.ratio.begin(), out.ratio.end());
  double hi = *std::max_element(out.ratio.begin(), out.ratio.end());
  double mean = 0;
  for (double r : out.ratio) mean += r / out.ratio.size();
  out.dispersion = (hi - lo) / std::abs(mean);
  return out;
}

}  // namespace jb
