#include "jbessel/bessel_operator.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <random>

namespace jb {

namespace {

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  const int n = static_cast<int>(x.size());
  Vec g(n);
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Unit(n, i);
    double d1 = (f(x + h * e) - f(x - h * e)) / (2 * h);
    double d2 = (f(x + 0.5 * h * e) - f(x - 0.5 * h * e)) / h;
    g(i) = (4 * d2 - d1) / 3;
  }
  return g;
}

Mat fd_hessian_step(const std::function<double(const Vec&)>& f, const Vec& x, double h, double f0) {
  const int n = static_cast<int>(x.size());
  Mat H(n, n);
  for (int i = 0; i < n; ++i) {
    Vec ei = Vec::Unit(n, i);
    H(i, i) = (f(x + h * ei) - 2 * f0 + f(x - h * ei)) / (h * h);
    for (int j = i + 1; j < n; ++j) {
      Vec ej = Vec::Unit(n, j);
      H(i, j) = H(j, i) =
          (f(x + h * ei + h * ej) - f(x + h * ei - h * ej) - f(x - h * ei + h * ej) + f(x - h * ei - h * ej)) /
          (4 * h * h);
    }
  }
  return H;
}

// 1/2 sum_a {E_a, x, M E_a} on V-, with M symmetric in V- coordinates.
Vec second_order_term(const Pair& jp, const Vec& x, const Mat& M) {
  const int n = jp.dim();
  Vec out = Vec::Zero(n);
  for (int a = 0; a < n; ++a) out += jp.triple(Side::minus, Vec::Unit(n, a), x, M.col(a));
  return 0.5 * out;
}

}  // namespace

FieldJet fd_jet(const std::function<double(const Vec&)>& f, const Vec& x) {
  FieldJet j;
  j.value = f(x);
  const double scale = 1 + x.norm();
  j.grad = fd_gradient(f, x, 1e-5 * scale);
  const double h = 1e-3 * scale;
  Mat H1 = fd_hessian_step(f, x, h, j.value), H2 = fd_hessian_step(f, x, 0.5 * h, j.value);
  j.hess = (4 * H2 - H1) / 3;
  return j;
}

FieldJet field_jet(const ScalarField& f, const Vec& x) {
  if (f.jet) return f.jet(x);
  if (!f.allow_fd || !f.value) throw JordanError("field has no derivatives and finite differences are disabled");
  return fd_jet(f.value, x);
}

double jet_self_check(const ScalarField& f, const Vec& x) {
  if (!f.jet || !f.value) return 0;
  Vec a = f.jet(x).grad, b = fd_gradient(f.value, x, 1e-5 * (1 + x.norm()));
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

// ---------------------------------------------------------------------------

double GaussPoly::operator()(const Vec& x) const {
  Vec u = x - center;
  return std::exp(-0.5 * u.dot(A * u)) * (a0 + l.dot(u));
}

FieldJet GaussPoly::jet(const Vec& x) const {
  Vec u = x - center;
  Vec Au = A * u;
  double g = std::exp(-0.5 * u.dot(Au)), P = a0 + l.dot(u);
  FieldJet j;
  j.value = g * P;
  j.grad = g * (l - P * Au);
  j.hess = g * (-P * A - Au * l.transpose() - l * Au.transpose() + P * Au * Au.transpose());
  return j;
}

ScalarField GaussPoly::field() const {
  GaussPoly self = *this;
  ScalarField f;
  f.value = [self](const Vec& x) { return self(x); };
  f.jet = [self](const Vec& x) { return self.jet(x); };
  return f;
}

GaussPoly random_gauss_poly(int n, std::uint64_t seed, bool isotropic) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0, 1);
  std::normal_distribution<double> N(0, 1);
  GaussPoly g;
  g.center = Vec::Zero(n);
  g.l = Vec(n);
  for (int i = 0; i < n; ++i) g.l(i) = 0.5 * N(rng);
  g.a0 = 0.5 + U(rng);
  if (isotropic) {
    g.A = (0.6 + 0.8 * U(rng)) * Mat::Identity(n, n);
  } else {
    Mat M(n, n);
    for (int i = 0; i < n; ++i) {
      g.center(i) = 0.3 * N(rng);
      for (int j = 0; j < n; ++j) M(i, j) = 0.4 * N(rng);
    }
    g.A = M * M.transpose() + 0.5 * Mat::Identity(n, n);
  }
  return g;
}

// ---------------------------------------------------------------------------

BesselApplication apply_bessel(const Pair& jp, double lambda, const FieldJet& j, const Vec& x, const Mat* basis) {
  const Mat& Gi = jp.gram_inverse();
  BesselApplication out;
  out.lambda = lambda;
  if (!basis) {
    out.second_order = second_order_term(jp, x, Gi * j.hess * Gi.transpose());
    out.gradient_part = lambda * (Gi * j.grad);
  } else {
    const Mat& C = *basis;
    Mat dual = Gi * C.inverse().transpose();
    Mat Hc = C.transpose() * j.hess * C;
    Vec gc = C.transpose() * j.grad;
    const int n = jp.dim();
    out.second_order = Vec::Zero(n);
    for (int a = 0; a < n; ++a) out.second_order += jp.triple(Side::minus, dual.col(a), x, dual * Hc.col(a));
    out.second_order *= 0.5;
    out.gradient_part = lambda * (dual * gc);
  }
  out.value = out.second_order + out.gradient_part;
  return out;
}

BesselApplication apply_bessel(const Pair& jp, double lambda, const ScalarField& f, const Vec& x, const Mat* basis) {
  return apply_bessel(jp, lambda, field_jet(f, x), x, basis);
}

ExponentialProbe exponential_probe(const Pair& jp, double lambda, const Vec& x, const Vec& y) {
  const Vec Gy = jp.gram() * y;
  const double t = x.dot(Gy);
  FieldJet c, s;
  c.value = std::cos(t);
  c.grad = -std::sin(t) * Gy;
  c.hess = -std::cos(t) * Gy * Gy.transpose();
  s.value = std::sin(t);
  s.grad = std::cos(t) * Gy;
  s.hess = -std::sin(t) * Gy * Gy.transpose();
  Vec Qyx = jp.quad(Side::minus, y, x);
  Vec ec = -(std::cos(t) * Qyx + lambda * std::sin(t) * y);
  Vec es = -std::sin(t) * Qyx + lambda * std::cos(t) * y;
  const double scale = Qyx.norm() + std::abs(lambda) * y.norm() + 1e-300;
  ExponentialProbe p;
  p.cos_residual = (apply_bessel(jp, lambda, c, x).value - ec).norm() / scale;
  p.sin_residual = (apply_bessel(jp, lambda, s, x).value - es).norm() / scale;
  return p;
}

// ---------------------------------------------------------------------------

namespace {

void check_separation(const std::vector<double>& t) {
  double top = 0;
  for (double v : t) top = std::max(top, std::abs(v));
  for (size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0)) throw JordanError("radial application needs positive t");
    if (i > 0 && !(t[i - 1] - t[i] > 1e-3 * top)) throw JordanError("t entries are not separated");
  }
}

// First and second partial derivatives of F in t_i (five-point stencils).
void radial_derivatives(const RadialFunction& F, const std::vector<double>& t, std::vector<double>& d1,
                        std::vector<double>& d2) {
  const size_t m = t.size();
  d1.assign(m, 0);
  d2.assign(m, 0);
  const double f0 = F(t);
  for (size_t i = 0; i < m; ++i) {
    const double h = 1e-3 * std::max(1.0, t[i]);
    auto at = [&](double s) {
      auto u = t;
      u[i] += s;
      return F(u);
    };
    double p1 = at(h), m1 = at(-h), p2 = at(2 * h), m2 = at(-2 * h);
    d1[i] = (-p2 + 8 * p1 - 8 * m1 + m2) / (12 * h);
    d2[i] = (-p2 + 16 * p1 - 30 * f0 + 16 * m1 - m2) / (12 * h * h);
  }
}

RadialApplication finish_radial(const Pair& jp, double lambda, const std::vector<double>& comps,
                                const std::function<double(const Vec&)>& ext, const std::vector<double>& t_full) {
  RadialApplication out;
  out.components = comps;
  const int r = jp.rank();
  out.expected = Vec::Zero(jp.dim());
  for (int i = 0; i < r; ++i) {
    std::vector<double> unit(r, 0.0);
    unit[i] = 1;
    out.expected += comps[i] * jp.theta(jp.b_t(unit));
  }
  Vec x = jp.b_t(t_full);
  out.full = apply_bessel(jp, lambda, fd_jet(ext, x), x).value;
  double scale = 0;
  for (size_t i = 0; i < comps.size(); ++i) scale = std::max(scale, std::abs(comps[i]));
  out.rel_error = (out.full - out.expected).norm() / std::max(out.expected.norm(), 1e-12 * (1 + scale));
  return out;
}

}  // namespace

std::vector<double> radial_components(const Pair& jp, double lambda, const RadialFunction& F,
                                      const std::vector<double>& t) {
  const auto& C = jp.constants();
  const int r = C.r;
  if (static_cast<int>(t.size()) != r) throw JordanError("radial application needs r entries");
  check_separation(t);
  std::vector<double> d1, d2;
  radial_derivatives(F, t, d1, d2);
  std::vector<double> comps(r);
  for (int i = 0; i < r; ++i) {
    double v = t[i] * d2[i] + (lambda - C.e - (r - 1) * C.d) * d1[i];
    for (int j = 0; j < r; ++j) {
      if (j == i) continue;
      double w = C.d_plus / (t[i] - t[j]) + C.d_minus / (t[i] + t[j]);
      v += 0.5 * w * (t[i] * d1[i] - t[j] * d1[j]);
    }
    comps[i] = v;
  }
  return comps;
}

std::vector<double> orbit_radial_components(const Pair& jp, int k, const RadialFunction& F,
                                            const std::vector<double>& t) {
  const auto& C = jp.constants();
  const int r = C.r;
  if (k < 1 || k >= r) throw JordanError("orbit radial application needs 1 <= k <= r-1");
  if (static_cast<int>(t.size()) != k) throw JordanError("orbit radial application needs k entries");
  check_separation(t);
  std::vector<double> d1, d2;
  radial_derivatives(F, t, d1, d2);
  std::vector<double> comps(r, 0.0);
  for (int i = 0; i < k; ++i) {
    double v = t[i] * d2[i] + (C.d - C.e) * d1[i];
    for (int j = 0; j < k; ++j) {
      if (j == i) continue;
      double w = C.d_plus / (t[i] - t[j]) + C.d_minus / (t[i] + t[j]);
      v += 0.5 * w * (t[i] * d1[i] - t[j] * d1[j]);
    }
    comps[i] = v;
  }
  double s = 0;
  for (int j = 0; j < k; ++j) s += d1[j];
  for (int i = k; i < r; ++i) comps[i] = 0.5 * (C.d_plus - C.d_minus) * s;
  return comps;
}

RadialApplication apply_bessel_radial(const Pair& jp, double lambda, const RadialFunction& F,
                                      const std::vector<double>& t) {
  auto comps = radial_components(jp, lambda, F, t);
  auto ext = [&jp, &F](const Vec& x) { return F(jp.singular_values(x)); };
  return finish_radial(jp, lambda, comps, ext, t);
}

RadialApplication apply_bessel_orbit_radial(const Pair& jp, int k, const RadialFunction& F,
                                            const std::vector<double>& t) {
  auto comps = orbit_radial_components(jp, k, F, t);
  auto ext = [&jp, &F, k](const Vec& x) {
    auto sv = jp.singular_values(x);
    sv.resize(k);
    return F(sv);
  };
  std::vector<double> t_full = t;
  t_full.resize(jp.rank(), 0.0);
  return finish_radial(jp, k * jp.constants().d, comps, ext, t_full);
}

// ---------------------------------------------------------------------------

PullbackApplication pullback_bessel(const OrbitContext& c, double lambda, const FieldJet& F, const Vec& x) {
  const Pair& jp = *c.jp;
  if ((c.pd.P0 * x).norm() > 1e-9 * std::max(1.0, x.norm())) throw JordanError("pullback point must lie in V2 + V1");
  const int n = jp.dim(), n2 = static_cast<int>(c.B2.cols()), n1 = static_cast<int>(c.B1.cols());
  Mat Cb(n, n);
  Cb << c.B2, c.B1, c.B0;
  Mat dual = jp.gram_inverse() * Cb.inverse().transpose();
  Mat Hc = Cb.transpose() * F.hess * Cb;
  Vec gc = Cb.transpose() * F.grad;
  auto span = [&](int lo, int hi) {
    Mat M = Mat::Zero(n, n);
    for (int a = lo; a < hi; ++a)
      for (int b = lo; b < hi; ++b) M += Hc(a, b) * dual.col(a) * dual.col(b).transpose();
    return M;
  };
  auto grad_part = [&](int lo, int hi) {
    Vec v = Vec::Zero(n);
    for (int a = lo; a < hi; ++a) v += gc(a) * dual.col(a);
    return v;
  };
  Vec x1 = c.pd.P1 * x;
  Vec u = v2_inverse(c, c.pd.P2 * x);
  Vec offset = jp.quad(Side::plus, x1, u);
  PullbackApplication out;
  out.normal_operator = jp.bergman(Side::minus, u, x1);
  out.normal_part = (lambda - c.k * jp.constants().d) * (out.normal_operator * grad_part(n2 + n1, n));
  out.value = second_order_term(jp, x, span(0, n2 + n1)) + second_order_term(jp, offset, span(n2, n2 + n1)) +
              lambda * grad_part(0, n2 + n1) + out.normal_part;
  return out;
}

FieldJet pushforward_jet(const OrbitContext& c, const FieldJet& F, const Vec& x) {
  Vec y = chart_forward(c, x);
  const int n = c.jp->dim();
  Mat K = Mat::Identity(n, n) - chart_offset_jacobian(c, y);
  FieldJet f;
  f.value = F.value;
  f.grad = K.transpose() * F.grad;
  f.hess = K.transpose() * F.hess * K - chart_offset_hessian(c, y, F.grad);
  return f;
}

ScalarField vanishing_field(const OrbitContext& c, const Vec& w) {
  ScalarField f;
  f.value = [c, w](const Vec& y) { return w.dot(c.pd.P0 * y - chart_offset(c, y)); };
  f.jet = [c, w](const Vec& y) {
    FieldJet j;
    j.value = w.dot(c.pd.P0 * y - chart_offset(c, y));
    j.grad = c.pd.P0.transpose() * w - chart_offset_jacobian(c, y).transpose() * w;
    j.hess = -chart_offset_hessian(c, y, w);
    return j;
  };
  return f;
}

double tangency_residual(const OrbitContext& c, double lambda, int trials, std::uint64_t seed) {
  const Pair& jp = *c.jp;
  const int n = jp.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0, 1);
  std::uniform_real_distribution<double> U(1, 2);
  auto normal = [&](int m) {
    Vec v(m);
    for (int i = 0; i < m; ++i) v(i) = N(rng);
    return v;
  };
  double worst = 0;
  if (c.k == 0) {
    for (int t = 0; t < trials; ++t) {
      Vec w = normal(n);
      FieldJet j;
      j.value = 0;
      j.grad = w;
      j.hess = Mat::Zero(n, n);
      worst = std::max(worst, apply_bessel(jp, lambda, j, Vec::Zero(n)).value.norm() / w.norm());
    }
    return worst;
  }
  if (c.k >= jp.rank()) throw JordanError("tangency needs 0 <= k <= r-1");
  for (int t = 0; t < trials; ++t) {
    Vec x2 = U(rng) * c.e + 0.2 * c.B2 * normal(static_cast<int>(c.B2.cols()));
    Vec x1 = 0.5 * c.B1 * normal(static_cast<int>(c.B1.cols()));
    Vec y = chart_forward(c, x2 + x1);
    ScalarField f = vanishing_field(c, c.B0 * normal(static_cast<int>(c.B0.cols())));
    FieldJet j = f.jet(y);
    double r = apply_bessel(jp, lambda, j, y).value.norm() / (j.grad.norm() * (1 + y.norm()));
    worst = std::max(worst, r);
  }
  return worst;
}

TangencyScan tangency_scan(const OrbitContext& c, const std::vector<double>& grid, int trials) {
  TangencyScan s;
  const double d = c.jp->constants().d, kd = c.k * d;
  double best = INFINITY;
  for (double l : grid) {
    double r = tangency_residual(c, l, trials);
    s.lambda.push_back(l);
    s.residual.push_back(r);
    if (r < best) best = r, s.argmin = l;
    if (r <= 1e-8) ++s.zeros;
  }
  s.unique_zero_at_kd = s.zeros == 1 && std::abs(s.argmin - kd) <= d / 20 + 1e-12;
  return s;
}

// ---------------------------------------------------------------------------

namespace {

AdjointResult finish_adjoint(std::vector<std::vector<double>>& l, std::vector<std::vector<double>>& r) {
  const int n = static_cast<int>(l.size());
  AdjointResult out;
  out.lhs.resize(n);
  out.rhs.resize(n);
  for (int a = 0; a < n; ++a) {
    out.lhs(a) = pairwise_sum(l[a]);
    out.rhs(a) = pairwise_sum(r[a]);
  }
  double scale = std::max({out.lhs.cwiseAbs().maxCoeff(), out.rhs.cwiseAbs().maxCoeff(), 1e-300});
  out.residual = (out.lhs - out.rhs).cwiseAbs().maxCoeff() / scale;
  return out;
}

}  // namespace

AdjointResult adjoint_residual_lebesgue(const Pair& jp, double lambda, const GaussPoly& f, const GaussPoly& g,
                                        int nodes) {
  const int n = jp.dim();
  const double p = jp.constants().p;
  Mat A = f.A + g.A;
  Vec m = A.ldlt().solve(f.A * f.center + g.A * g.center);
  Eigen::LLT<Mat> llt(A);
  Mat L = llt.matrixL();
  Mat Lit = L.transpose().inverse();
  const double jac = std::pow(2.0, 0.5 * n) / L.diagonal().prod();
  Rule gh = gauss_hermite(nodes);
  long total = 1;
  for (int i = 0; i < n; ++i) total *= gh.size();
  std::vector<std::vector<double>> lhs(n), rhs(n);
  for (long it = 0; it < total; ++it) {
    long rem = it;
    Vec xi(n);
    double w = jac;
    for (int i = 0; i < n; ++i) {
      int k = rem % gh.size();
      rem /= gh.size();
      xi(i) = gh.x[k];
      w *= gh.w[k] * std::exp(gh.x[k] * gh.x[k]);
    }
    Vec x = m + std::sqrt(2.0) * Lit * xi;
    Vec bf = apply_bessel(jp, lambda, f.jet(x), x).value * g(x);
    Vec bg = apply_bessel(jp, 2 * p - lambda, g.jet(x), x).value * f(x);
    for (int a = 0; a < n; ++a) {
      lhs[a].push_back(w * bf(a));
      rhs[a].push_back(w * bg(a));
    }
  }
  return finish_adjoint(lhs, rhs);
}

AdjointResult adjoint_residual_lebesgue(const Pair& jp, double lambda, const ScalarField& f, const ScalarField& g,
                                        double lo, double hi, int nodes) {
  const int n = jp.dim();
  const double p = jp.constants().p;
  // support leakage: both fields must vanish on the faces of the box
  {
    Rule face = gauss_legendre(6, lo, hi);
    long total = 1;
    for (int i = 0; i < n - 1; ++i) total *= face.size();
    double edge = 0;
    for (int fixed = 0; fixed < n; ++fixed)
      for (double side : {lo, hi})
        for (long it = 0; it < total; ++it) {
          long rem = it;
          Vec x(n);
          for (int i = 0; i < n; ++i) {
            if (i == fixed) {
              x(i) = side;
              continue;
            }
            x(i) = face.x[rem % face.size()];
            rem /= face.size();
          }
          edge = std::max({edge, std::abs(f.value(x)), std::abs(g.value(x))});
        }
    if (edge > 1e-14) throw JordanError("support leakage at the quadrature box boundary");
  }
  Rule gl = gauss_legendre(nodes, lo, hi);
  long total = 1;
  for (int i = 0; i < n; ++i) total *= gl.size();
  std::vector<std::vector<double>> lhs(n), rhs(n);
  for (long it = 0; it < total; ++it) {
    long rem = it;
    Vec x(n);
    double w = 1;
    for (int i = 0; i < n; ++i) {
      int k = rem % gl.size();
      rem /= gl.size();
      x(i) = gl.x[k];
      w *= gl.w[k];
    }
    double fv = f.value(x), gv = g.value(x);
    if (fv == 0 && gv == 0) continue;
    Vec bf = apply_bessel(jp, lambda, f, x).value * gv;
    Vec bg = apply_bessel(jp, 2 * p - lambda, g, x).value * fv;
    for (int a = 0; a < n; ++a) {
      lhs[a].push_back(w * bf(a));
      rhs[a].push_back(w * bg(a));
    }
  }
  return finish_adjoint(lhs, rhs);
}

SymmetryResult orbit_symmetry_residual(const OrbitContext& c, const ScalarField& f, const ScalarField& g,
                                       const OrbitQuad& q) {
  if (!c.verdict.exists) throw JordanError(c.verdict.reason);
  const Pair& jp = *c.jp;
  const int n = jp.dim();
  const double lambda = c.verdict.lambda_char;
  Vec both = orbit_integrate_vec(
      c,
      [&](const Vec& x) {
        Vec v(2 * n);
        v << apply_bessel(jp, lambda, f, x).value * g.value(x), apply_bessel(jp, lambda, g, x).value * f.value(x);
        return v;
      },
      2 * n, q);
  SymmetryResult out;
  out.lhs = both.head(n);
  out.rhs = both.tail(n);
  double scale = std::max({out.lhs.cwiseAbs().maxCoeff(), out.rhs.cwiseAbs().maxCoeff(), 1e-300});
  out.residual = (out.lhs - out.rhs).cwiseAbs().maxCoeff() / scale;
  return out;
}

double equivariance_residual(const Pair& jp, double lambda, const ScalarField& f, const Mat& h_plus, const Vec& x) {
  Mat hinv = h_plus.inverse();
  Mat hm = minus_action(jp, h_plus);
  Vec xi = hinv * x;
  FieldJet j = field_jet(f, xi);
  FieldJet moved;
  moved.value = j.value;
  moved.grad = hinv.transpose() * j.grad;
  moved.hess = hinv.transpose() * j.hess * hinv;
  Vec lhs = apply_bessel(jp, lambda, moved, x).value;
  Vec rhs = hm * apply_bessel(jp, lambda, j, xi).value;
  return (lhs - rhs).norm() / std::max(rhs.norm(), 1e-300);
}

}  // namespace jb
