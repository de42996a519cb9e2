#include "jbessel/repcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace jb {

std::vector<double> RepParams::nu_k() const {
  const auto& C = jp->constants();
  std::vector<double> out;
  for (int k = 0; k < C.r; ++k) out.push_back(0.5 * C.p - 0.5 * k * C.d);
  return out;
}

double phi_nu(const RepParams& rp, const Vec& y) {
  const auto& C = rp.jp->constants();
  Vec ybar = rp.jp->theta(y);
  // Delta(-conj y, y) is positive along the whole ray, so the positive root of Det B is the right branch.
  double det = rp.jp->det_bergman(-ybar, y);
  if (!(det > 0)) throw JordanError("Delta(-conj y, y) is not positive");
  double delta = std::pow(det, 1 / (2 * C.p));
  return std::pow(delta, -rp.nu - 0.5 * C.p);
}

// ---------------------------------------------------------------------------

void Poly::add(const std::vector<int>& m, C c) {
  if (c == C(0)) return;
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    terms_.emplace(m, c);
  } else {
    it->second += c;
    if (it->second == C(0)) terms_.erase(it);
  }
}

Poly Poly::constant(int n, C c) {
  Poly p(n);
  p.add(std::vector<int>(n, 0), c);
  return p;
}

Poly Poly::variable(int n, int i) {
  Poly p(n);
  std::vector<int> m(n, 0);
  m[i] = 1;
  p.add(m, 1);
  return p;
}

Poly Poly::linear(int n, const Vec& coeff) {
  Poly p(n);
  for (int i = 0; i < n; ++i) p = p + variable(n, i) * C(coeff(i));
  return p;
}

Poly Poly::random(int n, int degree, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0, 1);
  Poly p = constant(n, N(rng));
  std::vector<Poly> layer{constant(n, 1)};
  for (int deg = 1; deg <= degree; ++deg) {
    std::map<std::vector<int>, C> next;
    for (const auto& q : layer)
      for (int i = 0; i < n; ++i) {
        Poly step = q * variable(n, i);
        for (const auto& [m, c] : step.terms()) next[m] = 1;
      }
    layer.clear();
    for (const auto& [m, c] : next) {
      Poly mono(n);
      mono.add(m, 1);
      layer.push_back(mono);
      p.add(m, N(rng) / deg);
    }
  }
  return p;
}

Poly::C Poly::operator()(const Vec& x) const {
  C s = 0;
  for (const auto& [m, c] : terms_) {
    double v = 1;
    for (int i = 0; i < n_; ++i)
      for (int e = 0; e < m[i]; ++e) v *= x(i);
    s += c * v;
  }
  return s;
}

Poly Poly::derivative(int i) const {
  Poly p(n_);
  for (const auto& [m, c] : terms_) {
    if (m[i] == 0) continue;
    auto m2 = m;
    m2[i] -= 1;
    p.add(m2, c * double(m[i]));
  }
  return p;
}

Poly Poly::operator+(const Poly& o) const {
  Poly p = *this;
  for (const auto& [m, c] : o.terms_) p.add(m, c);
  return p;
}

Poly Poly::operator-(const Poly& o) const { return *this + o * C(-1); }

Poly Poly::operator*(const Poly& o) const {
  Poly p(n_);
  for (const auto& [m1, c1] : terms_)
    for (const auto& [m2, c2] : o.terms_) {
      std::vector<int> m(n_);
      for (int i = 0; i < n_; ++i) m[i] = m1[i] + m2[i];
      p.add(m, c1 * c2);
    }
  return p;
}

Poly Poly::operator*(C s) const {
  Poly p(n_);
  for (const auto& [m, c] : terms_) p.add(m, c * s);
  return p;
}

std::vector<Poly> bessel_poly(const Pair& jp, double lambda, const Poly& f) {
  using C = Poly::C;
  const int n = jp.dim();
  const Mat& Gi = jp.gram_inverse();
  std::vector<Poly> grad;
  for (int a = 0; a < n; ++a) grad.push_back(f.derivative(a));
  std::vector<std::vector<Poly>> H(n, std::vector<Poly>(n, Poly(n)));
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) H[a][b] = H[b][a] = grad[a].derivative(b);
  // M = Gi H Gi
  std::vector<std::vector<Poly>> M(n, std::vector<Poly>(n, Poly(n)));
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c)
      for (int al = 0; al < n; ++al)
        for (int be = 0; be < n; ++be) {
          double w = Gi(a, al) * Gi(be, c);
          if (w != 0) M[a][c] = M[a][c] + H[al][be] * C(w);
        }
  std::vector<Poly> out(n, Poly(n));
  for (int a = 0; a < n; ++a)
    for (int j = 0; j < n; ++j)
      for (int c = 0; c < n; ++c) {
        Vec t = jp.triple(Side::minus, Vec::Unit(n, a), Vec::Unit(n, j), Vec::Unit(n, c));
        Poly base = M[a][c] * Poly::variable(n, j);
        for (int m = 0; m < n; ++m)
          if (t(m) != 0) out[m] = out[m] + base * C(0.5 * t(m));
      }
  for (int m = 0; m < n; ++m)
    for (int al = 0; al < n; ++al)
      if (Gi(m, al) != 0) out[m] = out[m] + grad[al] * C(lambda * Gi(m, al));
  return out;
}

// ---------------------------------------------------------------------------

LieGen LieGen::from_a(const Vec& a) {
  LieGen g;
  g.kind = Kind::a;
  g.v = a;
  return g;
}

LieGen LieGen::from_b(const Vec& b) {
  LieGen g;
  g.kind = Kind::b;
  g.v = b;
  return g;
}

LieGen LieGen::from_D(const Pair& jp, const Vec& u, const Vec& v) {
  return from_pair(jp.D(Side::plus, u, v), -jp.D(Side::minus, v, u));
}

LieGen LieGen::from_pair(const Mat& plus, const Mat& minus) {
  LieGen g;
  g.kind = Kind::T;
  g.plus = plus;
  g.minus = minus;
  return g;
}

std::optional<LieGen> bracket(const Pair& jp, const LieGen& X, const LieGen& Y) {
  using K = LieGen::Kind;
  if (X.kind == Y.kind && X.kind != K::T) return std::nullopt;
  if (X.kind == K::a && Y.kind == K::b) {
    return LieGen::from_pair(jp.D(Side::plus, Y.v, X.v), -jp.D(Side::minus, X.v, Y.v));
  }
  if (X.kind == K::b && Y.kind == K::a) {
    LieGen g = *bracket(jp, Y, X);
    return LieGen::from_pair(-g.plus, -g.minus);
  }
  if (X.kind == K::T && Y.kind == K::T)
    return LieGen::from_pair(X.plus * Y.plus - Y.plus * X.plus, X.minus * Y.minus - Y.minus * X.minus);
  if (X.kind == K::T) return Y.kind == K::a ? LieGen::from_a(X.minus * Y.v) : LieGen::from_b(X.plus * Y.v);
  LieGen g = *bracket(jp, Y, X);
  g.v = -g.v;
  return g;
}

namespace {

// sum_i field_i d_i f
Poly directional(const std::vector<Poly>& field, const Poly& f) {
  Poly out(f.vars());
  for (int i = 0; i < f.vars(); ++i) out = out + field[i] * f.derivative(i);
  return out;
}

std::vector<Poly> constant_field(const Vec& v) {
  const int n = static_cast<int>(v.size());
  std::vector<Poly> out;
  for (int i = 0; i < n; ++i) out.push_back(Poly::constant(n, v(i)));
  return out;
}

std::vector<Poly> linear_field(const Mat& A) {
  const int n = static_cast<int>(A.rows());
  std::vector<Poly> out;
  for (int i = 0; i < n; ++i) out.push_back(Poly::linear(n, A.row(i).transpose()));
  return out;
}

// y -> Q_y b on V-, quadratic in y.
std::vector<Poly> quadratic_field(const Pair& jp, const Vec& b) {
  using C = Poly::C;
  const int n = jp.dim();
  std::vector<Poly> out(n, Poly(n));
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) {
      Vec t = jp.triple(Side::minus, Vec::Unit(n, j), b, Vec::Unit(n, l));
      Poly mono = Poly::variable(n, j) * Poly::variable(n, l);
      for (int i = 0; i < n; ++i)
        if (t(i) != 0) out[i] = out[i] + mono * C(0.5 * t(i));
    }
  return out;
}

}  // namespace

Poly dpi_action(const RepParams& rp, Picture pic, const LieGen& g, const Poly& f) {
  using C = Poly::C;
  const Pair& jp = *rp.jp;
  const int n = jp.dim();
  const double p = jp.constants().p, nu = rp.nu;
  const Mat& G = jp.gram();
  if (pic == Picture::noncompact) {
    switch (g.kind) {
      case LieGen::Kind::a:
        return directional(constant_field(g.v), f) * C(-1);
      case LieGen::Kind::T:
        return directional(linear_field(g.minus), f) * C(-1) + f * C((nu / p + 0.5) * g.plus.trace());
      case LieGen::Kind::b: {
        Poly tau = Poly::linear(n, G.transpose() * g.v);  // tau(b, y) = b^T G y
        return directional(quadratic_field(jp, g.v), f) * C(-1) - tau * f * C(2 * nu + p);
      }
    }
  } else {
    switch (g.kind) {
      case LieGen::Kind::a:
        return Poly::linear(n, G * g.v) * f * C(0, 1);  // i tau(x, a)
      case LieGen::Kind::T:
        return directional(linear_field(g.plus), f) * C(-1) + f * C((nu / p - 0.5) * g.plus.trace());
      case LieGen::Kind::b: {
        auto Bf = bessel_poly(jp, rp.lambda(), f);
        Vec w = G.transpose() * g.v;
        Poly out(n);
        for (int m = 0; m < n; ++m)
          if (w(m) != 0) out = out + Bf[m] * C(w(m));
        return out * C(0, -1);
      }
    }
  }
  throw JordanError("unsupported generator species");
}

double dpi_noncompact_fd(const RepParams& rp, const LieGen& g, const std::function<double(const Vec&)>& f,
                         const Vec& y) {
  const Pair& jp = *rp.jp;
  const double p = jp.constants().p, nu = rp.nu;
  FieldJet j = fd_jet(f, y);
  switch (g.kind) {
    case LieGen::Kind::a:
      return -j.grad.dot(g.v);
    case LieGen::Kind::T:
      return -j.grad.dot(g.minus * y) + (nu / p + 0.5) * g.plus.trace() * j.value;
    case LieGen::Kind::b:
      return -j.grad.dot(jp.quad(Side::minus, y, g.v)) - (2 * nu + p) * jp.tau(g.v, y) * j.value;
  }
  throw JordanError("unsupported generator species");
}

double commutator_residual(const RepParams& rp, Picture pic, const LieGen& X, const LieGen& Y, const Poly& f,
                           const std::vector<Vec>& points) {
  Poly xy = dpi_action(rp, pic, X, dpi_action(rp, pic, Y, f));
  Poly yx = dpi_action(rp, pic, Y, dpi_action(rp, pic, X, f));
  Poly lhs = xy - yx;
  auto br = bracket(*rp.jp, X, Y);
  Poly rhs = br ? dpi_action(rp, pic, *br, f) : Poly(f.vars());
  double worst = 0, scale = 1e-300;
  for (const Vec& pt : points) {
    worst = std::max(worst, std::abs(lhs(pt) - rhs(pt)));
    scale = std::max({scale, std::abs(xy(pt)), std::abs(yx(pt))});
  }
  return worst / scale;
}

double phi_k_invariance(const RepParams& rp, const Vec& a, const Vec& y) {
  auto f = [&](const Vec& v) { return phi_nu(rp, v); };
  LieGen ga = LieGen::from_a(a), gb = LieGen::from_b(rp.jp->theta(a));
  double va = dpi_noncompact_fd(rp, ga, f, y), vb = dpi_noncompact_fd(rp, gb, f, y);
  return std::abs(va + vb) / std::max({std::abs(va), std::abs(vb), 1e-300});
}

// ---------------------------------------------------------------------------

namespace {

double vec_norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// F(t) = K^{(k)}_mu((t/2)^2) on a rank-k cone with multiplicity d, evaluated with a fixed layout.
RadialFunction spherical_radial(int k, double d, double mu, const std::vector<double>& t0, KLayout& layout) {
  KBesselParams kp;
  kp.k = k;
  kp.d = d;
  kp.lambda = mu;
  std::vector<double> s0;
  for (double v : t0) s0.push_back(0.25 * v * v);
  layout = kbessel_layout(kp, s0);
  return [kp, &layout](const std::vector<double>& t) {
    std::vector<double> s;
    for (double v : t) s.push_back(0.25 * v * v);
    return kbessel_radial(kp, s, KForm::integral1, &layout).value;
  };
}

}  // namespace

SphericalityResult sphericality_full(const RepParams& rp, const std::vector<std::vector<double>>& ts,
                                     bool enforce_hypothesis) {
  const auto& C = rp.jp->constants();
  SphericalityResult out;
  if (enforce_hypothesis && C.d_plus != C.d_minus) {
    out.refused = true;
    out.reason = "spherical vector check requires d+ = d-";
    return out;
  }
  if (!C.unital) {
    out.refused = true;
    out.reason = "open orbit of a non-unital pair: the full-picture spherical vector is not covered";
    return out;
  }
  if (C.r > 2) {
    out.refused = true;
    out.reason = "full-picture check needs the rank-r K-Bessel function with r <= 2";
    return out;
  }
  const double mu = 0.5 * (C.p - C.e + 1) - rp.nu, lambda = rp.lambda();
  for (const auto& t : ts) {
    KLayout layout;
    RadialFunction F = spherical_radial(C.r, C.d, mu, t, layout);
    double psi = F(t);
    auto comps = radial_components(*rp.jp, lambda, F, t);
    std::vector<double> diff;
    for (int i = 0; i < C.r; ++i) diff.push_back(comps[i] - t[i] * psi);
    double res = vec_norm(diff) / (std::abs(psi) * vec_norm(t));
    out.t.push_back(t);
    out.residual.push_back(res);
    out.transverse.push_back(0);
    out.max_residual = std::max(out.max_residual, res);
  }
  return out;
}

SphericalityResult sphericality_orbit(const PairPtr& jp, int k, const std::vector<std::vector<double>>& ts,
                                      bool enforce_hypothesis) {
  const auto& C = jp->constants();
  SphericalityResult out;
  OrbitContext c = make_orbit(jp, k);
  if (!c.verdict.exists) {
    out.refused = true;
    out.reason = c.verdict.reason;
    return out;
  }
  if (enforce_hypothesis && C.d_plus != C.d_minus) {
    out.refused = true;
    out.reason = "spherical vector check requires d+ = d-";
    return out;
  }
  if (k < 1 || k >= C.r || k > 2) throw JordanError("orbit sphericality needs 1 <= k <= min(2, r-1)");
  const double mu = 0.5 * (k * C.d - C.e + 1);
  for (const auto& t : ts) {
    KLayout layout;
    RadialFunction F = spherical_radial(k, C.d_plus, mu, t, layout);
    double psi = F(t);
    auto comps = orbit_radial_components(*jp, k, F, t);
    std::vector<double> diff, trans;
    for (int i = 0; i < k; ++i) diff.push_back(comps[i] - t[i] * psi);
    for (int i = k; i < C.r; ++i) trans.push_back(comps[i]);
    const double scale = std::abs(psi) * vec_norm(t);
    double res = vec_norm(diff) / scale, tr = vec_norm(trans) / scale;
    out.t.push_back(t);
    out.residual.push_back(res);
    out.transverse.push_back(tr);
    out.max_residual = std::max({out.max_residual, res, tr});
  }
  return out;
}

// ---------------------------------------------------------------------------

NormMembership norm_membership(const PairPtr& jp, int k, NormMode mode, bool orbit_crosscheck) {
  const auto& C = jp->constants();
  NormMembership out;
  out.k = k;
  OrbitContext c = make_orbit(jp, k);
  if (!c.verdict.exists) throw JordanError(c.verdict.reason);
  if (k == 0) {
    out.finite = true;
    out.symbolic_ok = true;
    out.value = 1;
    return out;
  }
  if (k >= 2 && C.d_plus != C.d_minus) throw JordanError("rank reduction to a cone needs d+ = d- when k >= 2");
  if (k == C.r) throw JordanError("norm membership is stated for 0 <= k <= r-1");
  const double a = (C.r - k + 1) * C.d + 0.5 * C.b - 1;  // exponent of t_j in J at lambda = kd
  out.d_cone = C.d_plus;
  out.lambda = 0.5 * (k * C.d - C.e + 1);
  out.mu = 0.5 * (a - 1);
  out.symbolic_ok = out.mu > -1 && integrable(k, out.d_cone, out.lambda, out.mu, mode);
  KBesselParams kp;
  kp.k = k;
  kp.d = out.d_cone;
  kp.lambda = out.lambda;
  IntegrabilityResult ir = integrability_check(kp, out.mu, mode, true);
  out.finite = ir.finite;
  out.value = ir.numeric ? ir.numeric : ir.value;
  if (orbit_crosscheck && k == 1 && out.value) {
    const int power = mode == NormMode::L1 ? 1 : 2;
    KBesselParams k1 = kp;
    auto psi = [&](const Vec& x) {
      double t = jp->singular_values(x)[0];
      double v = kbessel_radial(k1, {0.25 * t * t}).value;
      return power == 1 ? std::abs(v) : v * v;
    };
    OrbitQuad q;
    q.radial_nodes = 64;
    out.orbit_value = orbit_integrate(c, psi, q);
    double expected = std::pow(2.0, a) * *out.value;
    out.reduction_gap = std::abs(*out.orbit_value / expected - 1);
  }
  return out;
}

double intertwiner_restrict(const OrbitContext& c, const ScalarField& f, const ScalarField& g, const OrbitQuad& q) {
  if (!c.verdict.exists) throw JordanError(c.verdict.reason);
  return orbit_integrate(c, [&](const Vec& x) { return f.value(x) * g.value(x); }, q);
}

SymmetryResult intertwiner_spot_check(const OrbitContext& c, const ScalarField& f, const ScalarField& g,
                                      const OrbitQuad& q) {
  if (!c.verdict.exists) throw JordanError(c.verdict.reason);
  const Pair& jp = *c.jp;
  const int n = jp.dim();
  const double lambda = c.k * jp.constants().d;
  Vec both = orbit_integrate_vec(
      c,
      [&](const Vec& x) {
        Vec xbar = jp.theta(x);
        double fv = f.value(x), gv = g.value(x);
        Vec v(2 * n);
        v << (apply_bessel(jp, lambda, f, x).value - xbar * fv) * gv,
            fv * (apply_bessel(jp, lambda, g, x).value - xbar * gv);
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

double intertwiner_kernel_check(const OrbitContext& c, int trials, std::uint64_t seed) {
  if (!c.verdict.exists) throw JordanError(c.verdict.reason);
  if (c.k < 1 || c.k >= c.jp->rank()) throw JordanError("kernel check needs 1 <= k <= r-1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0, 1);
  std::uniform_real_distribution<double> U(0.5, 2);
  GroupRule g = compact_group_rule(*c.jp, 4, 256, seed);
  std::uniform_int_distribution<size_t> pick(0, g.act.size() - 1);
  double worst = 0;
  int done = 0;
  for (int it = 0; it < 50 * trials && done < trials; ++it) {
    std::vector<double> t;
    double top = U(rng) + c.k;
    for (int i = 0; i < c.k; ++i) t.push_back(top - i * U(rng) * 0.4);
    Vec y = g.act[pick(rng)] * polar_point(c, t);
    Vec w(c.B0.cols());
    for (int i = 0; i < w.size(); ++i) w(i) = N(rng);
    try {
      ScalarField f = vanishing_field(c, c.B0 * w);
      worst = std::max(worst, std::abs(f.value(y)) / (w.norm() * y.norm()));
      ++done;
    } catch (const JordanError&) {
      // x2 singular: the point lies outside this chart
    }
  }
  if (done == 0) throw JordanError("no polar point fell inside the chart domain");
  return worst;
}

// ---------------------------------------------------------------------------

Estimate fourier_phi_rank1(double nu, double x) {
  if (!(nu > -0.5)) throw JordanError("Fourier transform of phi_nu needs nu > -1/2");
  auto g = [nu, x](double y) { return 2 * std::pow(1 + y * y, -nu - 0.5) * std::cos(x * y); };
  if (x == 0) {
    Estimate e = integrate_half_line([&](double y) { return g(y); }, 128);
    return e;
  }
  const double period = M_PI / std::abs(x);
  Rule gl = gauss_legendre(16, 0, 1);
  const int panels = 60;
  const int sub = std::max(1, static_cast<int>(std::ceil(period / 0.5)));
  auto panel_sum = [&](double a, int m) {
    double h = period / m, v = 0;
    for (int q = 0; q < m; ++q)
      for (int i = 0; i < gl.size(); ++i) v += gl.w[i] * h * g(a + q * h + h * gl.x[i]);
    return v;
  };
  std::vector<double> partial;
  double s = 0, coarse = 0;
  for (int j = 0; j < panels; ++j) {
    s += panel_sum(j * period, 2 * sub);
    coarse += panel_sum(j * period, sub);
    partial.push_back(s);
  }
  // Wynn epsilon table, keeping the even columns as limit estimates
  std::vector<double> prev(partial.size() + 1, 0.0), cur = partial;
  std::vector<double> estimates{partial.back()};
  for (int col = 1; cur.size() > 1; ++col) {
    std::vector<double> next(cur.size() - 1);
    for (size_t i = 0; i + 1 < cur.size(); ++i) {
      double diff = cur[i + 1] - cur[i];
      next[i] = prev[i + 1] + (diff == 0 ? 1e300 : 1 / diff);
    }
    prev = cur;
    cur = next;
    if (col % 2 == 0 && !cur.empty() && std::isfinite(cur.back()) && std::abs(cur.back()) < 1e200)
      estimates.push_back(cur.back());
    if (col >= 20) break;
  }
  Estimate e;
  e.value = estimates.back();
  e.error = estimates.size() >= 2 ? std::abs(estimates.back() - estimates[estimates.size() - 2]) : INFINITY;
  e.error += std::abs(s - coarse);
  if (!(e.error <= 1e-6 * std::max(1.0, std::abs(e.value))))
    throw JordanError("oscillatory quadrature did not converge");
  return e;
}

FourierRank1 fourier_rank1_check(const std::vector<double>& nus, const std::vector<double>& xs) {
  FourierRank1 out;
  out.nu = nus;
  out.x = xs;
  for (double nu : nus) {
    KBesselParams kp;
    kp.k = 1;
    kp.lambda = 1 - nu;
    std::vector<double> row;
    double mean = 0;
    for (double x : xs) {
      Estimate f = fourier_phi_rank1(nu, x);
      double psi = kbessel_radial(kp, {0.25 * x * x}).value;
      row.push_back(f.value / psi);
      mean += row.back() / xs.size();
      out.max_error_estimate = std::max(out.max_error_estimate, f.error / std::abs(f.value));
    }
    auto [lo, hi] = std::minmax_element(row.begin(), row.end());
    out.within_nu = std::max(out.within_nu, (*hi - *lo) / std::abs(mean));
    out.ratio.push_back(row);
    out.c_gamma.push_back(mean * std::tgamma(nu + 0.5));
  }
  auto [lo, hi] = std::minmax_element(out.c_gamma.begin(), out.c_gamma.end());
  double mean = 0;
  for (double v : out.c_gamma) mean += v / out.c_gamma.size();
  out.across_nu = (*hi - *lo) / std::abs(mean);
  return out;
}

}  // namespace jb
