#include "jbessel/kbessel.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace jb {

namespace {

struct AngleRule {
  std::vector<double> c, w;
};

// c = (1 - cos phi)/2 with phi weighted by sin^(d-1) phi: the law of (e1 | k e1) over K for rank 2.
AngleRule angle_rule(double d, int n) {
  Rule g = gauss_legendre(n, 0, M_PI);
  AngleRule a;
  double tot = 0;
  for (int i = 0; i < g.size(); ++i) {
    double wt = g.w[i] * std::pow(std::sin(g.x[i]), d - 1);
    a.c.push_back(0.5 * (1 - std::cos(g.x[i])));
    a.w.push_back(wt);
    tot += wt;
  }
  for (double& w : a.w) w /= tot;
  return a;
}

// Log of the integrand in (u, w, c) coordinates, Jacobian included, for rank 2.
double log_integrand2(const KBesselParams& p, const std::vector<double>& t, KForm form, double u, double w, double c) {
  double s1 = std::exp(u), s2 = s1 * w;
  double phi;
  if (form == KForm::integral1) {
    phi = s1 + s2 + t[0] * (c / s1 + (1 - c) / s2) + t[1] * ((1 - c) / s1 + c / s2);
  } else {
    double y1 = std::sqrt(t[0]), y2 = std::sqrt(t[1]);
    double a1 = s1 + 1 / s1, a2 = s2 + 1 / s2;
    phi = y1 * (c * a1 + (1 - c) * a2) + y2 * ((1 - c) * a1 + c * a2);
  }
  return -phi - p.lambda * (std::log(s1) + std::log(s2)) + p.d * std::log(s1 - s2) + 2 * u;
}

double log_integrand1(const KBesselParams& p, double t, KForm form, double u) {
  double s = std::exp(u);
  double phi = (form == KForm::integral1) ? s + t / s : std::sqrt(t) * (s + 1 / s);
  return -phi - p.lambda * u + u;
}

double form2_prefactor(const KBesselParams& p, const std::vector<double>& t) {
  double logy = 0;
  for (double v : t) logy += 0.5 * std::log(v);
  return std::exp((p.n_over_k() - p.lambda) * logy);
}

double sum_rank1(const KBesselParams& p, double t, KForm form, int nu, double lo, double hi) {
  Rule r = exp_trapezoid(nu, lo, hi);
  std::vector<double> terms(r.size());
  for (int i = 0; i < r.size(); ++i) {
    double u = std::log(r.x[i]);
    terms[i] = (r.w[i] / r.x[i]) * std::exp(log_integrand1(p, t, form, u));
  }
  return pairwise_sum(terms);
}

double sum_rank2(const KBesselParams& p, const std::vector<double>& t, KForm form, int nu, double lo, double hi, int nw,
                 int nphi) {
  const double h = (hi - lo) / (nu - 1);
  Rule rw = tanh_sinh(nw, 0, 1);
  AngleRule ar = angle_rule(p.d, nphi);
  std::vector<double> terms;
  terms.reserve(static_cast<size_t>(nu) * rw.size());
  std::vector<double> inner(ar.c.size());
  for (int i = 0; i < nu; ++i) {
    double u = lo + i * h;
    double wu = (i == 0 || i == nu - 1) ? 0.5 * h : h;
    for (int j = 0; j < rw.size(); ++j) {
      for (size_t a = 0; a < ar.c.size(); ++a)
        inner[a] = ar.w[a] * std::exp(log_integrand2(p, t, form, u, rw.x[j], ar.c[a]));
      terms.push_back(wu * rw.w[j] * pairwise_sum(inner));
    }
  }
  return 2 * polar_constant(2, p.d) * pairwise_sum(terms);
}

}  // namespace

KLayout kbessel_layout(const KBesselParams& p, const std::vector<double>& t, KForm form) {
  KLayout L;
  std::function<double(double)> env;
  if (p.k == 1) {
    env = [&](double u) { return log_integrand1(p, t[0], form, u); };
  } else if (p.k == 2) {
    Rule cw = tanh_sinh(9, 0, 1, 3.0);
    env = [&, cw](double u) {
      double best = -INFINITY;
      for (double w : cw.x)
        for (double c : {0.0, 0.5, 1.0}) best = std::max(best, log_integrand2(p, t, form, u, w, c));
      return best;
    };
  } else {
    throw std::invalid_argument("radial K-Bessel quadrature supports k <= 2; use Monte Carlo for k = 3");
  }
  Window w = find_log_window(env, -60, 60, 0.25, 42.0);
  if (!w.ok) throw std::runtime_error("K-Bessel integrand does not decay inside the scan window");
  L.u_lo = w.lo;
  L.u_hi = w.hi;
  L.nu = nodes_for_window(p.quad.nodes, w.lo, w.hi);
  return L;
}

KValue kbessel_radial(const KBesselParams& p, const std::vector<double>& t, KForm form, const KLayout* layout) {
  if (static_cast<int>(t.size()) != p.k) throw std::invalid_argument("kbessel_radial: t must have k entries");
  // the first integral extends continuously to the closed cone
  for (double v : t)
    if (!(v > 0) && !(form == KForm::integral1 && v == 0))
      throw std::invalid_argument("kbessel_radial: t must lie in the cone");
  if (p.k >= 3) return kbessel_mc(p, t, form);
  KLayout L = layout ? *layout : kbessel_layout(p, t, form);
  KValue out;
  out.method = "radial";
  double pre = form == KForm::integral2 ? form2_prefactor(p, t) : 1.0;
  if (p.k == 1) {
    double fine = sum_rank1(p, t[0], form, L.nu, L.u_lo, L.u_hi);
    double crude = sum_rank1(p, t[0], form, L.nu / 2 + 1, L.u_lo, L.u_hi);
    out.value = pre * fine;
    out.error = pre * std::abs(fine - crude);
    return out;
  }
  const int nw = std::max(24, 2 * p.quad.nodes / 3), nphi = std::max(12, p.quad.nodes / 4);
  double fine = sum_rank2(p, t, form, L.nu, L.u_lo, L.u_hi, nw, nphi);
  double crude = sum_rank2(p, t, form, L.nu / 2 + 1, L.u_lo, L.u_hi, nw / 2 + 1, nphi / 2 + 1);
  out.value = pre * fine;
  out.error = pre * std::abs(fine - crude);
  return out;
}

KValue kbessel_point(const KBesselParams& p, const ConeContext& c, const Vec& x, KForm form) {
  if (!cone_contains(c, x)) throw std::invalid_argument("kbessel_point: x is not in the cone");
  return kbessel_radial(p, cone_spectrum(c, x).values, form);
}

KValue kbessel_mc(const KBesselParams& p, const std::vector<double>& t, KForm form) {
  const int k = p.k;
  const double d = p.d, nk = p.n_over_k(), gate = (k - 1) * d / 2 + 0.05;
  std::mt19937_64 rng(p.quad.seed);
  auto pairing = [&](const CMat& m) {
    double s = 0;
    for (int i = 0; i < k; ++i) s += t[i] * m(i, i).real();
    return s;
  };
  auto logdet = [](const CMat& m) {
    double s = 0;
    for (double ev : hermitian_eigenvalues(m)) s += std::log(ev);
    return s;
  };
  double logdet_x = 0;
  for (double v : t) logdet_x += std::log(v);
  double scale = 1, alpha;
  std::function<double(const CMat&)> g;
  if (form == KForm::integral1) {
    if (nk - p.lambda > gate) {
      alpha = nk - p.lambda;
      g = [&](const CMat& v) { return std::exp(-pairing(v.inverse())); };
    } else if (p.lambda - nk > gate) {
      alpha = p.lambda - nk;
      scale = std::exp((nk - p.lambda) * logdet_x);
      g = [&](const CMat& v) { return std::exp(-pairing(v.inverse())); };
    } else {
      alpha = nk;
      g = [&](const CMat& v) { return std::exp(-pairing(v.inverse()) - p.lambda * logdet(v)); };
    }
  } else {
    // v = w / beta with w cone-Gamma(n/k); y = sqrt(t)
    std::vector<double> y(k);
    for (int i = 0; i < k; ++i) y[i] = std::sqrt(t[i]);
    double beta = *std::min_element(y.begin(), y.end());
    alpha = nk;
    double logdet_y = 0.5 * logdet_x;
    scale = std::exp((nk - p.lambda) * logdet_y) * std::pow(beta, -p.n() + k * p.lambda);
    g = [&, y, beta](const CMat& w) {
      CMat wi = w.inverse();
      double yw = 0, ywi = 0;
      for (int i = 0; i < k; ++i) yw += y[i] * w(i, i).real(), ywi += y[i] * wi(i, i).real();
      return std::exp(w.trace().real() - yw / beta - beta * ywi - p.lambda * logdet(w));
    };
  }
  double gam = gindikin_gamma(k, d, alpha);
  double mean = 0, m2 = 0;
  long cnt = 0;
  for (long i = 0; i < p.quad.samples; ++i) {
    double val = g(sample_cone_gamma(k, d, alpha, rng));
    ++cnt;
    double delta = val - mean;
    mean += delta / cnt;
    m2 += delta * (val - mean);
  }
  KValue out;
  out.method = "montecarlo";
  out.value = scale * gam * mean;
  out.error = scale * gam * std::sqrt(m2 / std::max<long>(cnt - 1, 1) / cnt);
  return out;
}

OdeResidual ode_residual(const KBesselParams& p, const std::vector<double>& t, std::optional<double> operator_lambda) {
  const int k = p.k;
  if (k > 2) throw std::invalid_argument("ode_residual supports k <= 2");
  for (int i = 0; i + 1 < k; ++i)
    if (t[i] - t[i + 1] < 1e-3 * t[0]) throw std::invalid_argument("ode_residual: separation margin too small");
  KLayout L = kbessel_layout(p, t, KForm::integral1);
  auto K = [&](const std::vector<double>& s) { return kbessel_radial(p, s, KForm::integral1, &L).value; };
  OdeResidual out;
  out.value = K(t);
  out.grad.assign(k, 0);
  out.second.assign(k, 0);
  for (int i = 0; i < k; ++i) {
    double h = std::max(1e-4, 1e-3 * t[i]);
    if (k > 1 && 2 * h >= 0.5 * std::abs(t[0] - t[1])) throw std::invalid_argument("ode_residual: step exceeds separation");
    if (2 * h >= t[i]) throw std::invalid_argument("ode_residual: step underflows the cone boundary");
    double f[5];
    for (int m = -2; m <= 2; ++m) {
      auto s = t;
      s[i] += m * h;
      f[m + 2] = (m == 0) ? out.value : K(s);
    }
    out.grad[i] = (-f[4] + 8 * f[3] - 8 * f[1] + f[0]) / (12 * h);
    out.second[i] = (-f[4] + 16 * f[3] - 30 * f[2] + 16 * f[1] - f[0]) / (12 * h * h);
  }
  for (int i = 0; i < k; ++i) {
    double b = t[i] * out.second[i] + (operator_lambda.value_or(p.lambda) - (k - 1) * p.d / 2) * out.grad[i];
    for (int j = 0; j < k; ++j)
      if (j != i) b += p.d / 2 * (t[i] * out.grad[i] - t[j] * out.grad[j]) / (t[i] - t[j]);
    out.residual.push_back(std::abs(b - out.value) / std::abs(out.value));
  }
  return out;
}

bool integrable(int k, double d, double lambda, double mu, NormMode mode) {
  if (mode == NormMode::L1) return mu > -1 && mu - lambda > -2 - (k - 1) * d / 2;
  return mu > -1 && mu - 2 * lambda > -3 - (k - 1) * d;
}

double l1_closed_form(int k, double d, double lambda, double mu) {
  double nk = 1 + (k - 1) * d / 2;
  return gindikin_gamma(k, d, mu + nk) * gindikin_gamma(k, d, mu - lambda + 2 * nk);
}

IntegrabilityResult integrability_check(const KBesselParams& p, double mu, NormMode mode, bool numeric) {
  IntegrabilityResult r;
  r.finite = integrable(p.k, p.d, p.lambda, mu, mode);
  if (!r.finite) return r;
  if (mode == NormMode::L1) {
    r.closed_form = l1_closed_form(p.k, p.d, p.lambda, mu);
    r.value = r.closed_form;
  }
  if (!numeric || p.k > 2) return r;
  const int power = mode == NormMode::L1 ? 1 : 2;
  if (p.k == 1) {
    auto f = [&](double x) {
      double kv = kbessel_radial(p, {x}).value;
      return std::pow(kv, power) * std::pow(x, mu);
    };
    Estimate e = integrate_half_line(f, p.quad.nodes);
    r.numeric = e.value;
    r.numeric_error = e.error;
  } else {
    KBesselParams inner = p;
    inner.quad.nodes = std::max(32, p.quad.nodes / 3);
    QuadratureSpec outer = p.quad;
    outer.nodes = std::max(32, p.quad.nodes / 3);
    auto c = make_cone(2, p.d);
    auto f = [&](const std::vector<double>& s) {
      if (!(s[1] > 0) || !(s[0] > s[1])) return 0.0;
      double kv = kbessel_radial(inner, s).value;
      return std::pow(kv, power) * std::pow(s[0] * s[1], mu);
    };
    auto e = cone_integrate_radial(c, f, outer);
    r.numeric = e.value;
    r.numeric_error = e.error;
  }
  if (!r.value) r.value = r.numeric;
  return r;
}

DivergenceProbe divergence_probe_rank1(double lambda, double mu, NormMode mode) {
  KBesselParams p;
  p.k = 1;
  p.lambda = lambda;
  DivergenceProbe out;
  const int power = mode == NormMode::L1 ? 1 : 2;
  auto f = [&](double x) { return std::pow(kbessel_radial(p, {x}).value, power) * std::pow(x, mu); };
  // integrate over (eps, 1) in log coordinates and add the tail over (1, inf)
  Estimate tail = integrate_half_line([&](double x) { return x > 1 ? f(x) : 0.0; }, 96);
  for (double eps : {1e-4, 1e-8, 1e-12, 1e-16}) {
    double lo = std::log(eps);
    Rule r = exp_trapezoid(nodes_for_window(96, lo, 0.0, 0.2), lo, 0.0);
    std::vector<double> terms(r.size());
    for (int i = 0; i < r.size(); ++i) terms[i] = r.w[i] * f(r.x[i]);
    out.eps.push_back(eps);
    out.partial.push_back(pairwise_sum(terms) + (std::isfinite(tail.value) ? tail.value : 0.0));
  }
  // convergent integrals settle; divergent ones keep growing by a fixed amount or factor per decade
  double g1 = out.partial[2] - out.partial[1], g2 = out.partial[3] - out.partial[2];
  out.diverges = g2 > 1e-3 * std::abs(out.partial[3]) && g2 >= 0.5 * g1;
  return out;
}

ClercResult clerc_restriction_check(double d, double mu, const std::vector<double>& samples, int m,
                                    const QuadratureSpec& q) {
  ClercResult out;
  const int k = 1;
  if (!(mu < 1 + k * d / 2)) {
    out.in_precondition = false;
    out.note = "mu must be below 1 + kd/2";
    return out;
  }
  if (m != 0 && m != 1) throw std::invalid_argument("clerc_restriction_check supports m in {0, 1}");
  KBesselParams p1{1, d, mu, q}, p2{2, d, mu, q};
  p2.quad.nodes = std::max(q.nodes, 128);
  for (double t : samples) {
    double base = kbessel_radial(p1, {t}).value;
    double ratio = 1.0;
    if (m == 1) {
      double at0 = kbessel_radial(p2, {t, 0.0}, KForm::integral1).value;
      // linear extrapolation from small positive t2 as a consistency check on the boundary value
      double e1 = 1e-4 * t, e2 = 2e-4 * t;
      double k1 = kbessel_radial(p2, {t, e1}).value, k2 = kbessel_radial(p2, {t, e2}).value;
      double extrap = 2 * k1 - k2;
      out.extrapolation_gap = std::max(out.extrapolation_gap, std::abs(extrap - at0) / std::abs(at0));
      ratio = at0 / base;
    }
    out.t.push_back(t);
    out.ratio.push_back(ratio);
  }
  double lo = *std::min_element(out.ratio.begin(), out.ratio.end());
  double hi = *std::max_element(out.ratio.begin(), out.ratio.end());
  double mean = 0;
  for (double r : out.ratio) mean += r / out.ratio.size();
  out.dispersion = (hi - lo) / std::abs(mean);
  return out;
}

}  // namespace jb
