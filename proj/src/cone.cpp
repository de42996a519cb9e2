#include "jbessel/cone.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numeric>

namespace jb {

namespace {

double factorial(int k) {
  double f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Linear functional x -> tr(x) on span(B), from tr(z) = (k/n) Tr(L_z).
Vec trace_functional(const JordanPair<double>& J, const Vec& e, const Mat& B, int k) {
  const int m = static_cast<int>(B.cols());
  Mat Bp = (B.transpose() * B).ldlt().solve(B.transpose());
  Vec tr_basis(m);
  for (int i = 0; i < m; ++i) {
    double t = 0;
    for (int j = 0; j < m; ++j) t += (Bp * J.jordan_product(e, B.col(i), B.col(j)))(j);
    tr_basis(i) = t * k / m;
  }
  return Bp.transpose() * tr_basis;
}

}  // namespace

ConeContext make_cone(int k, double d) {
  if (k < 1) throw std::invalid_argument("cone rank must be at least 1");
  ConeContext c;
  c.k = k;
  c.d = d;
  c.n = k + 0.5 * k * (k - 1) * d;
  return c;
}

ConeContext make_cone(std::shared_ptr<const JordanPair<double>> parent, int k) {
  const auto& J = *parent;
  if (k < 1 || k > J.rank()) throw std::invalid_argument("cone rank must lie in [1, r]");
  ConeContext c;
  c.parent = parent;
  c.k = k;
  c.e = J.frame_sum(k);
  c.e_bar = J.theta(c.e);
  auto pd = J.peirce(c.e, c.e_bar);
  Mat C2 = range_basis<double>(pd.P2);
  Mat sigma = J.Q(Side::plus, c.e) * J.theta_matrix();
  Mat S = C2.transpose() * sigma * C2;
  Eigen::JacobiSVD<Mat> svd(S - Mat::Identity(S.rows(), S.cols()), Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  std::vector<int> keep;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) < 1e-9) keep.push_back(i);
  Mat F(S.cols(), keep.size());
  for (size_t j = 0; j < keep.size(); ++j) F.col(j) = svd.matrixV().col(keep[j]);
  Mat B = C2 * F;
  const int m = static_cast<int>(B.cols());
  c.n = m;
  c.d = k > 1 ? 2.0 * (m - k) / (k * (k - 1)) : J.constants().d_plus;
  // orthonormalize for the trace form tr(x o y)
  Vec tf = trace_functional(J, c.e, B, k);
  Mat G(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) G(i, j) = tf.dot(J.jordan_product(c.e, B.col(i), B.col(j)));
  Eigen::LLT<Mat> llt(0.5 * (G + G.transpose()));
  if (llt.info() != Eigen::Success) throw JordanError("trace form of A^(k) is not positive definite");
  Mat Linv = llt.matrixL().solve(Mat::Identity(m, m));
  c.basis = B * Linv.transpose();
  return c;
}

static const JordanPair<double>& parent_of(const ConeContext& c) {
  if (!c.parent) throw std::invalid_argument("operation needs a cone realized inside a Jordan pair");
  return *c.parent;
}

Vec jordan_mul(const ConeContext& c, const Vec& x, const Vec& y) { return parent_of(c).jordan_product(c.e, x, y); }

ConeSpectrum cone_spectrum(const ConeContext& c, const Vec& x) {
  const auto& J = parent_of(c);
  auto sp = J.spectral(c.e, x);
  ConeSpectrum out;
  for (size_t i = 0; i < sp.values.size(); ++i) {
    double tr = cone_trace(c, sp.idempotents[i]);
    int rk = static_cast<int>(std::lround(tr));
    if (std::abs(tr - rk) > 1e-6 || rk < 1) throw JordanError("spectral idempotent has non-integral trace");
    out.ranks.push_back(rk);
    out.idempotents.push_back(sp.idempotents[i]);
    for (int j = 0; j < rk; ++j) out.values.push_back(sp.values[i]);
  }
  if (static_cast<int>(out.values.size()) != c.k) throw JordanError("spectral multiplicities do not add up to the rank");
  std::sort(out.values.begin(), out.values.end(), std::greater<double>());
  return out;
}

double cone_trace(const ConeContext& c, const Vec& x) {
  // tr(x) = (x | e) for the orthonormal trace-form basis
  Vec coords = c.basis.transpose() * x;
  Vec ecoords = c.basis.transpose() * c.e;
  return coords.dot(ecoords);
}

double cone_det(const ConeContext& c, const Vec& x) {
  double p = 1;
  for (double v : cone_spectrum(c, x).values) p *= v;
  return p;
}

bool in_subalgebra(const ConeContext& c, const Vec& x, double tol) {
  Vec proj = c.basis * (c.basis.transpose() * x);
  return (proj - x).norm() <= tol * std::max(1.0, x.norm());
}

bool cone_contains(const ConeContext& c, const Vec& x, double tol) {
  if (!in_subalgebra(c, x)) return false;
  auto sp = cone_spectrum(c, x);
  return sp.values.back() > tol * std::max(1.0, std::abs(sp.values.front()));
}

Vec cone_inverse(const ConeContext& c, const Vec& x) {
  auto sp = cone_spectrum(c, x);
  const auto& J = parent_of(c);
  auto raw = J.spectral(c.e, x);
  Vec out = Vec::Zero(x.size());
  for (size_t i = 0; i < raw.values.size(); ++i) {
    if (std::abs(raw.values[i]) < 1e-14 * std::max(1.0, std::abs(sp.values.front())))
      throw JordanError("cone_inverse: element is not invertible");
    out += raw.idempotents[i] / raw.values[i];
  }
  return out;
}

Vec cone_quadratic(const ConeContext& c, const Vec& x, const Vec& y) {
  Vec xy = jordan_mul(c, x, y);
  return 2 * jordan_mul(c, x, xy) - jordan_mul(c, jordan_mul(c, x, x), y);
}

std::complex<double> complex_gamma(std::complex<double> z) {
  static const double g = 7;
  static const double p[9] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                              771.32342877765313,   -176.61502916214059,   12.507343278686905,
                              -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (z.real() < 0.5) return M_PI / (std::sin(M_PI * z) * complex_gamma(1.0 - z));
  z -= 1.0;
  std::complex<double> x = p[0];
  for (int i = 1; i < 9; ++i) x += p[i] / (z + double(i));
  std::complex<double> t = z + g + 0.5;
  return std::sqrt(2 * M_PI) * std::pow(t, z + 0.5) * std::exp(-t) * x;
}

static void check_pole(std::complex<double> a) {
  if (std::abs(a.imag()) < 1e-14 && a.real() <= 0 && std::abs(a.real() - std::round(a.real())) < 1e-12)
    throw std::domain_error("Gindikin Gamma: pole at argument " + std::to_string(a.real()));
}

std::complex<double> gindikin_gamma(int k, double d, std::complex<double> lambda) {
  std::complex<double> out = std::pow(2 * M_PI, k * (k - 1) * d / 4.0);
  for (int i = 1; i <= k; ++i) {
    std::complex<double> a = lambda - (i - 1) * d / 2.0;
    check_pole(a);
    out *= (std::abs(a.imag()) < 1e-300) ? std::complex<double>(std::tgamma(a.real())) : complex_gamma(a);
  }
  return out;
}

double gindikin_gamma(int k, double d, double lambda) { return gindikin_gamma(k, d, std::complex<double>(lambda)).real(); }

double polar_constant(int k, double d) {
  double n = k + 0.5 * k * (k - 1) * d;
  double c = std::pow(2 * M_PI, 0.5 * (n - k)) * std::pow(std::tgamma(1 + d / 2), k);
  for (int j = 1; j <= k; ++j) c /= std::tgamma(1 + j * d / 2);
  return c;
}

namespace {

// Weighted chamber sum for given u-rule and w-rule.
double chamber_sum(int k, double d, const RadialIntegrand& f, const Rule& ru, const Rule& rw) {
  std::vector<double> terms;
  std::vector<double> s(k);
  if (k == 1) {
    for (int i = 0; i < ru.size(); ++i) {
      s[0] = ru.x[i];
      terms.push_back(ru.w[i] * f(s));
    }
    return pairwise_sum(terms);
  }
  std::vector<int> idx(k - 1, 0);
  const int m = rw.size();
  for (int i = 0; i < ru.size(); ++i) {
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      s[0] = ru.x[i];
      double w = ru.w[i];
      for (int j = 1; j < k; ++j) {
        s[j] = s[j - 1] * rw.x[idx[j - 1]];
        w *= s[j - 1] * rw.w[idx[j - 1]];
      }
      double vd = 1;
      for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b) vd *= std::pow(s[a] - s[b], d);
      double val = f(s);
      terms.push_back(val == 0 ? 0.0 : w * vd * val);
      int j = k - 2;
      while (j >= 0 && ++idx[j] == m) idx[j--] = 0;
      if (j < 0) break;
    }
  }
  return pairwise_sum(terms);
}

}  // namespace

ConeIntegral cone_integrate_radial(const ConeContext& c, const RadialIntegrand& f, const QuadratureSpec& q) {
  const int k = c.k;
  if (k > 3) throw std::invalid_argument("radial cone quadrature supports k <= 3");
  Rule coarse_w = tanh_sinh(9, 0, 1, 3.0);
  auto log_env = [&](double u) {
    double best = -INFINITY;
    std::vector<double> s(k);
    std::vector<int> idx(std::max(k - 1, 0), 0);
    s[0] = std::exp(u);
    if (k == 1) {
      double v = std::abs(f(s)) * s[0];
      return v > 0 ? std::log(v) : -INFINITY;
    }
    while (true) {
      double jac = s[0];
      for (int j = 1; j < k; ++j) {
        s[j] = s[j - 1] * coarse_w.x[idx[j - 1]];
        jac *= s[j - 1];
      }
      double vd = 1;
      for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b) vd *= std::pow(s[a] - s[b], c.d);
      double v = std::abs(f(s)) * jac * vd;
      if (v > 0) best = std::max(best, std::log(v));
      int j = k - 2;
      while (j >= 0 && ++idx[j] == coarse_w.size()) idx[j--] = 0;
      if (j < 0) break;
    }
    return best;
  };
  Window win = find_log_window(log_env, -60, 60, 0.25, 42.0);
  ConeIntegral out;
  out.method = "radial";
  out.polar_constant = polar_constant(k, c.d);
  if (!std::isfinite(win.lo)) return out;  // integrand vanishes on the scan grid
  if (!win.ok) {
    out.value = NAN;
    out.error = INFINITY;
    return out;
  }
  const int nu = nodes_for_window(q.nodes, win.lo, win.hi), nw = std::max(24, 2 * q.nodes / 3);
  const double scale = out.polar_constant * factorial(k);
  double fine = chamber_sum(k, c.d, f, exp_trapezoid(nu, win.lo, win.hi), tanh_sinh(nw, 0, 1));
  double crude = chamber_sum(k, c.d, f, exp_trapezoid(nu / 2 + 1, win.lo, win.hi), tanh_sinh(nw / 2 + 1, 0, 1));
  out.value = scale * fine;
  out.error = scale * std::abs(fine - crude);
  return out;
}

std::vector<double> hermitian_eigenvalues(const CMat& m) {
  Eigen::SelfAdjointEigenSolver<CMat> es(m);
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(v.begin(), v.end(), std::greater<double>());
  return v;
}

CMat sample_cone_gamma(int k, double d, double alpha, std::mt19937_64& rng) {
  if (d != 1.0 && d != 2.0) throw std::invalid_argument("Monte Carlo cone sampling supports d in {1, 2}");
  if (!(alpha > (k - 1) * d / 2)) throw std::invalid_argument("cone Gamma shape must exceed (k-1)d/2");
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  CMat T = CMat::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    std::gamma_distribution<double> ga(alpha - i * d / 2, 1.0);
    T(i, i) = std::sqrt(ga(rng));
    for (int j = 0; j < i; ++j) {
      double re = g(rng);
      double im = (d == 2.0) ? g(rng) : 0.0;
      T(i, j) = {re, im};
    }
  }
  return T * T.adjoint();
}

ConeIntegral cone_integrate_mc(const ConeContext& c, const MatrixIntegrand& f, const QuadratureSpec& q, double alpha) {
  if (alpha <= 0) alpha = c.n_over_k();
  std::mt19937_64 rng(q.seed);
  const double gam = gindikin_gamma(c.k, c.d, alpha);
  const double shift = c.n_over_k() - alpha;
  double mean = 0, m2 = 0;
  long cnt = 0;
  for (long i = 0; i < q.samples; ++i) {
    CMat v = sample_cone_gamma(c.k, c.d, alpha, rng);
    double tr = v.trace().real();
    double det = 1;
    for (double ev : hermitian_eigenvalues(v)) det *= ev;
    double val = f(v) * std::exp(tr) * (shift == 0 ? 1.0 : std::pow(det, shift));
    ++cnt;
    double delta = val - mean;
    mean += delta / cnt;
    m2 += delta * (val - mean);
  }
  ConeIntegral out;
  out.method = "montecarlo";
  out.value = gam * mean;
  out.error = gam * std::sqrt(m2 / std::max<long>(cnt - 1, 1) / cnt);
  out.polar_constant = polar_constant(c.k, c.d);
  return out;
}

ConeIntegral cone_integrate(const ConeContext& c, const RadialIntegrand& f, const QuadratureSpec& q) {
  if (q.method == QuadMethod::radial) return cone_integrate_radial(c, f, q);
  return cone_integrate_mc(c, [&](const CMat& v) { return f(hermitian_eigenvalues(v)); }, q);
}

}  // namespace jb
