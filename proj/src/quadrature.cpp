#include "jbessel/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace jb {

QuadMethod QuadratureSpec::parse_method(const std::string& s) {
  if (s == "radial") return QuadMethod::radial;
  if (s == "montecarlo" || s == "mc") return QuadMethod::montecarlo;
  throw std::invalid_argument("unknown quadrature method '" + s + "' (expected radial or montecarlo)");
}

std::string QuadratureSpec::method_name(QuadMethod m) { return m == QuadMethod::radial ? "radial" : "montecarlo"; }

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights from first eigenvector components.
static Rule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& off, double mu0) {
  const int n = static_cast<int>(diag.size());
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) T(i, i) = diag(i);
  for (int i = 0; i + 1 < n; ++i) T(i, i + 1) = T(i + 1, i) = off(i);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  Rule r;
  for (int i = 0; i < n; ++i) {
    r.x.push_back(es.eigenvalues()(i));
    double v0 = es.eigenvectors()(0, i);
    r.w.push_back(mu0 * v0 * v0);
  }
  return r;
}

Rule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n), off(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) off(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  Rule r = golub_welsch(diag, off, 2.0);
  // refine nodes with Newton on P_n for full double accuracy
  for (double& x : r.x) {
    for (int it = 0; it < 3; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1, p1 = p2;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1);
      if (n == 1) dp = 1;
      x -= p1 / dp;
    }
  }
  for (int i = 0; i < n; ++i) {
    double x = r.x[i], p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1, p1 = p2;
    }
    double dp = (n == 1) ? 1.0 : n * (x * p1 - p0) / (x * x - 1);
    r.w[i] = 2.0 / ((1 - x * x) * dp * dp);
  }
  const double hw = 0.5 * (b - a), c = 0.5 * (a + b);
  for (int i = 0; i < n; ++i) r.x[i] = c + hw * r.x[i], r.w[i] *= hw;
  return r;
}

Rule gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be positive");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n), off(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) off(k - 1) = std::sqrt(k / 2.0);
  return golub_welsch(diag, off, std::sqrt(M_PI));
}

Rule tanh_sinh(int n, double a, double b, double h_max) {
  if (n < 3) throw std::invalid_argument("tanh_sinh: n must be at least 3");
  Rule r;
  const double h = 2.0 * h_max / (n - 1);
  const double hw = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    double s = -h_max + i * h;
    double u = 0.5 * M_PI * std::sinh(s);
    double ch = std::cosh(u);
    // distance to the nearer endpoint in unit-interval terms, computed without cancellation
    double comp = 1.0 / (std::exp(2 * std::abs(u)) + 1.0);  // (1 - tanh|u|)/2
    double w = h * 0.5 * M_PI * std::cosh(s) / (ch * ch) * hw;
    if (w < 1e-300 || comp <= 0) continue;
    double x = (u < 0) ? a + (b - a) * comp : b - (b - a) * comp;
    if (!(x > a && x < b)) continue;
    r.x.push_back(x);
    r.w.push_back(w);
  }
  return r;
}

Rule exp_trapezoid(int n, double lo, double hi) {
  if (n < 2 || !(hi > lo)) throw std::invalid_argument("exp_trapezoid: bad window");
  Rule r;
  const double h = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) {
    double u = lo + i * h;
    double wt = (i == 0 || i == n - 1) ? 0.5 * h : h;
    double s = std::exp(u);
    r.x.push_back(s);
    r.w.push_back(wt * s);
  }
  return r;
}

Window find_log_window(const std::function<double(double)>& log_g, double scan_lo, double scan_hi, double step,
                       double drop) {
  std::vector<double> us, ls;
  double best = -INFINITY;
  auto scan = [&](double from, double to) {
    for (double u = from; u <= to + 1e-12; u += step) {
      double l = log_g(u);
      if (std::isnan(l)) l = -INFINITY;
      us.push_back(u);
      ls.push_back(l);
      best = std::max(best, l);
    }
  };
  scan(scan_lo, scan_hi);
  // widen the scan while the integrand is still significant at an edge
  for (int round = 0; round < 3 && std::isfinite(best); ++round) {
    bool left = ls.front() > best - drop, right = ls.back() > best - drop;
    if (!left && !right) break;
    const double width = scan_hi - scan_lo;
    if (left) {
      std::vector<double> u0(us), l0(ls);
      us.clear(), ls.clear();
      scan(scan_lo - width, scan_lo - step);
      us.insert(us.end(), u0.begin(), u0.end());
      ls.insert(ls.end(), l0.begin(), l0.end());
      scan_lo -= width;
    }
    if (right) {
      scan(scan_hi + step, scan_hi + width);
      scan_hi += width;
    }
  }
  Window w;
  if (!std::isfinite(best)) {
    w.lo = w.hi = NAN;
    return w;
  }
  int first = -1, last = -1;
  for (int i = 0; i < static_cast<int>(us.size()); ++i)
    if (ls[i] > best - drop) {
      if (first < 0) first = i;
      last = i;
    }
  w.lo = us[std::max(first - 1, 0)];
  w.hi = us[std::min(last + 1, static_cast<int>(us.size()) - 1)];
  // integrand still significant at the scan edge: the integral may not converge
  w.ok = first > 0 && last < static_cast<int>(us.size()) - 1;
  return w;
}

int nodes_for_window(int n, double lo, double hi, double h_max) {
  return std::max(n, static_cast<int>(std::ceil((hi - lo) / h_max)) + 1);
}

Estimate integrate_half_line(const std::function<double(double)>& f, int n, double drop) {
  auto lg = [&](double u) {
    double s = std::exp(u);
    double v = std::abs(f(s)) * s;
    return v > 0 ? std::log(v) : -INFINITY;
  };
  Window w = find_log_window(lg, -60, 60, 0.25, drop);
  if (!w.ok) return {NAN, INFINITY};
  n = nodes_for_window(n, w.lo, w.hi);
  auto run = [&](int m) {
    Rule r = exp_trapezoid(m, w.lo, w.hi);
    std::vector<double> t(r.size());
    for (int i = 0; i < r.size(); ++i) t[i] = r.w[i] * f(r.x[i]);
    return pairwise_sum(t);
  };
  double full = run(n), half = run(n / 2 + 1);
  return {full, std::abs(full - half)};
}

int thread_count() {
  const char* env = std::getenv("JB_THREADS");
  if (!env) return 1;
  int t = std::atoi(env);
  return std::clamp(t, 1, 256);
}

std::vector<double> parallel_map(std::size_t n, const std::function<double(std::size_t)>& f) {
  std::vector<double> out(n);
  const int nt = static_cast<int>(std::min<std::size_t>(thread_count(), std::max<std::size_t>(n, 1)));
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += nt) out[i] = f(i);
    });
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace jb
