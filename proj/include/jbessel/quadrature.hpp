#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace jb {

enum class QuadMethod { radial, montecarlo };

struct QuadratureSpec {
  QuadMethod method = QuadMethod::radial;
  int nodes = 96;
  long samples = 200000;
  std::uint64_t seed = 0xC0FFEE;
  double tol_abs = 1e-10;
  double tol_rel = 1e-8;

  static QuadMethod parse_method(const std::string& s);
  static std::string method_name(QuadMethod m);
};

struct Rule {
  std::vector<double> x, w;
  int size() const { return static_cast<int>(x.size()); }
};

struct Estimate {
  double value = 0;
  double error = 0;
};

// Sum in a fixed binary-tree order so the result does not depend on thread count.
double pairwise_sum(const double* v, std::size_t n);
inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

Rule gauss_legendre(int n, double a = -1, double b = 1);
// Nodes and weights for the weight exp(-x^2) on the real line.
Rule gauss_hermite(int n);
// Double-exponential rule on (a,b); nodes never touch the endpoints.
Rule tanh_sinh(int n, double a = 0, double b = 1, double h_max = 4.0);
// Trapezoid rule on the real u-axis window [lo,hi], returned as a rule in s = exp(u) (weights include ds/du).
Rule exp_trapezoid(int n, double lo, double hi);

// Finds the u-window of a nonnegative integrand over (0,inf) with s = exp(u) by scanning
// log(f(e^u) e^u) and keeping the region within `drop` of the maximum.
struct Window {
  double lo = -1, hi = 1;
  bool ok = false;
};
Window find_log_window(const std::function<double(double)>& log_g, double scan_lo = -60, double scan_hi = 60,
                       double step = 0.25, double drop = 42.0);

// Trapezoid node count for a u-window: at least n, and spacing no wider than h_max.
int nodes_for_window(int n, double lo, double hi, double h_max = 0.3);

// Integral over (0, inf) of f(s) ds using the scan window and a trapezoid in u = log s.
// The error estimate compares n and n/2 nodes.
Estimate integrate_half_line(const std::function<double(double)>& f, int n = 96, double drop = 42.0);

// Number of worker threads, from JB_THREADS (default 1).
int thread_count();

// Evaluates f on [0,n) in parallel chunks and returns values in index order.
std::vector<double> parallel_map(std::size_t n, const std::function<double(std::size_t)>& f);

}  // namespace jb
