#include "doctest.h"
#include "jbessel/quadrature.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>

using namespace jb;

namespace {

double apply(const Rule& r, double (*f)(double)) {
  double s = 0;
  for (int i = 0; i < r.size(); ++i) s += r.w[i] * f(r.x[i]);
  return s;
}

}  // namespace

TEST_SUITE("quadrature") {
  TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
    Rule r = gauss_legendre(5, 0, 2);
    CHECK(apply(r, [](double x) { return std::pow(x, 9); }) == doctest::Approx(1024.0 / 10).epsilon(1e-13));
    CHECK(std::accumulate(r.w.begin(), r.w.end(), 0.0) == doctest::Approx(2).epsilon(1e-14));
  }

  TEST_CASE("Gauss-Hermite moments") {
    Rule r = gauss_hermite(6);
    CHECK(apply(r, [](double) { return 1.0; }) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-13));
    CHECK(apply(r, [](double x) { return x * x * x * x; }) ==
          doctest::Approx(0.75 * std::sqrt(M_PI)).epsilon(1e-13));
    CHECK(std::abs(apply(r, [](double x) { return x * x * x; })) < 1e-14);
  }

  TEST_CASE("tanh-sinh handles endpoint singularities") {
    Rule r = tanh_sinh(80, 0, 1);
    CHECK(apply(r, [](double x) { return 1 / std::sqrt(x); }) == doctest::Approx(2).epsilon(1e-9));
    CHECK(apply(r, [](double x) { return std::log(x); }) == doctest::Approx(-1).epsilon(1e-9));
    for (double x : r.x) {
      CHECK(x > 0);
      CHECK(x < 1);
    }
  }

  TEST_CASE("half line integration with a scanned window") {
    auto e = integrate_half_line([](double s) { return std::exp(-s) * std::pow(s, 2.5); });
    CHECK(e.value == doctest::Approx(std::tgamma(3.5)).epsilon(1e-10));
    CHECK(e.error < 1e-8);
    auto w = integrate_half_line([](double s) { return std::exp(-s - 1 / s); });
    CHECK(w.value == doctest::Approx(2 * std::cyl_bessel_k(1.0, 2.0)).epsilon(1e-10));
  }

  TEST_CASE("pairwise summation") {
    std::vector<double> v(1000);
    for (int i = 0; i < 1000; ++i) v[i] = i + 1;
    CHECK(pairwise_sum(v) == 500500);
    CHECK(pairwise_sum(nullptr, 0) == 0);
  }

  TEST_CASE("method names") {
    CHECK(QuadratureSpec::parse_method("radial") == QuadMethod::radial);
    CHECK(QuadratureSpec::parse_method("montecarlo") == QuadMethod::montecarlo);
    CHECK(QuadratureSpec::method_name(QuadMethod::montecarlo) == "montecarlo");
    CHECK_THROWS(QuadratureSpec::parse_method("simpson"));
  }

  TEST_CASE("parallel results do not depend on the thread count") {
    auto f = [](std::size_t i) { return std::sin(0.1 * static_cast<double>(i)); };
    setenv("JB_THREADS", "1", 1);
    CHECK(thread_count() == 1);
    auto a = parallel_map(777, f);
    setenv("JB_THREADS", "3", 1);
    CHECK(thread_count() == 3);
    auto b = parallel_map(777, f);
    unsetenv("JB_THREADS");
    CHECK(a == b);
    CHECK(pairwise_sum(a) == pairwise_sum(b));
  }
}
