#include "doctest.h"
#include "jbessel/cone.hpp"
#include "oracles.hpp"

#include <memory>

using namespace jb;

TEST_SUITE("cone") {
  TEST_CASE("Gindikin Gamma against products of ordinary Gamma values") {
    for (double s : {0.7, 1.5, 3.25}) CHECK(gindikin_gamma(1, 1.0, s) == doctest::Approx(std::tgamma(s)).epsilon(1e-13));
    for (int k : {2, 3})
      for (double d : {0.5, 1.0, 2.0}) {
        double s = 1 + (k - 1) * d / 2 + 0.3;
        CHECK(gindikin_gamma(k, d, s) == doctest::Approx(oracle::gindikin_gamma(k, d, s)).epsilon(1e-12));
      }
    auto z = gindikin_gamma(2, 1.0, std::complex<double>(2.5, 0));
    CHECK(z.real() == doctest::Approx(oracle::gindikin_gamma(2, 1.0, 2.5)).epsilon(1e-12));
    CHECK(std::abs(z.imag()) < 1e-12);
  }

  TEST_CASE("complex Gamma agrees with tgamma on the real axis and with the reflection formula") {
    for (double x : {0.3, 1.0, 4.5, -0.5}) CHECK(complex_gamma({x, 0}).real() == doctest::Approx(std::tgamma(x)).epsilon(1e-12));
    std::complex<double> z(0.5, 1.2);
    auto lhs = complex_gamma(z) * complex_gamma(1.0 - z);
    auto rhs = M_PI / std::sin(M_PI * z);
    CHECK(std::abs(lhs - rhs) < 1e-11 * std::abs(rhs));
  }

  TEST_CASE("cone of positive 3x3 real matrices inside sym:3") {
    auto jp = std::make_shared<const Pair>(AlgebraSpec::parse("sym:3"));
    ConeContext c = make_cone(jp, 3);
    Vec x = jp->b_t({3.0, 2.0, 0.5});
    CHECK(cone_det(c, x) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(cone_trace(c, x) == doctest::Approx(5.5).epsilon(1e-12));
    CHECK(cone_contains(c, x));
    CHECK_FALSE(cone_contains(c, jp->b_t({3.0, 2.0, -0.5})));
    Vec xi = cone_inverse(c, x);
    Vec e = jordan_mul(c, x, xi);
    CHECK(cone_det(c, e) == doctest::Approx(1).epsilon(1e-12));
    CHECK(cone_trace(c, e) == doctest::Approx(3).epsilon(1e-12));
  }

  TEST_CASE("radial cone integral of the Gamma integrand") {
    for (auto [k, d] : {std::pair{2, 1.0}, std::pair{2, 2.0}, std::pair{3, 1.0}}) {
      CAPTURE(k);
      CAPTURE(d);
      ConeContext c = make_cone(k, d);
      const double s = 1 + (k - 1) * d / 2 + 0.75;
      const double n = k + k * (k - 1) * d / 2;
      auto f = [&](const std::vector<double>& t) {
        double tr = 0, det = 1;
        for (double v : t) {
          tr += v;
          det *= v;
        }
        return std::exp(-tr) * std::pow(det, s - n / k);
      };
      QuadratureSpec q;
      auto r = cone_integrate(c, f, q);
      CHECK(r.value == doctest::Approx(oracle::gindikin_gamma(k, d, s)).epsilon(1e-6));
    }
  }

  TEST_CASE("Monte Carlo on the matrix model") {
    ConeContext c = make_cone(2, 1.0);
    QuadratureSpec q;
    q.method = QuadMethod::montecarlo;
    q.samples = 40000;
    auto f = [](const CMat& m) {
      auto ev = hermitian_eigenvalues(m);
      return std::exp(-(ev[0] + ev[1])) * std::sqrt(ev[0] * ev[1]);
    };
    auto r = cone_integrate_mc(c, f, q);
    double exact = oracle::gindikin_gamma(2, 1.0, 2.0);
    CHECK(std::abs(r.value - exact) < 5 * r.error + 1e-12);
    CHECK(r.error < 0.05 * exact);
  }
}
