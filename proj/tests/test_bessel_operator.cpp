#include "doctest.h"
#include "jbessel/bessel_operator.hpp"
#include "oracles.hpp"

#include <memory>
#include <random>

using namespace jb;

namespace {

PairPtr pair(const char* fam) { return std::make_shared<const Pair>(AlgebraSpec::parse(fam)); }

Vec random_vec(int n, std::mt19937_64& rng, double scale = 0.5) {
  std::normal_distribution<double> g(0, scale);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

}  // namespace

TEST_SUITE("bessel_operator") {
  TEST_CASE("rank one operator is x f'' + lambda f'") {
    auto jp = pair("sym:1");
    const double lambda = 0.7;
    auto f = [](double x) { return std::exp(-x * x) * (1 + x); };
    auto df = [](double x) { return std::exp(-x * x) * (1 - 2 * x - 2 * x * x); };
    auto d2f = [](double x) { return std::exp(-x * x) * (4 * x * x * x + 4 * x * x - 6 * x - 2); };
    for (double x : {-1.2, 0.3, 2.0}) {
      FieldJet j;
      j.value = f(x);
      j.grad = Vec::Constant(1, df(x));
      j.hess = Mat::Constant(1, 1, d2f(x));
      Vec out = apply_bessel(*jp, lambda, j, Vec::Constant(1, x)).value;
      double expected = (x * d2f(x) + lambda * df(x)) / jp->gram()(0, 0);
      CHECK(out(0) == doctest::Approx(expected).epsilon(1e-12));
    }
  }

  TEST_CASE("exponentials are eigenfunctions") {
    std::mt19937_64 rng(31);
    for (const char* fam : {"sym:2", "herm_c:2", "spin:4", "rect:2x3"}) {
      CAPTURE(fam);
      auto jp = pair(fam);
      for (double lambda : {0.0, 1.0, 2.5}) {
        auto r = exponential_probe(*jp, lambda, random_vec(jp->dim(), rng), random_vec(jp->dim(), rng));
        CHECK(r.cos_residual < 1e-12);
        CHECK(r.sin_residual < 1e-12);
      }
    }
  }

  TEST_CASE("analytic jets agree with finite differences") {
    std::mt19937_64 rng(32);
    auto g = random_gauss_poly(5, 4);
    Vec x = random_vec(5, rng);
    CHECK(jet_self_check(g.field(), x) < 1e-7);
    FieldJet a = g.jet(x), b = fd_jet([&](const Vec& v) { return g(v); }, x);
    CHECK(a.value == doctest::Approx(b.value));
    CHECK((a.hess - b.hess).norm() < 1e-5 * (1 + a.hess.norm()));
  }

  TEST_CASE("result does not depend on the basis") {
    std::mt19937_64 rng(33);
    auto jp = pair("herm_c:2");
    auto g = random_gauss_poly(jp->dim(), 5);
    Vec x = random_vec(jp->dim(), rng);
    Mat basis = Mat::Random(jp->dim(), jp->dim()) + 3 * Mat::Identity(jp->dim(), jp->dim());
    Vec a = apply_bessel(*jp, 1.5, g.field(), x).value;
    Vec b = apply_bessel(*jp, 1.5, g.field(), x, &basis).value;
    CHECK((a - b).norm() < 1e-10 * (1 + a.norm()));
  }

  TEST_CASE("equivariance under the compact group") {
    std::mt19937_64 rng(34);
    auto jp = pair("sym:3");
    GroupRule rule = compact_group_rule(*jp);
    auto g = random_gauss_poly(jp->dim(), 6);
    for (size_t a = 0; a < rule.act.size(); a += 97)
      CHECK(equivariance_residual(*jp, 0.8, g.field(), rule.act[a], random_vec(jp->dim(), rng)) < 1e-8);
  }

  TEST_CASE("tangency to the orbit only at lambda = kd") {
    OrbitContext c = make_orbit(pair("sym:3"), 1);
    CHECK(tangency_residual(c, 0.5) < 1e-8);
    CHECK(tangency_residual(c, 1.0) > 1e-2);
    CHECK(tangency_residual(c, 0.0) > 1e-2);
  }

  TEST_CASE("pullback formula against the chain rule") {
    std::mt19937_64 rng(35);
    OrbitContext c = make_orbit(pair("sym:2"), 1);
    auto g = random_gauss_poly(c.jp->dim(), 7);
    Vec y = 1.2 * c.e;
    for (int i = 0; i < c.B1.cols(); ++i) y += 0.2 * c.B1.col(i);
    FieldJet F = g.jet(y);
    FieldJet pushed = pushforward_jet(c, F, y);
    Vec x = chart_forward(c, y);
    Vec direct = apply_bessel(*c.jp, 0.5, pushed, x).value;
    Vec pulled = pullback_bessel(c, 0.5, F, y).value;
    CHECK((direct - pulled).norm() < 1e-9 * (1 + direct.norm()));
  }

  TEST_CASE("adjoint identity for Lebesgue measure") {
    auto jp = pair("sym:2");
    auto f = random_gauss_poly(jp->dim(), 8), g = random_gauss_poly(jp->dim(), 9);
    for (double lambda : {0.0, 1.0, 1.5}) CHECK(adjoint_residual_lebesgue(*jp, lambda, f, g).residual < 1e-10);
  }

  TEST_CASE("radial components reproduce the operator on invariant functions") {
    auto jp = pair("sym:2");
    auto F = [](const std::vector<double>& t) { return std::exp(-t[0] - 0.5 * t[1]) * (1 + t[0] * t[1]); };
    auto r = apply_bessel_radial(*jp, 0.9, F, {1.4, 0.6});
    CHECK(r.rel_error < 1e-5);
  }
}
