#include "doctest.h"
#include "jbessel/orbits.hpp"
#include "oracles.hpp"

#include <memory>
#include <random>

using namespace jb;

namespace {

PairPtr pair(const char* fam) { return std::make_shared<const Pair>(AlgebraSpec::parse(fam)); }

Vec chart_point(const OrbitContext& c, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0, 0.3);
  Vec y = Vec::Zero(c.jp->dim());
  y += 1.5 * c.e;
  for (int i = 0; i < c.B2.cols(); ++i) y += g(rng) * c.B2.col(i);
  for (int i = 0; i < c.B1.cols(); ++i) y += g(rng) * c.B1.col(i);
  return y;
}

}  // namespace

TEST_SUITE("orbits") {
  TEST_CASE("chart maps into the rank k orbit and back") {
    std::mt19937_64 rng(21);
    for (auto [fam, k] : {std::pair{"sym:3", 1}, std::pair{"sym:3", 2}, std::pair{"herm_c:3", 1}, std::pair{"rect:2x3", 1}}) {
      CAPTURE(fam);
      CAPTURE(k);
      OrbitContext c = make_orbit(pair(fam), k);
      for (int trial = 0; trial < 4; ++trial) {
        Vec y = chart_point(c, rng);
        Vec x = chart_forward(c, y);
        CHECK(c.jp->rank_of(x) == k);
        CHECK((chart_inverse(c, x) - y).norm() < 1e-10 * (1 + y.norm()));
      }
    }
  }

  TEST_CASE("chart offset Jacobian against central differences") {
    std::mt19937_64 rng(22);
    OrbitContext c = make_orbit(pair("sym:3"), 1);
    Vec y = chart_point(c, rng);
    Mat J = chart_offset_jacobian(c, y);
    const double h = 1e-6;
    for (int i = 0; i < y.size(); ++i) {
      Vec yp = y, ym = y;
      yp(i) += h;
      ym(i) -= h;
      Vec col = (chart_offset(c, yp) - chart_offset(c, ym)) / (2 * h);
      CHECK((J.col(i) - col).norm() < 1e-7 * (1 + col.norm()));
    }
  }

  TEST_CASE("measure verdicts") {
    auto sym3 = pair("sym:3");
    for (int k = 0; k <= 3; ++k) {
      OrbitContext c = make_orbit(sym3, k);
      CHECK(c.verdict.exists);
      CHECK(c.verdict.lambda_char == doctest::Approx(k < 3 ? 0.5 * k : 2.0));
    }
    CHECK(make_orbit(sym3, 1).verdict.case_id == "interior-k");
    CHECK(make_orbit(sym3, 3).verdict.case_id == "open-unital");

    auto rect = pair("rect:2x3");
    CHECK_FALSE(make_orbit(rect, 1).verdict.exists);
    CHECK(make_orbit(rect, 1).verdict.case_id == "rect-exception");
    CHECK(make_orbit(rect, 2).verdict.exists);
    CHECK(make_orbit(rect, 2).verdict.case_id == "open-nonunital");
    CHECK(make_orbit(pair("rect:2x2"), 1).verdict.exists);
  }

  TEST_CASE("compact group rule acts by automorphisms") {
    auto jp = pair("sym:2");
    GroupRule g = compact_group_rule(*jp);
    double total = 0;
    for (double w : g.w) total += w;
    CHECK(total == doctest::Approx(1).epsilon(1e-12));
    std::mt19937_64 rng(23);
    std::normal_distribution<double> n01;
    Vec x(jp->dim()), y(jp->dim()), z(jp->dim());
    for (int i = 0; i < jp->dim(); ++i) {
      x(i) = n01(rng);
      y(i) = n01(rng);
      z(i) = n01(rng);
    }
    for (size_t a = 0; a < g.act.size(); a += 7) {
      const Mat& h = g.act[a];
      Mat hm = minus_action(*jp, h);
      Vec lhs = h * jp->triple(Side::plus, x, y, z);
      Vec rhs = jp->triple(Side::plus, h * x, hm * y, h * z);
      CHECK((lhs - rhs).norm() < 1e-11 * (1 + lhs.norm()));
    }
  }

  TEST_CASE("orbit measure scales with the character exponent") {
    for (auto [fam, k] : {std::pair{"sym:2", 1}, std::pair{"sym:3", 2}}) {
      CAPTURE(fam);
      OrbitContext c = make_orbit(pair(fam), k);
      auto f = [](const Vec& x) { return std::exp(-x.squaredNorm()) * (1 + 0.3 * x(0)); };
      auto s = orbit_scaling_check(c, f, 1.7);
      CHECK(s.rel_error < 1e-8);
    }
  }

  TEST_CASE("polar and chart integrals of the rank one measure agree up to a constant") {
    OrbitContext c = make_orbit(pair("sym:2"), 1);
    auto bumps = make_bumps(c, 3);
    auto m = measure_consistency(c, bumps);
    CHECK(m.dispersion < 1e-2);
  }
}
