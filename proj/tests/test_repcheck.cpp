#include "doctest.h"
#include "jbessel/repcheck.hpp"
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

TEST_SUITE("repcheck") {
  TEST_CASE("polynomial algebra") {
    Poly x = Poly::variable(2, 0), y = Poly::variable(2, 1);
    Poly f = x * x * y + Poly::constant(2, 3.0);
    Vec at(2);
    at << 2, 5;
    CHECK(f(at).real() == doctest::Approx(23));
    CHECK(f.derivative(0)(at).real() == doctest::Approx(20));
    CHECK(f.derivative(1)(at).real() == doctest::Approx(4));
    CHECK((f - f).terms().empty());
  }

  TEST_CASE("spherical function in rank one") {
    RepParams rp{pair("sym:1"), 0.75};
    Vec zero = Vec::Zero(1);
    CHECK(phi_nu(rp, zero) == doctest::Approx(1));
    for (double y : {0.3, 1.0, 2.5}) {
      double q = rp.jp->gram()(0, 0) * y * y;
      CHECK(phi_nu(rp, Vec::Constant(1, y)) == doctest::Approx(std::pow(1 + q, -rp.nu - 0.5)).epsilon(1e-12));
    }
  }

  TEST_CASE("rank one Fourier transform of the spherical function") {
    for (double nu : {0.5, 1.0, 1.5})
      for (double x : {0.5, 2.0}) {
        auto e = fourier_phi_rank1(nu, x);
        CHECK(e.value == doctest::Approx(oracle::fourier_rank1(nu, x)).epsilon(1e-10));
      }
    auto r = fourier_rank1_check({0.5, 1.0, 1.5});
    for (double c : r.c_gamma) CHECK(c == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-6));
  }

  TEST_CASE("graded brackets") {
    auto jp = pair("sym:2");
    std::mt19937_64 rng(41);
    Vec a = random_vec(jp->dim(), rng), b = random_vec(jp->dim(), rng);
    CHECK_FALSE(bracket(*jp, LieGen::from_a(a), LieGen::from_a(b)).has_value());
    CHECK_FALSE(bracket(*jp, LieGen::from_b(a), LieGen::from_b(b)).has_value());
    auto ab = bracket(*jp, LieGen::from_a(a), LieGen::from_b(b));
    REQUIRE(ab.has_value());
    CHECK(ab->kind == LieGen::Kind::T);
    CHECK((ab->plus - jp->D(Side::plus, b, a)).norm() < 1e-13);
  }

  TEST_CASE("the derived representation respects brackets") {
    std::mt19937_64 rng(42);
    for (const char* fam : {"sym:2", "spin:4"}) {
      CAPTURE(fam);
      RepParams rp{pair(fam), 0.3};
      const int n = rp.jp->dim();
      std::vector<Vec> pts;
      for (int i = 0; i < 4; ++i) pts.push_back(random_vec(n, rng));
      Poly f = Poly::random(n, 3, 43);
      LieGen A = LieGen::from_a(random_vec(n, rng)), B = LieGen::from_b(random_vec(n, rng));
      LieGen T = LieGen::from_D(*rp.jp, random_vec(n, rng), random_vec(n, rng));
      for (Picture pic : {Picture::noncompact, Picture::fourier}) {
        CHECK(commutator_residual(rp, pic, A, B, f, pts) < 1e-10);
        CHECK(commutator_residual(rp, pic, T, A, f, pts) < 1e-10);
        CHECK(commutator_residual(rp, pic, T, B, f, pts) < 1e-10);
      }
    }
  }

  TEST_CASE("spherical function is fixed by the maximal compact subalgebra") {
    std::mt19937_64 rng(44);
    RepParams rp{pair("spin:4"), 0.4};
    for (int i = 0; i < 3; ++i)
      CHECK(phi_k_invariance(rp, random_vec(rp.jp->dim(), rng), random_vec(rp.jp->dim(), rng)) < 1e-6);
  }

  TEST_CASE("orbit sphericality on spin:4 and refusal outside the hypothesis") {
    std::vector<std::vector<double>> ts = {{0.8}, {1.5}, {3.0}};
    auto s = sphericality_orbit(pair("spin:4"), 1, ts);
    CHECK_FALSE(s.refused);
    CHECK(s.max_residual < 1e-6);
    auto refused = sphericality_orbit(pair("sym:2"), 1, ts);
    CHECK(refused.refused);
    CHECK_FALSE(refused.reason.empty());
  }

  TEST_CASE("norm membership reduces to the cone integrability test") {
    auto n1 = norm_membership(pair("spin:4"), 1, NormMode::L1);
    CHECK(n1.symbolic_ok == n1.finite);
    if (n1.value) CHECK(*n1.value > 0);
    auto n2 = norm_membership(pair("spin:4"), 1, NormMode::L2);
    CHECK(n2.symbolic_ok == n2.finite);
  }

  TEST_CASE("intertwiner kernel vanishes on the orbit") {
    OrbitContext c = make_orbit(pair("sym:3"), 1);
    CHECK(intertwiner_kernel_check(c, 6) < 1e-10);
  }

  TEST_CASE("restriction ratio is constant in rank one") {
    auto r = clerc_restriction_check(1.0, 0.25, {0.5, 1.0, 2.0});
    CHECK(r.dispersion < 1e-5);
  }
}
