#include "doctest.h"
#include "jbessel/kbessel.hpp"
#include "oracles.hpp"

using namespace jb;

TEST_SUITE("kbessel") {
  TEST_CASE("rank one reduces to the Macdonald function") {
    for (double lambda : {-0.5, 0.0, 0.5, 1.0, 2.5})
      for (double x : {0.05, 1.0, 7.0}) {
        CAPTURE(lambda);
        CAPTURE(x);
        KBesselParams p;
        p.k = 1;
        p.lambda = lambda;
        for (KForm form : {KForm::integral1, KForm::integral2}) {
          auto v = kbessel_radial(p, {x}, form);
          CHECK(v.value == doctest::Approx(oracle::macdonald(lambda, x)).epsilon(1e-9));
        }
      }
  }

  TEST_CASE("both integral forms agree in rank two") {
    KBesselParams p;
    p.k = 2;
    p.d = 1;
    p.lambda = 0.5;
    auto a = kbessel_radial(p, {2.0, 0.7}, KForm::integral1);
    auto b = kbessel_radial(p, {2.0, 0.7}, KForm::integral2);
    CHECK(a.value == doctest::Approx(b.value).epsilon(1e-7));
  }

  TEST_CASE("radial quadrature agrees with Monte Carlo on matrices") {
    KBesselParams p;
    p.k = 2;
    p.d = 2;
    p.lambda = 0.25;
    p.quad.samples = 60000;
    auto r = kbessel_radial(p, {1.5, 0.4});
    auto m = kbessel_mc(p, {1.5, 0.4});
    CHECK(std::abs(r.value - m.value) < 5 * m.error);
    CHECK(m.error < 0.05 * r.value);
  }

  TEST_CASE("the Bessel system holds and fails for the wrong parameter") {
    for (auto [k, d] : {std::pair{1, 1.0}, std::pair{2, 1.0}, std::pair{2, 2.0}}) {
      KBesselParams p;
      p.k = k;
      p.d = d;
      p.lambda = 0.5;
      std::vector<double> t = k == 1 ? std::vector<double>{1.3} : std::vector<double>{1.3, 0.6};
      auto ok = ode_residual(p, t);
      for (double r : ok.residual) CHECK(r < 1e-5);
      auto bad = ode_residual(p, t, 1.5);
      double worst = 0;
      for (double r : bad.residual) worst = std::max(worst, r);
      CHECK(worst > 1e-2);
    }
  }

  TEST_CASE("integrability region matches the cone Gamma convergence conditions") {
    for (auto [k, d] : {std::pair{1, 1.0}, std::pair{2, 0.5}, std::pair{2, 1.0}, std::pair{3, 2.0}})
      for (double lambda = -3; lambda <= 3; lambda += 0.37)
        for (double mu = -2.5; mu <= 2.5; mu += 0.41)
          for (NormMode mode : {NormMode::L1, NormMode::L2}) {
            bool l2 = mode == NormMode::L2;
            CHECK(integrable(k, d, lambda, mu, mode) == oracle::integrable(k, d, lambda, mu, l2));
          }
  }

  TEST_CASE("L1 norm closed form") {
    for (auto [lambda, mu] : {std::pair{0.5, 0.3}, std::pair{-1.0, 0.0}, std::pair{1.2, 1.5}})
      CHECK(l1_closed_form(1, 1, lambda, mu) == doctest::Approx(oracle::rank1_l1(lambda, mu)).epsilon(1e-8));
    const double lambda = 0.5, mu = 0.5, n_over_r = 1.5;
    CHECK(l1_closed_form(2, 1, lambda, mu) ==
          doctest::Approx(oracle::gindikin_gamma(2, 1, mu + n_over_r) *
                          oracle::gindikin_gamma(2, 1, mu - lambda + 2 * n_over_r))
              .epsilon(1e-12));
  }

  TEST_CASE("rank one divergence probe grows on the divergent side") {
    auto inside = divergence_probe_rank1(0.5, 0.5, NormMode::L1);
    auto outside = divergence_probe_rank1(0.5, -1.5, NormMode::L1);
    CHECK_FALSE(inside.diverges);
    CHECK(outside.diverges);
  }
}
