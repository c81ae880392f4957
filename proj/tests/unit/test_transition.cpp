#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "sedge/transition.hpp"

using namespace sedge;

namespace {

const Transition& gue() {
  static const Transition t(Equilibrium::solve(gue_potential()));
  return t;
}

const Transition& eynard() {
  static const Transition t(Equilibrium::solve(eynard_potential(3, 0.02)));
  return t;
}

const Transition& twowell() {
  static const Transition t(Equilibrium::solve(builtin_potential("twowell")));
  return t;
}

}  // namespace

TEST_CASE("c(a) for the semicircle") {
  CHECK(std::fabs(gue().c_of_a(0.5) - 2.5) < 1e-9);
  CHECK(gue().c_of_a(1.2) == gue().edge());
  CHECK(gue().c_of_a(0.3) > gue().c_of_a(0.5));
  CHECK(gue().c_of_a(0.5) > gue().c_of_a(0.9));
  for (double a : {0.2, 0.5, 0.8}) CHECK(std::fabs(oracle::semicircle_g_prime(gue().c_of_a(a)) - a) < 1e-10);
}

TEST_CASE("G and H at the edge") {
  for (const Transition* t : {&gue(), &eynard()}) {
    double e = t->edge();
    double vp = t->equilibrium().potential().eval(e, 1);
    for (double a : {0.3, 0.7, 1.5}) {
      CHECK(std::fabs(t->G(e, a) - t->H(e, a)) < 1e-10);
      double expect = -0.5 * t->equilibrium().potential().eval(e) + a * e + 0.5 * t->equilibrium().ell();
      CHECK(std::fabs(t->G(e, a) - expect) < 1e-10);
      // G(e + h) - G(e) = (a - V'(e)/2) h + O(h^{3/2}); the GUE remainder is exactly (2/3) sqrt(h) at h = 1e-4.
      const double h = 1e-5;
      CHECK(std::fabs((t->G(e + h, a) - t->G(e, a)) / h - (a - vp / 2)) < 5e-3);
    }
  }
  CHECK_THROWS(gue().G(1.0, 0.5));
}

TEST_CASE("G stationary point for the semicircle") {
  auto d = gue().G_derivatives(2.5, 2.0, 2);
  CHECK(std::fabs(d[1]) < 1e-12);
  CHECK(std::fabs(-d[2] - 4.0 / 3.0) < 1e-10);
  CHECK(std::fabs(1 - oracle::semicircle_g_second(2.5) - 4.0 / 3.0) < 1e-12);
}

TEST_CASE("H above G and H convex") {
  for (const Transition* t : {&gue(), &eynard(), &twowell()}) {
    double e = t->edge();
    for (double f : {0.3, 1.0, 2.0}) {
      double a = f * t->half_vprime_e();
      bool above = true, convex = true;
      for (int i = 1; i <= 200; ++i) {
        double x = e + 10.0 * i / 200;
        above = above && t->H(x, a) - t->G(x, a) > 0;
        if (i > 1 && i < 200) {
          double h = 10.0 / 200;
          convex = convex && t->H(x + h, a) - 2 * t->H(x, a) + t->H(x - h, a) > 0;
        }
      }
      CHECK(above);
      CHECK(convex);
    }
  }
}

TEST_CASE("H minimum sits at c(a)") {
  for (double a : {0.3, 0.6, 0.9}) {
    double c = gue().c_of_a(a);
    CHECK(gue().H(c, a) < gue().H(c + 1e-3, a));
    CHECK(gue().H(c, a) < gue().H(c - 1e-3, a));
  }
}

TEST_CASE("membership in A_V") {
  CHECK(gue().in_A_V(1.5).in);
  CHECK_FALSE(gue().in_A_V(0.5).in);
  for (const Transition* t : {&gue(), &eynard(), &twowell()}) {
    double vp = t->equilibrium().potential().eval(t->edge(), 1);
    CHECK(t->in_A_V(vp).in);
  }
}

TEST_CASE("below the critical value G stays under min H") {
  for (const Transition* t : {&gue(), &eynard(), &twowell()}) {
    double ac = t->critical_a();
    for (double f : {0.3, 0.6, 0.95}) {
      double a = f * ac;
      double c = t->c_of_a(a);
      double hc = t->H(c, a);
      double best = -1e300;
      double top = t->scan_horizon(a);
      for (int i = 0; i <= 2000; ++i) best = std::max(best, t->G(c + (top - c) * i / 2000.0, a));
      CHECK(best - hc < 0);
    }
  }
}

TEST_CASE("critical values") {
  CHECK(std::fabs(gue().critical_a() - 1) < 1e-6);
  auto q = Transition(Equilibrium::solve(quartic_potential()));
  double a1 = q.edge();
  CHECK(std::fabs(q.critical_a() - 0.5 * a1 * a1 * a1) < 1e-6);
  double ac = eynard().critical_a();
  CHECK(ac < eynard().half_vprime_e());
  CHECK(eynard().half_vprime_e() - ac > 0.1);
  CHECK(ac > 0);
  auto w = eynard().in_A_V(0.5 * (ac + eynard().half_vprime_e()));
  CHECK(w.in);
  CHECK(w.G_bar > w.H_c);
}

TEST_CASE("maximizers for the semicircle") {
  auto m = gue().maximizer_set(2.0);
  REQUIRE(m.size() == 1);
  CHECK(std::fabs(m[0].x - 2.5) < 1e-8);
  CHECK(m[0].k == 1);
  CHECK(std::fabs(gue().x0(2.0) - 2.5) < 1e-8);
  CHECK(std::fabs(gue().x0(0.5 + 1.0) - (1.5 + 1 / 1.5)) < 1e-8);
}

TEST_CASE("argmax is increasing for convex potentials") {
  double prev = 0;
  for (double a = 1.05; a < 5; a += 0.25) {
    double x = gue().x0(a);
    CHECK(x > prev);
    prev = x;
  }
  CHECK(gue().secondary_criticals(1.0001, 5.0).empty());
}

TEST_CASE("tie between two maxima") {
  auto sc = twowell().secondary_criticals(twowell().critical_a() + 1e-3, 8.0);
  REQUIRE(sc.size() == 1);
  double a_star = sc[0];
  // Locate the two competing maxima on either side and tune a until their values tie.
  double xl = twowell().x0(a_star - 1e-3), xr = twowell().x0(a_star + 1e-3);
  REQUIRE(xr - xl > 0.5);
  auto diff = [&](double a) {
    double l = *twowell().local_max_near(a, xl), r = *twowell().local_max_near(a, xr);
    return twowell().G(r, a) - twowell().G(l, a);
  };
  double a_tie = oracle::bisect(diff, a_star - 1e-3, a_star + 1e-3, 1e-14);
  CHECK(std::fabs(a_tie - a_star) < 1e-7);
  auto m = twowell().maximizer_set(a_tie);
  REQUIRE(m.size() == 2);
  CHECK(std::fabs(m[0].x - xl) < 1e-3);
  CHECK(std::fabs(m[1].x - xr) < 1e-3);
  CHECK(twowell().profile(a_tie).regime == Regime::SecondaryCritical);
  CHECK(twowell().profile(a_star + 0.05).regime == Regime::SupercriticalGeneric);
}

TEST_CASE("fluctuation scale") {
  CHECK(std::fabs(gue().fluct_scale(2.5, 2.0, 1) - std::sqrt(4.0 / 3.0)) < 1e-10);
  const double h = 1e-4;
  double fd = (gue().G(2.5 + h, 2.0) - 2 * gue().G(2.5, 2.0) + gue().G(2.5 - h, 2.0)) / (h * h);
  CHECK(std::fabs(std::sqrt(-fd) - gue().fluct_scale(2.5, 2.0, 1)) < 1e-5);
  // Approaching a_c the maximizer runs into the edge, where -G'' = a^2/(a^2 - 1) blows up and
  // the fluctuation width 1/scale shrinks to zero.
  double prev = 1e300;
  for (int m = 1; m <= 5; ++m) {
    double a = 1 + std::pow(10.0, -m);
    double width = 1 / gue().fluct_scale(gue().x0(a), a, 1);
    CHECK(std::fabs(width - std::sqrt((a * a - 1) / (a * a))) < 1e-6);
    CHECK(width < prev);
    prev = width;
  }
  CHECK(prev < 0.01);
  CHECK_THROWS(twowell().fluct_scale(4.5, 2.0, 1));
  CHECK_THROWS(gue().fluct_scale(2.5, 2.0, 4));
}

TEST_CASE("profiles") {
  CHECK(gue().profile(0.5).regime == Regime::Subcritical);
  CHECK(gue().profile(1.0).regime == Regime::Critical);
  auto p = gue().profile(2.0);
  CHECK(p.regime == Regime::SupercriticalGeneric);
  CHECK(std::fabs(p.c_a - 2.0) < 1e-12);
  auto j = p.to_json();
  CHECK(j["maximizers"].size() == 1);
}
