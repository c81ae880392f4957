#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sedge/specialfn.hpp"

using namespace sedge;

namespace {

// Maclaurin series of Ai and Ai', summed term by term.
void airy_series(double x, double& ai, double& aip) {
  const double c1 = 1.0 / (std::pow(3.0, 2.0 / 3.0) * std::tgamma(2.0 / 3.0));
  const double c2 = 1.0 / (std::pow(3.0, 1.0 / 3.0) * std::tgamma(1.0 / 3.0));
  const double x3 = x * x * x;
  double f = 1, g = x, df = x * x / 2, dg = 1;
  double sf = f, sg = g, sdf = df, sdg = dg;
  for (int k = 1; k < 120; ++k) {
    f *= x3 / ((3.0 * k - 1) * 3.0 * k);
    g *= x3 / (3.0 * k * (3.0 * k + 1));
    dg *= x3 / ((3.0 * k - 2) * 3.0 * k);
    if (k > 1) df *= x3 / ((3.0 * k - 3) * (3.0 * k - 1));
    sf += f;
    sg += g;
    sdg += dg;
    if (k > 1) sdf += df;
  }
  ai = c1 * sf - c2 * sg;
  aip = c1 * sdf - c2 * sdg;
}

}  // namespace

TEST_CASE("airy values at the origin") {
  double ai, aip;
  airy_series(0.0, ai, aip);
  CHECK(ai == doctest::Approx(0.3550280538878172).epsilon(1e-15));
  CHECK(aip == doctest::Approx(-0.2588194037928068).epsilon(1e-15));
  CHECK(std::fabs(airy_ai(0.0) - ai) < 1e-14);
  CHECK(std::fabs(airy_ai_prime(0.0) - aip) < 1e-14);
}

TEST_CASE("airy agrees with the series on moderate arguments") {
  for (double x : {-5.0, -2.5, -0.7, 0.3, 1.0, 2.2, 4.0}) {
    double ai, aip;
    airy_series(x, ai, aip);
    CAPTURE(x);
    CHECK(std::fabs(airy_ai(x) - ai) < 1e-11);
    CHECK(std::fabs(airy_ai_prime(x) - aip) < 1e-11);
  }
}

TEST_CASE("airy derivative matches finite differences") {
  const double h = 1e-5;
  CHECK(std::fabs((airy_ai(h) - airy_ai(-h)) / (2 * h) - airy_ai_prime(0.0)) < 1e-6);
  for (double x : {-7.0, -3.0, 1.5, 6.5, 9.0}) {
    double fd = (airy_ai(x + h) - airy_ai(x - h)) / (2 * h);
    CHECK(std::fabs(fd - airy_ai_prime(x)) < 1e-6);
  }
}

TEST_CASE("airy ode residual") {
  const double h = 1e-4;
  double second = (airy_ai(1 + h) - 2 * airy_ai(1.0) + airy_ai(1 - h)) / (h * h);
  CHECK(std::fabs(second - airy_ai(1.0)) < 1e-5);
  auto aip = [](double x) {
    double ai, d;
    airy_pair(x, ai, d);
    return d;
  };
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    double x = -8.0 + 16.0 * i / 99.0;
    // Ai'' by differencing Ai', Richardson-extrapolated in h.
    double d1 = (aip(x + h) - aip(x - h)) / (2 * h);
    double d2 = (aip(x + h / 2) - aip(x - h / 2)) / h;
    worst = std::max(worst, std::fabs((4 * d2 - d1) / 3 - x * airy_ai(x)));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("airy connection identity") {
  const cplx w = std::polar(1.0, 2 * M_PI / 3);
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> r(0, 5), th(0, 2 * M_PI);
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    cplx z = std::polar(r(gen), th(gen));
    worst = std::max(worst, std::abs(airy_ai(z) + w * airy_ai(w * z) + w * w * airy_ai(w * w * z)));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("airy pair matches single evaluations") {
  for (cplx z : {cplx(0.5, 0.5), cplx(-8, 3), cplx(12, -1), cplx(-20, 0.1)}) {
    cplx ai, aip;
    airy_pair(z, ai, aip);
    CHECK(std::abs(ai - airy_ai(z)) < 1e-14 * (1 + std::abs(ai)));
    CHECK(std::abs(aip - airy_ai_prime(z)) < 1e-14 * (1 + std::abs(aip)));
  }
}

TEST_CASE("airy integral over the half line") {
  auto rule = gauss_legendre_panels(30, 40, 0.0, 20.0);
  double s = 0;
  for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * airy_ai(rule.nodes[i]);
  CHECK(std::fabs(s - 1.0 / 3.0) < 1e-8);
}

TEST_CASE("airy outside the envelope") {
  CHECK_THROWS_AS(airy_ai(cplx(60, 0)), DomainError);
  CHECK_THROWS_AS(airy_ai_prime(cplx(0, -51)), DomainError);
}

TEST_CASE("normal cdf") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(std::fabs(normal_cdf(40.0) - 1.0) < 1e-15);
  double q = 0.5 + oracle::integrate([](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * M_PI); }, 0, 1);
  CHECK(std::fabs(q - 0.8413447460685429) < 1e-13);
  CHECK(std::fabs(normal_cdf(1.0) - q) < 1e-14);
  for (double t : {0.1, 0.9, 2.7, 6.0}) CHECK(std::fabs(normal_cdf(-t) + normal_cdf(t) - 1) < 1e-15);
  double prev = 0;
  for (int i = 0; i <= 200; ++i) {
    double v = normal_cdf(-10 + 0.1 * i);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("generalized gaussian cdf") {
  for (int k = 1; k <= 4; ++k) CHECK(std::fabs(gen_gauss_cdf(0.0, k) - 0.5) < 1e-15);
  CHECK(std::fabs(gen_gauss_cdf(1 / std::sqrt(2.0), 1) - 0.8413447460685429) < 1e-13);
  auto q4 = [](double x) { return std::exp(-std::pow(x, 4)); };
  double total = 2 * oracle::integrate(q4, 0, 8);
  double upto1 = 0.5 * total + oracle::integrate(q4, 0, 1);
  CHECK(std::fabs(gen_gauss_mass(2) - total) < 1e-10);
  CHECK(std::fabs(gen_gauss_cdf(1.0, 2) - upto1 / total) < 1e-10);
  for (int k = 1; k <= 3; ++k)
    for (double t : {-2.0, -0.3, 0.8, 1.7}) CHECK(std::fabs(gen_gauss_cdf(t, k) + gen_gauss_cdf(-t, k) - 1) < 1e-14);
  CHECK_THROWS(gen_gauss_cdf(0.5, 0));
}

TEST_CASE("gauss-legendre exactness") {
  auto integ = [](const QuadratureRule& r, auto f) {
    double s = 0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * f(r.nodes[i]);
    return s;
  };
  CHECK(std::fabs(integ(gauss_legendre(2, -1, 1), [](double x) { return x * x; }) - 2.0 / 3.0) < 1e-15);
  CHECK(std::fabs(integ(gauss_legendre(5, 0, 1), [](double x) { return std::pow(x, 9); }) - 0.1) < 1e-14);
  CHECK(std::fabs(integ(gauss_legendre(40, -1, 1), [](double x) { return std::exp(x); }) - (M_E - 1 / M_E)) < 1e-14);
  CHECK_THROWS(gauss_legendre(1, 0, 1));
  CHECK_THROWS(gauss_legendre(4, 1, 0));
}

TEST_CASE("gauss-legendre nodes sorted and weights positive") {
  for (int m = 2; m <= 200; ++m) {
    auto r = gauss_legendre(m, -1, 1);
    bool ok = true;
    for (int i = 0; i < m; ++i) {
      ok = ok && r.weights[i] > 0;
      if (i > 0) ok = ok && r.nodes[i] > r.nodes[i - 1];
    }
    CAPTURE(m);
    CHECK(ok);
  }
}
