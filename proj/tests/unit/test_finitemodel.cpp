#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <random>

#include "sedge/finitemodel.hpp"
#include "sedge/limitlaws.hpp"
#include "sedge/sampler.hpp"
#include "sedge/transition.hpp"

using namespace sedge;

namespace {

double inner(const OrthoSystem& o, const std::vector<double>& f, int k) {
  const auto& g = o.grid();
  double s = 0;
  for (std::size_t q = 0; q < g.size(); ++q) s += g.weights[q] * f[q] * o.psi()(k, q);
  return s;
}

std::vector<double> row(const OrthoSystem& o, int k) {
  std::vector<double> r(o.grid().size());
  for (std::size_t q = 0; q < r.size(); ++q) r[q] = o.psi()(k, q);
  return r;
}

const SpikedKernel& gue16(double a, int j = 1) {
  static std::map<std::pair<double, int>, SpikedKernel> cache;
  auto key = std::make_pair(a, j);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, SpikedKernel::make(gue_potential(), 16, a, j)).first;
  return it->second;
}

double right_tail(const SpikedKernel& sk, double t) { return sk.gap_probability({{t, sk.ortho().L()}}).probability; }

}  // namespace

TEST_CASE("scaled hermite recurrence") {
  const int n = 10;
  auto o = OrthoSystem::build(gue_potential(), n, 30);
  CHECK(o.orthonormality_error() < 1e-9);
  for (int i = 1; i < 30; ++i) {
    CAPTURE(i);
    CHECK(std::fabs(o.offdiag()[i] - std::sqrt(static_cast<double>(i) / n)) < 1e-10);
    CHECK(std::fabs(o.diag()[i]) < 1e-10);
  }
  CHECK(std::fabs(inner(o, row(o, 3), 5)) < 1e-10);
  CHECK(std::fabs(inner(o, row(o, 7), 7) - 1) < 1e-10);
}

TEST_CASE("orthonormality for other potentials") {
  for (auto V : {quartic_potential(), eynard_potential(3, 0.02), builtin_potential("twowell")}) {
    auto o = OrthoSystem::build(V, 24, 40);
    CAPTURE(V.label());
    CHECK(o.orthonormality_error() < 1e-9);
    for (int i = 1; i < 40; ++i) CHECK(o.offdiag()[i] > 0);
  }
  CHECK_THROWS_AS(OrthoSystem::build(gue_potential(), 20, 30, 3.0), GridError);
}

TEST_CASE("christoffel-darboux kernel") {
  const int n = 20, N = 19;
  auto o = OrthoSystem::build(gue_potential(), n, 40);
  for (double x : {-1.0, 0.3, 1.9}) {
    double y = x + 1e-3;
    CHECK(std::fabs(cd_kernel(o, N, x, y) - cd_kernel_sum(o, N, x, y)) < 1e-8);
  }
  const auto& g = o.grid();
  double trace = 0;
  for (std::size_t q = 0; q < g.size(); ++q) trace += g.weights[q] * cd_kernel_sum(o, N, g.nodes[q], g.nodes[q]);
  CHECK(std::fabs(trace - N) < 1e-8);
  for (auto [x, y] : {std::pair{0.2, -0.4}, std::pair{1.5, 1.7}}) {
    double s = 0;
    for (std::size_t q = 0; q < g.size(); ++q)
      s += g.weights[q] * cd_kernel_sum(o, N, x, g.nodes[q]) * cd_kernel_sum(o, N, g.nodes[q], y);
    CHECK(std::fabs(s - cd_kernel(o, N, x, y)) < 1e-8);
  }
  const double sc = std::pow(n, 2.0 / 3.0);
  double scaled = cd_kernel(o, N, 2 + 1 / sc, 2 + 1 / sc) / sc;
  CHECK(std::fabs(scaled - airy_kernel(1, 1)) < 0.05);
}

TEST_CASE("gamma against the Laplace approximation") {
  Transition tr(Equilibrium::solve(gue_potential()));
  const auto& eq = tr.equilibrium();
  for (int n : {20, 80}) {
    const double a = 2.0;
    auto sk = SpikedKernel::make(gue_potential(), n, a, 1);
    double x0 = tr.x0(a);
    double lead = n * (tr.G(x0, a) - eq.ell() / 2);
    double g2 = tr.G_derivatives(x0, a, 2)[2];
    double full = lead + 0.5 * std::log(2 * M_PI / (-n * g2)) + std::log(outer_M(eq.b0(), eq.a1(), x0, 1));
    CAPTURE(n);
    CHECK(std::fabs(sk.log_abs_gamma() - full) < 0.01);
    CHECK(sk.gamma_sign() > 0);
  }
}

TEST_CASE("gamma by direct summation") {
  for (double a : {0.0, 0.5, 2.0}) {
    const auto& sk = gue16(a);
    const auto& o = sk.ortho();
    const auto& g = o.grid();
    const int N = sk.N();
    const double n = o.n();
    std::vector<double> f(g.size());
    for (std::size_t q = 0; q < g.size(); ++q) f[q] = std::exp(n * (a * g.nodes[q] - g.nodes[q] * g.nodes[q] / 4) - sk.shift());
    // Same projections, summed in the opposite loop order.
    double worst = 0, scale = 0;
    for (int i = 0; i <= N; ++i) {
      double s = 0;
      for (std::size_t q = g.size(); q-- > 0;) s += o.psi()(i, q) * (g.weights[q] * f[q]);
      worst = std::max(worst, std::fabs(s - sk.scaled_projections()[i]));
      scale = std::max(scale, std::fabs(s));
    }
    CAPTURE(a);
    CHECK(worst < 1e-12 * scale);
    if (a > 0) {
      double flipped = -inner(o, f, N);
      CHECK(flipped * std::exp(sk.shift()) == doctest::Approx(-sk.gamma()).epsilon(1e-10));
    }
  }
}

TEST_CASE("tilde psi biorthogonality") {
  for (double a : {0.0, 0.1, 0.5, 2.0})
    for (int j : {1, 2}) {
      const auto& sk = gue16(a, j);
      const int N = sk.N();
      const auto& t = sk.tilde_psi_grid();
      CAPTURE(a);
      CAPTURE(j);
      CHECK(std::fabs(inner(sk.ortho(), t, N) - 1) < 1e-7);
      for (int k : {0, 1, N / 2, N - 3, N - 2, N - 1}) CHECK(std::fabs(inner(sk.ortho(), t, k)) < 1e-7);
    }
  CHECK(gue16(0.0).route() == SpikedKernel::Route::Limit);
  CHECK(gue16(2.0).route() == SpikedKernel::Route::KernelForm);
}

TEST_CASE("kernel and tail routes agree") {
  const double a = 0.4;
  auto sk = SpikedKernel::make(gue_potential(), 16, a, 1);
  SpikedKernel plain(sk.ortho(), a, 1);
  CHECK(std::fabs(right_tail(sk, 2.0) - right_tail(plain, 2.0)) < 1e-8);
  for (double x : {-1.0, 0.5, 2.2}) CHECK(std::fabs(sk.tilde_psi(x) - plain.tilde_psi(x)) < 1e-6 * (1 + std::fabs(plain.tilde_psi(x))));
}

TEST_CASE("perturbed kernel is a projection") {
  for (int j : {1, 2}) {
    const auto& sk = gue16(0.5, j);
    Eigen::MatrixXd K = sk.grid_matrix();
    double err = (K * K - K).cwiseAbs().maxCoeff();
    CAPTURE(j);
    CHECK(err < 1e-6);
    CHECK(std::fabs(K.trace() - (16 - j + 1)) < 1e-6);
  }
  Eigen::MatrixXd K2 = gue16(2.0).grid_matrix();
  CHECK((K2 * K2 - K2).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("gap probability edge cases") {
  const auto& sk = gue16(0.5);
  CHECK(sk.gap_probability({}).probability == 1.0);
  double L = sk.ortho().L();
  CHECK(std::fabs(sk.gap_probability({{-L, L}}).probability) < 1e-8);
}

TEST_CASE("gap probability is monotone in the set") {
  const auto& sk = gue16(0.5);
  double prev = 0;
  for (double t = 1.0; t <= 3.0; t += 0.1) {
    double p = right_tail(sk, t);
    CHECK(p >= prev - 1e-12);
    prev = p;
  }
  CHECK(sk.gap_probability({{1.5, 2.0}}).probability >= sk.gap_probability({{1.5, 2.0}, {2.2, 2.6}}).probability);
}

TEST_CASE("gap probability is continuous in a") {
  for (double a : {0.0, 0.5, 1.0, 2.0}) {
    auto s1 = SpikedKernel::make(gue_potential(), 16, a, 1);
    auto s2 = SpikedKernel::make(gue_potential(), 16, a + 1e-6, 1);
    for (double t : {1.8, 2.2}) CHECK(std::fabs(right_tail(s1, t) - right_tail(s2, t)) < 1e-4);
  }
}

TEST_CASE("factored and direct determinants agree") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-2.5, 3.0);
  for (double a : {0.5, 2.0}) {
    const auto& sk = gue16(a);
    for (int r = 0; r < 6; ++r) {
      double p = u(gen), q = u(gen);
      std::vector<Interval> E = {{std::min(p, q), std::max(p, q)}};
      if (r % 2) E.push_back({3.1, sk.ortho().L()});
      double f = sk.gap_probability(E).raw;
      double d = sk.gap_direct(E);
      CHECK(std::fabs(f - d) < 1e-8);
    }
  }
}

TEST_CASE("gap probability against direct sampling") {
  const int reps = 20000;
  for (double a : {0.0, 0.5}) {
    auto sk = SpikedKernel::make(gue_potential(), 20, a, 1);
    auto s = sample_gaussian_spiked(20, a, reps, 5, 1, GaussianMethod::Dense);
    for (double t : {2.2, 2.5}) {
      double hits = 0;
      for (double x : s.lambda_max) hits += x < t;
      double p_mc = hits / reps;
      double p = right_tail(sk, t);
      double se = std::sqrt(std::max(p * (1 - p), 1.0 / reps) / reps);
      CAPTURE(a);
      CAPTURE(t);
      CHECK(std::fabs(p - p_mc) < 3 * se + 1e-12);
    }
  }
}

TEST_CASE("two-point gap pins the gaussian convention") {
  // n = 2, j = 1: two eigenvalues of a 2x2 matrix.
  const int reps = 40000;
  auto sk = SpikedKernel::make(gue_potential(), 2, 0.7, 1);
  auto s = sample_gaussian_spiked(2, 0.7, reps, 9, 1, GaussianMethod::Dense);
  for (double t : {0.5, 1.0, 1.5}) {
    double hits = 0;
    for (double x : s.lambda_max) hits += x < t;
    double p = right_tail(sk, t);
    CHECK(std::fabs(p - hits / reps) < 3 * std::sqrt(p * (1 - p) / reps) + 1e-3);
  }
}

namespace {

double edge_error(int n, double a) {
  auto sk = SpikedKernel::make(gue_potential(), n, a, 1);
  return right_tail(sk, 2.0) - f0(0.0);
}

}  // namespace

// Below a_c the edge law is F1(T; (a_c - a) n^{1/3}/beta), which approaches F0 only like n^{-1/3};
// the per-doubling ratio is about 1.23.
TEST_CASE("edge gap approaches F0 by 1.5x per doubling" * doctest::may_fail()) {
  double e20 = edge_error(20, 0.5), e40 = edge_error(40, 0.5), e80 = edge_error(80, 0.5);
  CHECK(std::fabs(e20) / std::fabs(e40) >= 1.5);
  CHECK(std::fabs(e40) / std::fabs(e80) >= 1.5);
}

TEST_CASE("edge gap approaches F0 monotonically") {
  double e20 = edge_error(20, 0.5), e40 = edge_error(40, 0.5), e80 = edge_error(80, 0.5);
  CHECK(std::fabs(e40) < std::fabs(e20));
  CHECK(std::fabs(e80) < std::fabs(e40));
  // Rate n^{-1/3} matches the F1 crossover.
  CHECK(std::fabs(e80) * std::cbrt(80.0) == doctest::Approx(std::fabs(e20) * std::cbrt(20.0)).epsilon(0.15));
  double z20 = edge_error(20, 0.0), z40 = edge_error(40, 0.0);
  CHECK(std::fabs(z20) / std::fabs(z40) >= 1.5);
}
