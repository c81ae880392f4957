#include "sedge/equilibrium.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include "sedge/jet.hpp"
#include "sedge/specialfn.hpp"

namespace sedge {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kChebNodes = 64;

// Endpoint conditions in the angle variable s = m + r cos(theta):
//   int_0^pi V'(s) dtheta = 0,   int_0^pi s V'(s) dtheta = 2 pi.
// Gauss-Chebyshev with 64 nodes is exact for the polynomial integrands.
std::array<double, 2> endpoint_residual(const Potential& V, double m, double r) {
  double r1 = 0.0, r2 = 0.0;
  for (int i = 0; i < kChebNodes; ++i) {
    const double s = m + r * std::cos((i + 0.5) * kPi / kChebNodes);
    const double v1 = V.eval(s, 1);
    r1 += v1;
    r2 += s * v1;
  }
  const double w = kPi / kChebNodes;
  return {r1 * w, r2 * w - 2.0 * kPi};
}

std::array<double, 4> endpoint_jacobian(const Potential& V, double m, double r) {
  double j11 = 0.0, j12 = 0.0, j21 = 0.0, j22 = 0.0;
  for (int i = 0; i < kChebNodes; ++i) {
    const double c = std::cos((i + 0.5) * kPi / kChebNodes);
    const double s = m + r * c;
    const double v1 = V.eval(s, 1), v2 = V.eval(s, 2);
    j11 += v2;
    j12 += v2 * c;
    j21 += v1 + s * v2;
    j22 += (v1 + s * v2) * c;
  }
  const double w = kPi / kChebNodes;
  return {j11 * w, j12 * w, j21 * w, j22 * w};
}

double norm2(const std::array<double, 2>& v) { return std::hypot(v[0], v[1]); }

std::optional<std::pair<double, double>> newton_endpoints(const Potential& V, double m, double r) {
  auto res = endpoint_residual(V, m, r);
  for (int it = 0; it < 200 && norm2(res) > 1e-13; ++it) {
    const auto J = endpoint_jacobian(V, m, r);
    const double det = J[0] * J[3] - J[1] * J[2];
    if (det == 0.0 || !std::isfinite(det)) return std::nullopt;
    const double dm = -(J[3] * res[0] - J[1] * res[1]) / det;
    const double dr = -(-J[2] * res[0] + J[0] * res[1]) / det;
    double lam = 1.0;
    bool accepted = false;
    while (lam > 1e-8) {
      const double mt = m + lam * dm, rt = r + lam * dr;
      if (rt > 0.0) {
        const auto rt_res = endpoint_residual(V, mt, rt);
        if (norm2(rt_res) < norm2(res)) {
          m = mt;
          r = rt;
          res = rt_res;
          accepted = true;
          break;
        }
      }
      lam *= 0.5;
    }
    if (!accepted) break;
  }
  if (!(norm2(res) < 1e-11) || !(r > 0.0)) return std::nullopt;
  return std::make_pair(m, r);
}

}  // namespace

Equilibrium::Equilibrium(const Potential& V, double m, double r) : V_(V), m_(m), r_(r) {
  const int d = V_.degree();
  const double a = a1(), b = b0();
  // Laurent coefficients of ((1 - a w)(1 - b w))^{-1/2}.
  std::vector<double> ca(d + 1), cb(d + 1), e(d + 1, 0.0);
  double bin = 1.0;
  for (int j = 0; j <= d; ++j) {
    if (j > 0) bin *= (2.0 * j - 1.0) / (2.0 * j);
    ca[j] = bin * std::pow(a, j);
    cb[j] = bin * std::pow(b, j);
  }
  for (int j = 0; j <= d; ++j)
    for (int i = 0; i <= j; ++i) e[j] += ca[i] * cb[j - i];
  // h = polynomial part of V'(z) / sqrt((z - a)(z - b)).
  const auto v = V_.derivative_coeffs(1);
  h_.assign(d - 1, 0.0);
  for (int p = 0; p <= d - 2; ++p)
    for (int i = p + 1; i <= d - 1; ++i) h_[p] += v[i] * e[i - 1 - p];

  const int n = 4 * d + 16;
  fc_.assign(d + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    const double th = (i + 0.5) * kPi / n;
    const double st = std::sin(th);
    const double f = r_ * r_ / (2.0 * kPi) * h(m_ + r_ * std::cos(th)) * st * st;
    for (int k = 0; k <= d; ++k) fc_[k] += std::cos(k * th) * f;
  }
  for (double& c : fc_) c *= kPi / n;
  mass_ = fc_[0];

  ell_ = 2.0 * log_potential(a) - V_.eval(a);
  const double ha = h(a);
  beta_ = ha > 0.0 ? std::pow(ha / 2.0, 2.0 / 3.0) * std::cbrt(a - b) : 0.0;
  const auto res = endpoint_residual(V_, m_, r_);
  res_[0] = res[0];
  res_[1] = res[1];
}

Equilibrium Equilibrium::from_endpoints(const Potential& V, double b0, double a1) {
  if (!(b0 < a1)) throw EquilibriumError("equilibrium: need b0 < a1");
  return Equilibrium(V, 0.5 * (a1 + b0), 0.5 * (a1 - b0));
}

Equilibrium Equilibrium::solve(const Potential& V) {
  const auto& c = V.coefficients();
  double abs_sum = 0.0;
  for (double x : c) abs_sum += std::abs(x);
  const double s = std::pow(abs_sum, -1.0 / V.degree());

  std::vector<std::pair<double, double>> seeds = {{0.0, 2.0 * s}};
  for (int im = -6; im <= 6; ++im)
    for (int ir = 1; ir <= 8; ++ir) seeds.emplace_back(im * 0.5 * s, ir * 0.5 * s);

  std::vector<std::pair<double, double>> found;
  std::ostringstream log;
  for (const auto& [m0, r0] : seeds) {
    const auto sol = newton_endpoints(V, m0, r0);
    if (!sol) continue;
    bool dup = false;
    for (const auto& f : found)
      if (std::abs(f.first - sol->first) + std::abs(f.second - sol->second) < 1e-8) dup = true;
    if (dup) continue;
    found.push_back(*sol);
    Equilibrium eq(V, sol->first, sol->second);
    const auto rep = eq.check_regular();
    if (rep.pass) return eq;
    log << " candidate [" << eq.b0() << ", " << eq.a1() << "]:";
    for (const auto& f : rep.failures) log << " " << f << ";";
  }
  if (found.empty()) {
    const auto res = endpoint_residual(V, 0.0, 2.0 * s);
    std::ostringstream msg;
    msg << "equilibrium: endpoint Newton iteration did not converge (seed residuals " << res[0] << ", "
        << res[1] << ")";
    throw EquilibriumError(msg.str());
  }
  throw EquilibriumError("equilibrium: not one-cut / not regular." + log.str());
}

double Equilibrium::h(double x) const { return poly_eval(h_, x); }

double Equilibrium::density(double x) const {
  // Endpoints carry rounding from the solve; accept them up to a few ulps.
  const double slack = 1e-13 * (1.0 + r_);
  if (!(x >= b0() - slack && x <= a1() + slack)) throw DomainError("density: x outside the support");
  const double q = std::max(0.0, (x - b0()) * (a1() - x));
  return h(x) * std::sqrt(q) / (2.0 * kPi);
}

double Equilibrium::log_potential(double x) const {
  const int d = static_cast<int>(fc_.size()) - 1;
  double s = 0.0;
  if (x >= a1() || x <= b0()) {
    const double u = std::abs(x - m_) / r_;
    const double rho = u + std::sqrt(std::max(0.0, u * u - 1.0));
    const double sign = x >= a1() ? 1.0 : -1.0;
    double p = 1.0;
    for (int k = 1; k <= d; ++k) {
      p *= sign / rho;
      s += fc_[k] * p / k;
    }
    return mass_ * std::log(r_ * rho / 2.0) - 2.0 * s;
  }
  const double phi = std::acos(std::clamp((x - m_) / r_, -1.0, 1.0));
  for (int k = 1; k <= d; ++k) s += fc_[k] * std::cos(k * phi) / k;
  return mass_ * std::log(r_ / 2.0) - 2.0 * s;
}

double Equilibrium::g(double z) const {
  if (!(z >= a1())) throw DomainError("g: requires z >= a1");
  return log_potential(z);
}

std::vector<double> Equilibrium::g_derivatives(double z, int order) const {
  if (!(z > a1())) throw DomainError("g derivatives: requires z > a1");
  if (order < 0 || order > Jet::kMax) throw DomainError("g derivatives: order out of range");
  const int d = static_cast<int>(fc_.size()) - 1;
  const Jet u = Jet::variable(z - m_, order) * (1.0 / r_);
  const Jet rho = u + sqrt(u * u + (-1.0));
  const Jet sigma = Jet::constant(1.0, order) / rho;
  Jet sum(order), p = Jet::constant(1.0, order);
  for (int k = 1; k <= d; ++k) {
    p = p * sigma;
    sum = sum + p * (fc_[k] / k);
  }
  const Jet gj = (log(rho) + std::log(r_ / 2.0)) * mass_ - sum * 2.0;
  std::vector<double> out(order + 1);
  for (int k = 0; k <= order; ++k) out[k] = gj.derivative(k);
  return out;
}

double Equilibrium::g_prime(double z) const { return g_derivatives(z, 1)[1]; }
double Equilibrium::g_second(double z) const { return g_derivatives(z, 2)[2]; }

double Equilibrium::g_derivative_quadrature(double z, int k, int nodes) const {
  if (!(z > a1())) throw DomainError("g derivatives: requires z > a1");
  if (k < 1) throw DomainError("g derivative quadrature: k >= 1");
  double s = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double th = (i + 0.5) * kPi / nodes;
    const double st = std::sin(th);
    const double x = m_ + r_ * std::cos(th);
    s += r_ * r_ / (2.0 * kPi) * h(x) * st * st / std::pow(z - x, k);
  }
  s *= kPi / nodes;
  double f = 1.0;
  for (int i = 2; i < k; ++i) f *= i;
  return ((k - 1) % 2 == 0 ? 1.0 : -1.0) * f * s;
}

double Equilibrium::effective_potential(double x) const {
  return 2.0 * log_potential(x) - V_.eval(x) - ell_;
}

RegularityReport Equilibrium::check_regular() const {
  RegularityReport rep;
  const double b = b0(), a = a1();
  rep.h_min = 1e300;
  for (int i = 0; i < 200; ++i) {
    const double x = b + (a - b) * i / 199.0;
    const double hv = h(x);
    if (hv < rep.h_min) {
      rep.h_min = hv;
      rep.h_min_at = x;
    }
  }
  if (!(rep.h_min > 0.0)) {
    std::ostringstream m;
    m << "negative density: h(" << rep.h_min_at << ") = " << rep.h_min;
    rep.failures.push_back(m.str());
  }
  const double delta = 1e-3;
  rep.right_margin = rep.left_margin = 1e300;
  for (int i = 0; i < 1000; ++i) {
    const double t = delta + (10.0 - delta) * i / 999.0;
    const double mr = -effective_potential(a + t);
    const double ml = -effective_potential(b - t);
    if (mr < rep.right_margin) {
      rep.right_margin = mr;
      rep.right_margin_at = a + t;
    }
    if (ml < rep.left_margin) {
      rep.left_margin = ml;
      rep.left_margin_at = b - t;
    }
  }
  if (!(rep.right_margin > 0.0)) {
    std::ostringstream m;
    m << "variational inequality fails right of the support at x = " << rep.right_margin_at
      << " (margin " << rep.right_margin << ")";
    rep.failures.push_back(m.str());
  }
  if (!(rep.left_margin > 0.0)) {
    std::ostringstream m;
    m << "variational inequality fails left of the support at x = " << rep.left_margin_at
      << " (margin " << rep.left_margin << ")";
    rep.failures.push_back(m.str());
  }
  if (std::abs(mass_ - 1.0) > 1e-8) rep.failures.push_back("density mass differs from 1");
  if (std::abs(effective_potential(m_)) > 1e-5)
    rep.failures.push_back("Robin constant differs between edge and midpoint");
  rep.pass = rep.failures.empty();
  return rep;
}

nlohmann::json Equilibrium::to_json() const {
  return {{"potential", V_.to_json()}, {"b0", b0()},        {"a1", a1()},
          {"ell", ell_},               {"beta", beta_},     {"h_coeffs", h_},
          {"residuals", {res_[0], res_[1]}}};
}

}  // namespace sedge
