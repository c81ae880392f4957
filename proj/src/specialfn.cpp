#include "sedge/specialfn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

namespace sedge {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kAi0 = 0.355028053887817239260;
constexpr double kAip0 = -0.258819403792806798405;
constexpr double kAsymRadius = 12.0;
constexpr double kEnvelope = 50.0;
// Largest tolerated ratio (in log) between Maclaurin terms and the result.
constexpr double kSeriesLoss = 9.0;

void maclaurin(cplx z, cplx& ai, cplx& aip) {
  const cplx z3 = z * z * z;
  cplx f = 1.0, g = z, fp = 0.5 * z * z, gp = 1.0;
  cplx tf = 1.0, tg = z, tfp = fp, tgp = 1.0;
  for (int k = 1; k < 300; ++k) {
    const double dk = 3.0 * k;
    tf *= z3 / ((dk - 1.0) * dk);
    tg *= z3 / (dk * (dk + 1.0));
    tfp *= z3 / (dk * (dk + 2.0));
    tgp *= z3 / ((dk - 2.0) * dk);
    f += tf;
    g += tg;
    fp += tfp;
    gp += tgp;
    const double big = std::max({std::abs(tf), std::abs(tg), std::abs(tfp), std::abs(tgp)});
    if (k > 2 && big < 1e-18 * std::max({std::abs(f), std::abs(g), std::abs(fp), std::abs(gp), 1e-300}))
      break;
  }
  ai = kAi0 * f + kAip0 * g;
  aip = kAi0 * fp + kAip0 * gp;
}

// Coefficients u_k, v_k of the large-argument expansions.
struct AsymCoeffs {
  std::vector<double> u, v;
  AsymCoeffs() {
    u.push_back(1.0);
    v.push_back(1.0);
    for (int k = 1; k < 60; ++k) {
      const double uk = u.back() * (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) /
                        ((2.0 * k - 1.0) * 216.0 * k);
      u.push_back(uk);
      v.push_back(-(6.0 * k + 1.0) / (6.0 * k - 1.0) * uk);
    }
  }
};

const AsymCoeffs& asym_coeffs() {
  static const AsymCoeffs c;
  return c;
}

// Sum of (-1)^k c_k x^k with the series cut at its smallest term.
cplx alternating_sum(const std::vector<double>& c, cplx x, int start, int stride) {
  cplx sum = 0.0, xp = std::pow(x, start);
  const cplx xs = std::pow(x, stride);
  double prev = 1e300;
  for (std::size_t k = start, i = 0; k < c.size(); k += stride, ++i) {
    const cplx term = (i % 2 == 0 ? 1.0 : -1.0) * c[k] * xp;
    const double mag = std::abs(term);
    if (mag > prev) break;
    sum += term;
    if (mag < 1e-18 * std::abs(sum)) break;
    prev = mag;
    xp *= xs;
  }
  return sum;
}

void asymptotic(cplx z, cplx& ai, cplx& aip) {
  const auto& c = asym_coeffs();
  const double sqpi = std::sqrt(kPi);
  if (std::abs(std::arg(z)) <= 2.0 * kPi / 3.0) {
    const cplx zeta = (2.0 / 3.0) * std::pow(z, 1.5);
    const cplx iz = 1.0 / zeta;
    const cplx e = std::exp(-zeta);
    const cplx q = std::pow(z, 0.25);
    ai = e / (2.0 * sqpi * q) * alternating_sum(c.u, iz, 0, 1);
    aip = -q * e / (2.0 * sqpi) * alternating_sum(c.v, iz, 0, 1);
    return;
  }
  const cplx w = -z;
  const cplx zeta = (2.0 / 3.0) * std::pow(w, 1.5);
  const cplx iz = 1.0 / zeta;
  const cplx cs = std::cos(zeta - kPi / 4.0), sn = std::sin(zeta - kPi / 4.0);
  const cplx q = std::pow(w, 0.25);
  ai = (cs * alternating_sum(c.u, iz, 0, 2) + sn * alternating_sum(c.u, iz, 1, 2)) / (sqpi * q);
  aip = q / sqpi * (sn * alternating_sum(c.v, iz, 0, 2) - cs * alternating_sum(c.v, iz, 1, 2));
}

// Taylor-series continuation of y'' = z y along the segment z0 -> z1.
void continue_ode(cplx z0, cplx& y, cplx& yp, cplx z1) {
  const double len = std::abs(z1 - z0);
  const int steps = std::max(1, static_cast<int>(std::ceil(len / 0.5)));
  const cplx h = (z1 - z0) / static_cast<double>(steps);
  cplx zc = z0;
  for (int s = 0; s < steps; ++s) {
    // c_{k+2} = (zc c_k + c_{k-1}) / ((k+1)(k+2))
    cplx cm1 = 0.0, c0 = y, c1 = yp;
    cplx hp = h;
    cplx ny = c0 + c1 * h, nyp = c1;
    cplx ck = c0, ck1 = c1;
    for (int k = 0; k < 60; ++k) {
      const cplx c2 = (zc * ck + cm1) / ((k + 1.0) * (k + 2.0));
      // c2 multiplies h^{k+2}; derivative term (k+2) c2 h^{k+1}
      nyp += (k + 2.0) * c2 * hp;
      hp *= h;
      ny += c2 * hp;
      if (k > 6 && std::abs(c2 * hp) < 1e-18 * std::abs(ny) && std::abs(ck1 * hp) < 1e-18 * std::abs(ny))
        break;
      cm1 = ck;
      ck = ck1;
      ck1 = c2;
    }
    y = ny;
    yp = nyp;
    zc += h;
  }
}

}  // namespace

void airy_pair(cplx z, cplx& ai, cplx& aip) {
  const double r = std::abs(z);
  if (!(r <= kEnvelope)) throw DomainError("airy: |z| exceeds 50");
  if (r >= kAsymRadius) {
    asymptotic(z, ai, aip);
    return;
  }
  const double theta = std::arg(z);
  const double lean = 1.0 + std::cos(1.5 * theta);
  const double loss = (2.0 / 3.0) * std::pow(r, 1.5) * lean;
  if (loss <= kSeriesLoss && r <= 8.0) {
    maclaurin(z, ai, aip);
    return;
  }
  const cplx dir = std::polar(1.0, theta);
  if (std::cos(1.5 * theta) > 0.0) {
    // Ai is recessive outward here, so march inward from the asymptotic zone.
    const cplx z0 = kAsymRadius * dir;
    asymptotic(z0, ai, aip);
    continue_ode(z0, ai, aip, z);
  } else {
    const double rs = std::min({r, std::pow(kSeriesLoss / ((2.0 / 3.0) * lean), 2.0 / 3.0), 6.0});
    const cplx z0 = rs * dir;
    maclaurin(z0, ai, aip);
    continue_ode(z0, ai, aip, z);
  }
}

void airy_pair(double x, double& ai, double& aip) {
  cplx a, b;
  airy_pair(cplx(x, 0.0), a, b);
  ai = a.real();
  aip = b.real();
}

cplx airy_ai(cplx z) {
  cplx a, b;
  airy_pair(z, a, b);
  return a;
}

cplx airy_ai_prime(cplx z) {
  cplx a, b;
  airy_pair(z, a, b);
  return b;
}

double airy_ai(double x) { return airy_ai(cplx(x, 0.0)).real(); }
double airy_ai_prime(double x) { return airy_ai_prime(cplx(x, 0.0)).real(); }

double normal_cdf(double t) { return 0.5 * std::erfc(-t / std::numbers::sqrt2); }

double gen_gauss_cdf(double t, int k) {
  if (k < 1) throw DomainError("gen_gauss_cdf: k must be >= 1");
  if (t == 0.0) return 0.5;
  const double s = 1.0 / (2.0 * k);
  const double x = std::pow(std::abs(t), 2.0 * k);
  if (t > 0.0) return 1.0 - 0.5 * boost::math::gamma_q(s, x);
  return 0.5 * boost::math::gamma_q(s, x);
}

double gen_gauss_mass(int k) {
  if (k < 1) throw DomainError("gen_gauss_mass: k must be >= 1");
  return std::tgamma(1.0 / (2.0 * k)) / k;
}

QuadratureRule gauss_legendre(int m, double lo, double hi) {
  if (m < 2) throw DomainError("gauss_legendre: need at least two nodes");
  if (!(lo < hi)) throw DomainError("gauss_legendre: need lo < hi");
  QuadratureRule q;
  q.lo = lo;
  q.hi = hi;
  q.nodes.resize(m);
  q.weights.resize(m);
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) {
        p0 = 1.0;
        p1 = x;
        for (int k = 2; k <= m; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = m * (x * p1 - p0) / (x * x - 1.0);
        break;
      }
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.nodes[i] = mid - half * x;
    q.nodes[m - 1 - i] = mid + half * x;
    q.weights[i] = q.weights[m - 1 - i] = half * w;
  }
  if (m % 2 == 1) q.nodes[m / 2] = mid;
  return q;
}

QuadratureRule gauss_legendre_panels(int m, int panels, double lo, double hi) {
  if (panels < 1) throw DomainError("gauss_legendre_panels: panels must be positive");
  QuadratureRule out;
  out.lo = lo;
  out.hi = hi;
  const double w = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const auto q = gauss_legendre(m, lo + p * w, lo + (p + 1) * w);
    out.nodes.insert(out.nodes.end(), q.nodes.begin(), q.nodes.end());
    out.weights.insert(out.weights.end(), q.weights.begin(), q.weights.end());
  }
  return out;
}

}  // namespace sedge
