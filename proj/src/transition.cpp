#include "sedge/transition.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sedge/specialfn.hpp"

namespace sedge {

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Subcritical: return "subcritical";
    case Regime::Critical: return "critical";
    case Regime::SupercriticalGeneric: return "supercritical-generic";
    case Regime::SecondaryCritical: return "secondary-critical";
    case Regime::TransitCritical: return "transit-critical";
  }
  return "unknown";
}

nlohmann::json TransitionProfile::to_json() const {
  nlohmann::json mx = nlohmann::json::array();
  for (const auto& m : maximizers) mx.push_back({{"x", m.x}, {"k", m.k}, {"G", m.value}});
  return {{"a", a},       {"c_a", c_a},         {"Gmax", Gmax},        {"a_c", a_c},
          {"half_Vprime_e", half_vprime_e},    {"maximizers", mx},    {"regime", to_string(regime)}};
}

Transition::Transition(const Equilibrium& eq) : eq_(eq), half_(0.5 * eq.potential().eval(eq.edge(), 1)) {}

double Transition::c_of_a(double a) const {
  if (!(a > 0.0)) throw DomainError("c(a): a must be positive");
  const double e = edge();
  if (a >= half_) return e;
  const double x_max = e + 1e6;
  double lo = e, hi = e + 1.0;
  while (eq_.g_prime(hi) > a) {
    hi = e + 2.0 * (hi - e);
    if (hi > x_max) throw DomainError("c(a): root beyond e + 1e6 (a too small)");
  }
  // g' is strictly decreasing on (e, inf).
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (eq_.g_prime(mid) > a)
      lo = mid;
    else
      hi = mid;
  }
  double c = 0.5 * (lo + hi);
  const auto d = eq_.g_derivatives(c, 2);
  const double step = (d[1] - a) / d[2];
  if (std::isfinite(step) && c - step > e) {
    const double cn = c - step;
    if (std::abs(eq_.g_prime(cn) - a) <= std::abs(d[1] - a)) c = cn;
  }
  return c;
}

double Transition::G(double x, double a) const {
  if (!(x >= edge())) throw DomainError("G: x must be >= e");
  return eq_.g(x) - eq_.potential().eval(x) + a * x;
}

double Transition::H(double x, double a) const {
  if (!(x >= edge())) throw DomainError("H: x must be >= e");
  return -eq_.g(x) + a * x + eq_.ell();
}

std::vector<double> Transition::G_derivatives(double x, double a, int order) const {
  auto d = eq_.g_derivatives(x, order);
  for (int k = 0; k <= order; ++k) d[k] -= eq_.potential().eval(x, k);
  if (order >= 1) d[1] += a;
  d[0] += a * x;
  return d;
}

double Transition::scan_horizon(double a) const {
  // g' <= 1/(x - e) <= 1 for x >= e + 1, so G' < 0 wherever V'(x) > a + 1.
  auto p = eq_.potential().derivative_coeffs(1);
  p[0] -= a + 1.0;
  double bound = 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) bound = std::max(bound, std::abs(p[i] / p.back()));
  bound += 1.0;
  const double c = c_of_a(a);
  return std::max({bound, edge() + 1.0, c + 1.0});
}

namespace {

std::vector<double> scan_grid(double c, double X) {
  std::vector<double> xs;
  const double span = X - c;
  const int nlog = 500, nlin = 500;
  const double t0 = 1e-9 * std::max(1.0, std::abs(c));
  for (int i = 0; i < nlog; ++i) xs.push_back(c + t0 * std::pow(span / t0, i / (nlog - 1.0)));
  for (int i = 1; i <= nlin; ++i) xs.push_back(c + span * i / nlin);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

// Smallest abscissa above x at which the g-jets are well conditioned.
double inner_point(double x) { return x + 1e-12 * std::max(1.0, std::abs(x)); }

}  // namespace

std::vector<Maximizer> Transition::local_maxima(double a) const {
  const double c = c_of_a(a);
  const double X = scan_horizon(a);
  const auto xs = scan_grid(c, X);
  auto dG = [&](double x) { return G_derivatives(x, a, 1)[1]; };
  std::vector<std::pair<double, double>> brackets;
  std::vector<double> dg(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) dg[i] = dG(xs[i]);
  // For a > V'(e)/2 the one-sided slope at e is positive, so a maximum may sit below xs[0].
  if (c == edge() && a > half_ && dg[0] <= 0.0) {
    const double x_in = inner_point(c);
    if (dG(x_in) > 0.0) brackets.emplace_back(x_in, xs[0]);
  }
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    if (dg[i] > 0.0 && dg[i + 1] <= 0.0) brackets.emplace_back(xs[i], xs[i + 1]);
  std::vector<Maximizer> out;
  for (auto [lo, hi] : brackets) {
    for (int it = 0; it < 200 && hi - lo > 4e-16 * std::abs(hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (dG(mid) > 0.0)
        lo = mid;
      else
        hi = mid;
    }
    Maximizer m;
    m.x = 0.5 * (lo + hi);
    m.value = G(m.x, a);
    m.k = flatness_order(m.x, a);
    out.push_back(m);
  }
  return out;
}

int Transition::flatness_order(double x, double a) const {
  const auto d = G_derivatives(x, a, 6);
  double fact = 1.0;
  for (int k = 1; k <= 3; ++k) {
    for (int i = 2 * k - 1; i <= 2 * k; ++i) fact *= i;
    if (std::abs(d[2 * k]) / fact > 1e-7) return k;
  }
  throw DomainError("flatness order above 3 is not supported");
}

std::vector<Maximizer> Transition::maximizer_set(double a, double tie_tol) const {
  auto loc = local_maxima(a);
  if (loc.empty()) return {};
  double best = -1e300;
  for (const auto& m : loc) best = std::max(best, m.value);
  std::vector<Maximizer> out;
  for (const auto& m : loc)
    if (m.value >= best - tie_tol) out.push_back(m);
  return out;
}

double Transition::x0(double a) const {
  const double c = c_of_a(a);
  const auto loc = local_maxima(a);
  double best = G(c, a), xb = c;
  for (const auto& m : loc)
    if (m.value > best) {
      best = m.value;
      xb = m.x;
    }
  return xb;
}

std::optional<double> Transition::local_max_near(double a, double guess) const {
  auto dG = [&](double x) { return G_derivatives(x, a, 1)[1]; };
  const double floor = inner_point(edge());
  guess = std::max(guess, floor);
  double lo = guess, hi = guess;
  double step = 1e-6 * std::max(1.0, std::abs(guess));
  if (dG(guess) > 0.0) {
    // Walk right until G' turns nonpositive.
    for (int it = 0;; ++it) {
      if (it == 80) return std::nullopt;
      hi = guess + step;
      if (dG(hi) <= 0.0) break;
      lo = hi;
      step *= 2.0;
    }
  } else {
    for (int it = 0;; ++it) {
      if (it == 80 || lo == floor) return std::nullopt;
      lo = std::max(guess - step, floor);
      if (dG(lo) > 0.0) break;
      hi = lo;
      step *= 2.0;
    }
  }
  for (int it = 0; it < 200 && hi - lo > 4e-16 * std::abs(hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (dG(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

AWitness Transition::in_A_V(double a) const {
  AWitness w;
  const double c = c_of_a(a);
  w.H_c = H(c, a);
  const double X = scan_horizon(a);
  const auto xs = scan_grid(c, X);
  double best = -1e300, xb = c;
  for (double x : xs) {
    if (x <= c) continue;
    const double v = G(x, a);
    if (v > best) {
      best = v;
      xb = x;
    }
  }
  for (const auto& m : local_maxima(a))
    if (m.value > best) {
      best = m.value;
      xb = m.x;
    }
  w.x_bar = xb;
  w.G_bar = best;
  w.in = best > w.H_c + 1e-12;
  return w;
}

double Transition::critical_a() const {
  if (ac_cache_) return *ac_cache_;
  double ac = half_;
  if (in_A_V(half_).in) {
    double lo = 1e-4, hi = half_;
    if (in_A_V(lo).in) throw DomainError("critical_a: a_lo too large");
    while (hi - lo > 1e-9) {
      const double mid = 0.5 * (lo + hi);
      if (in_A_V(mid).in)
        hi = mid;
      else
        lo = mid;
    }
    ac = 0.5 * (lo + hi);
  }
  ac_cache_ = ac;
  return ac;
}

std::vector<double> Transition::secondary_criticals(double a_lo, double a_hi, int grid) const {
  std::vector<double> out;
  if (!(a_hi > a_lo) || grid < 1) return out;
  // A branch is either an interior local maximum followed by continuation, or the point c(a).
  struct Branch {
    bool at_c;
    double x;
  };
  auto locate = [&](double a) {
    const double c = c_of_a(a);
    const double x = x0(a);
    return Branch{x == c, x};
  };
  auto follow = [&](const Branch& b, double a) -> std::optional<Branch> {
    if (b.at_c) return Branch{true, c_of_a(a)};
    const auto x = local_max_near(a, b.x);
    if (!x) return std::nullopt;
    return Branch{false, *x};
  };
  auto same = [](const Branch& u, const Branch& v) {
    return std::abs(u.x - v.x) <= 1e-6 * std::max(1.0, std::abs(v.x));
  };
  std::vector<double> as(grid + 1);
  std::vector<Branch> bs;
  for (int i = 0; i <= grid; ++i) {
    as[i] = a_lo + (a_hi - a_lo) * i / grid;
    bs.push_back(locate(as[i]));
  }
  for (int i = 0; i < grid; ++i) {
    const auto cont = follow(bs[i], as[i + 1]);
    if (cont && same(*cont, bs[i + 1])) continue;
    double al = as[i], ar = as[i + 1];
    Branch bl = bs[i], br = bs[i + 1];
    bool ok = true;
    while (ar - al > 1e-9) {
      const double am = 0.5 * (al + ar);
      const auto ml = follow(bl, am);
      const auto mr = follow(br, am);
      if (!ml || !mr) {
        ok = false;
        break;
      }
      if (G(mr->x, am) > G(ml->x, am)) {
        ar = am;
        br = *mr;
      } else {
        al = am;
        bl = *ml;
      }
    }
    if (ok && !same(bl, br)) out.push_back(0.5 * (al + ar));
  }
  return out;
}

double Transition::fluct_scale(double x, double a, int k) const {
  if (k < 1 || k > 3) throw DomainError("fluct_scale: k must be 1..3");
  const auto d = G_derivatives(x, a, 2 * k);
  const double curv = -d[2 * k];
  if (!(curv > 0.0)) throw DomainError("fluct_scale: nonpositive curvature");
  if (k == 1) return std::sqrt(curv);
  double fact = 1.0;
  for (int i = 2; i <= 2 * k; ++i) fact *= i;
  return std::pow(curv / fact, 1.0 / (2.0 * k));
}

TransitionProfile Transition::profile(double a) const {
  TransitionProfile p;
  p.a = a;
  p.c_a = c_of_a(a);
  p.a_c = critical_a();
  p.half_vprime_e = half_;
  const double tol = 1e-7;
  auto mx = maximizer_set(a);
  const double gc = G(p.c_a, a);
  double gmax = gc;
  for (const auto& m : mx) gmax = std::max(gmax, m.value);
  p.Gmax = gmax;
  if (a < p.a_c - tol) {
    p.regime = Regime::Subcritical;
  } else if (a <= p.a_c + tol) {
    const bool tie_at_edge = p.a_c >= half_ - tol && !mx.empty() && gmax - gc <= kTieTol;
    p.regime = tie_at_edge ? Regime::TransitCritical : Regime::Critical;
  } else {
    p.regime = mx.size() >= 2 ? Regime::SecondaryCritical : Regime::SupercriticalGeneric;
  }
  p.maximizers = mx;
  if (p.maximizers.empty()) p.maximizers.push_back({p.c_a, 1, gc});
  return p;
}

}  // namespace sedge
