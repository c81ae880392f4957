#include "sedge/limitlaws.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace sedge {

namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kPi = std::numbers::pi;
constexpr double kMaxLawAlpha = 5.0;


// Nodes beyond this point carry kernel entries below double precision.
double upper_end(double T) { return std::max(T, 0.0) + 16.0; }

}  // namespace

double airy_kernel(double x, double y) {
  double ax, apx, ay, apy;
  airy_pair(x, ax, apx);
  if (x == y) return apx * apx - x * ax * ax;
  airy_pair(y, ay, apy);
  return (ax * apy - apx * ay) / (x - y);
}

AiryDiscretization::AiryDiscretization(double T, int m) : AiryDiscretization(T, m, upper_end(T)) {}

AiryDiscretization::AiryDiscretization(double T, int m, double hi) : T_(T) {
  if (m < 2) throw DomainError("Airy discretization: need at least 2 nodes");
  if (!std::isfinite(T)) throw DomainError("Airy discretization: T must be finite");
  if (!(hi > T)) throw DomainError("Airy discretization: need hi > T");
  rule_ = gauss_legendre(m, T, hi);
  std::vector<double> aip(m), sw(m);
  ai_.resize(m);
  for (int i = 0; i < m; ++i) {
    airy_pair(rule_.nodes[i], ai_[i], aip[i]);
    sw[i] = std::sqrt(rule_.weights[i]);
  }
  sys_.assign(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) {
    const double xi = rule_.nodes[i];
    for (int k = i; k < m; ++k) {
      const double xk = rule_.nodes[k];
      const double kern = i == k ? aip[i] * aip[i] - xi * ai_[i] * ai_[i]
                                 : (ai_[i] * aip[k] - aip[i] * ai_[k]) / (xi - xk);
      const double v = -sw[i] * kern * sw[k];
      sys_[i * m + k] = v;
      sys_[k * m + i] = v;
    }
    sys_[i * m + i] += 1.0;
  }
}

double AiryDiscretization::det() const {
  const int m = size();
  Eigen::Map<const Mat> A(sys_.data(), m, m);
  return A.partialPivLu().determinant();
}

double AiryDiscretization::resolvent_inner(const std::vector<double>& f) const {
  const int m = size();
  if (static_cast<int>(f.size()) != m) throw DomainError("resolvent: sample size mismatch");
  Eigen::Map<const Mat> A(sys_.data(), m, m);
  Eigen::PartialPivLU<Mat> lu(A);
  if (lu.rcond() < 1e-10) throw ConvergenceError("resolvent: ill-conditioned Fredholm system");
  Eigen::VectorXd rhs(m), ai(m);
  for (int i = 0; i < m; ++i) {
    const double sw = std::sqrt(rule_.weights[i]);
    rhs[i] = sw * f[i];
    ai[i] = sw * ai_[i];
  }
  const Eigen::VectorXd y = lu.solve(rhs);
  return y.dot(ai);
}

double f0(double T, int m) {
  if (T < -12.0) throw DomainError("f0: T must be >= -12");
  if (m < 30) throw DomainError("f0: need m >= 30");
  return AiryDiscretization(T, m).det();
}

double f0_checked(double T, int m, double tol) {
  const double a = f0(T, m), b = f0(T, 2 * m);
  if (std::abs(a - b) > tol) throw ConvergenceError("f0: node doubling changed the value beyond tolerance");
  return b;
}

double f1(double T, double alpha, int m) {
  if (T < -12.0) throw DomainError("f1: T must be >= -12");
  if (m < 30) throw DomainError("f1: need m >= 30");
  if (!(std::abs(alpha) <= kMaxLawAlpha)) throw DomainError("f1: |alpha| must be <= 5");
  // For alpha < 0, Ai(u) C_alpha(u) ~ exp(-(2/3)u^{3/2} - alpha u + alpha^3/3) peaks at u = alpha^2,
  // so the rule must reach past that bump.
  double hi = upper_end(T);
  const double s = std::max(0.0, -alpha);
  while (-(2.0 / 3.0) * std::pow(hi, 1.5) + s * hi - s * s * s / 3.0 > -45.0) hi += 1.0;
  m = std::max(m, static_cast<int>(std::ceil(m * (hi - T) / (upper_end(T) - T))));
  AiryDiscretization d(T, m, hi);
  // det(1 - K) (1 - <(1 - K)^{-1} C, Ai>) = det(1 - K - C (x) Ai), which stays well posed
  // deep in the left tail where 1 - K is nearly singular. The similarity D = diag(e^{-s u})
  // leaves the determinant unchanged and keeps C and Ai entries bounded when s > 0.
  Mat A = Eigen::Map<const Mat>(d.system().data(), m, m);
  Eigen::VectorXd u(m), v(m), D(m);
  for (int i = 0; i < m; ++i) {
    const double x = d.rule().nodes[i];
    const double sw = std::sqrt(d.rule().weights[i]);
    D[i] = -s * (x - s * s);
    u[i] = sw * c_alpha(x, alpha) * std::exp(D[i]);
    v[i] = sw * d.ai()[i] * std::exp(-D[i]);
  }
  if (s > 0.0)
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < m; ++k)
        if (i != k) A(i, k) *= std::exp(D[i] - D[k]);
  A -= u * v.transpose();
  return A.partialPivLu().determinant();
}

double airy_exp_tail(double xi, double s) {
  // Cut where Ai(u) e^{s(u - xi)} < e^{-45}, using log Ai(u) < -(2/3) u^{3/2} for u > 0.
  double u = std::max(xi, 0.0) + 1.0;
  while (2.0 / 3.0 * std::pow(u, 1.5) - s * (u - xi) < 45.0) u += 0.5;
  const double S = u - xi;
  const int panels = static_cast<int>(std::ceil(S));
  const auto q = gauss_legendre_panels(20, panels, 0.0, S);
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) sum += q.weights[i] * airy_ai(xi + q.nodes[i]) * std::exp(s * q.nodes[i]);
  return sum;
}

double c_alpha(double xi, double alpha) {
  if (!(xi >= -12.0)) throw DomainError("c_alpha: xi must be >= -12");
  if (!(std::abs(alpha) <= kMaxLawAlpha)) throw DomainError("c_alpha: |alpha| must be <= 5");
  if (alpha >= 1.0) {
    // int_{-inf}^0 Ai(xi + t) e^{alpha t} dt; no cancellation for large alpha.
    const double L = std::min(40.0 / alpha, xi + 48.0);
    const auto q = gauss_legendre_panels(20, static_cast<int>(std::ceil(L)), -L, 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i)
      sum += q.weights[i] * airy_ai(xi + q.nodes[i]) * std::exp(alpha * q.nodes[i]);
    return sum;
  }
  return std::exp(alpha * alpha * alpha / 3.0 - alpha * xi) - airy_exp_tail(xi, alpha);
}

double c_alpha_contour(double xi, double alpha) {
  if (!(std::abs(alpha) <= kMaxLawAlpha)) throw DomainError("c_alpha: |alpha| must be <= 5");
  // Rays leave the vertex i v at angles pi/6 and 5pi/6; v sits at the saddle i sqrt(xi)
  // unless the pole i alpha is too close, in which case the vertex moves just below it.
  double v = std::sqrt(std::max(xi, 0.0));
  if (std::abs(alpha - v) < 0.5) v = alpha - 0.5;
  const cplx I(0.0, 1.0);
  const cplx vertex(0.0, v);
  const cplx out = std::polar(1.0, kPi / 6.0), in = std::polar(1.0, 5.0 * kPi / 6.0);
  auto f = [&](cplx z) { return std::exp(I * z * z * z / 3.0 + I * xi * z) / (alpha + I * z); };
  const auto q = gauss_legendre_panels(16, 60, 0.0, 30.0);
  cplx sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double r = q.nodes[i];
    sum += q.weights[i] * (f(vertex + r * out) * out - f(vertex + r * in) * in);
  }
  double c = sum.real() / (2.0 * kPi);
  // Pole below the path: add back the residue crossed when lifting the contour.
  if (alpha < v) c += std::exp(alpha * alpha * alpha / 3.0 - alpha * xi);
  return c;
}

double c_alpha_checked(double xi, double alpha, double tol) {
  const double a = c_alpha(xi, alpha), b = c_alpha_contour(xi, alpha);
  if (std::abs(a - b) > tol * std::max(1.0, std::abs(a))) throw ConvergenceError("c_alpha: real-integral and contour routes disagree");
  return a;
}

std::string to_string(LawKind k) {
  switch (k) {
    case LawKind::F0: return "F0";
    case LawKind::F1: return "F1";
    case LawKind::Gauss: return "Gauss";
    case LawKind::GenGauss: return "GenGauss";
    case LawKind::Mixture: return "Mixture";
  }
  return "unknown";
}

double LimitLaw::standard_cdf(double T) const {
  switch (kind) {
    case LawKind::F0:
      if (T < -12.0) return 0.0;
      if (T > 20.0) return 1.0;
      return std::clamp(f0(T, m), 0.0, 1.0);
    case LawKind::F1:
      if (T < -12.0) return 0.0;
      if (T > 20.0 + (alpha < 0.0 ? alpha * alpha : 0.0)) return 1.0;
      return std::clamp(f1(T, alpha, m), 0.0, 1.0);
    case LawKind::Gauss: return normal_cdf(T);
    case LawKind::GenGauss: return gen_gauss_cdf(T, k);
    case LawKind::Mixture: break;
  }
  throw DomainError("standard_cdf: a mixture has no single standardized variable");
}

double LimitLaw::standardize(double x, int n) const {
  if (kind == LawKind::Mixture) throw DomainError("standardize: not defined for a mixture");
  return scale_const * std::pow(static_cast<double>(n), scale_exponent) * (x - center);
}

double LimitLaw::cdf(double x, int n) const {
  if (kind != LawKind::Mixture) return standard_cdf(standardize(x, n));
  double s = 0.0;
  for (std::size_t i = 0; i < components.size(); ++i) s += weights[i] * components[i].cdf(x, n);
  return s;
}

nlohmann::json LimitLaw::to_json() const {
  nlohmann::json j = {{"kind", to_string(kind)}};
  if (kind == LawKind::Mixture) {
    j["weights"] = weights;
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : components) comps.push_back(c.to_json());
    j["components"] = comps;
    return j;
  }
  j["center"] = center;
  j["scale_const"] = scale_const;
  j["scale_exponent"] = scale_exponent;
  if (kind == LawKind::F1) j["alpha"] = alpha;
  if (kind == LawKind::GenGauss) j["k"] = k;
  j["m"] = m;
  return j;
}

LimitLaw LimitLaw::from_json(const nlohmann::json& j) {
  try {
    LimitLaw l;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == to_string(LawKind::Mixture)) {
      l.kind = LawKind::Mixture;
      l.weights = j.at("weights").get<std::vector<double>>();
      for (const auto& c : j.at("components")) l.components.push_back(from_json(c));
      if (l.weights.size() != l.components.size()) throw InvalidInput("law JSON: weights and components differ in length");
      return l;
    }
    bool known = false;
    for (auto k : {LawKind::F0, LawKind::F1, LawKind::Gauss, LawKind::GenGauss})
      if (kind == to_string(k)) {
        l.kind = k;
        known = true;
      }
    if (!known) throw InvalidInput("law JSON: unknown kind '" + kind + "'");
    l.center = j.at("center").get<double>();
    l.scale_const = j.at("scale_const").get<double>();
    l.scale_exponent = j.at("scale_exponent").get<double>();
    if (l.kind == LawKind::F1) l.alpha = j.at("alpha").get<double>();
    if (l.kind == LawKind::GenGauss) l.k = j.at("k").get<int>();
    l.m = j.value("m", 40);
    return l;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("law JSON: ") + e.what());
  }
}

LimitLaw make_f0_law(double center, double beta) {
  LimitLaw l;
  l.kind = LawKind::F0;
  l.center = center;
  l.scale_const = beta;
  l.scale_exponent = 2.0 / 3.0;
  return l;
}

LimitLaw make_f1_law(double center, double beta, double alpha) {
  LimitLaw l = make_f0_law(center, beta);
  l.kind = LawKind::F1;
  l.alpha = alpha;
  return l;
}

LimitLaw make_gauss_law(double center, double scale_const) {
  LimitLaw l;
  l.kind = LawKind::Gauss;
  l.center = center;
  l.scale_const = scale_const;
  l.scale_exponent = 0.5;
  return l;
}

LimitLaw make_gen_gauss_law(double center, double scale_const, int k) {
  if (k == 1) return make_gauss_law(center, scale_const);
  LimitLaw l;
  l.kind = LawKind::GenGauss;
  l.center = center;
  l.scale_const = scale_const;
  l.scale_exponent = 1.0 / (2.0 * k);
  l.k = k;
  return l;
}

LimitLaw make_mixture(std::vector<double> weights, std::vector<LimitLaw> components) {
  if (weights.size() != components.size() || weights.empty()) throw DomainError("mixture: size mismatch");
  double s = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0 && w <= 1.0)) throw DomainError("mixture: weight outside [0,1]");
    s += w;
  }
  for (double& w : weights) w /= s;
  LimitLaw l;
  l.kind = LawKind::Mixture;
  l.weights = std::move(weights);
  l.components = std::move(components);
  return l;
}

std::vector<double> mixture_weights(const MixtureConstants& c, double alpha) {
  const std::size_t r = c.prefactor.size();
  if (r < 2 || c.rate.size() != r) throw DomainError("mixture weights: need matching prefactors and rates");
  std::vector<double> lw(r);
  for (std::size_t i = 0; i < r; ++i) {
    if (!(c.prefactor[i] > 0.0) || !std::isfinite(c.prefactor[i]))
      throw DomainError("mixture weights: prefactors must be positive");
    lw[i] = std::log(c.prefactor[i]) + c.rate[i] * alpha;
  }
  const double mx = *std::max_element(lw.begin(), lw.end());
  double s = 0.0;
  for (double& v : lw) s += (v = std::exp(v - mx));
  for (double& v : lw) v /= s;
  return lw;
}

namespace {

double gamma_factor(double b0, double a1, double z) {
  if (!(z > a1)) throw DomainError("outer factor: z must exceed a1");
  return std::pow((z - b0) / (z - a1), 0.25);
}

}  // namespace

double outer_M(double b0, double a1, double z, int j) {
  const double g = gamma_factor(b0, a1, z), gi = 1.0 / g;
  const double pre = std::sqrt(2.0 / (kPi * (a1 - b0)));
  return pre * 0.5 * (g + gi) * std::pow((g - gi) / (g + gi), j);
}

double outer_M_tilde(double b0, double a1, double z, int j) {
  const double g = gamma_factor(b0, a1, z), gi = 1.0 / g;
  const double pre = std::sqrt(2.0 / (kPi * (a1 - b0)));
  return pre * 0.5 * (g - gi) * std::pow((g - gi) / (g + gi), -j);
}

double outer_B_edge(double b0, double a1, double beta) {
  return std::sqrt(2.0) * std::pow(a1 - b0, -0.25) * std::pow(beta, 0.25);
}

std::string to_string(MixtureRegime r) {
  switch (r) {
    case MixtureRegime::NearCritical: return "near-critical";
    case MixtureRegime::Secondary: return "secondary-critical";
    case MixtureRegime::UnequalFlatness: return "secondary-critical-flat";
    case MixtureRegime::TransitCritical: return "transit-critical";
  }
  return "unknown";
}

namespace {

// The two highest local maxima of G(.;a0), ordered by position.
std::pair<Maximizer, Maximizer> top_two(const Transition& tr, double a0) {
  auto lm = tr.local_maxima(a0);
  if (lm.size() < 2) throw DomainError("mixture: fewer than two local maxima at a0");
  std::sort(lm.begin(), lm.end(), [](const Maximizer& u, const Maximizer& v) { return u.value > v.value; });
  Maximizer u = lm[0], v = lm[1];
  if (u.x > v.x) std::swap(u, v);
  return {u, v};
}

double curvature(const Transition& tr, double x, double a) {
  const double c = -tr.G_derivatives(x, a, 2)[2];
  if (!(c > 0.0)) throw DomainError("mixture: nonpositive curvature at a maximizer");
  return c;
}

// Laplace weight of a maximizer of order k (the 1/sqrt(2 pi) normalization is common).
double laplace_factor(const Transition& tr, double x, double a, int k) {
  if (k == 1) return std::sqrt(2.0 * kPi / curvature(tr, x, a));
  const auto d = tr.G_derivatives(x, a, 2 * k);
  double fact = 1.0;
  for (int i = 2; i <= 2 * k; ++i) fact *= i;
  if (!(-d[2 * k] > 0.0)) throw DomainError("mixture: nonpositive flat curvature");
  return std::pow(fact / -d[2 * k], 1.0 / (2.0 * k)) * gen_gauss_mass(k);
}

}  // namespace

MixtureSetup mixture_setup(const Transition& tr, MixtureRegime regime, double a0, int j) {
  if (j < 1) throw DomainError("mixture: j must be >= 1");
  const auto& eq = tr.equilibrium();
  const double b0 = eq.b0(), a1 = eq.a1(), e = eq.edge();
  MixtureSetup s;
  s.regime = regime;
  s.a0 = a0;
  switch (regime) {
    case MixtureRegime::NearCritical: {
      if (!(a0 < tr.half_vprime_e())) throw DomainError("near-critical mixture needs a0 < V'(e)/2");
      const double c = tr.c_of_a(a0);
      const double x0 = tr.x0(a0);
      if (!(x0 > c)) throw DomainError("near-critical mixture: no interior maximizer at a0");
      const double Hpp = -eq.g_second(c);
      const double C0 = outer_M_tilde(b0, a1, c, j) / std::sqrt(Hpp);
      const double C1 = outer_M(b0, a1, x0, j) / std::sqrt(curvature(tr, x0, a0));
      s.points = {e, x0};
      s.orders = {0, 1};
      s.constants = {{C0, C1}, {0.0, x0 - c}};
      break;
    }
    case MixtureRegime::Secondary: {
      const auto [m1, m2] = top_two(tr, a0);
      if (m1.k != 1 || m2.k != 1) throw DomainError("secondary mixture: a maximizer is flat");
      s.points = {m1.x, m2.x};
      s.orders = {1, 1};
      for (const auto& m : {m1, m2}) {
        s.constants.prefactor.push_back(outer_M(b0, a1, m.x, j) / std::sqrt(curvature(tr, m.x, a0)));
        s.constants.rate.push_back(m.x);
      }
      break;
    }
    case MixtureRegime::UnequalFlatness: {
      const auto [m1, m2] = top_two(tr, a0);
      if (m1.k == m2.k) throw DomainError("unequal-flatness mixture: orders are equal");
      s.points = {m1.x, m2.x};
      s.orders = {m1.k, m2.k};
      for (const auto& m : {m1, m2}) {
        s.constants.prefactor.push_back(laplace_factor(tr, m.x, a0, m.k) * outer_M(b0, a1, m.x, j));
        s.constants.rate.push_back(m.x);
      }
      break;
    }
    case MixtureRegime::TransitCritical: {
      const auto lm = tr.local_maxima(a0);
      double best = -std::numeric_limits<double>::infinity(), x0 = e;
      for (const auto& m : lm)
        if (m.value > best && m.x - e > 1e-6 * std::max(1.0, std::abs(e))) {
          best = m.value;
          x0 = m.x;
        }
      if (!(x0 > e)) throw DomainError("transit-critical mixture: no interior maximizer");
      const double D0 = outer_B_edge(b0, a1, eq.beta()) / eq.beta();
      const double D1 = laplace_factor(tr, x0, a0, 1) * outer_M(b0, a1, x0, j);
      s.points = {e, x0};
      s.orders = {0, 1};
      s.constants = {{D0, D1}, {0.0, x0 - e}};
      break;
    }
  }
  return s;
}

std::vector<double> mixture_weights(const Transition& tr, MixtureRegime regime, double a0, double alpha, int j) {
  return mixture_weights(mixture_setup(tr, regime, a0, j).constants, alpha);
}

namespace {

LimitLaw component_law(const Transition& tr, double a0, double x, int k, int m) {
  LimitLaw l = make_gen_gauss_law(x, tr.fluct_scale(x, a0, k), k);
  l.m = m;
  return l;
}

LimitLaw build_mixture(const Transition& tr, const MixtureSetup& s, double alpha, int m) {
  const auto& eq = tr.equilibrium();
  const auto w = mixture_weights(s.constants, alpha);
  std::vector<LimitLaw> comps;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    if (s.orders[i] == 0) {
      LimitLaw l = s.regime == MixtureRegime::TransitCritical ? make_f1_law(eq.edge(), eq.beta(), 0.0)
                                                              : make_f0_law(eq.edge(), eq.beta());
      l.m = m;
      comps.push_back(l);
    } else {
      comps.push_back(component_law(tr, s.a0, s.points[i], s.orders[i], m));
    }
  }
  return make_mixture(w, comps);
}

}  // namespace

Prediction predict_law(const Transition& tr, double a, int n, int j, const PredictOptions& opt) {
  if (!(a > 0.0)) throw DomainError("predict_law: a must be positive");
  if (n < 1) throw DomainError("predict_law: n must be positive");
  const auto& eq = tr.equilibrium();
  const double ac = tr.critical_a();
  const double half = tr.half_vprime_e();
  const double nd = static_cast<double>(n);
  const double n13 = std::cbrt(nd);
  const bool convex_type = ac >= half - 1e-7;
  Prediction p;
  p.alpha = std::numeric_limits<double>::quiet_NaN();
  p.a0 = ac;

  if (convex_type) {
    const bool transit = tr.profile(ac).regime == Regime::TransitCritical;
    if (transit) {
      const double alpha_p = nd * (a - ac);
      if (std::abs(alpha_p) <= opt.mixture_window) {
        p.law = build_mixture(tr, mixture_setup(tr, MixtureRegime::TransitCritical, ac, j), alpha_p, opt.m);
        p.regime = to_string(MixtureRegime::TransitCritical);
        p.alpha = alpha_p;
        return p;
      }
    }
    const double alpha = (a - ac) * n13 / eq.beta();
    if (std::abs(alpha) <= opt.critical_window && (!transit || alpha < 0.0)) {
      p.law = make_f1_law(eq.edge(), eq.beta(), -alpha);
      p.law.m = opt.m;
      p.regime = "critical";
      p.alpha = alpha;
      return p;
    }
  } else {
    const double alpha = nd * (a - ac);
    if (std::abs(alpha) <= opt.mixture_window) {
      p.law = build_mixture(tr, mixture_setup(tr, MixtureRegime::NearCritical, ac, j), alpha, opt.m);
      p.regime = to_string(MixtureRegime::NearCritical);
      p.alpha = alpha;
      return p;
    }
  }

  if (a < ac) {
    p.law = make_f0_law(eq.edge(), eq.beta());
    p.law.m = opt.m;
    p.regime = "subcritical";
    return p;
  }

  // Secondary critical values within reach of the mixture window (log-n shift included).
  const double reach = (opt.mixture_window + std::log(nd)) / nd + 1e-6;
  const double lo = std::max(a - reach, ac + 1e-9);
  for (double a0 : tr.secondary_criticals(lo, a + reach, 16)) {
    const auto [m1, m2] = top_two(tr, a0);
    if (m1.k > 3 || m2.k > 3) throw DomainError("predict_law: flatness order above 3");
    const MixtureRegime regime = m1.k == m2.k ? MixtureRegime::Secondary : MixtureRegime::UnequalFlatness;
    if (m1.k == m2.k && m1.k != 1)
      throw DomainError("predict_law: equally flat maximizers are not supported");
    const double q = (1.0 / (2.0 * m1.k) - 1.0 / (2.0 * m2.k)) / (m2.x - m1.x);
    const double alpha = nd * (a - a0) + q * std::log(nd);
    if (std::abs(alpha) > opt.mixture_window) continue;
    p.law = build_mixture(tr, mixture_setup(tr, regime, a0, j), alpha, opt.m);
    p.regime = to_string(regime);
    p.alpha = alpha;
    p.a0 = a0;
    return p;
  }

  const double x0 = tr.x0(a);
  if (!(x0 > eq.edge())) throw DomainError("predict_law: no interior maximizer above a_c");
  const int k = tr.flatness_order(x0, a);
  p.law = component_law(tr, a, x0, k, opt.m);
  p.regime = k == 1 ? "supercritical-generic" : "supercritical-flat";
  p.a0 = a;
  return p;
}

}  // namespace sedge
