#include "sedge/potential.hpp"

#include <cmath>
#include <sstream>

#include "sedge/specialfn.hpp"

namespace sedge {

double poly_eval(const std::vector<double>& c, double x) {
  double s = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * x + *it;
  return s;
}

Potential::Potential(std::vector<double> coefficients, std::string label)
    : coeffs_(std::move(coefficients)), label_(std::move(label)) {
  const int d = degree();
  if (d < 2) throw InvalidInput("potential: degree must be at least 2");
  if (d > 16) throw InvalidInput("potential: degree must be at most 16");
  if (d % 2 != 0) throw InvalidInput("potential: degree must be even");
  for (double c : coeffs_)
    if (!std::isfinite(c)) throw InvalidInput("potential: non-finite coefficient");
  if (!(leading() > 0.0)) throw InvalidInput("potential: leading coefficient must be positive");
}

std::vector<double> Potential::derivative_coeffs(int k) const {
  std::vector<double> c = coeffs_;
  for (int r = 0; r < k; ++r) {
    if (c.size() <= 1) return {0.0};
    std::vector<double> d(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = static_cast<double>(i) * c[i];
    c = std::move(d);
  }
  return c;
}

double Potential::eval(double x, int k) const {
  if (k == 0) return poly_eval(coeffs_, x);
  if (k > degree()) return 0.0;
  double s = 0.0;
  for (int i = degree(); i >= k; --i) {
    double f = 1.0;
    for (int r = 0; r < k; ++r) f *= (i - r);
    s = s * x + f * coeffs_[i];
  }
  return s;
}

nlohmann::json Potential::to_json() const {
  return {{"label", label_}, {"coefficients", coeffs_}};
}

Potential Potential::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidInput("potential JSON: expected an object");
  if (!j.contains("coefficients") || !j["coefficients"].is_array())
    throw InvalidInput("potential JSON: missing array field 'coefficients'");
  std::vector<double> c;
  for (const auto& v : j["coefficients"]) {
    if (!v.is_number()) throw InvalidInput("potential JSON: coefficients must be numbers");
    c.push_back(v.get<double>());
  }
  std::string label = "custom";
  if (j.contains("label")) {
    if (!j["label"].is_string()) throw InvalidInput("potential JSON: 'label' must be a string");
    label = j["label"].get<std::string>();
  }
  return Potential(std::move(c), std::move(label));
}

void SpikeConfig::validate() const {
  if (n < 4) throw InvalidInput("spike config: n must be >= 4");
  if (j < 1 || j > 4) throw InvalidInput("spike config: j must lie in 1..4");
  if (!(a > 0.0)) throw InvalidInput("spike config: a must be positive");
}

Potential gue_potential() { return Potential({0.0, 0.0, 0.5}, "gue"); }

Potential quartic_potential() { return Potential({0.0, 0.0, 0.0, 0.0, 0.25}, "quartic"); }

double eynard_etilde(double e_bar) {
  if (!(e_bar > 2.0)) throw InvalidInput("eynard: e_bar must exceed 2");
  // The defining integral is affine in et: I(et) = A - et*B. Substituting
  // x = 2 cosh u makes the integrand smooth.
  const auto q = gauss_legendre(60, 0.0, std::acosh(e_bar / 2.0));
  double A = 0.0, B = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double u = q.nodes[i];
    const double x = 2.0 * std::cosh(u);
    const double s = 2.0 * std::sinh(u);
    const double w = q.weights[i] * s * s;
    A += w * (x - e_bar) * x;
    B += w * (x - e_bar);
  }
  if (B == 0.0) throw InvalidInput("eynard: root of the defining integral is not bracketed");
  return A / B;
}

Potential eynard_potential(double e_bar, double eps) {
  if (!(e_bar > 2.0 && e_bar <= 6.0)) throw InvalidInput("eynard: e_bar must lie in (2, 6]");
  if (!(eps >= 0.0 && eps < 0.1)) throw InvalidInput("eynard: eps must lie in [0, 0.1)");
  const double et = eynard_etilde(e_bar);
  const double s = (1.0 + eps) / (1.0 + e_bar * et);
  std::vector<double> c = {0.0, 2.0 * (e_bar + et), (e_bar * et - 2.0) / 2.0, -(e_bar + et) / 3.0, 0.25};
  for (double& v : c) v *= s;
  std::ostringstream lab;
  lab << "eynard(" << e_bar << "," << eps << ")";
  return Potential(std::move(c), lab.str());
}

Potential two_well_potential(double t, double s, double w1, double w2) {
  if (!(t > 0.0 && s > 0.0 && w1 > 0.0 && w2 > w1)) throw InvalidInput("two-well: need t, s > 0 and 0 < w1 < w2");
  // (x - w1)^2 (x - w2)^2, ascending powers
  const double q[5] = {w1 * w1 * w2 * w2, -2.0 * w1 * w2 * (w1 + w2), w1 * w1 + w2 * w2 + 4.0 * w1 * w2,
                       -2.0 * (w1 + w2), 1.0};
  std::vector<double> c(7, 0.0);
  c[2] = t / 2.0;
  for (int i = 0; i < 5; ++i) c[i + 2] += s * q[i] / (i + 2);
  std::ostringstream lab;
  lab << "twowell(" << t << "," << s << "," << w1 << "," << w2 << ")";
  return Potential(std::move(c), lab.str());
}

Potential builtin_potential(const std::string& name) {
  if (name == "twowell") return two_well_potential(1.0, 0.2, 2.5, 5.0);
  if (name == "gue") return gue_potential();
  if (name == "quartic") return quartic_potential();
  if (name == "eynard") return eynard_potential(3.0, 0.02);
  if (name.rfind("eynard:", 0) == 0) {
    std::istringstream in(name.substr(7));
    double e = 0.0, eps = 0.0;
    char comma = 0;
    if (!(in >> e >> comma >> eps) || comma != ',')
      throw InvalidInput("potential: expected eynard:<e_bar>,<eps>");
    return eynard_potential(e, eps);
  }
  throw InvalidInput("potential: unknown builtin '" + name + "'");
}

}  // namespace sedge
