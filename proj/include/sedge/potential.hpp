#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace sedge {

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Polynomial potential; coefficient i multiplies x^i.
class Potential {
 public:
  Potential(std::vector<double> coefficients, std::string label);

  const std::vector<double>& coefficients() const { return coeffs_; }
  const std::string& label() const { return label_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  double leading() const { return coeffs_.back(); }

  // k-th derivative at x (Horner).
  double eval(double x, int k = 0) const;
  // Coefficients of the k-th derivative.
  std::vector<double> derivative_coeffs(int k) const;

  nlohmann::json to_json() const;
  static Potential from_json(const nlohmann::json& j);

 private:
  std::vector<double> coeffs_;
  std::string label_;
};

struct SpikeConfig {
  double a = 0.0;
  int n = 0;
  int j = 1;

  void validate() const;
};

Potential gue_potential();
Potential quartic_potential();

// Root of  int_2^ebar (x - ebar)(x - et) sqrt(x^2 - 4) dx = 0.
double eynard_etilde(double e_bar);
Potential eynard_potential(double e_bar, double eps);

// V'(x) = x (t + s (x - w1)^2 (x - w2)^2): two outer wells at w1 < w2.
Potential two_well_potential(double t, double s, double w1, double w2);

// gue | quartic | eynard | eynard:<ebar>,<eps> | twowell
Potential builtin_potential(const std::string& name);

double poly_eval(const std::vector<double>& c, double x);

}  // namespace sedge
