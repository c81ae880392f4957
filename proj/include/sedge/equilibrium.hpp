#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "sedge/potential.hpp"

namespace sedge {

class EquilibriumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RegularityReport {
  bool pass = false;
  double h_min = 0.0;
  double h_min_at = 0.0;
  // Smallest value of ell - (2g(x) - V(x)) on the outside grids.
  double right_margin = 0.0;
  double right_margin_at = 0.0;
  double left_margin = 0.0;
  double left_margin_at = 0.0;
  std::vector<std::string> failures;
};

// One-cut equilibrium measure of a polynomial potential, with density
// Psi(x) = h(x) sqrt((x - b0)(a1 - x)) / (2 pi) on [b0, a1].
class Equilibrium {
 public:
  static Equilibrium solve(const Potential& V);
  // Endpoints given; used for diagnostics and for candidate screening.
  static Equilibrium from_endpoints(const Potential& V, double b0, double a1);

  const Potential& potential() const { return V_; }
  double b0() const { return m_ - r_; }
  double a1() const { return m_ + r_; }
  double edge() const { return a1(); }
  double ell() const { return ell_; }
  double beta() const { return beta_; }
  const std::vector<double>& h_coeffs() const { return h_; }
  // Residuals of the two endpoint conditions.
  double residual_mean() const { return res_[0]; }
  double residual_moment() const { return res_[1]; }

  double h(double x) const;
  double density(double x) const;
  // int log|x - s| Psi(s) ds for any real x.
  double log_potential(double x) const;
  // Real g-function for z >= a1 and its first two derivatives (z > a1 for g'').
  double g(double z) const;
  double g_prime(double z) const;
  double g_second(double z) const;
  // g^{(k)}(z), k = 0..order (order <= 9), for z > a1.
  std::vector<double> g_derivatives(double z, int order) const;
  // Second route: g^{(k)}(z) = (-1)^{k-1}(k-1)! int Psi(s)/(z-s)^k ds, k >= 1.
  double g_derivative_quadrature(double z, int k, int nodes = 512) const;
  // 2 int log|x - s| Psi ds - V(x) - ell; zero on the support, negative outside.
  double effective_potential(double x) const;
  double total_mass() const { return mass_; }

  RegularityReport check_regular() const;
  nlohmann::json to_json() const;

 private:
  Equilibrium(const Potential& V, double m, double r);

  Potential V_;
  double m_ = 0.0, r_ = 0.0;
  std::vector<double> h_;
  // Cosine coefficients of the density in the angle variable s = m + r cos(theta).
  std::vector<double> fc_;
  double mass_ = 0.0;
  double ell_ = 0.0;
  double beta_ = 0.0;
  double res_[2] = {0.0, 0.0};
};

}  // namespace sedge
