#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sedge/equilibrium.hpp"

namespace sedge {

enum class Regime { Subcritical, Critical, SupercriticalGeneric, SecondaryCritical, TransitCritical };

std::string to_string(Regime r);

struct Maximizer {
  double x = 0.0;
  // Smallest k with G^{(2k)}(x) != 0.
  int k = 1;
  double value = 0.0;
};

struct AWitness {
  bool in = false;
  double x_bar = 0.0;
  double G_bar = 0.0;
  double H_c = 0.0;
};

struct TransitionProfile {
  double a = 0.0;
  double c_a = 0.0;
  double Gmax = 0.0;
  double a_c = 0.0;
  double half_vprime_e = 0.0;
  std::vector<Maximizer> maximizers;
  Regime regime = Regime::Subcritical;

  nlohmann::json to_json() const;
};

// Phase structure in the spike strength a: G(x;a) = g - V + a x, H(x;a) = -g + a x + ell.
class Transition {
 public:
  static constexpr double kTieTol = 1e-9;

  explicit Transition(const Equilibrium& eq);

  const Equilibrium& equilibrium() const { return eq_; }
  double edge() const { return eq_.edge(); }
  double half_vprime_e() const { return half_; }

  double c_of_a(double a) const;
  double G(double x, double a) const;
  double H(double x, double a) const;
  // G^{(k)}(x;a), k = 0..order, for x > edge.
  std::vector<double> G_derivatives(double x, double a, int order) const;

  // x beyond which G(.;a) is certified decreasing.
  double scan_horizon(double a) const;
  AWitness in_A_V(double a) const;
  double critical_a() const;

  // Interior local maxima of G(.;a) on (c(a), scan_horizon], sorted by x.
  std::vector<Maximizer> local_maxima(double a) const;
  // Local maxima within tie_tol of the global maximum.
  std::vector<Maximizer> maximizer_set(double a, double tie_tol = kTieTol) const;
  // Global maximizer on [c(a), inf); returns c(a) when no interior maximum beats G(c(a)).
  double x0(double a) const;
  // Local maximizer of G(.;a) nearest to a starting guess, if one exists nearby.
  std::optional<double> local_max_near(double a, double guess) const;

  // Values in (a_lo, a_hi) where the global maximizer jumps.
  std::vector<double> secondary_criticals(double a_lo, double a_hi, int grid = 200) const;

  // n-free part of the fluctuation scale at a maximizer of flatness order k.
  double fluct_scale(double x, double a, int k) const;
  int flatness_order(double x, double a) const;

  TransitionProfile profile(double a) const;

 private:
  Equilibrium eq_;
  double half_;
  mutable std::optional<double> ac_cache_;
};

}  // namespace sedge
