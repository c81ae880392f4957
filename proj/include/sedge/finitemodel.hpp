#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sedge/potential.hpp"
#include "sedge/specialfn.hpp"

namespace sedge {

class GridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Orthonormal functions psi_i = p_i e^{-nV/2} for the weight e^{-nV}, sampled on a grid.
class OrthoSystem {
 public:
  // L = 0 picks the half-width automatically; m_grid = 0 picks the node count.
  static OrthoSystem build(const Potential& V, int n, int count, double L = 0.0, int m_grid = 0,
                           double a_tilt = 0.0);

  const Potential& potential() const { return V_; }
  int n() const { return n_; }
  int count() const { return count_; }
  double L() const { return L_; }
  const QuadratureRule& grid() const { return grid_; }
  // psi_i(x_q): row i, column q.
  const Eigen::MatrixXd& psi() const { return psi_; }
  // Recurrence x psi_i = b_{i+1} psi_{i+1} + a_i psi_i + b_i psi_{i-1}; b_i = gamma_{i-1}/gamma_i.
  const std::vector<double>& diag() const { return a_; }
  const std::vector<double>& offdiag() const { return b_; }

  // psi_0..psi_{count-1} at an arbitrary x.
  std::vector<double> eval(double x) const;
  double orthonormality_error() const;
  // log of the constant c with psi_0 = c e^{-nV/2}.
  double log_norm0() const { return log_norm0_; }

 private:
  OrthoSystem(const Potential& V) : V_(V) {}

  Potential V_;
  int n_ = 0, count_ = 0;
  double L_ = 0.0;
  QuadratureRule grid_;
  Eigen::MatrixXd psi_;
  std::vector<double> a_, b_;
  double log_norm0_ = 0.0;
};

// Half-width with n V(+-L)/2 > 760 and the tilted weight e^{n(ax - V)} negligible at the ends.
double grid_half_width(const Potential& V, int n, double a = 0.0);

// Christoffel-Darboux kernel sum_{i<N} psi_i(x) psi_i(y).
double cd_kernel(const OrthoSystem& o, int N, double x, double y);
double cd_kernel_sum(const OrthoSystem& o, int N, double x, double y);

using Interval = std::pair<double, double>;

struct GapResult {
  double probability = 0.0;
  // Unclamped value.
  double raw = 0.0;
  double det_unperturbed = 0.0;
  double correction = 0.0;
};

// Rank-one perturbed kernel K_{n-j} + tilde_psi (x) psi_{n-j}.
class SpikedKernel {
 public:
  enum class Route { KernelForm, TailSeries, Limit };

  SpikedKernel(OrthoSystem ortho, double a, int j);
  // Builds an ortho system sized for (n, j) with spare functions for the tail route.
  static SpikedKernel make(const Potential& V, int n, double a, int j);

  Route route() const { return route_; }

  const OrthoSystem& ortho() const { return o_; }
  double a() const { return a_; }
  int j() const { return j_; }
  int N() const { return o_.n() - j_; }

  // Gamma_{n-j}(a) as sign * exp(log_abs).
  double log_abs_gamma() const { return log_abs_gamma_; }
  double gamma_sign() const { return gamma_sign_; }
  double gamma() const { return gamma_sign_ * std::exp(log_abs_gamma_); }
  // <e^{n(ax - V/2)}, psi_i>, i < count, all scaled by the same factor e^{-shift}.
  const std::vector<double>& scaled_projections() const { return proj_; }
  double shift() const { return shift_; }

  const std::vector<double>& tilde_psi_grid() const { return tpsi_grid_; }
  double tilde_psi(double x) const;
  double kernel(double x, double y) const;

  // Nystrom sub-rule over E (intervals clipped to [-L, L]).
  QuadratureRule sub_rule(const std::vector<Interval>& E) const;
  GapResult gap_probability(const std::vector<Interval>& E) const;
  // det(1 - chi_E Ktilde chi_E) without the rank-one factorization.
  double gap_direct(const std::vector<Interval>& E) const;

  // Grid interval outside which every psi_i (i <= n-j) and tilde_psi is negligible.
  Interval active_range() const { return active_; }
  // W^{1/2} Ktilde W^{1/2} on the grid nodes (restricted to active_range when asked).
  Eigen::MatrixXd grid_matrix(bool active_only = true) const;

 private:
  OrthoSystem o_;
  double a_;
  int j_;
  double shift_ = 0.0;
  std::vector<double> proj_;
  double log_abs_gamma_ = 0.0, gamma_sign_ = 1.0;
  std::vector<double> tpsi_grid_;
  Route route_ = Route::KernelForm;
  // Tail route: tilde_psi = sum_{i >= n-j} ratio_i psi_i.
  std::vector<double> tail_;
  Interval active_{0.0, 0.0};

  // Returns the truncation error estimate of the tail.
  double tail_from_jacobi();
};

}  // namespace sedge
