#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sedge/specialfn.hpp"
#include "sedge/transition.hpp"

namespace sedge {

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Nystrom discretization of the Airy kernel restricted to [T, inf).
class AiryDiscretization {
 public:
  AiryDiscretization(double T, int m);
  // Rule on [T, hi] instead of the default cut.
  AiryDiscretization(double T, int m, double hi);

  double T() const { return T_; }
  int size() const { return static_cast<int>(rule_.size()); }
  const QuadratureRule& rule() const { return rule_; }
  const std::vector<double>& ai() const { return ai_; }
  // I - W^{1/2} K W^{1/2}, row-major.
  const std::vector<double>& system() const { return sys_; }

  double det() const;
  // <(1 - K)^{-1} f, Ai> on [T, inf) for f sampled at the nodes.
  double resolvent_inner(const std::vector<double>& f) const;

 private:
  double T_;
  QuadratureRule rule_;
  std::vector<double> ai_;
  std::vector<double> sys_;
};

double airy_kernel(double x, double y);

double f0(double T, int m = 40);
double f1(double T, double alpha, int m = 40);
// Checked variant: throws ConvergenceError when m and 2m disagree by more than tol.
double f0_checked(double T, int m = 40, double tol = 1e-7);

// C_alpha(xi) via real integrals of Ai.
double c_alpha(double xi, double alpha);
// Same function by quadrature of the defining contour integral.
double c_alpha_contour(double xi, double alpha);
// Throws ConvergenceError when the two routes differ by more than tol.
double c_alpha_checked(double xi, double alpha, double tol = 1e-5);

// int_0^inf Ai(xi + t) e^{s t} dt
double airy_exp_tail(double xi, double s);

enum class LawKind { F0, F1, Gauss, GenGauss, Mixture };
std::string to_string(LawKind k);

struct LimitLaw {
  LawKind kind = LawKind::F0;
  double center = 0.0;
  double scale_const = 1.0;
  // 2/3, 1/2 or 1/(2k)
  double scale_exponent = 2.0 / 3.0;
  // Law parameter of F1.
  double alpha = 0.0;
  int k = 1;
  std::vector<double> weights;
  std::vector<LimitLaw> components;
  int m = 40;

  // CDF of the standardized variable.
  double standard_cdf(double T) const;
  // CDF of the largest eigenvalue at x for size n.
  double cdf(double x, int n) const;
  // Standardized variable for x at size n (single laws only).
  double standardize(double x, int n) const;
  nlohmann::json to_json() const;
  static LimitLaw from_json(const nlohmann::json& j);
};

LimitLaw make_f0_law(double center, double beta);
LimitLaw make_f1_law(double center, double beta, double alpha);
LimitLaw make_gauss_law(double center, double scale_const);
LimitLaw make_gen_gauss_law(double center, double scale_const, int k);
LimitLaw make_mixture(std::vector<double> weights, std::vector<LimitLaw> components);

// Weights proportional to prefactor_i * exp(rate_i * alpha).
struct MixtureConstants {
  std::vector<double> prefactor;
  std::vector<double> rate;
};
std::vector<double> mixture_weights(const MixtureConstants& c, double alpha);

// One-cut closed forms of the outer parametrix factors.
double outer_M(double b0, double a1, double z, int j);
// -i times the conjugate factor, positive for z > a1.
double outer_M_tilde(double b0, double a1, double z, int j);
double outer_B_edge(double b0, double a1, double beta);

enum class MixtureRegime { NearCritical, Secondary, UnequalFlatness, TransitCritical };
std::string to_string(MixtureRegime r);

struct MixtureSetup {
  MixtureRegime regime = MixtureRegime::NearCritical;
  double a0 = 0.0;
  // Location of each component: edge for the F0/F1 part, otherwise maximizers.
  std::vector<double> points;
  std::vector<int> orders;
  MixtureConstants constants;
};

MixtureSetup mixture_setup(const Transition& tr, MixtureRegime regime, double a0, int j);
std::vector<double> mixture_weights(const Transition& tr, MixtureRegime regime, double a0, double alpha,
                                    int j);

struct PredictOptions {
  // |alpha| window around a critical value inside which a near-critical law is returned.
  double critical_window = 2.0;
  double mixture_window = 30.0;
  int m = 40;
};

struct Prediction {
  LimitLaw law;
  std::string regime;
  // Scaling parameter of a relative to a0 (nan when not near a critical value).
  double alpha = 0.0;
  double a0 = 0.0;
};

Prediction predict_law(const Transition& tr, double a, int n, int j = 1, const PredictOptions& opt = {});

}  // namespace sedge
