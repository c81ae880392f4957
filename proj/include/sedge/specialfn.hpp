#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

namespace sedge {

using cplx = std::complex<double>;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  double lo = 0.0;
  double hi = 0.0;

  std::size_t size() const { return nodes.size(); }
};

// Ai and Ai' for |z| <= 50.
cplx airy_ai(cplx z);
cplx airy_ai_prime(cplx z);
double airy_ai(double x);
double airy_ai_prime(double x);

// Both values at once; cheaper than two calls.
void airy_pair(cplx z, cplx& ai, cplx& aip);
void airy_pair(double x, double& ai, double& aip);

double normal_cdf(double t);

// CDF of the density proportional to exp(-x^(2k)).
double gen_gauss_cdf(double t, int k);
// Integral of exp(-x^(2k)) over the real line.
double gen_gauss_mass(int k);

QuadratureRule gauss_legendre(int m, double lo, double hi);

// Composite Gauss-Legendre: `panels` equal panels with m nodes each.
QuadratureRule gauss_legendre_panels(int m, int panels, double lo, double hi);

}  // namespace sedge
