#pragma once

#include <array>
#include <cmath>

namespace sedge {

// Truncated Taylor series in one variable: c[k] is the coefficient of t^k.
class Jet {
 public:
  static constexpr int kMax = 9;

  explicit Jet(int order = 0) : n_(order) { c_.fill(0.0); }
  static Jet constant(double v, int order) {
    Jet j(order);
    j.c_[0] = v;
    return j;
  }
  static Jet variable(double v, int order) {
    Jet j(order);
    j.c_[0] = v;
    if (order >= 1) j.c_[1] = 1.0;
    return j;
  }

  int order() const { return n_; }
  double operator[](int k) const { return c_[k]; }
  double& operator[](int k) { return c_[k]; }

  // k-th derivative at the expansion point.
  double derivative(int k) const {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return c_[k] * f;
  }

  Jet operator+(const Jet& o) const {
    Jet r(n_);
    for (int k = 0; k <= n_; ++k) r.c_[k] = c_[k] + o.c_[k];
    return r;
  }
  Jet operator-(const Jet& o) const {
    Jet r(n_);
    for (int k = 0; k <= n_; ++k) r.c_[k] = c_[k] - o.c_[k];
    return r;
  }
  Jet operator*(const Jet& o) const {
    Jet r(n_);
    for (int k = 0; k <= n_; ++k)
      for (int i = 0; i <= k; ++i) r.c_[k] += c_[i] * o.c_[k - i];
    return r;
  }
  Jet operator*(double s) const {
    Jet r(n_);
    for (int k = 0; k <= n_; ++k) r.c_[k] = c_[k] * s;
    return r;
  }
  Jet operator+(double s) const {
    Jet r = *this;
    r.c_[0] += s;
    return r;
  }
  Jet operator/(const Jet& o) const {
    Jet r(n_);
    for (int k = 0; k <= n_; ++k) {
      double s = c_[k];
      for (int i = 1; i <= k; ++i) s -= o.c_[i] * r.c_[k - i];
      r.c_[k] = s / o.c_[0];
    }
    return r;
  }

  friend Jet sqrt(const Jet& a) {
    Jet r(a.n_);
    r.c_[0] = std::sqrt(a.c_[0]);
    for (int k = 1; k <= a.n_; ++k) {
      double s = a.c_[k];
      for (int i = 1; i < k; ++i) s -= r.c_[i] * r.c_[k - i];
      r.c_[k] = s / (2.0 * r.c_[0]);
    }
    return r;
  }
  friend Jet log(const Jet& a) {
    // (log a)' = a'/a
    Jet r(a.n_);
    r.c_[0] = std::log(a.c_[0]);
    for (int k = 1; k <= a.n_; ++k) {
      double s = k * a.c_[k];
      for (int i = 1; i < k; ++i) s -= i * r.c_[i] * a.c_[k - i];
      r.c_[k] = s / (k * a.c_[0]);
    }
    return r;
  }

 private:
  int n_;
  std::array<double, kMax + 1> c_;
};

}  // namespace sedge
