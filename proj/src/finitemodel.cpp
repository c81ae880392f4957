#include "sedge/finitemodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sedge {

namespace {

constexpr double kUnderflow = 760.0;  // e^{-760} is below the smallest double
constexpr double kPanel = 0.25;
constexpr int kPanelNodes = 16;
constexpr int kMaxCount = 480;

}  // namespace

double grid_half_width(const Potential& V, int n, double a) {
  if (n < 1) throw GridError("grid: n must be positive");
  auto ok = [&](double L) {
    if (n * V.eval(L) / 2.0 <= kUnderflow || n * V.eval(-L) / 2.0 <= kUnderflow) return false;
    if (a == 0.0) return true;
    // The tilted weight e^{n(ax - V)} must be negligible at both ends relative to its peak.
    double peak = -1e300;
    for (int i = 0; i <= 400; ++i) {
      const double x = -L + 2.0 * L * i / 400;
      peak = std::max(peak, n * (a * x - V.eval(x)));
    }
    return n * (a * L - V.eval(L)) < peak - 50.0 && n * (-a * L - V.eval(-L)) < peak - 50.0;
  };
  double L = 1.0;
  while (!ok(L)) {
    L *= 1.25;
    if (L > 1e4) throw GridError("grid: no half-width below 1e4 captures the weight");
  }
  return L;
}

OrthoSystem OrthoSystem::build(const Potential& V, int n, int count, double L, int m_grid, double a_tilt) {
  if (n < 1 || count < 1) throw GridError("ortho: n and count must be positive");
  if (count > kMaxCount) throw GridError("ortho: function count above cap");
  OrthoSystem o(V);
  o.n_ = n;
  o.count_ = count;
  o.L_ = L > 0.0 ? L : grid_half_width(V, n, a_tilt);
  if (n * V.eval(o.L_) / 2.0 <= 322.0 * std::log(10.0) || n * V.eval(-o.L_) / 2.0 <= 322.0 * std::log(10.0))
    throw GridError("ortho: weight not negligible at the grid ends");
  int panels = static_cast<int>(std::ceil(2.0 * o.L_ / kPanel));
  if (m_grid > 0) panels = (m_grid + kPanelNodes - 1) / kPanelNodes;
  panels = std::max(panels, (8 * count + kPanelNodes - 1) / kPanelNodes);
  o.grid_ = gauss_legendre_panels(kPanelNodes, panels, -o.L_, o.L_);
  const int m = static_cast<int>(o.grid_.size());

  // Lanczos on u = sqrt(w) psi with full reorthogonalization.
  Eigen::VectorXd x(m), sw(m), u0(m);
  double top = -1e300;
  for (int q = 0; q < m; ++q) {
    x[q] = o.grid_.nodes[q];
    sw[q] = std::sqrt(o.grid_.weights[q]);
    top = std::max(top, -n * V.eval(x[q]) / 2.0);
  }
  for (int q = 0; q < m; ++q) u0[q] = sw[q] * std::exp(-n * V.eval(x[q]) / 2.0 - top);
  const double nrm0 = u0.norm();
  o.log_norm0_ = -top - std::log(nrm0);
  Eigen::MatrixXd U(m, count);
  U.col(0) = u0 / nrm0;
  o.a_.assign(count, 0.0);
  o.b_.assign(count + 1, 0.0);
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd v = x.cwiseProduct(U.col(i));
    o.a_[i] = U.col(i).dot(v);
    v -= o.a_[i] * U.col(i);
    if (i > 0) v -= o.b_[i] * U.col(i - 1);
    for (int pass = 0; pass < 2; ++pass)
      for (int k = 0; k <= i; ++k) v -= U.col(k).dot(v) * U.col(k);
    o.b_[i + 1] = v.norm();
    if (i + 1 < count) {
      if (!(o.b_[i + 1] > 1e-12)) throw GridError("ortho: recurrence broke down (grid too coarse)");
      U.col(i + 1) = v / o.b_[i + 1];
    }
  }
  o.psi_.resize(count, m);
  for (int i = 0; i < count; ++i)
    for (int q = 0; q < m; ++q) o.psi_(i, q) = U(q, i) / sw[q];
  if (o.orthonormality_error() > 1e-9) throw GridError("ortho: loss of orthogonality");
  return o;
}

std::vector<double> OrthoSystem::eval(double x) const {
  // Recurrence on monic-scaled values, with the weight carried in the log.
  std::vector<double> out(count_);
  double logw = -n_ * V_.eval(x) / 2.0 + log_norm0_;
  double pm = 0.0, p = 1.0;
  for (int i = 0; i < count_; ++i) {
    out[i] = p * std::exp(logw);
    if (i + 1 == count_) break;
    double pn = ((x - a_[i]) * p - (i > 0 ? b_[i] * pm : 0.0)) / b_[i + 1];
    pm = p;
    p = pn;
    const double s = std::max(std::abs(p), std::abs(pm));
    if (s > 1e200) {
      p /= s;
      pm /= s;
      logw += std::log(s);
    }
  }
  return out;
}

double OrthoSystem::orthonormality_error() const {
  Eigen::MatrixXd Pw = psi_;
  for (int q = 0; q < Pw.cols(); ++q) Pw.col(q) *= grid_.weights[q];
  const Eigen::MatrixXd G = Pw * psi_.transpose();
  return (G - Eigen::MatrixXd::Identity(count_, count_)).cwiseAbs().maxCoeff();
}

double cd_kernel_sum(const OrthoSystem& o, int N, double x, double y) {
  if (N < 1 || N >= o.count()) throw GridError("cd kernel: need 1 <= N < count");
  const auto px = o.eval(x), py = o.eval(y);
  double s = 0.0;
  for (int i = 0; i < N; ++i) s += px[i] * py[i];
  return s;
}

double cd_kernel(const OrthoSystem& o, int N, double x, double y) {
  if (std::abs(x - y) < 1e-6) return cd_kernel_sum(o, N, x, y);
  if (N < 1 || N >= o.count()) throw GridError("cd kernel: need 1 <= N < count");
  const auto px = o.eval(x), py = o.eval(y);
  return o.offdiag()[N] * (px[N] * py[N - 1] - px[N - 1] * py[N]) / (x - y);
}

SpikedKernel SpikedKernel::make(const Potential& V, int n, double a, int j) {
  for (int spare = 96;; spare *= 2) {
    const int count = std::min(kMaxCount, n - j + 1 + spare);
    try {
      return SpikedKernel(OrthoSystem::build(V, n, count, 0.0, 0, a), a, j);
    } catch (const GridError&) {
      if (count == kMaxCount) throw;
    }
  }
}

SpikedKernel::SpikedKernel(OrthoSystem ortho, double a, int j) : o_(std::move(ortho)), a_(a), j_(j) {
  if (j < 1 || j > 4) throw GridError("spiked kernel: j must lie in 1..4");
  const int N = o_.n() - j;
  if (N < 1 || N >= o_.count()) throw GridError("spiked kernel: ortho system too small for n - j");
  const auto& g = o_.grid();
  const int m = static_cast<int>(g.size());
  const int n = o_.n();
  const auto& V = o_.potential();
  std::vector<double> expo(m);
  shift_ = -1e300;
  for (int q = 0; q < m; ++q) {
    expo[q] = n * (a * g.nodes[q] - V.eval(g.nodes[q]) / 2.0);
    shift_ = std::max(shift_, expo[q]);
  }
  std::vector<double> f(m);
  for (int q = 0; q < m; ++q) f[q] = std::exp(expo[q] - shift_);
  proj_.assign(o_.count(), 0.0);
  for (int i = 0; i < o_.count(); ++i) {
    double s = 0.0;
    for (int q = 0; q < m; ++q) s += g.weights[q] * f[q] * o_.psi()(i, q);
    proj_[i] = s;
  }
  tpsi_grid_.assign(m, 0.0);
  if (a == 0.0) {
    // Gamma vanishes; tilde_psi tends to psi_{n-j} as a -> 0.
    route_ = Route::Limit;
    log_abs_gamma_ = -std::numeric_limits<double>::infinity();
    gamma_sign_ = 0.0;
    tail_.assign(1, 1.0);
    for (int q = 0; q < m; ++q) tpsi_grid_[q] = o_.psi()(N, q);
  } else {
    // Condition of the quadrature for Gamma: digits lost to cancellation.
    double mass = 0.0, edge = 0.0;
    for (int q = 0; q < m; ++q) {
      const double c = std::abs(g.weights[q] * f[q] * o_.psi()(N, q));
      mass += c;
      if (std::abs(g.nodes[q]) > 0.95 * o_.L()) edge += c;
    }
    const double cond = mass / std::max(std::abs(proj_[N]), 1e-300);
    // Pick the route with the smaller error estimate: cancellation in the kernel form
    // against truncation of the tail series.
    const double kernel_err = cond * 1e-16;
    bool done = false;
    if (kernel_err > 1e-13) {
      double tail_err = std::numeric_limits<double>::infinity();
      try {
        tail_err = tail_from_jacobi();
      } catch (const GridError&) {
      }
      if (tail_err < kernel_err) {
        route_ = Route::TailSeries;
        for (int q = 0; q < m; ++q) {
          double s = 0.0;
          for (std::size_t k = 0; k < tail_.size(); ++k) s += tail_[k] * o_.psi()(N + static_cast<int>(k), q);
          tpsi_grid_[q] = s;
        }
        done = true;
      }
      if (std::min(tail_err, kernel_err) > 1e-6)
        throw GridError("spiked kernel: tilde_psi not resolvable; increase the function count");
    }
    if (!done) {
      route_ = Route::KernelForm;
      if (edge > 1e-10 * mass) throw GridError("spiked kernel: tilted weight not captured by the grid");
      log_abs_gamma_ = shift_ + std::log(std::abs(proj_[N]));
      gamma_sign_ = proj_[N] > 0.0 ? 1.0 : -1.0;
      // tilde_psi = (f - int K(x,y) f(y) dy) / Gamma, all scaled by e^{-shift}.
      for (int q = 0; q < m; ++q) {
        double s = f[q];
        for (int i = 0; i < N; ++i) s -= proj_[i] * o_.psi()(i, q);
        tpsi_grid_[q] = s / proj_[N];
      }
    }
  }

  // Active range: where any of psi_0..psi_N or tilde_psi is above 1e-17 of its peak (in sqrt(w) scale).
  std::vector<double> peak(N + 2, 0.0);
  for (int q = 0; q < m; ++q) {
    const double sw = std::sqrt(g.weights[q]);
    for (int i = 0; i <= N; ++i) peak[i] = std::max(peak[i], std::abs(sw * o_.psi()(i, q)));
    peak[N + 1] = std::max(peak[N + 1], std::abs(sw * tpsi_grid_[q]));
  }
  int qlo = m - 1, qhi = 0;
  for (int q = 0; q < m; ++q) {
    const double sw = std::sqrt(g.weights[q]);
    bool on = std::abs(sw * tpsi_grid_[q]) > 1e-17 * peak[N + 1];
    for (int i = 0; i <= N && !on; ++i) on = std::abs(sw * o_.psi()(i, q)) > 1e-17 * peak[i];
    if (on) {
      qlo = std::min(qlo, q);
      qhi = std::max(qhi, q);
    }
  }
  active_ = {std::max(-o_.L(), g.nodes[std::max(qlo, 0)] - kPanel),
             std::min(o_.L(), g.nodes[std::min(qhi, m - 1)] + kPanel)};
}

double SpikedKernel::tail_from_jacobi() {
  // Gamma_i = e^{-log_norm0} (e^{naJ} e_0)_i; the Taylor series of e^{naJ} e_0 has no
  // cancellation in the components i >= n - j that carry tilde_psi.
  const int N = this->N();
  const int S = o_.count();
  const int imax = N + (S - 1 - N) / 2;
  const double t = o_.n() * a_;
  const auto& A = o_.diag();
  const auto& B = o_.offdiag();
  std::vector<double> v(S, 0.0), w(S);
  v[0] = 1.0;
  double logv = 0.0, logs = 0.0;
  bool started = false;
  std::vector<double> s(imax - N + 1, 0.0);
  int k = 0;
  for (k = 1; k < 4000; ++k) {
    for (int i = 0; i < S; ++i) {
      double y = A[i] * v[i];
      if (i > 0) y += B[i] * v[i - 1];
      if (i + 1 < S) y += B[i + 1] * v[i + 1];
      w[i] = y * t / k;
    }
    v.swap(w);
    double mx = 0.0;
    for (double x : v) mx = std::max(mx, std::abs(x));
    if (mx == 0.0) break;
    for (double& x : v) x /= mx;
    logv += std::log(mx);
    if (k >= N) {
      if (!started) {
        started = true;
        logs = logv;
      }
      const double c = std::exp(logv - logs);
      double add = 0.0, tot = 0.0;
      for (int i = N; i <= imax; ++i) {
        s[i - N] += c * v[i];
        add = std::max(add, std::abs(c * v[i]));
        tot = std::max(tot, std::abs(s[i - N]));
      }
      if (tot > 1e200) {
        for (double& x : s) x /= tot;
        logs += std::log(tot);
      }
      if (k > N + 10 && k > std::abs(t) && add < 1e-18 * tot) break;
    }
  }
  if (k > 2 * (S - 1) - imax) throw GridError("spiked kernel: tail series needs more orthonormal functions");
  if (s.front() == 0.0) throw GridError("spiked kernel: Gamma vanishes");
  log_abs_gamma_ = logs + std::log(std::abs(s.front())) - o_.log_norm0();
  gamma_sign_ = s.front() > 0.0 ? 1.0 : -1.0;
  tail_.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) tail_[i] = s[i] / s.front();
  return std::abs(s.back() / s.front()) + std::abs(s[s.size() - 2] / s.front());
}

double SpikedKernel::tilde_psi(double x) const {
  const auto p = o_.eval(x);
  if (route_ != Route::KernelForm) {
    double s = 0.0;
    for (std::size_t k = 0; k < tail_.size(); ++k) s += tail_[k] * p[N() + k];
    return s;
  }
  double s = std::exp(o_.n() * (a_ * x - o_.potential().eval(x) / 2.0) - shift_);
  for (int i = 0; i < N(); ++i) s -= proj_[i] * p[i];
  return s / proj_[N()];
}

double SpikedKernel::kernel(double x, double y) const {
  return cd_kernel(o_, N(), x, y) + tilde_psi(x) * o_.eval(y)[N()];
}

QuadratureRule SpikedKernel::sub_rule(const std::vector<Interval>& E) const {
  QuadratureRule r;
  for (auto [lo, hi] : E) {
    lo = std::max(lo, active_.first);
    hi = std::min(hi, active_.second);
    if (!(hi > lo)) continue;
    const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / kPanel)));
    const auto q = gauss_legendre_panels(kPanelNodes, panels, lo, hi);
    r.nodes.insert(r.nodes.end(), q.nodes.begin(), q.nodes.end());
    r.weights.insert(r.weights.end(), q.weights.begin(), q.weights.end());
  }
  return r;
}

namespace {

struct Sampled {
  Eigen::MatrixXd P;  // sqrt(w) psi_i(x_q), rows i < N + 1
  Eigen::VectorXd t;  // sqrt(w) tilde_psi(x_q)
};

Sampled sample(const SpikedKernel& sk, const QuadratureRule& r) {
  const int m = static_cast<int>(r.size());
  const int N = sk.N();
  Sampled s{Eigen::MatrixXd(N + 1, m), Eigen::VectorXd(m)};
  for (int q = 0; q < m; ++q) {
    const double sw = std::sqrt(r.weights[q]);
    const auto p = sk.ortho().eval(r.nodes[q]);
    for (int i = 0; i <= N; ++i) s.P(i, q) = sw * p[i];
    s.t[q] = sw * sk.tilde_psi(r.nodes[q]);
  }
  return s;
}

}  // namespace

GapResult SpikedKernel::gap_probability(const std::vector<Interval>& E) const {
  GapResult g;
  const auto r = sub_rule(E);
  if (r.size() == 0) {
    g.probability = g.raw = g.det_unperturbed = 1.0;
    return g;
  }
  const auto s = sample(*this, r);
  const int m = static_cast<int>(r.size());
  const Eigen::MatrixXd Pn = s.P.topRows(N());
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m) - Pn.transpose() * Pn;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  g.det_unperturbed = lu.determinant();
  if (!std::isfinite(g.det_unperturbed)) throw GridError("gap: determinant is not finite");
  if (std::abs(g.det_unperturbed) < 1e-300) {
    g.correction = 0.0;
    g.raw = 0.0;
  } else {
    const Eigen::VectorXd y = lu.solve(s.t);
    g.correction = 1.0 - s.P.row(N()).dot(y);
    g.raw = g.det_unperturbed * g.correction;
  }
  g.probability = std::clamp(g.raw, 0.0, 1.0);
  return g;
}

double SpikedKernel::gap_direct(const std::vector<Interval>& E) const {
  const auto r = sub_rule(E);
  if (r.size() == 0) return 1.0;
  const auto s = sample(*this, r);
  Eigen::MatrixXd M = -(s.P.topRows(N()).transpose() * s.P.topRows(N()));
  M -= s.t * s.P.row(N());
  M.diagonal().array() += 1.0;
  return M.partialPivLu().determinant();
}

Eigen::MatrixXd SpikedKernel::grid_matrix(bool active_only) const {
  const auto& g = o_.grid();
  std::vector<int> idx;
  for (int q = 0; q < static_cast<int>(g.size()); ++q)
    if (!active_only || (g.nodes[q] >= active_.first && g.nodes[q] <= active_.second)) idx.push_back(q);
  const int m = static_cast<int>(idx.size());
  Eigen::MatrixXd P(N() + 1, m);
  Eigen::VectorXd t(m);
  for (int c = 0; c < m; ++c) {
    const int q = idx[c];
    const double sw = std::sqrt(g.weights[q]);
    for (int i = 0; i <= N(); ++i) P(i, c) = sw * o_.psi()(i, q);
    t[c] = sw * tpsi_grid_[q];
  }
  Eigen::MatrixXd M = P.topRows(N()).transpose() * P.topRows(N());
  M += t * P.row(N());
  return M;
}

}  // namespace sedge
