#include "sedge/sampler.hpp"

#include <sodium.h>

#include <Eigen/Dense>
#include <algorithm>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "sedge/equilibrium.hpp"

namespace sedge {

namespace {

void put_le(unsigned char* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>(v >> (8 * i));
}

std::string fmt17(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

template <class F>
void parallel_for(int count, F&& body) {
  const int threads = std::min(thread_count(), std::max(count, 1));
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (int i = t; i < count; i += threads) body(i);
    });
  for (auto& th : pool) th.join();
}

// Number of eigenvalues below x.
int sturm_count(const std::vector<double>& d, const std::vector<double>& e, double x) {
  int neg = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double off = i == 0 ? 0.0 : e[i - 1] * e[i - 1] / q;
    q = d[i] - x - off;
    if (q == 0.0) q = -1e-300;
    if (q < 0.0) ++neg;
  }
  return neg;
}

std::pair<double, double> gershgorin(const std::vector<double>& d, const std::vector<double>& e) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < d.size(); ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(e[i - 1]);
    if (i + 1 < d.size()) r += std::abs(e[i]);
    lo = std::min(lo, d[i] - r);
    hi = std::max(hi, d[i] + r);
  }
  return {lo, hi};
}

// Bisection for the k-th smallest eigenvalue (0-based).
double tridiagonal_eig(const std::vector<double>& d, const std::vector<double>& e, int k) {
  auto [lo, hi] = gershgorin(d, e);
  for (int it = 0; it < 200 && hi - lo > 4e-16 * std::max({1.0, std::abs(lo), std::abs(hi)}); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (sturm_count(d, e, mid) > k)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> initial_state(const Potential& V, int N) {
  double lo = -1.0, hi = 1.0;
  try {
    const auto eq = Equilibrium::solve(V);
    lo = eq.b0();
    hi = eq.a1();
  } catch (const EquilibriumError&) {
  }
  std::vector<double> x(N);
  const double pi = std::acos(-1.0);
  for (int i = 0; i < N; ++i) x[i] = 0.5 * (lo + hi) - 0.5 * (hi - lo) * std::cos(pi * (i + 0.5) / N);
  return x;
}

}  // namespace

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
  static std::once_flag init;
  std::call_once(init, [] {
    if (sodium_init() < 0) throw SamplerError("rng: libsodium initialisation failed");
  });
  put_le(key_.data(), seed);
  put_le(nonce_.data(), stream);
  pos_ = buf_.size();
}

void StreamRng::refill() {
  std::array<unsigned char, kBlocks * 64> zero{}, out{};
  crypto_stream_chacha20_xor_ic(out.data(), zero.data(), out.size(), nonce_.data(), block_, key_.data());
  block_ += kBlocks;
  for (std::size_t i = 0; i < buf_.size(); ++i) {
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b) v = (v << 8) | out[8 * i + b];
    buf_[i] = v;
  }
  pos_ = 0;
}

StreamRng::result_type StreamRng::operator()() {
  if (pos_ == buf_.size()) refill();
  return buf_[pos_++];
}

nlohmann::json EdgeSample::sidecar() const {
  return {{"n", n},           {"a", a},           {"j", j},
          {"V", potential},   {"seed", seed},     {"method", method},
          {"acceptance", acceptance}, {"reps", lambda_max.size()}};
}

int thread_count() {
  int t = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SPECTRAL_EDGE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) t = v;
  }
  return std::max(t, 1);
}

double tridiagonal_max_eig(const std::vector<double>& d, const std::vector<double>& e) {
  return tridiagonal_eig(d, e, static_cast<int>(d.size()) - 1);
}

double tridiagonal_min_eig(const std::vector<double>& d, const std::vector<double>& e) {
  return tridiagonal_eig(d, e, 0);
}

EdgeSample sample_gaussian_spiked(int n, double a, int reps, std::uint64_t seed, int j, GaussianMethod method) {
  if (n < 1 || j < 1 || j > n || reps < 1) throw InvalidInput("sample_gaussian_spiked: need 1 <= j <= n, reps >= 1");
  const int N = n - j + 1;
  if (method == GaussianMethod::Auto) method = N <= 64 ? GaussianMethod::Dense : GaussianMethod::Tridiagonal;
  EdgeSample s;
  s.n = n;
  s.a = a;
  s.j = j;
  s.potential = "gue";
  s.seed = seed;
  s.method = method == GaussianMethod::Dense ? "direct-gaussian" : "direct-gaussian-tridiagonal";
  s.lambda_max.assign(reps, 0.0);
  s.lambda_min.assign(reps, 0.0);
  const double sd = 1.0 / std::sqrt(static_cast<double>(n));
  const double sd_off = 1.0 / std::sqrt(2.0 * n);
  parallel_for(reps, [&](int r) {
    StreamRng rng(seed, static_cast<std::uint64_t>(r));
    boost::random::normal_distribution<double> normal;
    if (method == GaussianMethod::Dense) {
      Eigen::MatrixXcd M(N, N);
      for (int c = 0; c < N; ++c) {
        M(c, c) = sd * normal(rng);
        for (int q = c + 1; q < N; ++q) {
          const double re = sd_off * normal(rng), im = sd_off * normal(rng);
          M(q, c) = {re, im};
          M(c, q) = {re, -im};
        }
      }
      M(0, 0) += a;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M, Eigen::EigenvaluesOnly);
      s.lambda_max[r] = es.eigenvalues()(N - 1);
      s.lambda_min[r] = es.eigenvalues()(0);
    } else {
      // Householder reduction fixing e_1: same law for the spiked matrix.
      std::vector<double> d(N), e(std::max(N - 1, 0));
      for (int i = 0; i < N; ++i) d[i] = sd * normal(rng);
      for (int k = 1; k < N; ++k) {
        boost::random::gamma_distribution<double> gam(N - k, 1.0);
        e[k - 1] = std::sqrt(gam(rng) / n);
      }
      d[0] += a;
      s.lambda_max[r] = tridiagonal_max_eig(d, e);
      s.lambda_min[r] = tridiagonal_min_eig(d, e);
    }
  });
  return s;
}

double log_normalized_dd_exp(const std::vector<double>& x, double t) {
  const int N = static_cast<int>(x.size());
  if (N == 0) throw SamplerError("divided difference: no points");
  if (N == 1) return t * x[0];
  if (t == 0.0) return 0.0;
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, t * v);
  std::vector<double> y(N);
  double spread = 0.0;
  for (int i = 0; i < N; ++i) {
    y[i] = t * x[i] - m;
    if (!std::isfinite(y[i])) throw SamplerError("divided difference: non-finite point");
    spread = std::max(spread, -y[i]);
  }
  // exp of diag(y) + S (S = ones above the diagonal) at entry (0, N-1). With the similarity
  // S -> 2^s S the scaled matrix diag(y/2^s) + S has a small diagonal, its exponential is
  // entrywise nonnegative, and squaring it s times adds no cancellation.
  int s = 0;
  while (spread / std::ldexp(1.0, s) > 0.5) ++s;
  const double h = std::ldexp(1.0, -s);
  std::vector<double> z(N);
  for (int i = 0; i < N; ++i) z[i] = y[i] * h;
  Eigen::MatrixXd E = Eigen::MatrixXd::Identity(N, N);
  Eigen::MatrixXd XE(N, N);
  for (int k = N + 30; k >= 1; --k) {
    for (int c = 0; c < N; ++c)
      for (int r = 0; r <= c; ++r) XE(r, c) = z[r] * E(r, c) + (r + 1 <= c ? E(r + 1, c) : 0.0);
    E = XE.triangularView<Eigen::Upper>();
    E /= k;
    E.diagonal().array() += 1.0;
  }
  double log_scale = 0.0;
  for (int q = 0; q < s; ++q) {
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(N, N);
    F.triangularView<Eigen::Upper>() = E.triangularView<Eigen::Upper>() * E;
    const double mx = F.cwiseAbs().maxCoeff();
    E = F / mx;
    log_scale = 2.0 * log_scale + std::log(mx);
  }
  const double r = E(0, N - 1);
  if (!(r > 0.0) || !std::isfinite(r)) throw SamplerError("divided difference: non-positive or non-finite result");
  const double out = m + std::log(r) + log_scale - s * (N - 1) * std::log(2.0) + std::lgamma(static_cast<double>(N));
  if (!std::isfinite(out)) throw SamplerError("divided difference: non-finite result");
  return out;
}

double log_density_rank1(const std::vector<double>& lambdas, const Potential& V, int n, double a) {
  std::vector<double> x = lambdas;
  const int N = static_cast<int>(x.size());
  double out = 0.0;
  for (int i = 0; i < N; ++i) {
    out -= n * V.eval(x[i]);
    for (int k = i + 1; k < N; ++k) {
      double d = std::abs(x[i] - x[k]);
      if (d == 0.0) {
        x[k] += 1e-12;
        d = 1e-12;
      }
      out += 2.0 * std::log(d);
    }
  }
  out += log_normalized_dd_exp(x, n * a);
  if (!std::isfinite(out)) throw SamplerError("log density: non-finite value");
  return out;
}

void McmcConfig::validate() const {
  if (steps < 1 || burn_in < 0 || burn_in >= steps) throw InvalidInput("mcmc: need 0 <= burn_in < steps");
  if (thinning < 1) throw InvalidInput("mcmc: thinning must be positive");
  if (!(proposal_scale > 0.0)) throw InvalidInput("mcmc: proposal scale must be positive");
}

namespace {

template <class Record>
double run_chain(const Potential& V, int n, double a, const McmcConfig& cfg, int j, Record&& record) {
  cfg.validate();
  const int N = n - j + 1;
  if (N < 1 || j < 1) throw InvalidInput("mcmc: need 1 <= j <= n");
  if (N > 64) throw InvalidInput("mcmc: size n - j + 1 above 64");
  StreamRng rng(cfg.seed, cfg.stream);
  boost::random::normal_distribution<double> normal;
  boost::random::uniform_01<double> unif;
  std::vector<double> x = initial_state(V, N);
  std::vector<double> sigma(N, cfg.proposal_scale);
  std::vector<int> tried(N, 0), taken(N, 0);
  const double t = n * a;
  double log_dd = log_normalized_dd_exp(x, t);
  long long acc_after = 0, prop_after = 0;
  std::vector<double> trial;
  for (int sweep = 0; sweep < cfg.steps; ++sweep) {
    for (int i = 0; i < N; ++i) {
      const double old = x[i];
      const double cand = old + sigma[i] * normal(rng);
      double dlog = -n * (V.eval(cand) - V.eval(old));
      bool tie = false;
      for (int k = 0; k < N; ++k) {
        if (k == i) continue;
        const double dn = std::abs(cand - x[k]);
        if (dn == 0.0) tie = true;
        dlog += 2.0 * (std::log(dn) - std::log(std::abs(old - x[k])));
      }
      double new_dd = log_dd;
      if (!tie && t != 0.0 && N > 1) {
        trial = x;
        trial[i] = cand;
        new_dd = log_normalized_dd_exp(trial, t);
        dlog += new_dd - log_dd;
      } else if (N == 1) {
        new_dd = t * cand;
        dlog += new_dd - log_dd;
      }
      const bool accept = !tie && std::isfinite(dlog) && (dlog >= 0.0 || unif(rng) < std::exp(dlog));
      if (accept) {
        x[i] = cand;
        log_dd = new_dd;
      }
      if (sweep < cfg.burn_in) {
        ++tried[i];
        taken[i] += accept;
      } else {
        ++prop_after;
        acc_after += accept;
      }
    }
    if (sweep < cfg.burn_in && (sweep + 1) % 50 == 0) {
      for (int i = 0; i < N; ++i) {
        const double rate = static_cast<double>(taken[i]) / tried[i];
        if (rate > 0.5) sigma[i] *= 1.25;
        if (rate < 0.3) sigma[i] /= 1.25;
        tried[i] = taken[i] = 0;
      }
    }
    if (sweep >= cfg.burn_in && (sweep - cfg.burn_in) % cfg.thinning == 0) record(x);
  }
  const double rate = prop_after ? static_cast<double>(acc_after) / prop_after : 0.0;
  if (rate < 0.1 || rate > 0.9) throw SamplerError("mcmc: acceptance rate " + fmt17(rate) + " outside [0.1, 0.9]");
  return rate;
}

}  // namespace

EdgeSample mcmc_sample(const Potential& V, int n, double a, const McmcConfig& cfg, int j) {
  EdgeSample s;
  s.n = n;
  s.a = a;
  s.j = j;
  s.potential = V.label();
  s.seed = cfg.seed;
  s.method = "mcmc";
  s.acceptance = run_chain(V, n, a, cfg, j, [&](const std::vector<double>& x) {
    s.lambda_max.push_back(*std::max_element(x.begin(), x.end()));
  });
  return s;
}

std::vector<std::vector<double>> mcmc_states(const Potential& V, int n, double a, const McmcConfig& cfg, int j,
                                             double* acceptance) {
  std::vector<std::vector<double>> out;
  const double rate = run_chain(V, n, a, cfg, j, [&](const std::vector<double>& x) { out.push_back(x); });
  if (acceptance) *acceptance = rate;
  return out;
}

double ks_distance(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double N = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double F = cdf(xs[i]);
    d = std::max({d, std::abs((i + 1) / N - F), std::abs(F - i / N)});
  }
  return d;
}

double ks_distance(const EdgeSample& sample, const LimitLaw& law) {
  if (sample.lambda_max.empty()) throw SamplerError("ks_distance: empty sample");
  const int n = sample.n;
  if (law.kind == LawKind::Gauss || law.kind == LawKind::GenGauss)
    return ks_distance(sample.lambda_max, [&](double x) { return law.cdf(x, n); });
  const auto [lo_it, hi_it] = std::minmax_element(sample.lambda_max.begin(), sample.lambda_max.end());
  const double lo = *lo_it, hi = *hi_it;
  const int P = 801;
  const double h = (hi - lo) / (P - 1);
  std::vector<double> tab(P);
  parallel_for(P, [&](int i) { tab[i] = law.cdf(lo + i * h, n); });
  return ks_distance(sample.lambda_max, [&](double x) {
    if (h <= 0.0) return tab[0];
    const double u = std::clamp((x - lo) / h, 0.0, static_cast<double>(P - 1));
    const int i = std::min(static_cast<int>(u), P - 2);
    const double w = u - i;
    return (1.0 - w) * tab[i] + w * tab[i + 1];
  });
}

double ks_two_sample(std::vector<double> x, std::vector<double> y) {
  if (x.empty() || y.empty()) throw SamplerError("ks_two_sample: empty sample");
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  std::size_t i = 0, k = 0;
  double d = 0.0;
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  while (i < x.size() && k < y.size()) {
    const double v = std::min(x[i], y[k]);
    while (i < x.size() && x[i] == v) ++i;
    while (k < y.size() && y[k] == v) ++k;
    d = std::max(d, std::abs(i / nx - k / ny));
  }
  return d;
}

void write_sample(const std::string& csv_path, const EdgeSample& s) {
  std::ofstream out(csv_path);
  if (!out) throw SamplerError("write_sample: cannot open " + csv_path);
  const bool with_min = s.lambda_min.size() == s.lambda_max.size();
  out << (with_min ? "lambda_max,lambda_min\n" : "lambda_max\n");
  for (std::size_t i = 0; i < s.lambda_max.size(); ++i) {
    out << fmt17(s.lambda_max[i]);
    if (with_min) out << ',' << fmt17(s.lambda_min[i]);
    out << '\n';
  }
  std::ofstream side(csv_path + ".json");
  if (!side) throw SamplerError("write_sample: cannot open sidecar for " + csv_path);
  side << s.sidecar().dump(2) << '\n';
}

EdgeSample read_sample(const std::string& csv_path) {
  std::ifstream side(csv_path + ".json");
  if (!side) throw SamplerError("read_sample: missing sidecar " + csv_path + ".json");
  nlohmann::json j;
  try {
    side >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SamplerError(std::string("read_sample: bad sidecar: ") + e.what());
  }
  EdgeSample s;
  try {
    s.n = j.at("n").get<int>();
    s.a = j.at("a").get<double>();
    s.j = j.at("j").get<int>();
    s.potential = j.at("V").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.method = j.at("method").get<std::string>();
    s.acceptance = j.at("acceptance").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw SamplerError(std::string("read_sample: sidecar field: ") + e.what());
  }
  std::ifstream in(csv_path);
  if (!in) throw SamplerError("read_sample: cannot open " + csv_path);
  std::string line;
  std::getline(in, line);
  const bool with_min = line.find("lambda_min") != std::string::npos;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b;
    std::getline(ls, a, ',');
    s.lambda_max.push_back(std::stod(a));
    if (with_min && std::getline(ls, b, ',')) s.lambda_min.push_back(std::stod(b));
  }
  return s;
}

}  // namespace sedge
