#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sedge/limitlaws.hpp"
#include "sedge/potential.hpp"

namespace sedge {

class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Counter-based generator: ChaCha20 keystream with key from the seed and nonce from the stream id.
// Output word k of a stream depends only on (seed, stream, k).
class StreamRng {
 public:
  using result_type = std::uint64_t;

  StreamRng(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  static constexpr int kBlocks = 16;

  void refill();

  std::uint64_t seed_, stream_;
  std::array<unsigned char, 32> key_{};
  std::array<unsigned char, 8> nonce_{};
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, kBlocks * 8> buf_{};
  std::size_t pos_ = 0;
};

struct EdgeSample {
  std::vector<double> lambda_max;
  // Smallest eigenvalues; filled by the direct samplers only.
  std::vector<double> lambda_min;
  int n = 0;
  double a = 0.0;
  int j = 1;
  std::string potential;
  std::uint64_t seed = 0;
  // direct-gaussian | direct-gaussian-tridiagonal | mcmc
  std::string method;
  // Post-warm-up acceptance rate (mcmc only).
  double acceptance = 0.0;

  nlohmann::json sidecar() const;
};

enum class GaussianMethod { Dense, Tridiagonal, Auto };

// Draws of M = H + diag(a, 0, ...) of size n - j + 1 with density prop. to e^{-n Tr(M^2/2 - aM)}.
// Replica r uses stream r, so results do not depend on the thread count.
EdgeSample sample_gaussian_spiked(int n, double a, int reps, std::uint64_t seed, int j = 1,
                                  GaussianMethod method = GaussianMethod::Auto);

// Largest and smallest eigenvalues of a symmetric tridiagonal matrix by Sturm bisection.
double tridiagonal_max_eig(const std::vector<double>& d, const std::vector<double>& e);
double tridiagonal_min_eig(const std::vector<double>& d, const std::vector<double>& e);

// log of (N-1)!/t^{N-1} DD[e^{t.}](x_1..x_N); equals t xi for some xi in [min x, max x].
double log_normalized_dd_exp(const std::vector<double>& x, double t);

// Eigenvalue log-density (up to a constant) of the size-N rank-one model with weight e^{-n Tr(V - aM)}.
double log_density_rank1(const std::vector<double>& lambdas, const Potential& V, int n, double a);

struct McmcConfig {
  int steps = 20000;
  int burn_in = 2000;
  int thinning = 1;
  // Initial per-coordinate Gaussian proposal scale; adapted during burn-in.
  double proposal_scale = 0.1;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;

  void validate() const;
};

// Metropolis chain over the eigenvalues (steps counted in sweeps of single-site updates).
// Records max lambda for every thinning-th sweep after burn-in.
EdgeSample mcmc_sample(const Potential& V, int n, double a, const McmcConfig& cfg, int j = 1);

// Full states of a chain, for diagnostics on small systems.
std::vector<std::vector<double>> mcmc_states(const Potential& V, int n, double a, const McmcConfig& cfg,
                                             int j = 1, double* acceptance = nullptr);

// sup |F_emp - F_law| over the sample's largest eigenvalues. F0/F1/mixture CDFs are
// tabulated on 801 points across the sample range and interpolated linearly.
double ks_distance(const EdgeSample& sample, const LimitLaw& law);
double ks_distance(std::vector<double> xs, const std::function<double(double)>& cdf);
double ks_two_sample(std::vector<double> x, std::vector<double> y);

void write_sample(const std::string& csv_path, const EdgeSample& s);
EdgeSample read_sample(const std::string& csv_path);

int thread_count();

}  // namespace sedge
