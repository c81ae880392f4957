#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace sedge {

enum ExitCode { kExitOk = 0, kExitInput = 2, kExitNumeric = 3 };

struct RunConfig {
  std::string command;
  // Builtin name or path to a JSON potential.
  std::string potential = "gue";
  // Resolved potential (coefficients and label).
  nlohmann::json potential_resolved;
  std::vector<double> a;
  bool a_critical = false;
  std::optional<double> alpha;
  int n = 100;
  int j = 1;
  double T_min = -8.0;
  double T_max = 10.0;
  int T_steps = 181;
  int reps = 1000;
  std::uint64_t seed = 1;
  // montecarlo: direct | mcmc
  std::string method = "direct";
  int steps = 20000;
  int burn_in = 2000;
  int thinning = 1;
  // gap: I (edge window) | J (window at the maximizer)
  std::string interval = "I";
  double a_max = 0.0;
  int points = 401;
  std::string mc_file, gap_file, law_file;
  double tol = 0.08;
  std::string out = ".";
  std::string format = "csv";

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  bool operator==(const RunConfig& o) const { return to_json() == o.to_json(); }
};

// Entry point of the spectral-edge tool; returns the process exit code.
int cli_main(int argc, const char* const* argv);

}  // namespace sedge
