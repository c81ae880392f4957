#include "sedge/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "sedge/equilibrium.hpp"
#include "sedge/finitemodel.hpp"
#include "sedge/limitlaws.hpp"
#include "sedge/potential.hpp"
#include "sedge/sampler.hpp"
#include "sedge/transition.hpp"

namespace sedge {

namespace fs = std::filesystem;

namespace {

std::string fmt17(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

void write_json(const fs::path& p, const nlohmann::json& j) {
  std::ofstream out(p);
  if (!out) throw InvalidInput("cannot write " + p.string());
  out << j.dump(2) << '\n';
}

void write_csv(const fs::path& p, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(p);
  if (!out) throw InvalidInput("cannot write " + p.string());
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << fmt17(r[i]);
    out << '\n';
  }
}

nlohmann::json rows_json(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json o;
    for (std::size_t i = 0; i < header.size(); ++i) o[header[i]] = r[i];
    arr.push_back(o);
  }
  return arr;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(path + ": malformed JSON: " + e.what());
  }
}

Potential resolve_potential(RunConfig& cfg) {
  Potential V = fs::is_regular_file(cfg.potential) ? Potential::from_json(read_json(cfg.potential))
                                                   : builtin_potential(cfg.potential);
  cfg.potential_resolved = V.to_json();
  return V;
}

void check_size(const RunConfig& cfg) {
  if (cfg.n < 1) throw InvalidInput("--n must be positive");
  if (cfg.j < 1 || cfg.j > 4 || cfg.j > cfg.n) throw InvalidInput("--j must lie in 1..4 and not exceed n");
}

std::vector<double> T_grid(const RunConfig& cfg) {
  if (cfg.T_steps < 1 || !(cfg.T_max >= cfg.T_min)) throw InvalidInput("T grid: need T-steps >= 1 and T-max >= T-min");
  std::vector<double> T(cfg.T_steps);
  for (int i = 0; i < cfg.T_steps; ++i)
    T[i] = cfg.T_steps == 1 ? cfg.T_min : cfg.T_min + (cfg.T_max - cfg.T_min) * i / (cfg.T_steps - 1);
  return T;
}

double single_a(const RunConfig& cfg) {
  if (cfg.a.size() != 1) throw InvalidInput("--a expects exactly one value for this command");
  return cfg.a[0];
}

void emit_table(const RunConfig& cfg, const std::string& stem, nlohmann::json& doc,
                const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  if (cfg.format == "csv")
    write_csv(fs::path(cfg.out) / (stem + ".csv"), header, rows);
  else
    doc["rows"] = rows_json(header, rows);
  write_json(fs::path(cfg.out) / (stem + ".json"), doc);
}

int cmd_equilibrium(RunConfig& cfg) {
  const Potential V = resolve_potential(cfg);
  const auto eq = Equilibrium::solve(V);
  const auto reg = eq.check_regular();
  nlohmann::json doc = eq.to_json();
  doc["regular"] = reg.pass;
  doc["regularity_failures"] = reg.failures;
  std::vector<std::vector<double>> rows;
  const int P = std::max(cfg.points, 2);
  for (int i = 0; i < P; ++i) {
    const double x = std::clamp(eq.b0() + (eq.a1() - eq.b0()) * i / (P - 1), eq.b0(), eq.a1());
    rows.push_back({x, eq.density(x)});
  }
  emit_table(cfg, "equilibrium", doc, {"x", "density"}, rows);
  std::cout << "support [" << fmt17(eq.b0()) << ", " << fmt17(eq.a1()) << "], beta " << fmt17(eq.beta()) << '\n';
  return kExitOk;
}

int cmd_critical(RunConfig& cfg) {
  const Potential V = resolve_potential(cfg);
  const Transition tr(Equilibrium::solve(V));
  const double ac = tr.critical_a();
  const double half = tr.half_vprime_e();
  const double a_max = cfg.a_max > 0.0 ? cfg.a_max : std::max(2.0 * half, ac + 5.0);
  if (!(a_max > ac)) throw InvalidInput("--a-max must exceed the critical value");
  nlohmann::json doc = {{"potential", cfg.potential_resolved},
                        {"edge", tr.edge()},
                        {"beta", tr.equilibrium().beta()},
                        {"a_c", ac},
                        {"half_Vprime_e", half},
                        {"a_c_below_half", ac < half - 1e-7},
                        {"secondary", tr.secondary_criticals(ac, a_max)},
                        {"a_max", a_max}};
  std::vector<std::vector<double>> rows;
  const int P = std::max(cfg.points, 2);
  for (double a : cfg.a) {
    const double X = tr.scan_horizon(a);
    for (int i = 0; i < P; ++i) {
      const double x = tr.edge() + (X - tr.edge()) * i / (P - 1);
      rows.push_back({a, x, tr.G(x, a), tr.H(x, a)});
    }
  }
  emit_table(cfg, "critical", doc, {"a", "x", "G", "H"}, rows);
  std::cout << "a_c " << fmt17(ac) << ", half V'(e) " << fmt17(half) << ", secondary " << doc["secondary"].size()
            << '\n';
  return kExitOk;
}

int cmd_law(RunConfig& cfg) {
  check_size(cfg);
  const Potential V = resolve_potential(cfg);
  const Transition tr(Equilibrium::solve(V));
  double a = 0.0;
  if (cfg.a_critical) {
    if (!cfg.a.empty()) throw InvalidInput("--a and --a-critical are exclusive");
    const double ac = tr.critical_a();
    const double al = cfg.alpha.value_or(0.0);
    const bool convex_type = ac >= tr.half_vprime_e() - 1e-7;
    const bool transit = tr.profile(ac).regime == Regime::TransitCritical;
    const double step = convex_type && !transit ? tr.equilibrium().beta() / std::cbrt(cfg.n) : 1.0 / cfg.n;
    a = ac + al * step;
    cfg.a = {a};
  } else {
    if (cfg.alpha) throw InvalidInput("--alpha requires --a-critical");
    a = single_a(cfg);
  }
  const auto pred = predict_law(tr, a, cfg.n, cfg.j);
  const LimitLaw& law = pred.law;
  const LimitLaw& ref = law.kind == LawKind::Mixture ? law.components.front() : law;
  std::vector<std::vector<double>> rows;
  for (double T : T_grid(cfg)) {
    const double x = ref.center + T / (ref.scale_const * std::pow(static_cast<double>(cfg.n), ref.scale_exponent));
    const double F = law.kind == LawKind::Mixture ? law.cdf(x, cfg.n) : law.standard_cdf(T);
    rows.push_back({T, x, F});
  }
  nlohmann::json doc = {{"potential", cfg.potential_resolved},
                        {"n", cfg.n},
                        {"j", cfg.j},
                        {"a", a},
                        {"regime", pred.regime},
                        {"alpha", pred.alpha},
                        {"a0", pred.a0},
                        {"a_c", tr.critical_a()},
                        {"law", law.to_json()}};
  if (law.kind == LawKind::Mixture) doc["weights"] = law.weights;
  emit_table(cfg, "law", doc, {"T", "x", "cdf"}, rows);
  std::cout << "regime " << pred.regime << ", law " << to_string(law.kind) << '\n';
  return kExitOk;
}

int cmd_gap(RunConfig& cfg) {
  check_size(cfg);
  if (cfg.n > 128) throw InvalidInput("gap: n is capped at 128");
  const Potential V = resolve_potential(cfg);
  const double a = single_a(cfg);
  const Transition tr(Equilibrium::solve(V));
  double base = 0.0, scale = 0.0;
  if (cfg.interval == "I") {
    base = tr.edge();
    scale = tr.equilibrium().beta() * std::pow(static_cast<double>(cfg.n), 2.0 / 3.0);
  } else if (cfg.interval == "J") {
    const double x0 = tr.x0(a);
    if (!(x0 > tr.c_of_a(a))) throw InvalidInput("gap: the J window needs an interior maximizer (a above a_c)");
    const int k = tr.flatness_order(x0, a);
    base = x0;
    scale = tr.fluct_scale(x0, a, k) * std::pow(static_cast<double>(cfg.n), 1.0 / (2 * k));
  } else {
    throw InvalidInput("--interval must be I or J");
  }
  const auto sk = SpikedKernel::make(V, cfg.n, a, cfg.j);
  std::vector<std::vector<double>> rows;
  nlohmann::json entries = nlohmann::json::array();
  for (double T : T_grid(cfg)) {
    const double lo = base + T / scale;
    const auto g = sk.gap_probability({{lo, std::numeric_limits<double>::infinity()}});
    rows.push_back({T, lo, g.probability, g.raw});
    entries.push_back({{"T", T}, {"E", {{lo, nullptr}}}, {"probability", g.probability}});
  }
  nlohmann::json doc = {{"potential", cfg.potential_resolved}, {"n", cfg.n}, {"j", cfg.j}, {"a", a},
                        {"interval", cfg.interval},           {"entries", entries}};
  emit_table(cfg, "gap", doc, {"T", "x", "probability", "raw"}, rows);
  std::cout << "gap sweep over " << rows.size() << " values of T\n";
  return kExitOk;
}

int cmd_montecarlo(RunConfig& cfg) {
  check_size(cfg);
  const Potential V = resolve_potential(cfg);
  const double a = single_a(cfg);
  EdgeSample s;
  if (cfg.method == "direct") {
    if (V.coefficients() != gue_potential().coefficients())
      throw InvalidInput("montecarlo: direct sampling needs the gue potential; use --method mcmc");
    if (cfg.reps < 1 || static_cast<double>(cfg.reps) * cfg.n > 1e6) throw InvalidInput("montecarlo: need 1 <= reps <= 1e6/n");
    s = sample_gaussian_spiked(cfg.n, a, cfg.reps, cfg.seed, cfg.j);
  } else if (cfg.method == "mcmc") {
    McmcConfig mc;
    mc.steps = cfg.steps;
    mc.burn_in = cfg.burn_in;
    mc.thinning = cfg.thinning;
    mc.seed = cfg.seed;
    s = mcmc_sample(V, cfg.n, a, mc, cfg.j);
  } else {
    throw InvalidInput("--method must be direct or mcmc");
  }
  s.potential = V.label();
  write_sample((fs::path(cfg.out) / "sample.csv").string(), s);
  std::cout << s.lambda_max.size() << " samples (" << s.method << ")\n";
  return kExitOk;
}

struct CompareInput {
  std::string what;
  int n = 0, j = 1;
  double a = 0.0;
  std::string V;
};

int cmd_compare(RunConfig& cfg) {
  std::optional<EdgeSample> mc;
  std::optional<nlohmann::json> gap, lawdoc;
  std::vector<CompareInput> ins;
  if (!cfg.mc_file.empty()) {
    try {
      mc = read_sample(cfg.mc_file);
    } catch (const SamplerError& e) {
      throw InvalidInput(e.what());
    }
    ins.push_back({"mc", mc->n, mc->j, mc->a, mc->potential});
  }
  auto doc_input = [](const std::string& what, const nlohmann::json& d) {
    try {
      return CompareInput{what, d.at("n").get<int>(), d.at("j").get<int>(), d.at("a").get<double>(),
                          d.at("potential").at("label").get<std::string>()};
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(what + " file: " + e.what());
    }
  };
  if (!cfg.gap_file.empty()) {
    gap = read_json(cfg.gap_file);
    ins.push_back(doc_input("gap", *gap));
  }
  if (!cfg.law_file.empty()) {
    lawdoc = read_json(cfg.law_file);
    ins.push_back(doc_input("law", *lawdoc));
  }
  if (ins.size() < 2) throw InvalidInput("compare: give at least two of --mc-file, --gap-file, --law-file");
  for (const auto& c : ins) {
    const auto& r = ins.front();
    if (c.n != r.n || c.j != r.j || std::abs(c.a - r.a) > 1e-12 * std::max(1.0, std::abs(r.a)) || c.V != r.V)
      throw InvalidInput("compare: mismatched (n, j, a, V) between " + r.what + " and " + c.what);
  }
  const int n = ins.front().n;
  std::optional<LimitLaw> law;
  if (lawdoc) law = LimitLaw::from_json(lawdoc->at("law"));
  std::vector<std::pair<double, double>> gap_rows;
  if (gap) {
    try {
      for (const auto& e : gap->at("entries"))
        gap_rows.emplace_back(e.at("E").at(0).at(0).get<double>(), e.at("probability").get<double>());
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(std::string("gap file: ") + e.what());
    }
  }
  nlohmann::json pairs = nlohmann::json::array();
  bool all = true;
  auto add = [&](const std::string& name, double stat) {
    const bool pass = stat < cfg.tol;
    all = all && pass;
    pairs.push_back({{"pair", name}, {"statistic", stat}, {"tol", cfg.tol}, {"pass", pass}});
    std::cout << name << ": " << fmt17(stat) << (pass ? " PASS" : " FAIL") << '\n';
  };
  if (mc && law) add("mc-law", ks_distance(*mc, *law));
  if (gap && law) {
    double d = 0.0;
    for (auto [x, p] : gap_rows) d = std::max(d, std::abs(p - law->cdf(x, n)));
    add("gap-law", d);
  }
  if (mc && gap) {
    std::vector<double> xs = mc->lambda_max;
    std::sort(xs.begin(), xs.end());
    double d = 0.0;
    for (auto [x, p] : gap_rows) {
      const double F = static_cast<double>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) / xs.size();
      d = std::max(d, std::abs(F - p));
    }
    add("mc-gap", d);
  }
  write_json(fs::path(cfg.out) / "compare.json", {{"n", n}, {"pairs", pairs}, {"pass", all}});
  return kExitOk;
}

}  // namespace

nlohmann::json RunConfig::to_json() const {
  nlohmann::json doc = {{"command", command},   {"potential", potential}, {"potential_resolved", potential_resolved},
                      {"a", a},               {"a_critical", a_critical}, {"n", n},
                      {"j", j},               {"T_min", T_min},         {"T_max", T_max},
                      {"T_steps", T_steps},   {"reps", reps},           {"seed", seed},
                      {"method", method},     {"steps", steps},         {"burn_in", burn_in},
                      {"thinning", thinning}, {"interval", interval},   {"a_max", a_max},
                      {"points", points},     {"mc_file", mc_file},     {"gap_file", gap_file},
                      {"law_file", law_file}, {"tol", tol},             {"out", out},
                      {"format", format}};
  doc["alpha"] = alpha ? nlohmann::json(*alpha) : nlohmann::json(nullptr);
  return doc;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    c.command = j.at("command").get<std::string>();
    c.potential = j.at("potential").get<std::string>();
    c.potential_resolved = j.at("potential_resolved");
    c.a = j.at("a").get<std::vector<double>>();
    c.a_critical = j.at("a_critical").get<bool>();
    if (!j.at("alpha").is_null()) c.alpha = j.at("alpha").get<double>();
    c.n = j.at("n").get<int>();
    c.j = j.at("j").get<int>();
    c.T_min = j.at("T_min").get<double>();
    c.T_max = j.at("T_max").get<double>();
    c.T_steps = j.at("T_steps").get<int>();
    c.reps = j.at("reps").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.method = j.at("method").get<std::string>();
    c.steps = j.at("steps").get<int>();
    c.burn_in = j.at("burn_in").get<int>();
    c.thinning = j.at("thinning").get<int>();
    c.interval = j.at("interval").get<std::string>();
    c.a_max = j.at("a_max").get<double>();
    c.points = j.at("points").get<int>();
    c.mc_file = j.at("mc_file").get<std::string>();
    c.gap_file = j.at("gap_file").get<std::string>();
    c.law_file = j.at("law_file").get<std::string>();
    c.tol = j.at("tol").get<double>();
    c.out = j.at("out").get<std::string>();
    c.format = j.at("format").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("run config: ") + e.what());
  }
  return c;
}

int cli_main(int argc, const char* const* argv) {
  RunConfig cfg;
  double alpha = 0.0;
  CLI::App app{"Edge statistics of spiked random matrix models"};
  app.require_subcommand(1, 1);

  auto common = [&](CLI::App* s) {
    s->add_option("--potential", cfg.potential, "builtin name (gue, quartic, eynard, eynard:<e>,<eps>, twowell) or JSON path");
    s->add_option("--out", cfg.out, "output directory");
    s->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  };
  auto sizes = [&](CLI::App* s) {
    s->add_option("--n", cfg.n, "matrix size parameter");
    s->add_option("--j", cfg.j, "model index, size n - j + 1");
  };
  auto tgrid = [&](CLI::App* s) {
    s->add_option("--T-min", cfg.T_min);
    s->add_option("--T-max", cfg.T_max);
    s->add_option("--T-steps", cfg.T_steps);
  };

  auto* eq = app.add_subcommand("equilibrium", "equilibrium measure and density");
  common(eq);
  eq->add_option("--points", cfg.points, "density grid size");

  auto* crit = app.add_subcommand("critical", "critical and secondary critical values");
  common(crit);
  crit->add_option("--a", cfg.a, "spike strengths for the G/H table");
  crit->add_option("--a-max", cfg.a_max, "upper end of the secondary scan");
  crit->add_option("--points", cfg.points, "x grid size per a");

  auto* law = app.add_subcommand("law", "predicted limit law and CDF table");
  common(law);
  sizes(law);
  tgrid(law);
  law->add_option("--a", cfg.a, "spike strength");
  law->add_flag("--a-critical", cfg.a_critical, "place a at the critical value shifted by alpha");
  auto* alpha_opt = law->add_option("--alpha", alpha, "scaled distance from the critical value");

  auto* gap = app.add_subcommand("gap", "finite-n gap probability sweep");
  common(gap);
  sizes(gap);
  tgrid(gap);
  gap->add_option("--a", cfg.a, "spike strength")->required();
  gap->add_option("--interval", cfg.interval, "I (edge window) or J (maximizer window)");

  auto* mc = app.add_subcommand("montecarlo", "sample largest eigenvalues");
  common(mc);
  sizes(mc);
  mc->add_option("--a", cfg.a, "spike strength")->required();
  mc->add_option("--reps", cfg.reps, "replicas for direct sampling");
  mc->add_option("--seed", cfg.seed, "RNG seed");
  mc->add_option("--method", cfg.method, "direct or mcmc");
  mc->add_option("--steps", cfg.steps, "mcmc sweeps");
  mc->add_option("--burn-in", cfg.burn_in, "mcmc warm-up sweeps");
  mc->add_option("--thinning", cfg.thinning, "mcmc thinning");

  auto* cmp = app.add_subcommand("compare", "distances between sample, gap and law outputs");
  cmp->add_option("--mc-file", cfg.mc_file, "sample CSV (sidecar alongside)");
  cmp->add_option("--gap-file", cfg.gap_file, "gap JSON");
  cmp->add_option("--law-file", cfg.law_file, "law JSON");
  cmp->add_option("--tol", cfg.tol, "pass threshold for every distance");
  cmp->add_option("--out", cfg.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }
  if (alpha_opt->count() > 0) cfg.alpha = alpha;
  cfg.command = app.get_subcommands().front()->get_name();

  auto manifest = [&](int rc) {
    try {
      nlohmann::json m = cfg.to_json();
      m["threads"] = thread_count();
      m["exit_code"] = rc;
      write_json(fs::path(cfg.out) / "manifest.json", m);
    } catch (const std::exception&) {
    }
    return rc;
  };
  try {
    fs::create_directories(cfg.out);
    if (cfg.command == "equilibrium") return manifest(cmd_equilibrium(cfg));
    if (cfg.command == "critical") return manifest(cmd_critical(cfg));
    if (cfg.command == "law") return manifest(cmd_law(cfg));
    if (cfg.command == "gap") return manifest(cmd_gap(cfg));
    if (cfg.command == "montecarlo") return manifest(cmd_montecarlo(cfg));
    return manifest(cmd_compare(cfg));
  } catch (const std::logic_error& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return manifest(kExitInput);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return manifest(kExitInput);
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return manifest(kExitNumeric);
  }
}

}  // namespace sedge
