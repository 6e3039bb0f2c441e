#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "grazing/appendix.hpp"
#include "grazing/boltzmann_sim.hpp"
#include "grazing/config.hpp"
#include "grazing/experiments.hpp"
#include "grazing/io.hpp"
#include "grazing/landau_sim.hpp"
#include "grazing/verifiers.hpp"

namespace grazing::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerdict = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

/// Output directory when neither --output nor the config sets one.
inline std::string default_output_dir() {
  const char* env = std::getenv("GRAZING_OUTPUT_DIR");
  return env && *env ? env : "grazing_out";
}

struct Outcome {
  io::ArtifactSet artifacts;
  bool verdict_ok = true;
  std::uint64_t seed = 0;
  std::string report;  ///< printed to stdout
};

namespace detail {

inline const std::vector<std::string> kKernelKeys = {"family", "gamma", "nu", "eps", "h-eps"};
inline const std::vector<std::string> kBoltzmannKeys = {"n", "dt", "horizon", "theta-min", "v-floor", "mode", "rate-cap",
                                                        "seed", "initial", "snapshots"};
inline const std::vector<std::string> kLandauKeys = {"pairing", "m", "reg-delta"};
inline const std::vector<std::string> kCouplingKeys = {"p", "n0", "level", "tanaka", "w2"};

inline std::vector<std::string> concat(std::initializer_list<std::vector<std::string>> parts) {
  std::vector<std::string> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

inline std::size_t count(const ExperimentConfig& c, const std::string& key, std::int64_t fallback) {
  const std::int64_t v = c.integer(key, fallback);
  if (v < 0) throw ParameterError("field '" + key + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

inline KernelSpec kernel_spec(const ExperimentConfig& c) {
  KernelSpec k;
  k.family = parse_family(c.require("family"));
  k.gamma = k.family == Family::kCoulomb ? -3.0 : c.real("gamma", -0.5);
  if (k.family == Family::kCoulomb && c.has("gamma") && c.real("gamma", -3.0) != -3.0)
    throw ParameterError("field 'gamma': the Coulomb family has gamma = -3");
  k.nu = c.real("nu", 0.6);
  if (k.family == Family::kCoulomb) k.eps = parse_real(c.require("eps"));
  else k.eps = c.real("eps", kPi);
  k.h_eps = c.real("h-eps", -1.0);
  return k;
}

inline BoltzmannConfig boltzmann_config(const ExperimentConfig& c) {
  BoltzmannConfig b;
  b.kernel = kernel_spec(c);
  b.n = count(c, "n", 1024);
  b.dt = c.real("dt", 1e-3);
  b.T = c.real("horizon", 0.5);
  b.theta_min = c.real("theta-min", -1.0);
  b.v_floor = c.real("v-floor", -1.0);
  b.mode = parse_update_mode(c.str("mode", "nanbu"));
  b.rate_cap = c.real("rate-cap", 1e4);
  b.seed = static_cast<std::uint64_t>(c.integer("seed", 1));
  return b;
}

inline LandauConfig landau_config(const ExperimentConfig& c, double gamma) {
  LandauConfig l;
  l.gamma = gamma;
  l.n = count(c, "n", 1024);
  l.dt = c.real("dt", 1e-3);
  l.T = c.real("horizon", 0.5);
  l.pairing = parse_pairing(c.str("pairing", "subsampled"));
  l.m = static_cast<std::uint32_t>(count(c, "m", 64));
  l.reg_delta = c.real("reg-delta", -1.0);
  l.seed = static_cast<std::uint64_t>(c.integer("seed", 1));
  return l;
}

inline std::vector<double> schedule(const ExperimentConfig& c, double T) {
  return check_schedule(c.reals("snapshots", {}), T);
}

inline std::string table_text(const CheckTable& t) {
  std::ostringstream out;
  for (const Check& c : t.rows)
    out << (c.pass ? "PASS " : "FAIL ") << c.name << " [" << c.label << "] value=" << fmt_num(c.value)
        << " bound=" << fmt_num(c.bound) << "\n";
  return out.str();
}

inline void trajectory_outputs(Outcome& o, const Trajectory& tr) {
  o.artifacts.add("snapshots.csv", io::snapshots_csv(tr));
  o.artifacts.add("diagnostics.json", io::diagnostics_json(tr));
  const Diagnostics& d = tr.back().diag;
  o.report = "t=" + fmt_num(d.t) + " m2=" + fmt_num(d.m2) + " m4=" + fmt_num(d.m4) + " max_speed=" + fmt_num(d.max_speed) +
             "\n";
}

inline Outcome simulate_boltzmann(const ExperimentConfig& c) {
  const BoltzmannConfig b = boltzmann_config(c);
  const ParticleCloud init = sample_initial(parse_initial(c.str("initial", "gaussian:1")), b.n, b.seed);
  const auto sched = schedule(c, b.T);
  Outcome o;
  o.seed = b.seed;
  trajectory_outputs(o, BoltzmannSimulator(b, moment(init.v, 2.0)).run(init, sched));
  return o;
}

inline Outcome simulate_landau(const ExperimentConfig& c) {
  const LandauConfig l = landau_config(c, c.real("gamma", -0.5));
  const ParticleCloud init = sample_initial(parse_initial(c.str("initial", "gaussian:1")), l.n, l.seed);
  const auto sched = schedule(c, l.T);
  Outcome o;
  o.seed = l.seed;
  trajectory_outputs(o, LandauSimulator(l, moment(init.v, 2.0)).run(init, sched));
  return o;
}

inline SweepConfig sweep_config(const ExperimentConfig& c) {
  SweepConfig s;
  s.boltzmann = boltzmann_config(c);
  s.landau = landau_config(c, s.boltzmann.kernel.gamma);
  s.initial = c.str("initial", "gaussian:1");
  s.p = c.real("p", 5.0);
  s.n0 = c.real("n0", 8.0);
  s.level = parse_coupling_level(c.str("level", "b"));
  s.tanaka = c.boolean("tanaka", true);
  s.w2 = c.boolean("w2", false);
  if (!(s.p > 0.0)) throw ParameterError("field 'p' must be positive");
  if (!(s.n0 > 0.0)) throw ParameterError("field 'n0' must be positive");
  return s;
}

inline Outcome coupled(const ExperimentConfig& c) {
  const SweepConfig s = sweep_config(c);
  const ParticleCloud init = sample_initial(parse_initial(s.initial), s.boltzmann.n, s.boltzmann.seed);
  const double eps = s.boltzmann.kernel.eps;
  const CouplingPlan plan = make_plan(s, eps, s.boltzmann.seed, moment(init.v, 2.0));
  const CoupledResult r = coupled_run(s.boltzmann, s.landau, plan, init);
  Outcome o;
  o.seed = s.boltzmann.seed;
  o.artifacts.add("coupled.csv", io::coupled_csv(r));
  io::ordered_json j;
  j["eps"] = eps;
  j["level"] = to_string(s.level);
  j["tanaka"] = s.tanaka;
  j["slabs"] = plan.subdivision.a.size();
  j["resolution"] = plan.subdivision.n;
  j["truncation"] = plan.truncation;
  j["terminal_paired_l2"] = r.terminal();
  j["sup_paired_l2"] = r.sup();
  j["terminal_w2"] = io::jnum(r.w2.back());
  j["events"] = r.events;
  o.artifacts.add("summary.json", j.dump(2) + "\n");
  o.report = "terminal paired_l2=" + fmt_num(r.terminal()) + " sup=" + fmt_num(r.sup()) + "\n";
  return o;
}

inline std::vector<std::uint64_t> seed_list(const ExperimentConfig& c) {
  const std::uint64_t first = static_cast<std::uint64_t>(c.integer("seed", 1));
  std::vector<std::uint64_t> seeds(count(c, "seeds", 10));
  std::iota(seeds.begin(), seeds.end(), first);
  return seeds;
}

inline Outcome sweep(ExperimentConfig c, std::ostream& log) {
  const std::vector<double> eps_list = parse_real_list(c.require("eps-list"));
  // the kernel is rebuilt per sweep point; a placeholder eps keeps the Coulomb spec valid
  if (!c.has("eps")) c.set("eps", split_list(c.require("eps-list")).front());
  SweepConfig s = sweep_config(c);
  s.eps_list = eps_list;
  if (s.eps_list.size() < 4) throw ParameterError("field 'eps-list': rate-sweep needs at least 4 eps values");
  s.seeds = seed_list(c);
  const SweepReport r = rate_sweep(s, [&](const std::string& line) { log << line << "\n"; });
  Outcome o;
  o.seed = s.seeds.front();
  o.artifacts.add("sweep.csv", io::sweep_csv(r.rows));
  o.artifacts.add("summary.json", io::sweep_summary_json(r));
  o.verdict_ok = r.fit.verdict == Verdict::kDecreasing;
  o.report = "slope=" + fmt_num(r.fit.slope) + " stderr=" + fmt_num(r.fit.slope_stderr) + " verdict=" +
             to_string(r.fit.verdict) + " (" + r.fit.reason + ")\n";
  return o;
}

/// Terminal distance per (eps, seed), then mean and standard error per eps.
inline SweepReport summarize_rows(Family family, const std::vector<SweepRow>& rows) {
  std::map<double, std::map<std::uint64_t, std::pair<double, double>>, std::greater<>> last;  // eps -> seed -> (t, d)
  for (const SweepRow& r : rows) {
    auto& slot = last[r.eps][r.seed];
    if (r.t >= slot.first) slot = {r.t, r.paired_l2};
  }
  SweepReport rep;
  rep.family = family;
  for (const auto& [eps, seeds] : last) {
    if (seeds.size() < 2) throw ParameterError("fit-rate needs at least 2 seeds per eps value");
    double mean = 0.0, var = 0.0;
    for (const auto& [s, td] : seeds) mean += td.second;
    const double k = static_cast<double>(seeds.size());
    mean /= k;
    for (const auto& [s, td] : seeds) var += (td.second - mean) * (td.second - mean);
    rep.eps_list.push_back(eps);
    rep.mean_terminal.push_back(mean);
    rep.stderr_terminal.push_back(std::sqrt(var / (k - 1.0) / k));
  }
  rep.fit = fit_rate(family, rep.eps_list, rep.mean_terminal, rep.stderr_terminal);
  return rep;
}

inline Outcome fit(const ExperimentConfig& c) {
  const Family family = parse_family(c.require("family"));
  const std::string path = c.require("input");
  std::ifstream f(path);
  if (!f) throw ParameterError("cannot read sweep CSV '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  SweepReport r = summarize_rows(family, io::read_sweep_csv(ss.str()));
  r.proven_exponent = rate_exponent(c.real("p", 5.0));
  Outcome o;
  o.artifacts.add("summary.json", io::sweep_summary_json(r));
  o.verdict_ok = r.fit.verdict == Verdict::kDecreasing;
  o.report = "slope=" + fmt_num(r.fit.slope) + " stderr=" + fmt_num(r.fit.slope_stderr) + " verdict=" +
             to_string(r.fit.verdict) + " (" + r.fit.reason + ")\n";
  return o;
}

inline Outcome checks_outcome(const CheckTable& t, std::uint64_t seed) {
  Outcome o;
  o.seed = seed;
  o.artifacts.add("checks.csv", io::checks_csv(t));
  o.verdict_ok = t.all_pass();
  o.report = table_text(t);
  return o;
}

inline Outcome verify_kernels(const ExperimentConfig& c) {
  KernelSpec base;
  base.family = parse_family(c.require("family"));
  base.gamma = base.family == Family::kCoulomb ? -3.0 : c.real("gamma", -0.5);
  base.nu = c.real("nu", 0.6);
  std::vector<double> eps;
  switch (base.family) {
    case Family::kSoft:
      eps = {kPi};
      break;
    case Family::kGrazing:
      eps = c.reals("eps-list", {kPi / 2, kPi / 8, kPi / 32});
      break;
    case Family::kCoulomb:
      eps = c.reals("eps-list", {0.3, 0.1, 0.01});
      break;
  }
  const double h = c.real("h-eps", -1.0);
  const std::size_t pairs = count(c, "samples", 200);
  CheckTable t;
  for (double e : eps) {
    KernelSpec k = base;
    k.eps = e;
    k.h_eps = h;
    t.append(verify_kernel(k));
  }
  if (base.family == Family::kGrazing) t.append(verify_scaling(pairs, 1, base.gamma, base.nu, eps, {}));
  if (base.family == Family::kCoulomb && eps.size() >= 2) t.append(verify_scaling(pairs, 1, -0.5, 0.6, {}, eps));
  return checks_outcome(t, 1);
}

inline Outcome verify_geometry(const ExperimentConfig& c) {
  const std::size_t samples = count(c, "samples", 100000);
  const auto seed = static_cast<std::uint64_t>(c.integer("seed", 1));
  CheckTable t = verify_collision_identities(samples, seed);
  t.append(verify_tanaka(samples, 32, seed));
  t.append(verify_jump_moments(20, seed));
  t.append(verify_landau_coefficients(samples, seed));
  return checks_outcome(t, seed);
}

inline Outcome verify_appendix(const ExperimentConfig& c) {
  const auto seed = static_cast<std::uint64_t>(c.integer("seed", 1));
  const std::size_t samples = count(c, "samples", 2048);
  CheckTable t = verify_psi();
  t.append(verify_subdivision(static_cast<int>(count(c, "n", 8)), c.real("horizon", 1.0)));
  t.append(verify_gronwall(c.reals("a-list", {1e-6, 1e-3, 0.5, 2.0}), 1.0));
  t.append(verify_poisson_gaussian(c.reals("t-list", {1.0, 10.0, 100.0}), samples, seed));
  return checks_outcome(t, seed);
}

struct Command {
  std::string name;
  std::string help;
  std::vector<std::string> keys;
};

inline std::vector<Command> commands() {
  return {
      {"simulate-boltzmann", "Run the Boltzmann particle system and emit snapshots",
       concat({kKernelKeys, kBoltzmannKeys})},
      {"simulate-landau", "Run the Landau particle system and emit snapshots",
       concat({{"gamma", "n", "dt", "horizon", "seed", "initial", "snapshots"}, kLandauKeys})},
      {"coupled-run", "Couple Boltzmann and Landau systems at one eps",
       concat({kKernelKeys, kBoltzmannKeys, kLandauKeys, kCouplingKeys})},
      {"rate-sweep", "Coupled distances over an eps grid and seeds with a fitted rate",
       concat({kKernelKeys, kBoltzmannKeys, kLandauKeys, kCouplingKeys, {"eps-list", "seeds"}})},
      {"verify-kernels", "Angular kernel property suite", {"family", "gamma", "nu", "eps-list", "h-eps", "samples"}},
      {"verify-geometry", "Collision geometry and Landau coefficient identities", {"samples", "seed"}},
      {"verify-appendix", "Subdivision, Gronwall and Poisson-Gaussian checks",
       {"a-list", "t-list", "samples", "seed", "n", "horizon"}},
      {"fit-rate", "Fit the rate of a saved sweep CSV", {"family", "input", "p"}},
  };
}

inline Outcome dispatch(const std::string& name, const ExperimentConfig& c, std::ostream& log) {
  if (name == "simulate-boltzmann") return simulate_boltzmann(c);
  if (name == "simulate-landau") return simulate_landau(c);
  if (name == "coupled-run") return coupled(c);
  if (name == "rate-sweep") return sweep(c, log);
  if (name == "verify-kernels") return verify_kernels(c);
  if (name == "verify-geometry") return verify_geometry(c);
  if (name == "verify-appendix") return verify_appendix(c);
  return fit(c);
}

}  // namespace detail

/// Parses argv, runs one subcommand and writes its artifacts plus manifest.json.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Particle simulations of the grazing collision limit"};
  app.require_subcommand(1);
  const auto cmds = detail::commands();
  std::string config_path, output;
  std::map<std::string, std::map<std::string, std::string>> flags;
  for (const auto& cmd : cmds) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", config_path, "key = value config file (flags override it)")->check(CLI::ExistingFile);
    sub->add_option("--output", output, "output directory (default $GRAZING_OUTPUT_DIR or ./grazing_out)");
    for (const auto& key : cmd.keys) sub->add_option("--" + key, flags[cmd.name][key], config_keys().at(key));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    const auto* chosen = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << "error: " << e.what() << "\n";
    if (e.get_exit_code() == 0) return kExitOk;
    err << chosen->help();
    return kExitUsage;
  }
  const std::string name = app.get_subcommands().front()->get_name();
  ExperimentConfig cfg;
  Outcome result;
  try {
    cfg = config_path.empty() ? ExperimentConfig::parse("version = 1\n") : ExperimentConfig::load(config_path);
    CLI::App* sub = app.get_subcommand(name);
    for (const auto& [key, value] : flags[name])
      if (sub->count("--" + key) > 0) cfg.set(key, value);
    result = detail::dispatch(name, cfg, err);
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  const std::filesystem::path dir = !output.empty() ? output : cfg.str("output", default_output_dir());
  // the echo leaves out the destination so runs into different directories stay byte-identical
  cfg.erase("output");
  try {
    io::ArtifactSet all = result.artifacts;
    all.add("config.txt", cfg.serialize());
    all.add("manifest.json", io::manifest(name, cfg.serialize(), result.seed, result.artifacts));
    all.write(dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  out << result.report;
  out << "artifacts written to " << dir.string() << "\n";
  return result.verdict_ok ? kExitOk : kExitVerdict;
}

}  // namespace grazing::cli
