// Command-line front end: certificate checks, controlled simulation, Monte
// Carlo estimation and equilibrium tables for the compressor case study.
//
// Exit codes: 0 success / all checks pass, 1 a checked condition failed or a
// numerical routine gave up, 2 usage or configuration error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "scenario.hpp"
#include "stochras/io.hpp"
#include "stochras/montecarlo.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace stochras;
using namespace stochras::cli;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

struct Overrides {
  std::string scenario = "problem1";
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::optional<double> horizon;
  std::optional<double> dt;
  std::optional<long long> n;
  std::optional<unsigned> threads;
  std::optional<double> mu;
  bool qp_diagnostics = false;
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  f << content;
}

std::string path_stem(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "path_%03d", i);
  return buf;
}

ModelFamily family_for(const mg::Problem1Bundle& b) { return b.plant.model_at; }

Policy policy_for(const RunConfig& cfg, const mg::Problem1Bundle& b, SynthesisTrace trace = {}) {
  if (cfg.controller == Controller::None) return zero_policy(1);
  return make_synthesis_policy(b.plant, b.certs, b.synthesis, cfg.sim.dt, std::move(trace));
}

// probability_bound for X0, or the reason it does not apply.
json bound_json(const mg::Problem1Bundle& b) {
  std::vector<Vec> samples{b.x0};
  try {
    return json{{"value", probability_bound(b.certs, b.spec.X0, samples)}, {"error", nullptr}};
  } catch (const PreconditionError& e) {
    return json{{"value", nullptr}, {"error", e.what()}};
  }
}

int cmd_check(const RunConfig& cfg, const fs::path& out) {
  const mg::Problem1Bundle b = make_bundle(cfg);
  const double mu = cfg.check_mu.value_or(b.mu_target);
  const SystemModel model = b.plant.model_at(mu);
  CheckOptions opts;
  opts.tolerance = cfg.tolerance;

  json reports = json::object();
  bool all = true;
  auto add = [&](const std::string& key, const CheckReport& r) {
    reports[key] = io::to_json(r);
    all = all && r.passed;
    std::cout << key << ": " << (r.passed ? "pass" : "FAIL") << " worst_margin "
              << io::format_double(r.worst_margin) << " (" << r.worst_condition << ")\n";
  };
  add("slf", check_slf(model, b.certs, cfg.grid, opts));
  add("control_feasibility",
      check_control_feasibility(model, b.certs, cfg.grid, b.synthesis.input_box, opts));
  for (const BarrierEntry& e : b.certs.barriers) {
    try {
      add("barrier_" + e.name, check_reciprocal_barrier(model, b.certs, e, cfg.grid, opts));
    } catch (const PreconditionError& err) {
      reports["barrier_" + e.name] = json{{"name", e.name}, {"passed", false}, {"error", err.what()}};
      all = false;
    }
  }
  const json bound = bound_json(b);
  if (bound["value"].is_null()) all = false;

  json report{{"schema", 1},
              {"command", "check"},
              {"model_mu", mu},
              {"grid", io::to_json(cfg.grid)},
              {"grid_resolution", cfg.grid.resolution()},
              {"tolerance", cfg.tolerance},
              {"reports", reports},
              {"probability_bound", bound},
              {"all_passed", all},
              {"metadata", metadata(cfg, b)}};
  write_file(out / "check_report.json", io::dump_canonical(report));
  std::cout << "probability_bound: "
            << (bound["value"].is_null() ? bound["error"].get<std::string>()
                                         : io::format_double(bound["value"].get<double>()))
            << "\n";
  return all ? kExitPass : kExitFail;
}

int cmd_simulate(const RunConfig& cfg, const fs::path& out) {
  const mg::Problem1Bundle b = make_bundle(cfg);
  json paths = json::array();
  for (int i = 0; i < cfg.n_paths; ++i) {
    const std::string stem = path_stem(i);
    std::optional<std::ofstream> qp_csv;
    SynthesisTrace trace;
    if (cfg.qp_diagnostics && cfg.controller == Controller::Synthesis) {
      qp_csv.emplace(out / (stem + "_qp.csv"), std::ios::binary);
      io::write_synthesis_header(*qp_csv);
      trace = [&qp_csv](double t, const SynthesisResult& r) { io::write_synthesis_row(*qp_csv, t, r); };
    }
    const SamplePath path = simulate(family_for(b), b.mu0, policy_for(cfg, b, trace), cfg.disturbance,
                                     b.x0, b.spec, cfg.sim, derive_trial_rng(cfg.seed, static_cast<std::uint64_t>(i)));
    {
      std::ofstream csv(out / (stem + ".csv"), std::ios::binary);
      io::write_path_csv(csv, path, b.spec);
      std::ofstream pcsv(out / (stem + "_params.csv"), std::ios::binary);
      io::write_param_csv(pcsv, path);
    }
    json ev = io::path_events_json(path);
    const TrialOutcome o = classify(path, b.spec);
    ev["outcome"] = {{"reached", o.reached}, {"stayed", o.stayed}, {"safe", o.safe},
                     {"infeasible", o.synthesis_infeasible}, {"ras", o.ras}};
    ev["final_state"] = io::to_json(path.state(path.size() - 1));
    write_file(out / (stem + "_events.json"), io::dump_canonical(ev));
    paths.push_back(stem);
    std::cout << stem << ": " << to_string(path.terminated_reason) << " t_end "
              << io::format_double(path.times.back()) << " ras " << o.ras << "\n";
  }
  json summary{{"schema", 1},
               {"command", "simulate"},
               {"seed", cfg.seed},
               {"dt", cfg.sim.dt},
               {"horizon", cfg.sim.horizon},
               {"record_every", cfg.sim.record_every},
               {"stay_tolerance", b.spec.stay_tolerance},
               {"paths", paths},
               {"metadata", metadata(cfg, b)}};
  write_file(out / "simulate_summary.json", io::dump_canonical(summary));
  return kExitPass;
}

int cmd_estimate(const RunConfig& cfg, const fs::path& out) {
  const mg::Problem1Bundle b = make_bundle(cfg);
  Experiment ex{family_for(b), b.mu0, policy_for(cfg, b), cfg.disturbance, b.x0, cfg.sim};
  const EstimateResult r = estimate(ex, b.spec, cfg.n_trials, cfg.confidence, cfg.seed, cfg.threads);
  json doc{{"schema", 1},
           {"command", "estimate"},
           {"estimate", io::to_json(r.estimate)},
           {"probability_bound", bound_json(b)},
           {"seed", cfg.seed},
           {"surrogate",
            {{"horizon", cfg.sim.horizon},
             {"dt", cfg.sim.dt},
             {"stay_tolerance", b.spec.stay_tolerance},
             {"stay_tolerance_note", "absolute inflation of the target radius after first entry"}}},
           {"metadata", metadata(cfg, b)}};
  write_file(out / "estimate.json", io::dump_canonical(doc));
  if (cfg.write_outcomes) {
    std::ofstream csv(out / "outcomes.csv", std::ios::binary);
    io::write_outcomes_csv(csv, r.outcomes);
  }
  const Estimate& e = r.estimate;
  std::cout << "trials " << e.n_trials << " success " << e.n_success << " infeasible "
            << e.n_infeasible << " point " << io::format_double(e.point) << " cp ["
            << io::format_double(e.cp_lower) << ", " << io::format_double(e.cp_upper) << "]\n";
  return kExitPass;
}

int cmd_equilibrium(const RunConfig& cfg, const fs::path& out) {
  json rows = json::array();
  for (int i = 0; i < cfg.eq_count; ++i) {
    const double mu = cfg.eq_count == 1
                          ? cfg.eq_mu_lo
                          : cfg.eq_mu_lo + (cfg.eq_mu_hi - cfg.eq_mu_lo) * i / (cfg.eq_count - 1);
    const mg::Equilibrium e = mg::equilibrium(mu, cfg.params);
    rows.push_back({{"mu", mu},
                    {"phi", e.phi},
                    {"psi", e.psi},
                    {"other_phi_roots", e.other_phi_roots},
                    {"residual_characteristic", mg::psi_c(e.phi, cfg.params) - e.psi},
                    {"residual_throttle", e.phi - mu * std::sqrt(e.psi)}});
    std::cout << io::format_double(mu) << " " << io::format_double(e.phi) << " "
              << io::format_double(e.psi) << "\n";
  }
  json doc{{"schema", 1},
           {"command", "equilibrium"},
           {"params",
            {{"l_c", cfg.params.l_c}, {"iota", cfg.params.iota}, {"theta", cfg.params.theta},
             {"a", cfg.params.a}, {"eps", cfg.params.eps}, {"delta", cfg.params.delta}}},
           {"equilibria", rows}};
  write_file(out / "equilibrium.json", io::dump_canonical(doc));
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic reach-avoid-stay toolkit: compressor case study"};
  app.require_subcommand(1, 1);
  Overrides ov;
  auto add_common = [&ov](CLI::App* sub) {
    sub->add_option("--scenario", ov.scenario, "built-in scenario name or config JSON path")
        ->capture_default_str();
    sub->add_option("--config", ov.config, "JSON config (schema 1) applied to the scenario");
    sub->add_option("--seed", ov.seed, "master seed");
    sub->add_option("--out", ov.out, "output directory")->capture_default_str();
    sub->add_option("--horizon", ov.horizon, "simulation horizon");
    sub->add_option("--dt", ov.dt, "integration step");
  };
  CLI::App* check = app.add_subcommand("check", "verify the certificate inequalities on a grid");
  add_common(check);
  check->add_option("--mu", ov.mu, "throttle value the model is checked at");
  CLI::App* sim = app.add_subcommand("simulate", "simulate controlled sample paths");
  add_common(sim);
  sim->add_option("-n,--paths", ov.n, "number of paths");
  sim->add_flag("--qp-diagnostics", ov.qp_diagnostics, "write per-step QP diagnostics");
  CLI::App* est = app.add_subcommand("estimate", "Monte Carlo estimate of the RAS probability");
  add_common(est);
  est->add_option("-n,--trials", ov.n, "number of trials");
  est->add_option("--threads", ov.threads, "worker threads (0 = all cores)");
  CLI::App* eq = app.add_subcommand("equilibrium", "tabulate equilibria over a throttle range");
  add_common(eq);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  RunConfig cfg;
  fs::path out;
  try {
    cfg = load_config(ov.scenario, ov.config);
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.horizon) cfg.sim.horizon = *ov.horizon;
    if (ov.dt) cfg.sim.dt = *ov.dt;
    if (ov.mu) cfg.check_mu = *ov.mu;
    if (ov.threads) cfg.threads = *ov.threads;
    if (ov.qp_diagnostics) cfg.qp_diagnostics = true;
    if (ov.n) {
      if (*ov.n < 0) throw ConfigError("count must be non-negative");
      if (sim->parsed()) cfg.n_paths = static_cast<int>(*ov.n);
      if (est->parsed()) cfg.n_trials = static_cast<std::uint64_t>(*ov.n);
    }
    validate(cfg);
    if (check->parsed()) cfg.grid.points();  // surfaces "empty grid" as a config error
    out = ov.out;
    fs::create_directories(out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const PreconditionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (check->parsed()) return cmd_check(cfg, out);
    if (sim->parsed()) return cmd_simulate(cfg, out);
    if (est->parsed()) return cmd_estimate(cfg, out);
    return cmd_equilibrium(cfg, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const PreconditionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
}
