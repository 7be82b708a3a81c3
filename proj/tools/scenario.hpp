#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "stochras/certificates.hpp"
#include "stochras/moore_greitzer.hpp"
#include "stochras/simulator.hpp"

namespace stochras::cli {

enum class Controller { Synthesis, None };

/// Everything a command needs, resolved from the built-in scenario plus an
/// optional JSON config ("schema": 1, unknown keys rejected).
struct RunConfig {
  std::string scenario = "problem1";
  mg::MgParams params;
  mg::MgSpec geometry;
  mg::ModelOptions model_options;
  double mu0 = 0.63;
  std::string initial_state_label = "equilibrium";
  std::optional<Vec> initial_state;  ///< overrides the equilibrium X0 when set
  Controller controller = Controller::Synthesis;
  SynthesisConfig synthesis;
  DisturbanceGen disturbance = DisturbanceGen::rademacher(vec({0.1}));
  SimConfig sim{1e-3, 50.0, 0, 10};
  std::uint64_t seed = 0;

  // check
  GridSpec grid{GridSpec::Annulus{vec({0.4519, 0.6513}), 1e-3, 0.013, 200, 200}};
  double tolerance = 1e-9;
  std::optional<double> check_mu;  ///< defaults to the mu whose equilibrium is the target centre

  // simulate
  int n_paths = 1;
  bool qp_diagnostics = false;

  // estimate
  std::uint64_t n_trials = 200;
  double confidence = 0.95;
  unsigned threads = 0;
  bool write_outcomes = true;

  // equilibrium
  double eq_mu_lo = 0.5;
  double eq_mu_hi = 1.0;
  int eq_count = 11;

  nlohmann::json raw;  ///< the config as read (empty for the built-in scenario)
};

/// Loads the config file (if any) on top of the named built-in scenario.
/// Throws ConfigError on unknown scenario, unreadable file, schema mismatch,
/// unknown keys or bad values.
RunConfig load_config(const std::string& scenario, const std::optional<std::string>& config_path);

/// Validates numeric options; throws ConfigError.
void validate(const RunConfig& cfg);

/// Case-study bundle with the config's overrides applied.
mg::Problem1Bundle make_bundle(const RunConfig& cfg);

/// Metadata block attached to every output: parameters, safe-set convention,
/// disturbance knobs and their discrepancy.
nlohmann::json metadata(const RunConfig& cfg, const mg::Problem1Bundle& bundle);

}  // namespace stochras::cli
