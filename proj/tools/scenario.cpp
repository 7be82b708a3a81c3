#include "scenario.hpp"

#include <filesystem>
#include <fstream>
#include <initializer_list>

#include "stochras/io.hpp"

namespace stochras::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& target, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + where);
  }
}

Vec read_vec(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + " must be a non-empty array");
  check_dim(static_cast<Eigen::Index>(j.size()), what.c_str());
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(what + " must contain numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

DisturbanceGen read_disturbance(const json& j) {
  const std::string where = "disturbance";
  reject_unknown(j, {"kind", "magnitude", "value", "radius", "hold_time"}, where);
  std::string kind;
  read(j, "kind", kind, where);
  if (kind == "zero") return DisturbanceGen::zero();
  if (kind == "rademacher") {
    if (!j.contains("magnitude")) throw ConfigError("rademacher disturbance needs 'magnitude'");
    const json& m = j.at("magnitude");
    return DisturbanceGen::rademacher(m.is_array() ? read_vec(m, "disturbance.magnitude")
                                                   : vec({m.get<double>()}));
  }
  if (kind == "constant") {
    if (!j.contains("value")) throw ConfigError("constant disturbance needs 'value'");
    return DisturbanceGen::constant(read_vec(j.at("value"), "disturbance.value"));
  }
  if (kind == "random_ball") {
    double radius = 0.0, hold = 0.0;
    read(j, "radius", radius, where);
    read(j, "hold_time", hold, where);
    if (!(radius >= 0.0) || !(hold > 0.0)) throw ConfigError("random_ball needs radius >= 0, hold_time > 0");
    return DisturbanceGen::random_ball(radius, hold);
  }
  throw ConfigError("unknown disturbance kind '" + kind + "'");
}

void apply_config(RunConfig& cfg, const json& j) {
  reject_unknown(j, {"schema", "scenario", "params", "mu0", "initial_state", "model", "controller",
                     "synthesis", "disturbance", "sim", "seed", "check", "simulate", "estimate",
                     "equilibrium"},
                 "config");
  if (!j.contains("schema") || !j.at("schema").is_number_integer() || j.at("schema").get<int>() != 1)
    throw ConfigError("config needs \"schema\": 1");
  if (j.contains("scenario") && j.at("scenario") != "problem1")
    throw ConfigError("unknown scenario in config");

  if (j.contains("params")) {
    const json& p = j.at("params");
    reject_unknown(p, {"l_c", "iota", "theta", "a", "eps", "delta"}, "params");
    read(p, "l_c", cfg.params.l_c, "params");
    read(p, "iota", cfg.params.iota, "params");
    read(p, "theta", cfg.params.theta, "params");
    read(p, "a", cfg.params.a, "params");
    read(p, "eps", cfg.params.eps, "params");
    read(p, "delta", cfg.params.delta, "params");
  }
  read(j, "mu0", cfg.mu0, "config");
  if (j.contains("initial_state")) {
    const json& s = j.at("initial_state");
    if (s == "equilibrium") {
      cfg.initial_state.reset();
      cfg.initial_state_label = "equilibrium";
    } else if (s == "alternate") {
      cfg.initial_state = cfg.geometry.alternate_initial_state;
      cfg.initial_state_label = "alternate";
    } else {
      cfg.initial_state = read_vec(s, "initial_state");
      cfg.initial_state_label = "explicit";
    }
  }
  if (j.contains("model")) {
    reject_unknown(j.at("model"), {"diffusion"}, "model");
    read(j.at("model"), "diffusion", cfg.model_options.diffusion, "model");
  }
  if (j.contains("controller")) {
    const json& c = j.at("controller");
    if (c == "synthesis")
      cfg.controller = Controller::Synthesis;
    else if (c == "none")
      cfg.controller = Controller::None;
    else
      throw ConfigError("controller must be \"synthesis\" or \"none\"");
  }
  if (j.contains("synthesis")) {
    const json& s = j.at("synthesis");
    const std::string w = "synthesis";
    reject_unknown(s, {"u_lo", "u_hi", "mu_lo", "mu_hi", "mu_rate", "mu0_lo", "mu0_hi", "u_weight",
                       "mu_weight", "clf_slack_weight", "cbf_hard"},
                   w);
    double lo = cfg.synthesis.input_box.lo(0), hi = cfg.synthesis.input_box.hi(0);
    read(s, "u_lo", lo, w);
    read(s, "u_hi", hi, w);
    cfg.synthesis.input_box = InputBox{vec({lo}), vec({hi})};
    read(s, "mu_lo", cfg.synthesis.mu_lo, w);
    read(s, "mu_hi", cfg.synthesis.mu_hi, w);
    read(s, "mu_rate", cfg.synthesis.mu_rate, w);
    read(s, "mu0_lo", cfg.synthesis.mu0_lo, w);
    read(s, "mu0_hi", cfg.synthesis.mu0_hi, w);
    read(s, "u_weight", cfg.synthesis.u_weight, w);
    read(s, "mu_weight", cfg.synthesis.mu_weight, w);
    read(s, "clf_slack_weight", cfg.synthesis.clf_slack_weight, w);
    read(s, "cbf_hard", cfg.synthesis.cbf_hard, w);
  }
  if (j.contains("disturbance")) cfg.disturbance = read_disturbance(j.at("disturbance"));
  if (j.contains("sim")) {
    const json& s = j.at("sim");
    reject_unknown(s, {"dt", "horizon", "record_every"}, "sim");
    read(s, "dt", cfg.sim.dt, "sim");
    read(s, "horizon", cfg.sim.horizon, "sim");
    read(s, "record_every", cfg.sim.record_every, "sim");
  }
  read(j, "seed", cfg.seed, "config");
  if (j.contains("check")) {
    const json& c = j.at("check");
    reject_unknown(c, {"grid", "tolerance", "mu"}, "check");
    if (c.contains("grid")) cfg.grid = io::grid_from_json(c.at("grid"));
    read(c, "tolerance", cfg.tolerance, "check");
    if (c.contains("mu")) {
      double mu = 0.0;
      read(c, "mu", mu, "check");
      cfg.check_mu = mu;
    }
  }
  if (j.contains("simulate")) {
    const json& s = j.at("simulate");
    reject_unknown(s, {"n_paths", "qp_diagnostics"}, "simulate");
    read(s, "n_paths", cfg.n_paths, "simulate");
    read(s, "qp_diagnostics", cfg.qp_diagnostics, "simulate");
  }
  if (j.contains("estimate")) {
    const json& e = j.at("estimate");
    reject_unknown(e, {"n_trials", "confidence", "threads", "write_outcomes"}, "estimate");
    if (e.contains("n_trials")) {
      if (!e.at("n_trials").is_number_integer() || e.at("n_trials").get<long long>() < 0)
        throw ConfigError("estimate.n_trials must be a non-negative integer");
      cfg.n_trials = e.at("n_trials").get<std::uint64_t>();
    }
    read(e, "confidence", cfg.confidence, "estimate");
    read(e, "threads", cfg.threads, "estimate");
    read(e, "write_outcomes", cfg.write_outcomes, "estimate");
  }
  if (j.contains("equilibrium")) {
    const json& e = j.at("equilibrium");
    reject_unknown(e, {"mu_lo", "mu_hi", "count"}, "equilibrium");
    read(e, "mu_lo", cfg.eq_mu_lo, "equilibrium");
    read(e, "mu_hi", cfg.eq_mu_hi, "equilibrium");
    read(e, "count", cfg.eq_count, "equilibrium");
  }
}

}  // namespace

RunConfig load_config(const std::string& scenario, const std::optional<std::string>& config_path) {
  RunConfig cfg;
  std::optional<std::string> path = config_path;
  if (scenario != "problem1") {
    if (!path && std::filesystem::path(scenario).extension() == ".json") {
      path = scenario;
    } else {
      throw ConfigError("unknown scenario '" + scenario + "' (built-in: problem1)");
    }
  }
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot open config file '" + *path + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    apply_config(cfg, j);
    cfg.raw = j;
  }
  return cfg;
}

void validate(const RunConfig& cfg) {
  cfg.params.validate();
  cfg.sim.validate();
  cfg.synthesis.validate();
  if (cfg.n_paths < 1) throw ConfigError("n_paths must be >= 1");
  if (cfg.n_trials < 1) throw ConfigError("n_trials must be >= 1");
  if (!(cfg.confidence > 0.0 && cfg.confidence < 1.0)) throw ConfigError("confidence must be in (0, 1)");
  if (!(cfg.tolerance >= 0.0)) throw ConfigError("tolerance must be >= 0");
  if (cfg.eq_count < 1) throw ConfigError("equilibrium count must be >= 1");
  if (!(cfg.eq_mu_lo <= cfg.eq_mu_hi)) throw ConfigError("equilibrium mu range is empty");
}

mg::Problem1Bundle make_bundle(const RunConfig& cfg) {
  mg::Problem1Bundle b = mg::problem1_bundle(cfg.mu0, cfg.params, cfg.geometry, cfg.model_options);
  b.synthesis = cfg.synthesis;
  if (cfg.initial_state) {
    if (cfg.initial_state->size() != 2) throw ConfigError("initial_state must have two entries");
    b.x0 = *cfg.initial_state;
    b.spec.X0 = Region::point(b.x0);
    b.spec.workspace_center = b.x0;
  }
  b.spec.horizon = cfg.sim.horizon;
  return b;
}

json metadata(const RunConfig& cfg, const mg::Problem1Bundle& b) {
  json params = {{"l_c", b.params.l_c},     {"iota", b.params.iota}, {"theta", b.params.theta},
                 {"a", b.params.a},         {"eps", b.params.eps},   {"delta", b.params.delta}};
  json geometry = {{"gamma", io::to_json(b.geometry.gamma)},
                   {"gamma_radius", b.geometry.gamma_radius},
                   {"h1", {{"center", io::to_json(b.geometry.h1_center)}, {"radius", b.geometry.h1_radius}}},
                   {"h2", {{"center", io::to_json(b.geometry.h2_center)}, {"radius", b.geometry.h2_radius}}},
                   {"workspace_radius", b.spec.workspace_radius}};
  return json{
      {"scenario", cfg.scenario},
      {"params", params},
      {"geometry", geometry},
      {"mu0", b.mu0},
      {"mu_target", b.mu_target},
      {"initial_state", io::to_json(b.x0)},
      {"initial_state_source", cfg.initial_state_label},
      {"controller", cfg.controller == Controller::Synthesis ? "synthesis" : "none"},
      {"diffusion", b.model_options.diffusion},
      {"safe_set_convention",
       "safe = {h1 >= 0} and {h2 >= 0}; U is its complement (the literal intersection "
       "{h1 <= 0} and {h2 <= 0} is empty for this geometry)"},
      {"certificate_delta", b.params.delta},
      {"simulation_disturbance", cfg.disturbance.describe()},
      {"disturbance_note",
       "certificates and synthesis rows use the bound delta; simulated paths use the "
       "disturbance signal above, whose magnitude may exceed delta"},
      {"synthesis",
       {{"u_lo", cfg.synthesis.input_box.lo(0)},
        {"u_hi", cfg.synthesis.input_box.hi(0)},
        {"mu_lo", cfg.synthesis.mu_lo},
        {"mu_hi", cfg.synthesis.mu_hi},
        {"mu_rate", cfg.synthesis.mu_rate},
        {"u_weight", cfg.synthesis.u_weight},
        {"mu_weight", cfg.synthesis.mu_weight},
        {"clf_slack_weight", cfg.synthesis.clf_slack_weight},
        {"cbf_hard", cfg.synthesis.cbf_hard},
        {"weights_note", "weights are configuration defaults, not taken from a reference"}}},
  };
}

}  // namespace stochras::cli
