#include "stochras/io.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace stochras::io {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write_string(std::string& out, const std::string& s) {
  out += json(s).dump();
}

void dump_into(std::string& out, const json& v, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent), ' ');
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {  // std::map: sorted keys
        if (!first) out += ",\n";
        first = false;
        out += pad;
        write_string(out, it.key());
        out += ": ";
        dump_into(out, it.value(), indent + 2);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump_into(out, v[i], indent + 2);
      }
      out += "\n" + close_pad + "]";
      return;
    }
    case json::value_t::number_float: {
      const double d = v.get<double>();
      out += std::isfinite(d) ? format_double(d) : "null";
      return;
    }
    default:
      out += v.dump();
  }
}

}  // namespace

std::string dump_canonical(const json& value) {
  std::string out;
  dump_into(out, value, 0);
  out += "\n";
  return out;
}

json to_json(const Vec& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

json to_json(const CheckReport& r) {
  return json{{"name", r.name},
              {"passed", r.passed},
              {"worst_margin", r.worst_margin},
              {"worst_point", to_json(r.worst_point)},
              {"worst_condition", r.worst_condition},
              {"samples_checked", r.samples_checked},
              {"samples_skipped", r.samples_skipped},
              {"grid_resolution", r.grid_resolution},
              {"required_margin", r.required_margin}};
}

json to_json(const Estimate& e) {
  return json{{"n_trials", e.n_trials},
              {"n_success", e.n_success},
              {"n_infeasible", e.n_infeasible},
              {"confidence", e.confidence},
              {"point", e.point},
              {"cp_lower", e.cp_lower},
              {"cp_upper", e.cp_upper},
              {"conditional",
               {{"n_trials", e.conditional_trials},
                {"n_success", e.conditional_success},
                {"point", e.conditional_point},
                {"cp_lower", e.conditional_cp_lower},
                {"cp_upper", e.conditional_cp_upper}}}};
}

json to_json(const GridSpec& g) {
  if (const auto* box = std::get_if<GridSpec::Box>(&g.shape)) {
    return json{{"box", {{"lo", to_json(box->lo)}, {"hi", to_json(box->hi)}, {"counts", box->counts}}}};
  }
  const auto& a = std::get<GridSpec::Annulus>(g.shape);
  return json{{"annulus",
               {{"center", to_json(a.center)},
                {"r_inner", a.r_inner},
                {"r_outer", a.r_outer},
                {"radial", a.radial},
                {"angular", a.angular}}}};
}

namespace {

Vec vec_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of numbers");
  check_dim(static_cast<Eigen::Index>(j.size()), what);
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(std::string(what) + " must contain numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const char* where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError(std::string("unknown key '") + it.key() + "' in " + where);
  }
}

template <typename T>
T required(const json& obj, const char* key, const char* where) {
  if (!obj.contains(key)) throw ConfigError(std::string("missing key '") + key + "' in " + where);
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad value for '") + key + "' in " + where);
  }
}

}  // namespace

GridSpec grid_from_json(const json& j) {
  if (!j.is_object() || j.size() != 1) throw ConfigError("grid must have exactly one of box/annulus");
  if (j.contains("box")) {
    const json& b = j.at("box");
    reject_unknown(b, {"lo", "hi", "counts"}, "grid.box");
    GridSpec::Box box;
    box.lo = vec_from_json(b.at("lo"), "grid.box.lo");
    box.hi = vec_from_json(b.at("hi"), "grid.box.hi");
    box.counts = required<std::vector<int>>(b, "counts", "grid.box");
    return GridSpec{box};
  }
  if (j.contains("annulus")) {
    const json& a = j.at("annulus");
    reject_unknown(a, {"center", "r_inner", "r_outer", "radial", "angular"}, "grid.annulus");
    GridSpec::Annulus an;
    an.center = vec_from_json(a.at("center"), "grid.annulus.center");
    an.r_inner = required<double>(a, "r_inner", "grid.annulus");
    an.r_outer = required<double>(a, "r_outer", "grid.annulus");
    an.radial = required<int>(a, "radial", "grid.annulus");
    an.angular = required<int>(a, "angular", "grid.annulus");
    return GridSpec{an};
  }
  throw ConfigError("grid must have exactly one of box/annulus");
}

void write_path_csv(std::ostream& os, const SamplePath& path, const RasSpec& spec) {
  os << "t";
  for (int i = 1; i <= path.n; ++i) os << ",x_" << i;
  for (int i = 1; i <= path.p; ++i) os << ",u_" << i;
  for (int i = 1; i <= path.n; ++i) os << ",d_" << i;
  os << ",in_gamma,in_unsafe\n";
  for (std::size_t k = 0; k < path.size(); ++k) {
    const Vec x = path.state(k);
    os << format_double(path.times[k]);
    for (int i = 0; i < path.n; ++i) os << ',' << format_double(x(i));
    for (int i = 0; i < path.p; ++i)
      os << ',' << format_double(path.controls[k * static_cast<std::size_t>(path.p) + i]);
    for (int i = 0; i < path.n; ++i)
      os << ',' << format_double(path.disturbances[k * static_cast<std::size_t>(path.n) + i]);
    const bool finite = x.allFinite();
    os << ',' << (finite && spec.in_gamma(x) ? 1 : 0) << ','
       << (!finite || !spec.in_safe(x) ? 1 : 0) << '\n';
  }
}

void write_param_csv(std::ostream& os, const SamplePath& path) {
  os << "t,param\n";
  for (std::size_t k = 0; k < path.size(); ++k)
    os << format_double(path.times[k]) << ',' << format_double(path.params[k]) << '\n';
}

json path_events_json(const SamplePath& path) {
  auto idx = [&](const std::optional<std::size_t>& i) -> json {
    return i ? json(*i) : json(nullptr);
  };
  auto time = [&](const std::optional<std::size_t>& i) -> json {
    return i ? json(path.times[*i]) : json(nullptr);
  };
  return json{{"gamma_idx", idx(path.gamma_idx)},
              {"gamma_time", time(path.gamma_idx)},
              {"sigma_idx", idx(path.sigma_idx)},
              {"sigma_time", time(path.sigma_idx)},
              {"sigma_star_idx", idx(path.sigma_star_idx)},
              {"sigma_star_time", time(path.sigma_star_idx)},
              {"stay_exit_idx", idx(path.stay_exit_idx)},
              {"stay_exit_time", time(path.stay_exit_idx)},
              {"terminated_reason", to_string(path.terminated_reason)},
              {"integration_steps", path.integration_steps},
              {"recorded_rows", path.size()}};
}

void write_outcomes_csv(std::ostream& os, std::span<const TrialOutcome> outcomes) {
  os << "trial,reached,stayed,safe,infeasible,gamma_time\n";
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const TrialOutcome& o = outcomes[i];
    os << i << ',' << o.reached << ',' << o.stayed << ',' << o.safe << ','
       << o.synthesis_infeasible << ',' << (o.gamma_time ? format_double(*o.gamma_time) : "")
       << '\n';
  }
}

void write_synthesis_header(std::ostream& os) { os << "t,s,active_set,objective\n"; }

void write_synthesis_row(std::ostream& os, double t, const SynthesisResult& r) {
  os << format_double(t) << ',';
  if (!r.feasible) {
    os << ",infeasible,\n";
    return;
  }
  os << format_double(r.slack) << ',';
  for (std::size_t i = 0; i < r.active_set.size(); ++i) os << (i ? " " : "") << r.active_set[i];
  os << ',' << format_double(r.objective) << '\n';
}

}  // namespace stochras::io
