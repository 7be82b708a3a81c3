#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "stochras/certificates.hpp"
#include "stochras/montecarlo.hpp"
#include "stochras/simulator.hpp"
#include "stochras/synthesis.hpp"

namespace stochras::io {

using nlohmann::json;

/// Sorted keys, two-space indent, finite doubles with 17 significant digits,
/// non-finite doubles as null. Identical values give identical bytes.
std::string dump_canonical(const json& value);

/// "%.17g".
std::string format_double(double v);

json to_json(const Vec& v);
json to_json(const CheckReport& report);
json to_json(const Estimate& estimate);
json to_json(const GridSpec& grid);

/// Accepts {"box": {"lo": [...], "hi": [...], "counts": [...]}} or
/// {"annulus": {"center": [...], "r_inner": r, "r_outer": R, "radial": k, "angular": m}}.
GridSpec grid_from_json(const json& j);

/// Columns t, x_1..x_n, u_1..u_p, d_1..d_n, in_gamma, in_unsafe (in_unsafe
/// means outside D). Header row always present.
void write_path_csv(std::ostream& os, const SamplePath& path, const RasSpec& spec);

/// Columns t, param: the scheduling parameter applied on each recorded row.
void write_param_csv(std::ostream& os, const SamplePath& path);

/// Sidecar with stopping indices/times and the termination reason.
json path_events_json(const SamplePath& path);

/// Columns trial, reached, stayed, safe, infeasible, gamma_time.
void write_outcomes_csv(std::ostream& os, std::span<const TrialOutcome> outcomes);

/// Header for the per-step synthesis diagnostics stream.
void write_synthesis_header(std::ostream& os);
/// One row t, s, active_set (space separated), objective; infeasible rows
/// carry "infeasible" in the active_set column.
void write_synthesis_row(std::ostream& os, double t, const SynthesisResult& r);

}  // namespace stochras::io
