#pragma once

#include <json.hpp>
#include <memory>
#include <string>

#include "mlens/bounds.hpp"
#include "mlens/geometry.hpp"

namespace mlens {

using json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "1";
inline constexpr const char* kArtifactVersion = "manifold-lens 0.1.0";

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

std::unique_ptr<ManifoldModel> model_from_json(const json& spec);
DensityModel density_from_json(const json& spec);
NoiseModel noise_from_json(const json& spec);

/// Bound inputs assembled from a config: model/density blocks supply
/// tau/phi/alpha unless overridden by explicit fields.
BoundInputs bound_inputs_from_config(const json& config);

/// bounds-report JSON: inputs echoed, S1/S2/q and condition flags per mode,
/// formula-version string.
json bounds_report(const json& config);

/// Dispatch on config["experiment"]["kind"]; returns the report without the
/// wall-clock field so identical configs give byte-identical output.
json run_experiment(const json& config);

/// True when the report records a hard violation of an asserted inequality.
bool report_has_violations(const json& report);

/// Canonical serialization used for emitted reports.
std::string dump_report(const json& report);

}  // namespace mlens
