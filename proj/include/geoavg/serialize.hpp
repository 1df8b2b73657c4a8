#pragma once

#include <nlohmann/json_fwd.hpp>

#include <string>

#include "geoavg/averaging.hpp"
#include "geoavg/problem.hpp"
#include "geoavg/risk.hpp"
#include "geoavg/sgd.hpp"

namespace geoavg {

using nlohmann::json;

/// Shortest text that round-trips the double exactly ("%.17g").
std::string format_double(double v);

json instance_to_json(const ProblemInstance& instance);
ProblemInstance instance_from_json(const json& j);

json sgd_config_to_json(const SgdConfig& config);
SgdConfig sgd_config_from_json(const json& j);

json scheme_to_json(const AveragingScheme& scheme);
AveragingScheme scheme_from_json(const json& j);

json partial_sum_to_json(const PartialGeometricSum& partial);
PartialGeometricSum partial_sum_from_json(const json& j);

json risk_report_to_json(const RiskReport& report);

/// Trace files: a CSV matrix, one iterate per row, plus a JSON sidecar with
/// the SgdConfig and provenance; values round-trip exactly.
void save_trace(const IterateTrace& trace, const std::string& csv_path,
                const std::string& sidecar_path);
IterateTrace load_trace(const std::string& csv_path, const std::string& sidecar_path);

}  // namespace geoavg
