#pragma once

#include <string>
#include <utility>
#include <vector>

#include "kggraph/conserved.hpp"
#include "kggraph/evolution.hpp"
#include "kggraph/graph.hpp"
#include "kggraph/spectrum.hpp"
#include "kggraph/stability.hpp"

namespace kggraph {

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

std::string to_json(const GraphFunction& f);
GraphFunction graph_function_from_json(const std::string& text);

std::string to_json(const SpectralReport& r);
SpectralReport spectral_report_from_json(const std::string& text);

std::string profile_csv(const GraphFunction& f);
std::string trajectory_csv(const Trajectory& tr);
std::string slope_csv(const std::vector<std::pair<PhysParams, SlopeReport>>& rows);
std::string verdict_csv(const std::vector<StabilityVerdict>& rows);

/// Header plus rows, split on commas (no quoting is ever emitted).
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace kggraph
