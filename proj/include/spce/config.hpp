#pragma once

#include <string>
#include <vector>

#include "spce/report.hpp"
#include "spce/simulate.hpp"

namespace spce {

// A config file describes either one run or a CHSH campaign (two settings
// per side expanded into the four setting pairs, all under one master seed).
struct ParsedConfig {
  std::vector<ExperimentConfig> runs;
  bool campaign = false;
};

// Strict schema: unknown keys are errors. Throws ParseError with line
// diagnostics for malformed JSON, ValidationError for out-of-range or
// unknown fields.
ParsedConfig parse_config(const std::string& path);
ParsedConfig parse_config_text(const std::string& text, const std::string& origin);

// Echoes the effective (post-default) configuration into a report.
void echo_config(const ExperimentConfig& config, ReportDoc& doc,
                 const std::string& prefix);

}  // namespace spce
