#pragma once

#include "wh/classify.hpp"
#include "wh/problem.hpp"

#include <json.hpp>

#include <string>

namespace wh {

inline constexpr const char* kToolName = "whclassify";
inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kReportFormatVersion = 1;

std::string content_hash(const std::string& text);  // fnv1a-64, hex

nlohmann::ordered_json report_json(const ProblemSpec& spec, const ClassifyConfig& cfg,
                                   const ClassificationOutcome& outcome);

// Error report emitted when classification fails after parsing succeeded.
nlohmann::ordered_json error_report_json(const ProblemSpec& spec, const std::string& kind,
                                         const std::string& message);

struct RunResult {
    int exit_code = 0;  // 0 classified, 2 input error, 3 numeric failure
    nlohmann::ordered_json report;
    std::string diagram_text;
    std::string diagram_dot;
};

// Parses, classifies, and assembles the report. Input errors are thrown
// (no report can exist); numeric failures are captured in the report with
// exit code 3.
RunResult run_classification(const ProblemSpec& spec);

} // namespace wh
