#pragma once

#include <map>
#include <string>
#include <vector>

#include "loopmorse/config.hpp"

namespace loopmorse {

// exit codes of the batch front door
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitVerification = 3;
constexpr int kExitNumerical = 4;

struct PipelineResult {
    int exit_code = kExitOk;
    std::string report_json;                     // deterministic serialization
    std::map<std::string, std::string> files;    // extra artifacts by file name
    std::vector<std::string> failures;
};

// stage is one of: orbits, indices, complex, homology, fredholm, verify-all
PipelineResult run_pipeline(const RunConfig& cfg, const std::string& stage);

// write report.json plus the artifact files under out_dir
void write_result(const PipelineResult& result, const std::string& out_dir);

} // namespace loopmorse
