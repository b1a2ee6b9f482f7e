#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "embeval/alp.hpp"
#include "embeval/probe.hpp"

namespace embeval {

inline constexpr char kToolVersion[] = "0.1.0";
inline constexpr int kSchemaVersion = 1;

struct InputDigest {
    std::string role;  // e.g. "embeddings", "features"
    std::string path;
    std::string sha256;
};

// Provenance block embedded in every emitted report. Reports from identical
// inputs and seeds are byte-identical except for duration_seconds.
struct RunManifest {
    std::string command_line;
    std::vector<InputDigest> inputs;
    std::vector<std::uint64_t> seeds;
    double duration_seconds = 0.0;
};

std::string sha256_file(const std::string& path);

nlohmann::ordered_json manifest_json(const RunManifest& manifest);

nlohmann::ordered_json alp_report_json(const ALPReport& report);
nlohmann::ordered_json mean_alp_report_json(const MeanALPReport& report);
nlohmann::ordered_json comparison_report_json(const ComparisonReport& report);
nlohmann::ordered_json correlation_json(const CorrelationResult& pearson_part,
                                        const CorrelationResult& spearman_part);
nlohmann::ordered_json probe_json(const LinearProbe& probe);

}  // namespace embeval
