#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ace/agent.hpp"

namespace ace {

enum class Variant { Sac, CausalSac, SacReset, Ace };

Variant variantFromString(const std::string& name);
std::string variantToString(Variant v);

// Experiment configuration; parsed from a single JSON document.
// Unknown keys are rejected.
struct RunConfig {
    std::string envName = "chainreach-4d";
    RewardMode rewardMode = RewardMode::Dense;
    Variant variant = Variant::Ace;
    AgentConfig agent;
    std::uint64_t totalSteps = 50000;
    std::uint64_t evalInterval = 1000;
    std::size_t evalEpisodes = 10;
    std::vector<std::uint64_t> seeds = {0};
    std::string outputDir = "out";

    static RunConfig fromJson(const std::string& text);
    std::string toJson() const;

    // Applies the two ablation switches implied by the variant.
    void applyVariant();
};

struct RunArtifacts {
    std::string metricsCsvPath;
    std::string eventsJsonlPath;
    std::string weightTraceCsvPath;
    std::vector<std::string> checkpointPaths;
    // Per seed: steps-to-first-success observed in deterministic
    // evaluation (0 = never).
    std::map<std::uint64_t, std::uint64_t> firstEvalSuccess;
};

// Trains every seed, writes all artifact files under config.outputDir.
RunArtifacts runExperiment(const RunConfig& config);

struct SummaryRow {
    std::uint64_t step = 0;
    std::size_t n = 0;
    double returnMean = 0, returnStd = 0, returnMin = 0, returnMax = 0;
    double successMean = 0, successStd = 0, successMin = 0, successMax = 0;
    double dormancyMean = 0;
};

// Exact sample statistics (std uses n-1) per evaluation step across
// seeds. Throws on an empty list or misaligned evaluation grids.
std::vector<SummaryRow> aggregate(const std::string& metricsCsvPath);
void writeSummaryCsv(const std::vector<SummaryRow>& summary,
                     const std::string& path);
std::vector<SummaryRow> readSummaryCsv(const std::string& path);

// Static SVG emission: learning curve with +-1 std band, per-dimension
// causal-weight traces, dormancy-degree trace.
void emitPlots(const std::vector<SummaryRow>& summary,
               const std::string& weightTraceCsvPath,
               const std::string& outDir);

// Fixed metrics CSV header for a given action dimensionality.
std::string metricsCsvHeader(std::size_t actionDim);

// Output root override honored by the CLI.
std::string resolveOutputDir(const std::string& configured);

}  // namespace ace
