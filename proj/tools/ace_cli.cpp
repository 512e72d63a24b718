#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ace/harness.hpp"
#include "ace/propcheck.hpp"

namespace fs = std::filesystem;

namespace {

std::string readFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::uint64_t> parseSeedList(const std::string& csv) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) seeds.push_back(std::stoull(tok));
    return seeds;
}

int cmdRun(const std::string& configPath, const std::string& seedOverride,
           const std::string& variantOverride) {
    ace::RunConfig config = ace::RunConfig::fromJson(readFile(configPath));
    if (!seedOverride.empty()) config.seeds = parseSeedList(seedOverride);
    if (!variantOverride.empty())
        config.variant = ace::variantFromString(variantOverride);
    config.applyVariant();
    if (config.seeds.empty())
        throw std::runtime_error("seed override produced an empty seed list");

    ace::RunArtifacts art = ace::runExperiment(config);
    std::cout << "metrics: " << art.metricsCsvPath << "\n"
              << "events:  " << art.eventsJsonlPath << "\n"
              << "weights: " << art.weightTraceCsvPath << "\n";
    for (const auto& [seed, step] : art.firstEvalSuccess) {
        std::cout << "seed " << seed << ": first eval success ";
        if (step == 0)
            std::cout << "never\n";
        else
            std::cout << "at step " << step << "\n";
    }
    return 0;
}

int cmdAggregate(const std::string& inDir, const std::string& outCsv) {
    std::string metrics = (fs::path(inDir) / "metrics.csv").string();
    auto summary = ace::aggregate(metrics);
    ace::writeSummaryCsv(summary, outCsv);
    std::cout << "wrote " << summary.size() << " summary rows to " << outCsv
              << "\n";
    return 0;
}

int cmdPlot(const std::string& summaryCsv, const std::string& outDir) {
    auto summary = ace::readSummaryCsv(summaryCsv);
    // The weight trace, when present, sits next to the summary or in the
    // run directory the summary was aggregated from.
    std::string weights;
    for (const fs::path cand :
         {fs::path(summaryCsv).parent_path() / "weights.csv",
          fs::path(outDir) / "weights.csv"})
        if (fs::exists(cand)) {
            weights = cand.string();
            break;
        }
    ace::emitPlots(summary, weights, outDir);
    std::cout << "plots written to " << outDir << "\n";
    return 0;
}

int cmdVerify() {
    auto results = ace::runVerifySuite();
    bool allPassed = true;
    for (const auto& r : results) {
        std::printf("[%s] %-20s %s (%.2fs)\n", r.passed ? "PASS" : "FAIL",
                    r.name.c_str(), r.detail.c_str(), r.seconds);
        allPassed = allPassed && r.passed;
    }
    return allPassed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal-entropy SAC laboratory"};
    app.require_subcommand(1);

    std::string configPath, seedOverride, variantOverride;
    auto* run = app.add_subcommand("run", "Train all configured seeds");
    run->add_option("--config", configPath, "JSON run configuration")
        ->required();
    run->add_option("--seed-override", seedOverride,
                    "Comma-separated seed list replacing the config's");
    run->add_option("--variant", variantOverride,
                    "Algorithm variant: sac|causalsac|sac-reset|ace");

    std::string inDir, outCsv;
    auto* agg = app.add_subcommand(
        "aggregate", "Summarize metrics across seeds (mean/std/min/max)");
    agg->add_option("--in", inDir, "Run directory containing metrics.csv")
        ->required();
    agg->add_option("--out", outCsv, "Summary CSV path")->required();

    std::string summaryCsv, plotDir;
    auto* plot = app.add_subcommand("plot", "Render summary curves as SVG");
    plot->add_option("--summary", summaryCsv, "Summary CSV from aggregate")
        ->required();
    plot->add_option("--out", plotDir, "Output directory")->required();

    auto* verify = app.add_subcommand(
        "verify",
        "Run the property suite: tabular propositions, SEM recovery, "
        "gradient checks, dormancy arithmetic");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmdRun(configPath, seedOverride, variantOverride);
        if (agg->parsed()) return cmdAggregate(inDir, outCsv);
        if (plot->parsed()) return cmdPlot(summaryCsv, plotDir);
        if (verify->parsed()) return cmdVerify();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
