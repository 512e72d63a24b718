#include "ace/harness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "ace/svg.hpp"

namespace fs = std::filesystem;

namespace ace {

Variant variantFromString(const std::string& name) {
    if (name == "sac") return Variant::Sac;
    if (name == "causalsac") return Variant::CausalSac;
    if (name == "sac-reset") return Variant::SacReset;
    if (name == "ace") return Variant::Ace;
    throw std::invalid_argument("unknown variant '" + name + "'");
}

std::string variantToString(Variant v) {
    switch (v) {
        case Variant::Sac: return "sac";
        case Variant::CausalSac: return "causalsac";
        case Variant::SacReset: return "sac-reset";
        default: return "ace";
    }
}

void RunConfig::applyVariant() {
    agent.useCausalEntropy =
        variant == Variant::CausalSac || variant == Variant::Ace;
    agent.useReset = variant == Variant::SacReset || variant == Variant::Ace;
}

namespace {

void rejectUnknown(const nlohmann::json& j,
                   const std::vector<std::string>& known,
                   const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw std::invalid_argument("config: unknown key '" + it.key() +
                                        "' in " + where);
}

AgentConfig agentFromJson(const nlohmann::json& j) {
    rejectUnknown(j,
                  {"hidden", "gamma", "tauSoft", "learningRate", "batchSize",
                   "policyUpdatesPerStep", "targetUpdateInterval",
                   "replayCapacity", "localBufferSize", "causalInterval",
                   "etaMax", "resetInterval", "dormancyThreshold", "autoAlpha",
                   "fixedAlpha", "initialAlpha", "startSteps", "logStdMin",
                   "logStdMax"},
                  "agent");
    AgentConfig a;
    if (j.contains("hidden"))
        a.hidden = j["hidden"].get<std::vector<std::size_t>>();
    auto rd = [&](const char* k, auto& field) {
        if (j.contains(k)) field = j[k].get<std::decay_t<decltype(field)>>();
    };
    rd("gamma", a.gamma);
    rd("tauSoft", a.tauSoft);
    rd("learningRate", a.learningRate);
    rd("batchSize", a.batchSize);
    rd("policyUpdatesPerStep", a.policyUpdatesPerStep);
    rd("targetUpdateInterval", a.targetUpdateInterval);
    rd("replayCapacity", a.replayCapacity);
    rd("localBufferSize", a.localBufferSize);
    rd("causalInterval", a.causalInterval);
    rd("etaMax", a.etaMax);
    rd("resetInterval", a.resetInterval);
    rd("dormancyThreshold", a.dormancyThreshold);
    rd("autoAlpha", a.autoAlpha);
    rd("fixedAlpha", a.fixedAlpha);
    rd("initialAlpha", a.initialAlpha);
    rd("startSteps", a.startSteps);
    rd("logStdMin", a.logStdMin);
    rd("logStdMax", a.logStdMax);
    return a;
}

}  // namespace

RunConfig RunConfig::fromJson(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    rejectUnknown(j,
                  {"env", "rewardMode", "variant", "agent", "totalSteps",
                   "evalInterval", "evalEpisodes", "seeds", "outputDir"},
                  "top level");
    RunConfig c;
    if (j.contains("env")) c.envName = j["env"].get<std::string>();
    if (j.contains("rewardMode")) {
        std::string m = j["rewardMode"].get<std::string>();
        if (m == "dense")
            c.rewardMode = RewardMode::Dense;
        else if (m == "sparse")
            c.rewardMode = RewardMode::Sparse;
        else
            throw std::invalid_argument("config: rewardMode must be dense|sparse");
    }
    if (j.contains("variant"))
        c.variant = variantFromString(j["variant"].get<std::string>());
    if (j.contains("agent")) c.agent = agentFromJson(j["agent"]);
    if (j.contains("totalSteps"))
        c.totalSteps = j["totalSteps"].get<std::uint64_t>();
    if (j.contains("evalInterval"))
        c.evalInterval = j["evalInterval"].get<std::uint64_t>();
    if (j.contains("evalEpisodes"))
        c.evalEpisodes = j["evalEpisodes"].get<std::size_t>();
    if (j.contains("seeds"))
        c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("outputDir"))
        c.outputDir = j["outputDir"].get<std::string>();

    if (c.seeds.empty())
        throw std::invalid_argument("config: seeds must be nonempty");
    std::vector<std::uint64_t> sorted = c.seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("config: seeds must be distinct");
    if (c.totalSteps < c.evalInterval)
        throw std::invalid_argument("config: totalSteps < evalInterval");
    c.applyVariant();
    return c;
}

std::string RunConfig::toJson() const {
    nlohmann::json j;
    j["env"] = envName;
    j["rewardMode"] = rewardMode == RewardMode::Dense ? "dense" : "sparse";
    j["variant"] = variantToString(variant);
    j["totalSteps"] = totalSteps;
    j["evalInterval"] = evalInterval;
    j["evalEpisodes"] = evalEpisodes;
    j["seeds"] = seeds;
    j["outputDir"] = outputDir;
    return j.dump(2);
}

std::string metricsCsvHeader(std::size_t actionDim) {
    std::string h = "step,seed,return,success,alpha,dormancy,reset_eta";
    for (std::size_t i = 0; i < actionDim; ++i)
        h += ",w_" + std::to_string(i);
    return h;
}

std::string resolveOutputDir(const std::string& configured) {
    const char* root = std::getenv("ACE_OUT_DIR");
    if (root && *root) return std::string(root) + "/" + configured;
    return configured;
}

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

RunArtifacts runExperiment(const RunConfig& config) {
    RunArtifacts art;
    fs::path dir = resolveOutputDir(config.outputDir);
    fs::create_directories(dir);

    std::unique_ptr<Env> probe = makeEnv(config.envName, config.rewardMode);
    std::size_t actionDim = probe->spec().actionDim;

    art.metricsCsvPath = (dir / "metrics.csv").string();
    art.eventsJsonlPath = (dir / "events.jsonl").string();
    art.weightTraceCsvPath = (dir / "weights.csv").string();

    std::ofstream metrics(art.metricsCsvPath);
    std::ofstream events(art.eventsJsonlPath);
    std::ofstream wtrace(art.weightTraceCsvPath);
    metrics << metricsCsvHeader(actionDim) << '\n';
    wtrace << "step,seed,modal_active_dim";
    for (std::size_t i = 0; i < actionDim; ++i) wtrace << ",w_" << i;
    wtrace << '\n';

    {
        std::ofstream cfg(dir / "config.json");
        cfg << config.toJson() << '\n';
    }

    for (std::uint64_t seed : config.seeds) {
        TrainResult res;
        try {
            auto env = makeEnv(config.envName, config.rewardMode);
            auto evalEnv = makeEnv(config.envName, config.rewardMode);
            res = trainLoop(config.agent, *env, *evalEnv, config.totalSteps,
                            config.evalInterval, config.evalEpisodes, seed);
        } catch (const std::exception& e) {
            nlohmann::json crash;
            crash["seed"] = seed;
            crash["error"] = e.what();
            std::ofstream out(dir / "crash_report.json");
            out << crash.dump(2) << '\n';
            throw;
        }

        for (const auto& row : res.metrics) {
            metrics << row.step << ',' << seed << ',' << num(row.evalReturn)
                    << ',' << num(row.successRate) << ',' << num(row.alpha)
                    << ',' << num(row.dormancy) << ',' << num(row.resetEta);
            for (double w : row.weights) metrics << ',' << num(w);
            metrics << '\n';
        }
        for (const auto& line : res.events) {
            auto j = nlohmann::json::parse(line);
            j["seed"] = seed;
            events << j.dump() << '\n';
        }
        for (const auto& row : res.weightTrace) {
            wtrace << row.step << ',' << seed << ',' << row.modalActiveDim;
            for (double w : row.normalized) wtrace << ',' << num(w);
            wtrace << '\n';
        }
        std::string ckPath =
            (dir / ("checkpoint_seed" + std::to_string(seed) + ".json"))
                .string();
        std::ofstream ck(ckPath);
        ck << res.finalCheckpointJson << '\n';
        art.checkpointPaths.push_back(ckPath);
        art.firstEvalSuccess[seed] = res.firstEvalSuccessStep.value_or(0);
    }
    return art;
}

namespace {

std::vector<std::vector<std::string>> readCsv(const std::string& path,
                                              std::vector<std::string>& header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open CSV: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("empty CSV: " + path);
    header.clear();
    {
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) header.push_back(tok);
    }
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> row;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) row.push_back(tok);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::size_t columnIndex(const std::vector<std::string>& header,
                        const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
        throw std::runtime_error("CSV missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

std::vector<SummaryRow> aggregate(const std::string& metricsCsvPath) {
    std::vector<std::string> header;
    auto rows = readCsv(metricsCsvPath, header);
    if (rows.empty())
        throw std::runtime_error("aggregate: no data rows in " +
                                 metricsCsvPath);
    std::size_t cStep = columnIndex(header, "step");
    std::size_t cSeed = columnIndex(header, "seed");
    std::size_t cRet = columnIndex(header, "return");
    std::size_t cSucc = columnIndex(header, "success");
    std::size_t cDorm = columnIndex(header, "dormancy");

    // seed -> ordered list of (step, return, success, dormancy)
    std::map<std::uint64_t, std::vector<std::array<double, 4>>> bySeed;
    for (const auto& row : rows) {
        std::uint64_t seed = std::stoull(row[cSeed]);
        bySeed[seed].push_back({std::stod(row[cStep]), std::stod(row[cRet]),
                                std::stod(row[cSucc]), std::stod(row[cDorm])});
    }
    // All seeds must share the evaluation grid exactly.
    const auto& first = bySeed.begin()->second;
    for (const auto& [seed, rs] : bySeed) {
        if (rs.size() != first.size())
            throw std::runtime_error(
                "aggregate: misaligned evaluation grids across seeds");
        for (std::size_t i = 0; i < rs.size(); ++i)
            if (rs[i][0] != first[i][0])
                throw std::runtime_error(
                    "aggregate: misaligned evaluation grids across seeds");
    }

    std::vector<SummaryRow> out;
    for (std::size_t i = 0; i < first.size(); ++i) {
        SummaryRow s;
        s.step = static_cast<std::uint64_t>(first[i][0]);
        s.n = bySeed.size();
        std::vector<double> rets, succs, dorms;
        for (const auto& [seed, rs] : bySeed) {
            rets.push_back(rs[i][1]);
            succs.push_back(rs[i][2]);
            dorms.push_back(rs[i][3]);
        }
        auto stats = [](const std::vector<double>& v, double& m, double& sd,
                        double& lo, double& hi) {
            m = 0;
            for (double x : v) m += x;
            m /= static_cast<double>(v.size());
            sd = 0;
            if (v.size() > 1) {
                for (double x : v) sd += (x - m) * (x - m);
                sd = std::sqrt(sd / static_cast<double>(v.size() - 1));
            }
            lo = *std::min_element(v.begin(), v.end());
            hi = *std::max_element(v.begin(), v.end());
        };
        stats(rets, s.returnMean, s.returnStd, s.returnMin, s.returnMax);
        stats(succs, s.successMean, s.successStd, s.successMin, s.successMax);
        double tmpSd, tmpLo, tmpHi;
        stats(dorms, s.dormancyMean, tmpSd, tmpLo, tmpHi);
        out.push_back(s);
    }
    return out;
}

void writeSummaryCsv(const std::vector<SummaryRow>& summary,
                     const std::string& path) {
    std::ofstream out(path);
    out << "step,n,return_mean,return_std,return_min,return_max,"
           "success_mean,success_std,success_min,success_max,dormancy_mean\n";
    for (const auto& s : summary) {
        out << s.step << ',' << s.n << ',' << num(s.returnMean) << ','
            << num(s.returnStd) << ',' << num(s.returnMin) << ','
            << num(s.returnMax) << ',' << num(s.successMean) << ','
            << num(s.successStd) << ',' << num(s.successMin) << ','
            << num(s.successMax) << ',' << num(s.dormancyMean) << '\n';
    }
}

std::vector<SummaryRow> readSummaryCsv(const std::string& path) {
    std::vector<std::string> header;
    auto rows = readCsv(path, header);
    std::vector<SummaryRow> out;
    for (const auto& r : rows) {
        SummaryRow s;
        s.step = std::stoull(r[columnIndex(header, "step")]);
        s.n = std::stoull(r[columnIndex(header, "n")]);
        s.returnMean = std::stod(r[columnIndex(header, "return_mean")]);
        s.returnStd = std::stod(r[columnIndex(header, "return_std")]);
        s.returnMin = std::stod(r[columnIndex(header, "return_min")]);
        s.returnMax = std::stod(r[columnIndex(header, "return_max")]);
        s.successMean = std::stod(r[columnIndex(header, "success_mean")]);
        s.successStd = std::stod(r[columnIndex(header, "success_std")]);
        s.successMin = std::stod(r[columnIndex(header, "success_min")]);
        s.successMax = std::stod(r[columnIndex(header, "success_max")]);
        s.dormancyMean = std::stod(r[columnIndex(header, "dormancy_mean")]);
        out.push_back(s);
    }
    return out;
}

void emitPlots(const std::vector<SummaryRow>& summary,
               const std::string& weightTraceCsvPath,
               const std::string& outDir) {
    if (summary.empty())
        throw std::runtime_error("emitPlots: empty summary");
    fs::create_directories(outDir);

    {
        Curve ret;
        ret.label = "return (mean +- std)";
        for (const auto& s : summary) {
            ret.x.push_back(static_cast<double>(s.step));
            ret.y.push_back(s.returnMean);
            ret.band.push_back(s.returnStd);
        }
        std::ofstream out(fs::path(outDir) / "learning_curve.svg");
        out << renderSvgPlot("Learning curve", "environment step", "return",
                             {ret});
    }
    {
        Curve d;
        d.label = "dormancy degree";
        for (const auto& s : summary) {
            d.x.push_back(static_cast<double>(s.step));
            d.y.push_back(s.dormancyMean);
        }
        std::ofstream out(fs::path(outDir) / "dormancy.svg");
        out << renderSvgPlot("Gradient dormancy", "environment step",
                             "dormancy degree", {d});
    }
    if (!weightTraceCsvPath.empty() && fs::exists(weightTraceCsvPath)) {
        std::vector<std::string> header;
        auto rows = readCsv(weightTraceCsvPath, header);
        std::size_t firstW = columnIndex(header, "w_0");
        std::size_t dims = header.size() - firstW;
        std::size_t cStep = columnIndex(header, "step");
        // Mean across seeds per refresh step, one curve per dimension.
        std::map<std::uint64_t, std::pair<std::vector<double>, std::size_t>>
            acc;
        for (const auto& r : rows) {
            std::uint64_t step = std::stoull(r[cStep]);
            auto& [sums, count] = acc[step];
            sums.resize(dims, 0.0);
            for (std::size_t d = 0; d < dims; ++d)
                sums[d] += std::stod(r[firstW + d]);
            ++count;
        }
        std::vector<Curve> curves(dims);
        for (std::size_t d = 0; d < dims; ++d)
            curves[d].label = "w_" + std::to_string(d);
        for (const auto& [step, sc] : acc) {
            for (std::size_t d = 0; d < dims; ++d) {
                curves[d].x.push_back(static_cast<double>(step));
                curves[d].y.push_back(sc.first[d] /
                                      static_cast<double>(sc.second));
            }
        }
        std::ofstream out(fs::path(outDir) / "causal_weights.svg");
        out << renderSvgPlot("Causal weights", "environment step",
                             "normalized weight", curves);
    }
}

}  // namespace ace
