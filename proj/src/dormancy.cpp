#include "ace/dormancy.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "ace/common.hpp"

namespace ace {

std::string DormancyReport::toJson() const {
    nlohmann::json j;
    j["type"] = "dormancy";
    j["step"] = step;
    j["tau"] = threshold;
    j["degree"] = degree;
    nlohmann::json ls = nlohmann::json::array();
    for (const auto& l : layers)
        ls.push_back({{"neurons", l.neurons},
                      {"dormant", l.dormant},
                      {"meanNorm", l.meanNorm},
                      {"dead", l.deadLayer}});
    j["layers"] = ls;
    return j.dump();
}

std::string ResetEvent::toJson() const {
    nlohmann::json j;
    j["type"] = "reset";
    j["step"] = step;
    j["eta"] = eta;
    j["dormancyDegree"] = dormancyDegree;
    j["initSeed"] = initSeed;
    j["networks"] = networks;
    return j.dump();
}

DormancyReport dormancyDegree(const GradientRecord& grads, double tau,
                              std::uint64_t step) {
    DormancyReport rep;
    rep.threshold = tau;
    rep.step = step;
    std::size_t totalNeurons = 0, totalDormant = 0;
    for (const auto& norms : grads.neuronNorms) {
        LayerDormancy ld;
        ld.neurons = norms.size();
        double sum = 0.0;
        for (double n : norms) sum += n;
        ld.meanNorm = norms.empty() ? 0.0
                                    : sum / static_cast<double>(norms.size());
        if (ld.meanNorm < 1e-12) {
            // A dead layer is maximally dormant.
            ld.deadLayer = true;
            ld.dormant = ld.neurons;
        } else {
            for (double n : norms)
                if (n <= tau * ld.meanNorm) ++ld.dormant;
        }
        totalNeurons += ld.neurons;
        totalDormant += ld.dormant;
        rep.layers.push_back(ld);
    }
    rep.degree = totalNeurons == 0
                     ? 0.0
                     : static_cast<double>(totalDormant) /
                           static_cast<double>(totalNeurons);
    return rep;
}

DormancyReport combineReports(const std::vector<DormancyReport>& reports) {
    DormancyReport out;
    std::size_t totalNeurons = 0, totalDormant = 0;
    for (const auto& r : reports) {
        out.threshold = r.threshold;
        out.step = r.step;
        for (const auto& l : r.layers) {
            out.layers.push_back(l);
            totalNeurons += l.neurons;
            totalDormant += l.dormant;
        }
    }
    out.degree = totalNeurons == 0
                     ? 0.0
                     : static_cast<double>(totalDormant) /
                           static_cast<double>(totalNeurons);
    return out;
}

void interpolateToward(NetworkParams& params, const NetworkParams& fresh,
                       double eta) {
    if (eta == 0.0) return;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto& w = params.layers[l].weight.data;
        const auto& fw = fresh.layers[l].weight.data;
        if (w.size() != fw.size())
            throw ShapeError("interpolateToward: shape mismatch");
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] = (1.0 - eta) * w[i] + eta * fw[i];
        auto& b = params.layers[l].bias;
        const auto& fb = fresh.layers[l].bias;
        for (std::size_t i = 0; i < b.size(); ++i)
            b[i] = (1.0 - eta) * b[i] + eta * fb[i];
    }
}

double softReset(NetworkParams& params, OptimizerState& optimizer,
                 double alphaTau, double etaMax, std::uint64_t initSeed) {
    if (etaMax <= 0.0 || etaMax > 1.0)
        throw NumericError("softReset: etaMax must be in (0,1]");
    double eta = std::clamp(alphaTau, 0.0, etaMax);

    std::vector<std::size_t> widths;
    widths.push_back(params.inputDim());
    for (const auto& l : params.layers) widths.push_back(l.weight.rows);
    Rng rng(initSeed);
    NetworkParams fresh = makeMlp(widths, rng);
    if (eta == 1.0)
        params = fresh;
    else
        interpolateToward(params, fresh, eta);
    resetOptimizer(optimizer);
    return eta;
}

}  // namespace ace
