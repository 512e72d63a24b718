#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ace/adam.hpp"
#include "ace/network.hpp"

namespace ace {

struct LayerDormancy {
    std::size_t neurons = 0;
    std::size_t dormant = 0;
    double meanNorm = 0.0;
    bool deadLayer = false;  // mean norm below 1e-12: every neuron counts
};

// Gradient-dormancy report for one network (or a concatenation of
// networks when layers from several are appended before finalizing).
struct DormancyReport {
    std::vector<LayerDormancy> layers;
    double degree = 0.0;     // dormant fraction over all counted layers
    double threshold = 0.0;  // tau used
    std::uint64_t step = 0;

    std::string toJson() const;
};

// Neuron i in layer l is dormant iff its incoming-weight gradient norm
// n_i^l is at most tau times the layer's mean norm.
DormancyReport dormancyDegree(const GradientRecord& grads, double tau,
                              std::uint64_t step = 0);

// Pools several per-network reports into one network-family degree.
DormancyReport combineReports(const std::vector<DormancyReport>& reports);

struct ResetEvent {
    std::uint64_t step = 0;
    double eta = 0.0;
    double dormancyDegree = 0.0;
    std::uint64_t initSeed = 0;
    std::vector<std::string> networks;

    std::string toJson() const;
};

// params <- (1-eta)*params + eta*fresh, element-wise. eta=0 leaves the
// parameters bit-identical; eta=1 replaces them exactly.
void interpolateToward(NetworkParams& params, const NetworkParams& fresh,
                       double eta);

// Soft reset: eta = clip(alphaTau, 0, etaMax); every weight and bias is
// interpolated toward a fresh initialization drawn with initSeed, and
// the optimizer moments and step counter are cleared (even when eta=0,
// per the training recipe). Returns the eta applied.
double softReset(NetworkParams& params, OptimizerState& optimizer,
                 double alphaTau, double etaMax, std::uint64_t initSeed);

}  // namespace ace
