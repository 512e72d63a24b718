#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ace/adam.hpp"
#include "ace/causal.hpp"
#include "ace/dormancy.hpp"
#include "ace/envs.hpp"
#include "ace/network.hpp"
#include "ace/replay.hpp"
#include "ace/rng.hpp"

namespace ace {

struct AgentConfig {
    std::vector<std::size_t> hidden = {512, 512};
    double gamma = 0.99;
    double tauSoft = 0.005;
    double learningRate = 3e-4;
    std::size_t batchSize = 512;
    std::size_t policyUpdatesPerStep = 1;
    std::size_t targetUpdateInterval = 2;
    std::size_t replayCapacity = 1000000;
    std::size_t localBufferSize = 10000;    // N_c
    std::size_t causalInterval = 10000;     // I
    double etaMax = 0.8;
    std::size_t resetInterval = 200000;
    double dormancyThreshold = 0.025;       // tau
    bool autoAlpha = true;
    double fixedAlpha = 0.2;
    double initialAlpha = 0.2;
    std::size_t startSteps = 1000;          // uniform-random warmup actions
    double logStdMin = -10.0;
    double logStdMax = 2.0;
    // Ablation switches: off+off is plain SAC.
    bool useCausalEntropy = true;
    bool useReset = true;
};

// One actor head evaluation, optionally with a sampled action.
struct ActorOutput {
    std::vector<double> mean;
    std::vector<double> logStd;     // clamped
    std::vector<double> noise;      // reparameterization draws (xi)
    std::vector<double> preSquash;  // mean + sigma * xi
    std::vector<double> action;     // tanh(preSquash)
    std::vector<double> logProbPerDim;  // Gaussian log-density + squash term
    std::vector<std::uint8_t> logStdClamped;  // clamp active: zero gradient
};

enum class ActionMode { Stochastic, Deterministic };

struct UpdateMetrics {
    double criticLoss = 0.0;
    double actorLoss = 0.0;
    double alpha = 0.0;
    double entropyEstimate = 0.0;
};

// SAC backbone with the causality-aware entropy extension and the
// dormancy-guided reset.
class SacAgent {
public:
    SacAgent(const AgentConfig& config, std::size_t stateDim,
             std::size_t actionDim, std::uint64_t seed);

    ActorOutput actorEvaluate(std::span<const double> state, ActionMode mode,
                              Rng& rng) const;
    std::vector<double> selectAction(std::span<const double> state,
                                     ActionMode mode, Rng& rng) const;

    // -sum_i w_i * log pi_i(a_i|s), on the sampled action.
    double causalEntropyTerm(const ActorOutput& out) const;

    void observe(Transition t);

    UpdateMetrics update(Rng& rng);

    // Refreshes the causal weights from the local buffer; returns the
    // new weights, or nothing when the buffer is too small or discovery
    // degenerates to uniform with no data.
    std::optional<CausalWeights> refreshCausalWeights(std::uint64_t step);

    DormancyReport measureDormancy(Rng& rng, std::uint64_t step);
    ResetEvent applyReset(const DormancyReport& report, std::uint64_t seed);

    const CausalWeights& weights() const { return weights_; }
    void setWeights(CausalWeights w) { weights_ = std::move(w); }
    double alpha() const;
    const ReplayBuffer& replay() const { return replay_; }
    const ReplayBuffer& localBuffer() const { return localBuffer_; }
    const AgentConfig& config() const { return config_; }
    std::size_t actionDim() const { return actionDim_; }

    std::string checkpointJson() const;

    // Exposed for white-box tests.
    NetworkParams& actor() { return actor_; }
    NetworkParams& critic1() { return critic1_; }
    NetworkParams& critic2() { return critic2_; }
    const NetworkParams& target1() const { return target1_; }
    const NetworkParams& target2() const { return target2_; }
    double criticTarget(const Transition& t, Rng& rng) const;

private:
    ActorOutput headFromTrace(const ForwardTrace& trace, ActionMode mode,
                              Rng& rng) const;
    double minCriticValue(std::span<const double> state,
                          std::span<const double> action,
                          const NetworkParams& c1,
                          const NetworkParams& c2) const;
    void polyakUpdate();
    Gradients actorLossGradients(const std::vector<std::size_t>& batch,
                                 Rng& rng, double& lossOut,
                                 double& entropyOut) const;
    void criticLossGradients(const std::vector<std::size_t>& batch, Rng& rng,
                             Gradients& g1, Gradients& g2,
                             double& lossOut) const;

    AgentConfig config_;
    std::size_t stateDim_, actionDim_;
    NetworkParams actor_, critic1_, critic2_, target1_, target2_;
    OptimizerState actorOpt_, critic1Opt_, critic2Opt_;
    double logAlpha_;
    ScalarAdam alphaOpt_;
    CausalWeights weights_;
    ReplayBuffer replay_;
    ReplayBuffer localBuffer_;
    std::uint64_t updateCount_ = 0;
};

// ---------------------------------------------------------------------
// Training loop artifacts (in memory; the harness persists them).

struct MetricsRow {
    std::uint64_t step = 0;
    double evalReturn = 0.0;
    double successRate = 0.0;
    double alpha = 0.0;
    double dormancy = 0.0;
    double resetEta = 0.0;
    std::vector<double> weights;
};

struct WeightTraceRow {
    std::uint64_t step = 0;
    std::vector<double> normalized;
    int modalActiveDim = -1;  // most frequent ground-truth dim in D_c
};

struct TrainResult {
    std::vector<MetricsRow> metrics;
    std::vector<WeightTraceRow> weightTrace;
    std::vector<std::string> events;  // JSONL lines
    std::optional<std::uint64_t> firstTrainSuccessStep;
    std::optional<std::uint64_t> firstEvalSuccessStep;
    std::string finalCheckpointJson;
};

// Algorithm main loop: collect, store into D and D_c, gradient steps,
// causal refresh every I steps, dormancy-guided reset every reset
// interval. Deterministic given (config, seed).
TrainResult trainLoop(const AgentConfig& config, Env& env, Env& evalEnv,
                      std::uint64_t totalSteps, std::uint64_t evalInterval,
                      std::size_t evalEpisodes, std::uint64_t seed);

}  // namespace ace
