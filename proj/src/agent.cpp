#include "ace/agent.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "json.hpp"

namespace ace {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * log(2*pi)

// log(1 - tanh(u)^2), numerically stable for any u.
double logOneMinusTanhSq(double u) {
    double au = std::abs(u);
    return 2.0 * (std::numbers::ln2 - au - std::log1p(std::exp(-2.0 * au)));
}

std::vector<double> concat(std::span<const double> a,
                           std::span<const double> b) {
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

nlohmann::json netJson(const NetworkParams& net) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : net.layers)
        layers.push_back({{"rows", l.weight.rows},
                          {"cols", l.weight.cols},
                          {"weight", l.weight.data},
                          {"bias", l.bias},
                          {"relu", l.activation == Activation::Relu}});
    return layers;
}

nlohmann::json optJson(const OptimizerState& s) {
    nlohmann::json j;
    j["step"] = s.step;
    j["lr"] = s.learningRate;
    nlohmann::json m = nlohmann::json::array(), v = nlohmann::json::array();
    for (const auto& w : s.m.weight) m.push_back(w.data);
    for (const auto& w : s.v.weight) v.push_back(w.data);
    j["mWeights"] = m;
    j["vWeights"] = v;
    j["mBias"] = s.m.bias;
    j["vBias"] = s.v.bias;
    return j;
}

}  // namespace

SacAgent::SacAgent(const AgentConfig& config, std::size_t stateDim,
                   std::size_t actionDim, std::uint64_t seed)
    : config_(config),
      stateDim_(stateDim),
      actionDim_(actionDim),
      replay_(config.replayCapacity),
      localBuffer_(config.localBufferSize) {
    Rng rng(seed);
    std::vector<std::size_t> actorWidths{stateDim};
    actorWidths.insert(actorWidths.end(), config.hidden.begin(),
                       config.hidden.end());
    actorWidths.push_back(2 * actionDim);
    actor_ = makeMlp(actorWidths, rng);

    std::vector<std::size_t> criticWidths{stateDim + actionDim};
    criticWidths.insert(criticWidths.end(), config.hidden.begin(),
                        config.hidden.end());
    criticWidths.push_back(1);
    critic1_ = makeMlp(criticWidths, rng);
    critic2_ = makeMlp(criticWidths, rng);
    target1_ = critic1_;
    target2_ = critic2_;

    actorOpt_ = makeOptimizer(actor_, config.learningRate);
    critic1Opt_ = makeOptimizer(critic1_, config.learningRate);
    critic2Opt_ = makeOptimizer(critic2_, config.learningRate);
    alphaOpt_.learningRate = config.learningRate;
    logAlpha_ = std::log(config.autoAlpha ? config.initialAlpha
                                          : config.fixedAlpha);
    weights_ = CausalWeights::uniform(actionDim);
}

double SacAgent::alpha() const { return std::exp(logAlpha_); }

ActorOutput SacAgent::actorEvaluate(std::span<const double> state,
                                    ActionMode mode, Rng& rng) const {
    auto trace = forward(actor_, state);
    return headFromTrace(trace, mode, rng);
}

ActorOutput SacAgent::headFromTrace(const ForwardTrace& trace, ActionMode mode,
                                    Rng& rng) const {
    const auto& out = trace.output();
    ActorOutput a;
    a.mean.resize(actionDim_);
    a.logStd.resize(actionDim_);
    a.logStdClamped.resize(actionDim_);
    a.noise.resize(actionDim_);
    a.preSquash.resize(actionDim_);
    a.action.resize(actionDim_);
    a.logProbPerDim.resize(actionDim_);
    for (std::size_t i = 0; i < actionDim_; ++i) {
        a.mean[i] = out[i];
        double raw = out[actionDim_ + i];
        double clamped = std::clamp(raw, config_.logStdMin, config_.logStdMax);
        a.logStd[i] = clamped;
        a.logStdClamped[i] = clamped != raw;
        double sigma = std::exp(clamped);
        double xi = mode == ActionMode::Stochastic ? rng.gaussian() : 0.0;
        a.noise[i] = xi;
        double u = a.mean[i] + sigma * xi;
        a.preSquash[i] = u;
        double act = std::tanh(u);
        a.action[i] = act;
        if (!std::isfinite(act))
            throw NumericError("actorEvaluate: non-finite action output");
        a.logProbPerDim[i] = -clamped - kHalfLog2Pi - 0.5 * xi * xi -
                             logOneMinusTanhSq(u);
    }
    return a;
}

std::vector<double> SacAgent::selectAction(std::span<const double> state,
                                           ActionMode mode, Rng& rng) const {
    return actorEvaluate(state, mode, rng).action;
}

double SacAgent::causalEntropyTerm(const ActorOutput& out) const {
    double h = 0.0;
    for (std::size_t i = 0; i < actionDim_; ++i)
        h -= weights_.normalized[i] * out.logProbPerDim[i];
    return h;
}

void SacAgent::observe(Transition t) {
    localBuffer_.add(t);
    replay_.add(std::move(t));
}

double SacAgent::minCriticValue(std::span<const double> state,
                                std::span<const double> action,
                                const NetworkParams& c1,
                                const NetworkParams& c2) const {
    auto input = concat(state, action);
    double q1 = forward(c1, input).output()[0];
    double q2 = forward(c2, input).output()[0];
    return std::min(q1, q2);
}

double SacAgent::criticTarget(const Transition& t, Rng& rng) const {
    auto next = actorEvaluate(t.nextState, ActionMode::Stochastic, rng);
    double qbar = minCriticValue(t.nextState, next.action, target1_, target2_);
    double hc = causalEntropyTerm(next);
    double mask = t.terminal ? 0.0 : 1.0;
    double y = t.reward + config_.gamma * mask * (qbar + alpha() * hc);
    if (!std::isfinite(y))
        throw NumericError("criticTarget: non-finite target value");
    return y;
}

void SacAgent::criticLossGradients(const std::vector<std::size_t>& batch,
                                   Rng& rng, Gradients& g1, Gradients& g2,
                                   double& lossOut) const {
    double invN = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    double grad[1];
    for (std::size_t idx : batch) {
        const Transition& t = replay_.at(idx);
        double y = criticTarget(t, rng);
        auto input = concat(t.state, t.action);
        auto tr1 = forward(critic1_, input);
        auto tr2 = forward(critic2_, input);
        double d1 = tr1.output()[0] - y;
        double d2 = tr2.output()[0] - y;
        loss += (d1 * d1 + d2 * d2) * invN;
        grad[0] = 2.0 * d1 * invN;
        backwardAccumulate(critic1_, tr1, grad, g1);
        grad[0] = 2.0 * d2 * invN;
        backwardAccumulate(critic2_, tr2, grad, g2);
    }
    lossOut = loss;
}

Gradients SacAgent::actorLossGradients(const std::vector<std::size_t>& batch,
                                       Rng& rng, double& lossOut,
                                       double& entropyOut) const {
    Gradients g = zeroGradients(actor_);
    double invN = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0, entropy = 0.0;
    double a = alpha();
    std::vector<double> outGrad(2 * actionDim_);
    double one[1] = {1.0};
    for (std::size_t idx : batch) {
        const Transition& t = replay_.at(idx);
        auto trace = forward(actor_, t.state);
        ActorOutput out = headFromTrace(trace, ActionMode::Stochastic, rng);

        auto input = concat(t.state, out.action);
        auto tr1 = forward(critic1_, input);
        auto tr2 = forward(critic2_, input);
        double q1 = tr1.output()[0];
        double q2 = tr2.output()[0];
        bool firstIsMin = q1 <= q2;
        double qmin = firstIsMin ? q1 : q2;

        Gradients cg = firstIsMin ? backward(critic1_, tr1, one)
                                  : backward(critic2_, tr2, one);
        // dQmin/da_i is the action slice of the critic input gradient.
        double hc = causalEntropyTerm(out);
        loss += (-qmin - a * hc) * invN;
        entropy += hc * invN;

        for (std::size_t i = 0; i < actionDim_; ++i) {
            double dqda = cg.input[stateDim_ + i];
            double act = out.action[i];
            double dadu = 1.0 - act * act;
            double sigmaXi = std::exp(out.logStd[i]) * out.noise[i];
            double w = a * weights_.normalized[i];
            // d/dmu and d/dlogstd of (-qmin + alpha * sum w_i log pi_i)
            outGrad[i] = -dqda * dadu + w * 2.0 * act;
            double gs = -dqda * dadu * sigmaXi +
                        w * (-1.0 + 2.0 * act * sigmaXi);
            outGrad[actionDim_ + i] = out.logStdClamped[i] ? 0.0 : gs;
        }
        for (double& v : outGrad) v *= invN;
        backwardAccumulate(actor_, trace, outGrad, g);
    }
    lossOut = loss;
    entropyOut = entropy;
    return g;
}

UpdateMetrics SacAgent::update(Rng& rng) {
    UpdateMetrics m;
    if (replay_.size() < config_.batchSize) {
        m.alpha = alpha();
        return m;
    }
    auto batch = replay_.sampleIndices(config_.batchSize, rng);

    Gradients g1 = zeroGradients(critic1_);
    Gradients g2 = zeroGradients(critic2_);
    criticLossGradients(batch, rng, g1, g2, m.criticLoss);
    adamStep(critic1Opt_, critic1_, g1);
    adamStep(critic2Opt_, critic2_, g2);

    Gradients ga = actorLossGradients(batch, rng, m.actorLoss, m.entropyEstimate);
    adamStep(actorOpt_, actor_, ga);

    if (config_.autoAlpha) {
        double targetEntropy = -static_cast<double>(actionDim_);
        double grad = m.entropyEstimate - targetEntropy;
        logAlpha_ = alphaOpt_.update(logAlpha_, grad);
    }
    m.alpha = alpha();

    ++updateCount_;
    if (updateCount_ % config_.targetUpdateInterval == 0) polyakUpdate();
    return m;
}

void SacAgent::polyakUpdate() {
    double tau = config_.tauSoft;
    auto blend = [tau](NetworkParams& tgt, const NetworkParams& src) {
        for (std::size_t l = 0; l < tgt.layers.size(); ++l) {
            auto& tw = tgt.layers[l].weight.data;
            const auto& sw = src.layers[l].weight.data;
            for (std::size_t i = 0; i < tw.size(); ++i)
                tw[i] = (1.0 - tau) * tw[i] + tau * sw[i];
            auto& tb = tgt.layers[l].bias;
            const auto& sb = src.layers[l].bias;
            for (std::size_t i = 0; i < tb.size(); ++i)
                tb[i] = (1.0 - tau) * tb[i] + tau * sb[i];
        }
    };
    blend(target1_, critic1_);
    blend(target2_, critic2_);
}

std::optional<CausalWeights> SacAgent::refreshCausalWeights(
    std::uint64_t step) {
    if (localBuffer_.size() < 100) return std::nullopt;
    ObservationBatch batch;
    batch.stateDim = stateDim_;
    batch.actionDim = actionDim_;
    batch.rows = Matrix(localBuffer_.size(), stateDim_ + actionDim_ + 1);
    for (std::size_t i = 0; i < localBuffer_.size(); ++i) {
        const Transition& t = localBuffer_.at(i);
        std::size_t c = 0;
        for (double v : t.state) batch.rows.at(i, c++) = v;
        for (double v : t.action) batch.rows.at(i, c++) = v;
        batch.rows.at(i, c) = t.reward;
    }
    CausalWeights w;
    try {
        w = discoverWeights(batch, step);
    } catch (const std::exception&) {
        w.degenerate = true;
    }
    if (w.degenerate) {
        // An uninformative window (constant reward, collinear residuals)
        // carries no evidence either way, so the last valid estimate is
        // kept instead of snapping back to uniform.
        w = weights_;
        w.degenerate = true;
    }
    w.timestamp = step;
    weights_ = w;
    return w;
}

DormancyReport SacAgent::measureDormancy(Rng& rng, std::uint64_t step) {
    if (replay_.size() < config_.batchSize) {
        DormancyReport empty;
        empty.threshold = config_.dormancyThreshold;
        empty.step = step;
        return empty;
    }
    auto batch = replay_.sampleIndices(config_.batchSize, rng);
    double tau = config_.dormancyThreshold;

    double lossTmp, entTmp;
    Gradients ga = actorLossGradients(batch, rng, lossTmp, entTmp);
    Gradients g1 = zeroGradients(critic1_);
    Gradients g2 = zeroGradients(critic2_);
    criticLossGradients(batch, rng, g1, g2, lossTmp);

    auto repA = dormancyDegree(gradientNorms(ga), tau, step);
    auto rep1 = dormancyDegree(gradientNorms(g1), tau, step);
    auto rep2 = dormancyDegree(gradientNorms(g2), tau, step);
    return combineReports({repA, rep1, rep2});
}

ResetEvent SacAgent::applyReset(const DormancyReport& report,
                                std::uint64_t seed) {
    ResetEvent ev;
    ev.step = report.step;
    ev.dormancyDegree = report.degree;
    ev.initSeed = seed;
    ev.eta = softReset(actor_, actorOpt_, report.degree, config_.etaMax, seed);
    softReset(critic1_, critic1Opt_, report.degree, config_.etaMax, seed + 1);
    softReset(critic2_, critic2Opt_, report.degree, config_.etaMax, seed + 2);
    // Targets track the perturbed critics from here on.
    target1_ = critic1_;
    target2_ = critic2_;
    ev.networks = {"actor", "critic1", "critic2", "targets"};
    return ev;
}

std::string SacAgent::checkpointJson() const {
    nlohmann::json j;
    j["stateDim"] = stateDim_;
    j["actionDim"] = actionDim_;
    j["actor"] = netJson(actor_);
    j["critic1"] = netJson(critic1_);
    j["critic2"] = netJson(critic2_);
    j["target1"] = netJson(target1_);
    j["target2"] = netJson(target2_);
    j["actorOpt"] = optJson(actorOpt_);
    j["critic1Opt"] = optJson(critic1Opt_);
    j["critic2Opt"] = optJson(critic2Opt_);
    j["logAlpha"] = logAlpha_;
    j["causalRaw"] = weights_.raw;
    j["causalNormalized"] = weights_.normalized;
    j["causalTimestamp"] = weights_.timestamp;
    return j.dump();
}

// ---------------------------------------------------------------------

namespace {

struct EvalOutcome {
    double meanReturn = 0.0;
    double successRate = 0.0;
};

EvalOutcome evaluatePolicy(const SacAgent& agent, Env& env,
                           std::size_t episodes, std::uint64_t baseSeed) {
    EvalOutcome out;
    Rng dummy(0);  // deterministic mode draws nothing
    for (std::size_t ep = 0; ep < episodes; ++ep) {
        auto state = env.reset(baseSeed + ep);
        double ret = 0.0;
        bool success = false;
        while (true) {
            auto action =
                agent.selectAction(state, ActionMode::Deterministic, dummy);
            auto sr = env.step(action);
            ret += sr.reward;
            success = success || sr.success;
            state = sr.nextState;
            if (sr.terminal) break;
        }
        out.meanReturn += ret / static_cast<double>(episodes);
        out.successRate += (success ? 1.0 : 0.0) / static_cast<double>(episodes);
    }
    return out;
}

}  // namespace

TrainResult trainLoop(const AgentConfig& config, Env& env, Env& evalEnv,
                      std::uint64_t totalSteps, std::uint64_t evalInterval,
                      std::size_t evalEpisodes, std::uint64_t seed) {
    TrainResult result;
    const std::size_t stateDim = env.spec().stateDim;
    const std::size_t actionDim = env.spec().actionDim;

    SacAgent agent(config, stateDim, actionDim, seed);
    Rng mainRng(seed ^ 0x5DEECE66DULL);
    Rng measureRng(seed ^ 0xD1B54A32D192ED03ULL);
    Rng resetRng(seed ^ 0x94D049BB133111EBULL);

    std::uint64_t episode = 0;
    auto state = env.reset(seed * 1000003ULL + episode);

    // Ground-truth active-dim window aligned with D_c (diagnostics).
    std::vector<std::vector<int>> activeWindow;
    std::size_t activeHead = 0;

    double lastResetEta = 0.0;
    double lastDormancy = 0.0;

    for (std::uint64_t step = 1; step <= totalSteps; ++step) {
        std::vector<double> action(actionDim);
        if (step <= config.startSteps) {
            for (double& a : action) a = mainRng.uniform(-1.0, 1.0);
        } else {
            action = agent.selectAction(state, ActionMode::Stochastic, mainRng);
        }

        auto active = env.groundTruthActiveDims();
        auto sr = env.step(action);

        Transition t;
        t.state = state;
        t.action = action;
        t.reward = sr.reward;
        t.nextState = sr.nextState;
        // Horizon cutoffs are not true terminations; only task-level
        // success ends the MDP for bootstrapping purposes.
        t.terminal = sr.success;
        agent.observe(std::move(t));

        if (activeWindow.size() < config.localBufferSize) {
            activeWindow.push_back(active);
        } else {
            activeWindow[activeHead] = active;
            activeHead = (activeHead + 1) % config.localBufferSize;
        }

        if (sr.success && !result.firstTrainSuccessStep)
            result.firstTrainSuccessStep = step;

        if (sr.terminal) {
            ++episode;
            state = env.reset(seed * 1000003ULL + episode);
        } else {
            state = sr.nextState;
        }

        if (step >= config.startSteps) {
            for (std::size_t u = 0; u < config.policyUpdatesPerStep; ++u)
                agent.update(mainRng);
        }

        if (config.useCausalEntropy && config.causalInterval > 0 &&
            step % config.causalInterval == 0) {
            auto w = agent.refreshCausalWeights(step);
            if (w) {
                WeightTraceRow row;
                row.step = step;
                row.normalized = w->normalized;
                std::vector<double> counts(actionDim, 0.0);
                for (const auto& ind : activeWindow)
                    for (std::size_t d = 0; d < actionDim; ++d)
                        counts[d] += ind[d];
                row.modalActiveDim = static_cast<int>(
                    std::max_element(counts.begin(), counts.end()) -
                    counts.begin());
                result.weightTrace.push_back(row);

                nlohmann::json ev;
                ev["type"] = "causalRefresh";
                ev["step"] = step;
                ev["raw"] = w->raw;
                ev["normalized"] = w->normalized;
                ev["degenerate"] = w->degenerate;
                result.events.push_back(ev.dump());
            }
        }

        if (config.useReset && config.resetInterval > 0 &&
            step % config.resetInterval == 0) {
            auto report = agent.measureDormancy(measureRng, step);
            result.events.push_back(report.toJson());
            auto ev = agent.applyReset(report, resetRng.nextUint());
            result.events.push_back(ev.toJson());
            lastResetEta = ev.eta;
        }

        if (evalInterval > 0 && step % evalInterval == 0) {
            auto outcome = evaluatePolicy(agent, evalEnv, evalEpisodes,
                                          seed * 7919ULL + step);
            lastDormancy = agent.measureDormancy(measureRng, step).degree;
            MetricsRow row;
            row.step = step;
            row.evalReturn = outcome.meanReturn;
            row.successRate = outcome.successRate;
            row.alpha = agent.alpha();
            row.dormancy = lastDormancy;
            row.resetEta = lastResetEta;
            row.weights = agent.weights().normalized;
            result.metrics.push_back(row);
            if (outcome.successRate > 0.0 && !result.firstEvalSuccessStep)
                result.firstEvalSuccessStep = step;
        }
    }

    result.finalCheckpointJson = agent.checkpointJson();
    return result;
}

}  // namespace ace
