#include "ace/tabular.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace ace {

std::size_t TabularMdp::jointActionCount() const {
    std::size_t n = 1;
    for (std::size_t d : actionDims) n *= d;
    return n;
}

std::size_t TabularMdp::jointIndex(const std::vector<std::size_t>& a) const {
    std::size_t idx = 0, stride = 1;
    for (std::size_t d = 0; d < actionDims.size(); ++d) {
        idx += a[d] * stride;
        stride *= actionDims[d];
    }
    return idx;
}

std::vector<std::size_t> TabularMdp::splitIndex(std::size_t joint) const {
    std::vector<std::size_t> a(actionDims.size());
    for (std::size_t d = 0; d < actionDims.size(); ++d) {
        a[d] = joint % actionDims[d];
        joint /= actionDims[d];
    }
    return a;
}

void TabularMdp::validate() const {
    if (discount <= 0.0 || discount >= 1.0)
        throw NumericError("TabularMdp: discount must be in (0,1)");
    std::size_t na = jointActionCount();
    if (transition.size() != nStates * na * nStates ||
        reward.size() != nStates * na)
        throw ShapeError("TabularMdp: tensor sizes do not match dimensions");
    for (std::size_t s = 0; s < nStates; ++s) {
        for (std::size_t a = 0; a < na; ++a) {
            double sum = 0.0;
            for (std::size_t sn = 0; sn < nStates; ++sn) {
                double v = p(s, a, sn);
                if (v < 0.0) throw NumericError("TabularMdp: negative probability");
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-12)
                throw NumericError("TabularMdp: transition row does not sum to 1");
            if (std::abs(r(s, a)) > rewardMax + 1e-12)
                throw NumericError("TabularMdp: |reward| exceeds rewardMax");
        }
    }
}

std::string TabularMdp::toJson() const {
    nlohmann::json j;
    j["nStates"] = nStates;
    j["actionDims"] = actionDims;
    j["transition"] = transition;
    j["reward"] = reward;
    j["discount"] = discount;
    j["rewardMax"] = rewardMax;
    return j.dump();
}

TabularMdp TabularMdp::fromJson(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    TabularMdp m;
    m.nStates = j.at("nStates").get<std::size_t>();
    m.actionDims = j.at("actionDims").get<std::vector<std::size_t>>();
    m.transition = j.at("transition").get<std::vector<double>>();
    m.reward = j.at("reward").get<std::vector<double>>();
    m.discount = j.at("discount").get<double>();
    m.rewardMax = j.at("rewardMax").get<double>();
    m.validate();
    return m;
}

FactoredPolicy FactoredPolicy::uniform(const TabularMdp& mdp) {
    FactoredPolicy p;
    p.probs.resize(mdp.nStates);
    for (auto& perState : p.probs) {
        perState.resize(mdp.actionDims.size());
        for (std::size_t d = 0; d < mdp.actionDims.size(); ++d)
            perState[d].assign(mdp.actionDims[d],
                               1.0 / static_cast<double>(mdp.actionDims[d]));
    }
    return p;
}

double FactoredPolicy::jointProb(const TabularMdp& mdp, std::size_t s,
                                 std::size_t jointAction) const {
    auto a = mdp.splitIndex(jointAction);
    double prob = 1.0;
    for (std::size_t d = 0; d < a.size(); ++d) prob *= probs[s][d][a[d]];
    return prob;
}

namespace {

double categoricalEntropy(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

}  // namespace

double causalEntropy(const FactoredPolicy& policy, std::size_t state,
                     const CausalWeights& weights) {
    const auto& dims = policy.probs[state];
    if (weights.normalized.size() != dims.size())
        throw ShapeError("causalEntropy: weight/dimension count mismatch");
    double h = 0.0;
    for (std::size_t d = 0; d < dims.size(); ++d)
        h += weights.normalized[d] * categoricalEntropy(dims[d]);
    return h;
}

double causalEntropyJoint(const TabularMdp& mdp, const FactoredPolicy& policy,
                          std::size_t state, const CausalWeights& weights) {
    std::size_t na = mdp.jointActionCount();
    double h = 0.0;
    for (std::size_t a = 0; a < na; ++a) {
        double pj = policy.jointProb(mdp, state, a);
        if (pj <= 0.0) continue;
        auto split = mdp.splitIndex(a);
        double inner = 0.0;
        for (std::size_t d = 0; d < split.size(); ++d) {
            double pd = policy.probs[state][d][split[d]];
            inner += weights.normalized[d] * std::log(pd);
        }
        h -= pj * inner;
    }
    return h;
}

double softStateValue(const TabularMdp& mdp, const FactoredPolicy& policy,
                      const CausalWeights& weights, const QTable& q,
                      std::size_t state, double alpha) {
    std::size_t na = mdp.jointActionCount();
    double ev = 0.0;
    for (std::size_t a = 0; a < na; ++a)
        ev += policy.jointProb(mdp, state, a) * q.at(state, a);
    return ev + alpha * causalEntropy(policy, state, weights);
}

namespace {

QTable applyBellmanImpl(const TabularMdp& mdp, const FactoredPolicy& policy,
                        const CausalWeights& weights, const QTable& q,
                        double alpha, bool parallel) {
    std::size_t na = mdp.jointActionCount();
    std::vector<double> v(mdp.nStates);
    // Per-state soft values are independent; disjoint writes keep the
    // parallel result bit-identical to the serial one.
    if (parallel) {
        #pragma omp parallel for schedule(static)
        for (std::size_t s = 0; s < mdp.nStates; ++s)
            v[s] = softStateValue(mdp, policy, weights, q, s, alpha);
    } else {
        for (std::size_t s = 0; s < mdp.nStates; ++s)
            v[s] = softStateValue(mdp, policy, weights, q, s, alpha);
    }

    QTable out(mdp.nStates, na);
    if (parallel) {
        #pragma omp parallel for schedule(static)
        for (std::size_t s = 0; s < mdp.nStates; ++s)
            for (std::size_t a = 0; a < na; ++a) {
                double acc = 0.0;
                for (std::size_t sn = 0; sn < mdp.nStates; ++sn)
                    acc += mdp.p(s, a, sn) * v[sn];
                out.at(s, a) = mdp.r(s, a) + mdp.discount * acc;
            }
    } else {
        for (std::size_t s = 0; s < mdp.nStates; ++s)
            for (std::size_t a = 0; a < na; ++a) {
                double acc = 0.0;
                for (std::size_t sn = 0; sn < mdp.nStates; ++sn)
                    acc += mdp.p(s, a, sn) * v[sn];
                out.at(s, a) = mdp.r(s, a) + mdp.discount * acc;
            }
    }
    return out;
}

}  // namespace

QTable applyCausalBellman(const TabularMdp& mdp, const FactoredPolicy& policy,
                          const CausalWeights& weights, const QTable& q,
                          double alpha) {
    return applyBellmanImpl(mdp, policy, weights, q, alpha, true);
}

QTable applyCausalBellmanSerial(const TabularMdp& mdp,
                                const FactoredPolicy& policy,
                                const CausalWeights& weights, const QTable& q,
                                double alpha) {
    return applyBellmanImpl(mdp, policy, weights, q, alpha, false);
}

QTable policyEvaluationFixedPoint(const TabularMdp& mdp,
                                  const FactoredPolicy& policy,
                                  const CausalWeights& weights, double alpha,
                                  double tol) {
    if (tol <= 0.0) throw NumericError("policyEvaluationFixedPoint: tol <= 0");
    std::size_t na = mdp.jointActionCount();
    QTable q(mdp.nStates, na, 0.0);

    // Entropy bound: sum_i w_i log|A_i| at most.
    double hMax = 0.0;
    for (std::size_t d = 0; d < mdp.actionDims.size(); ++d)
        hMax += weights.normalized[d] *
                std::log(static_cast<double>(mdp.actionDims[d]));
    double bound = (mdp.rewardMax + std::abs(alpha) * hMax) /
                   (1.0 - mdp.discount);
    double iterBound =
        std::ceil(std::log(tol * (1.0 - mdp.discount) / (bound + tol)) /
                  std::log(mdp.discount)) + 16.0;

    for (std::size_t it = 0; it < static_cast<std::size_t>(iterBound); ++it) {
        QTable next = applyCausalBellman(mdp, policy, weights, q, alpha);
        double delta = 0.0;
        for (std::size_t i = 0; i < q.values.size(); ++i)
            delta = std::max(delta, std::abs(next.values[i] - q.values[i]));
        q = std::move(next);
        if (delta < tol) return q;
    }
    throw ConvergenceError(
        "policyEvaluationFixedPoint: exceeded contraction iteration bound");
}

namespace {

// Marginal expected Q for dimension d at state s, holding the other
// dimensions at their current distributions.
std::vector<double> marginalQ(const TabularMdp& mdp, const QTable& q,
                              const FactoredPolicy& policy, std::size_t s,
                              std::size_t d) {
    std::size_t na = mdp.jointActionCount();
    std::vector<double> out(mdp.actionDims[d], 0.0);
    for (std::size_t a = 0; a < na; ++a) {
        auto split = mdp.splitIndex(a);
        double w = 1.0;
        for (std::size_t dd = 0; dd < split.size(); ++dd)
            if (dd != d) w *= policy.probs[s][dd][split[dd]];
        out[split[d]] += w * q.at(s, a);
    }
    return out;
}

// Greedy one-hot on the joint argmax (ties to the lowest joint index),
// expressed as a factored policy.
void greedyState(const TabularMdp& mdp, const QTable& q, std::size_t s,
                 FactoredPolicy& policy) {
    std::size_t na = mdp.jointActionCount();
    std::size_t best = 0;
    for (std::size_t a = 1; a < na; ++a)
        if (q.at(s, a) > q.at(s, best)) best = a;
    auto split = mdp.splitIndex(best);
    for (std::size_t d = 0; d < split.size(); ++d) {
        auto& pd = policy.probs[s][d];
        std::fill(pd.begin(), pd.end(), 0.0);
        pd[split[d]] = 1.0;
    }
}

double stateObjective(const TabularMdp& mdp, const QTable& q,
                      const FactoredPolicy& policy,
                      const CausalWeights& weights, std::size_t s,
                      double alpha) {
    return softStateValue(mdp, policy, weights, q, s, alpha);
}

void coordinateAscentState(const TabularMdp& mdp, const QTable& q,
                           const CausalWeights& weights, std::size_t s,
                           double alpha, FactoredPolicy& policy) {
    constexpr double kTol = 1e-10;
    constexpr std::size_t kMaxSweeps = 10000;
    std::size_t nd = mdp.actionDims.size();
    for (std::size_t sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double maxChange = 0.0;
        for (std::size_t d = 0; d < nd; ++d) {
            auto qd = marginalQ(mdp, q, policy, s, d);
            auto& pd = policy.probs[s][d];
            std::vector<double> next(pd.size(), 0.0);
            double aw = alpha * weights.normalized[d];
            if (aw > 1e-15) {
                // Closed-form: softmax of qd / (alpha * w_d).
                double mx = *std::max_element(qd.begin(), qd.end());
                double z = 0.0;
                for (std::size_t k = 0; k < qd.size(); ++k) {
                    next[k] = std::exp((qd[k] - mx) / aw);
                    z += next[k];
                }
                for (double& v : next) v /= z;
            } else {
                // Zero effective temperature: greedy, lowest index wins.
                std::size_t best = 0;
                for (std::size_t k = 1; k < qd.size(); ++k)
                    if (qd[k] > qd[best]) best = k;
                next[best] = 1.0;
            }
            for (std::size_t k = 0; k < pd.size(); ++k)
                maxChange = std::max(maxChange, std::abs(next[k] - pd[k]));
            pd = std::move(next);
        }
        if (maxChange < kTol) return;
    }
}

}  // namespace

FactoredPolicy policyImprovement(const TabularMdp& mdp, const QTable& q,
                                 const CausalWeights& weights, double alpha,
                                 const FactoredPolicy* warmStart) {
    for (double v : q.values)
        if (!std::isfinite(v))
            throw NumericError("policyImprovement: non-finite Q value");

    FactoredPolicy result = FactoredPolicy::uniform(mdp);
    for (std::size_t s = 0; s < mdp.nStates; ++s) {
        if (alpha <= 1e-15) {
            greedyState(mdp, q, s, result);
            continue;
        }
        // Ascent from the uniform start; also from the warm start when
        // provided, keeping whichever scores higher. Starting from the
        // incumbent policy guarantees the objective never drops.
        FactoredPolicy fromUniform = result;
        coordinateAscentState(mdp, q, weights, s, alpha, fromUniform);
        double bestObj = stateObjective(mdp, q, fromUniform, weights, s, alpha);
        for (std::size_t d = 0; d < mdp.actionDims.size(); ++d)
            result.probs[s][d] = fromUniform.probs[s][d];

        if (warmStart) {
            FactoredPolicy fromWarm = *warmStart;
            coordinateAscentState(mdp, q, weights, s, alpha, fromWarm);
            double obj = stateObjective(mdp, q, fromWarm, weights, s, alpha);
            if (obj > bestObj)
                for (std::size_t d = 0; d < mdp.actionDims.size(); ++d)
                    result.probs[s][d] = fromWarm.probs[s][d];
        }
    }
    return result;
}

std::pair<FactoredPolicy, QTable> policyIteration(const TabularMdp& mdp,
                                                  const CausalWeights& weights,
                                                  double alpha, double tol) {
    if (tol <= 0.0) throw NumericError("policyIteration: tol <= 0");
    FactoredPolicy policy = FactoredPolicy::uniform(mdp);
    QTable q;
    std::size_t maxRounds = 10 * mdp.nStates * mdp.jointActionCount() + 10;
    for (std::size_t round = 0; round < maxRounds; ++round) {
        q = policyEvaluationFixedPoint(mdp, policy, weights, alpha, tol);
        FactoredPolicy next = policyImprovement(mdp, q, weights, alpha, &policy);
        double change = 0.0;
        for (std::size_t s = 0; s < mdp.nStates; ++s)
            for (std::size_t d = 0; d < mdp.actionDims.size(); ++d)
                for (std::size_t k = 0; k < mdp.actionDims[d]; ++k)
                    change = std::max(change,
                                      std::abs(next.probs[s][d][k] -
                                               policy.probs[s][d][k]));
        policy = std::move(next);
        if (change < tol) {
            q = policyEvaluationFixedPoint(mdp, policy, weights, alpha, tol);
            return {policy, q};
        }
    }
    throw ConvergenceError("policyIteration: did not settle within bound");
}

}  // namespace ace
