#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ace/causal.hpp"
#include "ace/common.hpp"

namespace ace {

// Finite MDP with a factored action space. The transition tensor is
// indexed [s][a][s'] and the reward tensor [s][a], where a is the joint
// action index (dimension 0 varies fastest).
struct TabularMdp {
    std::size_t nStates = 0;
    std::vector<std::size_t> actionDims;
    std::vector<double> transition;  // nStates * jointActions * nStates
    std::vector<double> reward;      // nStates * jointActions
    double discount = 0.99;
    double rewardMax = 1.0;

    std::size_t jointActionCount() const;
    std::size_t jointIndex(const std::vector<std::size_t>& a) const;
    std::vector<std::size_t> splitIndex(std::size_t joint) const;

    double p(std::size_t s, std::size_t a, std::size_t sNext) const {
        return transition[(s * jointActionCount() + a) * nStates + sNext];
    }
    double r(std::size_t s, std::size_t a) const {
        return reward[s * jointActionCount() + a];
    }

    // Throws on invalid tensors (rows not summing to 1, |R| > rewardMax,
    // discount outside (0,1)).
    void validate() const;

    std::string toJson() const;
    static TabularMdp fromJson(const std::string& text);
};

// Product of per-dimension categoricals, one set per state.
struct FactoredPolicy {
    // probs[s][d][k] = P(a_d = k | s)
    std::vector<std::vector<std::vector<double>>> probs;

    double jointProb(const TabularMdp& mdp, std::size_t s,
                     std::size_t jointAction) const;
    static FactoredPolicy uniform(const TabularMdp& mdp);
};

struct QTable {
    std::size_t nStates = 0;
    std::size_t nActions = 0;
    std::vector<double> values;

    QTable() = default;
    QTable(std::size_t s, std::size_t a, double fill = 0.0)
        : nStates(s), nActions(a), values(s * a, fill) {}
    double& at(std::size_t s, std::size_t a) { return values[s * nActions + a]; }
    double at(std::size_t s, std::size_t a) const {
        return values[s * nActions + a];
    }
};

// Weighted sum of per-dimension marginal entropies:
// sum_i normalized_i * H(pi_i(.|s)).
double causalEntropy(const FactoredPolicy& policy, std::size_t state,
                     const CausalWeights& weights);

// Literal joint-expectation form of the same quantity,
// -E_{a~joint}[ sum_i w_i log pi_i(a_i|s) ], by brute-force summation.
// Equal to causalEntropy for factored policies; kept for cross-checks.
double causalEntropyJoint(const TabularMdp& mdp, const FactoredPolicy& policy,
                          std::size_t state, const CausalWeights& weights);

// One application of the causality-aware soft policy-evaluation operator:
// Q'(s,a) = R(s,a) + g * sum_s' P(s'|s,a) [ E_{a'~pi}Q(s',a') + alpha*Hc(s') ].
// OpenMP-parallel over states; bit-identical to the serial reference.
QTable applyCausalBellman(const TabularMdp& mdp, const FactoredPolicy& policy,
                          const CausalWeights& weights, const QTable& q,
                          double alpha);
// Serial reference implementation, kept for testing and benchmarking.
QTable applyCausalBellmanSerial(const TabularMdp& mdp,
                                const FactoredPolicy& policy,
                                const CausalWeights& weights, const QTable& q,
                                double alpha);

// Iterates the operator from zeros until the sup-norm change drops
// below tol. Throws ConvergenceError if the contraction bound is
// violated (which would be a bug, not bad input).
QTable policyEvaluationFixedPoint(const TabularMdp& mdp,
                                  const FactoredPolicy& policy,
                                  const CausalWeights& weights, double alpha,
                                  double tol);

// Per-state maximizer of E_{a~pi}[Q(s,a)] + alpha * Hc(pi(.|s)) over
// factored policies, by coordinate ascent (closed-form weighted softmax
// per dimension). `warmStart`, when given, seeds the ascent; the result
// never scores below it.
FactoredPolicy policyImprovement(const TabularMdp& mdp, const QTable& q,
                                 const CausalWeights& weights, double alpha,
                                 const FactoredPolicy* warmStart = nullptr);

// Alternates evaluation and improvement until the policy stops moving.
std::pair<FactoredPolicy, QTable> policyIteration(const TabularMdp& mdp,
                                                  const CausalWeights& weights,
                                                  double alpha, double tol);

// Soft state value under the operator's bracket: E_{a~pi}Q + alpha*Hc.
double softStateValue(const TabularMdp& mdp, const FactoredPolicy& policy,
                      const CausalWeights& weights, const QTable& q,
                      std::size_t state, double alpha);

}  // namespace ace
