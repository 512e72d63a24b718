#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ace/causal.hpp"
#include "ace/rng.hpp"
#include "ace/tabular.hpp"

namespace ace {

// Outcome of one randomized property suite.
struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

// Randomized fixtures shared by the verification suites.
TabularMdp randomMdp(Rng& rng, std::size_t maxStates,
                     std::vector<std::size_t> actionDims);
FactoredPolicy randomPolicy(const TabularMdp& mdp, Rng& rng);
CausalWeights randomWeightsFixture(std::size_t dims, Rng& rng);

// Linear SEM with uniform (non-Gaussian) noise whose last variable is a
// sink "reward"; ground truth kept for recovery checks.
struct SemSample {
    ObservationBatch batch;
    std::vector<double> trueActionEffects;  // reward row, action columns
};
SemSample randomSem(Rng& rng, std::size_t nSamples);

// ||T_c Q1 - T_c Q2||_inf <= gamma * ||Q1 - Q2||_inf on random instances.
CheckResult checkContraction(std::size_t instances, std::uint64_t seed);

// Monotone policy improvement per round plus dominance of the final
// policy over `randomPolicies` random factored policies per MDP.
CheckResult checkPolicyImprovement(std::size_t instances,
                                   std::size_t randomPolicies,
                                   std::uint64_t seed);

// Discovery recovers action->reward effects within 0.1 and keeps null
// edges below 0.05, in at least `requiredPasses` of `trials` SEMs each.
CheckResult checkCausalRecovery(std::size_t trials, std::size_t samples,
                                std::size_t requiredPasses,
                                std::uint64_t seed);

// Reverse-mode gradients against central finite differences (1e-4
// relative) on random networks.
CheckResult checkGradients(std::size_t nets, std::uint64_t seed);

// Hand-computed dormancy fixtures, tau-monotonicity, exact eta=0/eta=1
// reset behavior, and stuck-network recovery across `stuckSeeds` seeds.
CheckResult checkDormancyArithmetic(std::size_t stuckSeeds,
                                    std::uint64_t seed);

// Small version of everything above, for the CLI `verify` subcommand.
std::vector<CheckResult> runVerifySuite();

}  // namespace ace
