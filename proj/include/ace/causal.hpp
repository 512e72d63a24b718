#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ace/matrix.hpp"

namespace ace {

// A buffer of (state, action, reward) rows for causal discovery.
// Column layout: s0..s{dimS-1}, a0..a{dimA-1}, r.
struct ObservationBatch {
    std::size_t stateDim = 0;
    std::size_t actionDim = 0;
    Matrix rows;

    std::size_t varCount() const { return stateDim + actionDim + 1; }
    std::size_t rewardIndex() const { return stateDim + actionDim; }

    void writeCsv(std::ostream& os) const;
    static ObservationBatch readCsv(std::istream& is);
};

// Signed action->reward effects plus the nonnegative entropy weights
// derived from them. `normalized` sums to actionDim.
struct CausalWeights {
    std::vector<double> raw;
    std::vector<double> normalized;
    std::uint64_t timestamp = 0;
    bool degenerate = false;  // uniform fallback or flagged no-edge case

    static CausalWeights uniform(std::size_t actionDim);
};

// Permutation of variable indices; earlier entries are causally
// upstream of later ones.
struct CausalOrdering {
    std::vector<std::size_t> order;
};

// Phase 1: iteratively pick the most exogenous remaining variable by
// the pairwise non-Gaussianity likelihood-ratio measure (log-cosh
// negentropy approximation of residuals), regress it out of the rest,
// and append. `data` must be standardized. When `sinkIndex` is given,
// that variable is only eligible once it is the last one remaining.
CausalOrdering estimateOrdering(const Matrix& data,
                                std::optional<std::size_t> sinkIndex = {});

// Phase 2: multivariate least squares of every variable on all its
// ordered predecessors. Returns adjacency where entry (i, j) is the
// effect of variable j on variable i (zero unless j precedes i).
// Rank-deficient predecessor sets fall back to ridge (penalty 1e-6)
// and set *ridgeUsed when provided.
Matrix estimateEffects(const Matrix& data, const CausalOrdering& ordering,
                       bool* ridgeUsed = nullptr);

// Pulls the action->reward column out of the full adjacency.
// Sets *allZero when every entry vanishes (reward exogenous).
std::vector<double> extractActionRewardWeights(const Matrix& adjacency,
                                               std::size_t stateDim,
                                               std::size_t actionDim,
                                               bool* allZero = nullptr);

// normalized_i = actionDim * |raw_i| / sum_j |raw_j|, with an all-ones
// fallback when the total magnitude is below 1e-8.
std::vector<double> normalizeWeights(const std::vector<double>& raw);

// Full pipeline: standardize -> ordering (reward forced last) ->
// effects -> extract -> normalize.
CausalWeights discoverWeights(const ObservationBatch& batch,
                              std::uint64_t timestamp);

// Negentropy-style differential-entropy approximation of a
// standardized sample (Hyvarinen's log-cosh form). Exposed for tests.
double approxEntropy(std::span<const double> standardized);

}  // namespace ace
