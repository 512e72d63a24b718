#include "ace/causal.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "ace/common.hpp"

namespace ace {

CausalWeights CausalWeights::uniform(std::size_t actionDim) {
    CausalWeights w;
    w.raw.assign(actionDim, 0.0);
    w.normalized.assign(actionDim, 1.0);
    return w;
}

void ObservationBatch::writeCsv(std::ostream& os) const {
    for (std::size_t i = 0; i < stateDim; ++i) os << 's' << i << ',';
    for (std::size_t i = 0; i < actionDim; ++i) os << 'a' << i << ',';
    os << "r\n";
    os.precision(17);
    for (std::size_t r = 0; r < rows.rows; ++r) {
        for (std::size_t c = 0; c < rows.cols; ++c) {
            if (c) os << ',';
            os << rows.at(r, c);
        }
        os << '\n';
    }
}

ObservationBatch ObservationBatch::readCsv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line))
        throw InsufficientDataError("ObservationBatch: empty CSV");
    ObservationBatch b;
    std::size_t cols = 0;
    {
        std::stringstream header(line);
        std::string tok;
        bool sawReward = false;
        while (std::getline(header, tok, ',')) {
            ++cols;
            if (tok.starts_with('s'))
                ++b.stateDim;
            else if (tok.starts_with('a'))
                ++b.actionDim;
            else if (tok == "r")
                sawReward = true;
            else
                throw ShapeError("ObservationBatch: unexpected CSV column '" +
                                 tok + "'");
        }
        if (!sawReward)
            throw ShapeError("ObservationBatch: CSV missing reward column");
    }
    std::vector<double> values;
    std::size_t nrows = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string tok;
        std::size_t c = 0;
        while (std::getline(row, tok, ',')) {
            values.push_back(std::stod(tok));
            ++c;
        }
        if (c != cols)
            throw ShapeError("ObservationBatch: ragged CSV row");
        ++nrows;
    }
    b.rows = Matrix(nrows, cols);
    b.rows.data = std::move(values);
    return b;
}

double approxEntropy(std::span<const double> u) {
    // Maximum-entropy approximation with the log-cosh and Gaussian-kernel
    // nonlinearities (Hyvarinen 1998 constants).
    constexpr double k1 = 79.047;
    constexpr double k2 = 7.4129;
    constexpr double gamma = 0.37457;
    double t1 = 0.0, t2 = 0.0;
    for (double x : u) {
        t1 += std::log(std::cosh(x));
        t2 += x * std::exp(-0.5 * x * x);
    }
    double n = static_cast<double>(u.size());
    t1 /= n;
    t2 /= n;
    double h = 0.5 * (1.0 + std::log(2.0 * std::numbers::pi));
    return h - k1 * (t1 - gamma) * (t1 - gamma) - k2 * t2 * t2;
}

namespace {

// Rescale to unit variance (input is assumed zero-mean).
std::vector<double> toUnitVariance(const std::vector<double>& v,
                                   std::size_t columnForError) {
    double sd = std::sqrt(variance(v));
    if (sd < 1e-12)
        throw DegenerateVariableError(
            "estimateOrdering: variable " + std::to_string(columnForError) +
            " is constant");
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / sd;
    return out;
}

}  // namespace

CausalOrdering estimateOrdering(const Matrix& data,
                                std::optional<std::size_t> sinkIndex) {
    if (data.rows < 100)
        throw InsufficientDataError(
            "estimateOrdering: need at least 100 samples, got " +
            std::to_string(data.rows));
    const std::size_t p = data.cols;
    CausalOrdering out;
    if (p == 0) return out;

    // Working copy; columns get residualized as roots are removed.
    std::vector<std::vector<double>> cols(p);
    for (std::size_t c = 0; c < p; ++c) cols[c] = data.column(c);

    std::vector<std::size_t> remaining(p);
    for (std::size_t i = 0; i < p; ++i) remaining[i] = i;

    while (remaining.size() > 1) {
        // Center and rescale the remaining columns for this round.
        std::vector<std::vector<double>> std_cols(remaining.size());
        for (std::size_t k = 0; k < remaining.size(); ++k) {
            std::vector<double> v = cols[remaining[k]];
            double m = mean(v);
            for (double& x : v) x -= m;
            std_cols[k] = toUnitVariance(v, remaining[k]);
        }

        const std::size_t nr = remaining.size();
        std::vector<double> score(nr, 0.0);
        // Pairwise likelihood-ratio measure; candidate with no negative
        // evidence against its exogeneity wins. Exceptions cannot cross an
        // OpenMP region boundary, so they are ferried out via exception_ptr.
        std::exception_ptr pending;
        #pragma omp parallel for schedule(dynamic)
        for (std::size_t ci = 0; ci < nr; ++ci) {
            try {
                if (sinkIndex && remaining[ci] == *sinkIndex) {
                    score[ci] = std::numeric_limits<double>::infinity();
                    continue;
                }
                double total = 0.0;
                const auto& xi = std_cols[ci];
                for (std::size_t cj = 0; cj < nr; ++cj) {
                    if (cj == ci) continue;
                    const auto& xj = std_cols[cj];
                    auto ri_j = leastSquaresResidual(xj, xi).residual;
                    auto rj_i = leastSquaresResidual(xi, xj).residual;
                    double hi = approxEntropy(xi);
                    double hj = approxEntropy(xj);
                    double hri =
                        approxEntropy(toUnitVariance(ri_j, remaining[ci]));
                    double hrj =
                        approxEntropy(toUnitVariance(rj_i, remaining[cj]));
                    double diff = (hj + hri) - (hi + hrj);
                    double m = std::min(0.0, diff);
                    total += m * m;
                }
                score[ci] = total;
            } catch (...) {
                #pragma omp critical
                if (!pending) pending = std::current_exception();
            }
        }
        if (pending) std::rethrow_exception(pending);

        std::size_t best = 0;
        for (std::size_t ci = 1; ci < nr; ++ci)
            if (score[ci] < score[best]) best = ci;

        std::size_t root = remaining[best];
        out.order.push_back(root);

        // Regress the root out of every remaining variable.
        const auto& xr = std_cols[best];
        for (std::size_t k = 0; k < nr; ++k) {
            if (k == best) continue;
            cols[remaining[k]] =
                leastSquaresResidual(xr, std_cols[k]).residual;
        }
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
    }
    out.order.push_back(remaining.front());
    return out;
}

namespace {

// Solve (X'X + ridge I) b = X'y by Cholesky; returns false when the
// unregularized system is not positive definite.
bool solveNormalEquations(const std::vector<std::vector<double>>& X,
                          const std::vector<double>& y, double ridge,
                          std::vector<double>& beta) {
    const std::size_t p = X.size();
    const std::size_t n = y.size();
    std::vector<double> A(p * p, 0.0), b(p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i; j < p; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < n; ++t) s += X[i][t] * X[j][t];
            A[i * p + j] = A[j * p + i] = s;
        }
        double s = 0.0;
        for (std::size_t t = 0; t < n; ++t) s += X[i][t] * y[t];
        b[i] = s;
        A[i * p + i] += ridge;
    }
    // Cholesky factorization A = L L'.
    std::vector<double> L(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = A[i * p + j];
            for (std::size_t k = 0; k < j; ++k)
                s -= L[i * p + k] * L[j * p + k];
            if (i == j) {
                if (s < 1e-10 * static_cast<double>(n)) return false;
                L[i * p + i] = std::sqrt(s);
            } else {
                L[i * p + j] = s / L[j * p + j];
            }
        }
    }
    // Forward and back substitution.
    std::vector<double> z(p);
    for (std::size_t i = 0; i < p; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= L[i * p + k] * z[k];
        z[i] = s / L[i * p + i];
    }
    beta.assign(p, 0.0);
    for (std::size_t i = p; i-- > 0;) {
        double s = z[i];
        for (std::size_t k = i + 1; k < p; ++k) s -= L[k * p + i] * beta[k];
        beta[i] = s / L[i * p + i];
    }
    return true;
}

}  // namespace

Matrix estimateEffects(const Matrix& data, const CausalOrdering& ordering,
                       bool* ridgeUsed) {
    const std::size_t p = data.cols;
    if (ordering.order.size() != p)
        throw ShapeError("estimateEffects: ordering length mismatch");
    if (ridgeUsed) *ridgeUsed = false;
    Matrix adj(p, p);
    std::vector<std::vector<double>> predictors;
    std::vector<std::size_t> predictorIdx;
    for (std::size_t k = 0; k < p; ++k) {
        std::size_t target = ordering.order[k];
        if (k > 0) {
            auto y = data.column(target);
            std::vector<double> beta;
            if (!solveNormalEquations(predictors, y, 0.0, beta)) {
                if (ridgeUsed) *ridgeUsed = true;
                if (!solveNormalEquations(predictors, y, 1e-6, beta))
                    throw ConvergenceError(
                        "estimateEffects: ridge solve failed");
            }
            for (std::size_t j = 0; j < predictorIdx.size(); ++j)
                adj.at(target, predictorIdx[j]) = beta[j];
        }
        predictors.push_back(data.column(target));
        predictorIdx.push_back(target);
    }
    return adj;
}

std::vector<double> extractActionRewardWeights(const Matrix& adjacency,
                                               std::size_t stateDim,
                                               std::size_t actionDim,
                                               bool* allZero) {
    std::size_t rewardIdx = stateDim + actionDim;
    std::vector<double> raw(actionDim);
    bool zero = true;
    for (std::size_t i = 0; i < actionDim; ++i) {
        raw[i] = adjacency.at(rewardIdx, stateDim + i);
        if (raw[i] != 0.0) zero = false;
    }
    if (allZero) *allZero = zero;
    return raw;
}

std::vector<double> normalizeWeights(const std::vector<double>& raw) {
    double total = 0.0;
    for (double r : raw) total += std::abs(r);
    std::vector<double> out(raw.size());
    if (total < 1e-8) {
        std::fill(out.begin(), out.end(), 1.0);
        return out;
    }
    double scale = static_cast<double>(raw.size()) / total;
    for (std::size_t i = 0; i < raw.size(); ++i)
        out[i] = std::abs(raw[i]) * scale;
    return out;
}

CausalWeights discoverWeights(const ObservationBatch& batch,
                              std::uint64_t timestamp) {
    if (batch.rows.rows < 100)
        throw InsufficientDataError(
            "discoverWeights: local buffer has fewer than 100 samples");
    if (batch.rows.cols != batch.varCount())
        throw ShapeError("discoverWeights: column count mismatch");

    auto std_res = standardize(batch.rows);

    CausalWeights w;
    w.timestamp = timestamp;
    w.raw.assign(batch.actionDim, 0.0);

    // A constant reward column carries no signal at all.
    if (std_res.constantColumn[batch.rewardIndex()]) {
        w.normalized.assign(batch.actionDim, 1.0);
        w.degenerate = true;
        return w;
    }

    // Drop constant columns (they cannot take part in the ordering) and
    // remember where the live ones came from.
    std::vector<std::size_t> live;
    for (std::size_t c = 0; c < std_res.data.cols; ++c)
        if (!std_res.constantColumn[c]) live.push_back(c);

    Matrix reduced(std_res.data.rows, live.size());
    for (std::size_t r = 0; r < reduced.rows; ++r)
        for (std::size_t c = 0; c < live.size(); ++c)
            reduced.at(r, c) = std_res.data.at(r, live[c]);

    std::size_t reducedReward = 0;
    for (std::size_t c = 0; c < live.size(); ++c)
        if (live[c] == batch.rewardIndex()) reducedReward = c;

    auto ordering = estimateOrdering(reduced, reducedReward);
    auto adjacency = estimateEffects(reduced, ordering);

    // Map reduced action coefficients back to full action indices.
    for (std::size_t c = 0; c < live.size(); ++c) {
        std::size_t full = live[c];
        if (full >= batch.stateDim && full < batch.rewardIndex())
            w.raw[full - batch.stateDim] = adjacency.at(reducedReward, c);
    }

    double total = 0.0;
    for (double r : w.raw) total += std::abs(r);
    w.degenerate = total < 1e-8;
    w.normalized = normalizeWeights(w.raw);
    return w;
}

}  // namespace ace
