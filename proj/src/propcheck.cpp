#include "ace/propcheck.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ace/dormancy.hpp"
#include "ace/network.hpp"

namespace ace {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Dense linear solve by Gaussian elimination with partial pivoting.
std::vector<double> solveLinear(Matrix a, std::vector<double> b) {
    std::size_t n = a.rows;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a.at(r, col)) > std::fabs(a.at(pivot, col)))
                pivot = r;
        if (std::fabs(a.at(pivot, col)) < 1e-14)
            throw NumericError("singular policy-evaluation system");
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c)
                std::swap(a.at(col, c), a.at(pivot, c));
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = a.at(r, col) / a.at(col, col);
            for (std::size_t c = col; c < n; ++c)
                a.at(r, c) -= f * a.at(col, c);
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t c = r + 1; c < n; ++c) s -= a.at(r, c) * x[c];
        x[r] = s / a.at(r, r);
    }
    return x;
}

// Exact soft Q of a policy via the linear fixed-point equations:
// v = Pi R + alpha Hc + gamma Pi P v, then Q = R + gamma P v.
QTable exactSoftQ(const TabularMdp& mdp, const FactoredPolicy& policy,
                  const CausalWeights& weights, double alpha) {
    std::size_t nS = mdp.nStates, nA = mdp.jointActionCount();
    Matrix sys(nS, nS);
    std::vector<double> b(nS, 0.0);
    for (std::size_t s = 0; s < nS; ++s) {
        for (std::size_t c = 0; c < nS; ++c) sys.at(s, c) = s == c ? 1.0 : 0.0;
        for (std::size_t a = 0; a < nA; ++a) {
            double pa = policy.jointProb(mdp, s, a);
            b[s] += pa * mdp.r(s, a);
            for (std::size_t sn = 0; sn < nS; ++sn)
                sys.at(s, sn) -= mdp.discount * pa * mdp.p(s, a, sn);
        }
        b[s] += alpha * causalEntropy(policy, s, weights);
    }
    std::vector<double> v = solveLinear(sys, b);
    QTable q(nS, nA);
    for (std::size_t s = 0; s < nS; ++s)
        for (std::size_t a = 0; a < nA; ++a) {
            double acc = mdp.r(s, a);
            for (std::size_t sn = 0; sn < nS; ++sn)
                acc += mdp.discount * mdp.p(s, a, sn) * v[sn];
            q.at(s, a) = acc;
        }
    return q;
}

}  // namespace

TabularMdp randomMdp(Rng& rng, std::size_t maxStates,
                     std::vector<std::size_t> actionDims) {
    TabularMdp mdp;
    mdp.nStates = 2 + rng.index(maxStates - 1);
    mdp.actionDims = std::move(actionDims);
    mdp.discount = rng.uniform(0.8, 0.95);
    mdp.rewardMax = 1.0;
    std::size_t nA = mdp.jointActionCount();
    mdp.transition.resize(mdp.nStates * nA * mdp.nStates);
    mdp.reward.resize(mdp.nStates * nA);
    for (std::size_t s = 0; s < mdp.nStates; ++s)
        for (std::size_t a = 0; a < nA; ++a) {
            double sum = 0.0;
            std::vector<double> row(mdp.nStates);
            for (double& p : row) {
                p = rng.uniform(0.05, 1.0);
                sum += p;
            }
            for (std::size_t sn = 0; sn < mdp.nStates; ++sn)
                mdp.transition[(s * nA + a) * mdp.nStates + sn] =
                    row[sn] / sum;
            mdp.reward[s * nA + a] = rng.uniform(-1.0, 1.0);
        }
    mdp.validate();
    return mdp;
}

FactoredPolicy randomPolicy(const TabularMdp& mdp, Rng& rng) {
    FactoredPolicy pi = FactoredPolicy::uniform(mdp);
    for (auto& state : pi.probs)
        for (auto& dim : state) {
            double sum = 0.0;
            for (double& p : dim) {
                p = rng.uniform(0.05, 1.0);
                sum += p;
            }
            for (double& p : dim) p /= sum;
        }
    return pi;
}

CausalWeights randomWeightsFixture(std::size_t dims, Rng& rng) {
    CausalWeights w;
    w.raw.resize(dims);
    for (double& r : w.raw) r = rng.uniform(-1.0, 1.0);
    w.normalized = normalizeWeights(w.raw);
    return w;
}

SemSample randomSem(Rng& rng, std::size_t nSamples) {
    SemSample sem;
    std::size_t stateDim = 1 + rng.index(3);
    std::size_t actionDim = 2 + rng.index(3);
    while (stateDim + actionDim + 1 > 8) --stateDim;
    std::size_t d = stateDim + actionDim + 1;
    std::size_t rewardIdx = d - 1;

    // Coefficients over the causal order s0..s_k, a0..a_m, r.
    Matrix coeff(d, d);
    for (std::size_t j = 0; j < rewardIdx; ++j)
        for (std::size_t i = j + 1; i < rewardIdx; ++i)
            if (rng.uniform() < 0.4)
                coeff.at(i, j) = (rng.uniform() < 0.5 ? -1.0 : 1.0) *
                                 rng.uniform(0.5, 1.5);
    for (std::size_t j = 0; j < stateDim; ++j)
        if (rng.uniform() < 0.4)
            coeff.at(rewardIdx, j) =
                (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 1.5);
    sem.trueActionEffects.resize(actionDim, 0.0);
    for (std::size_t j = 0; j < actionDim; ++j)
        if (rng.uniform() < 0.5) {
            double c =
                (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 1.5);
            coeff.at(rewardIdx, stateDim + j) = c;
            sem.trueActionEffects[j] = c;
        }

    std::vector<double> noiseScale(d);
    for (double& s : noiseScale) s = rng.uniform(0.5, 1.5);

    sem.batch.stateDim = stateDim;
    sem.batch.actionDim = actionDim;
    sem.batch.rows = Matrix(nSamples, d);
    std::vector<double> x(d);
    for (std::size_t n = 0; n < nSamples; ++n) {
        for (std::size_t i = 0; i < d; ++i) {
            double v = rng.uniform(-noiseScale[i], noiseScale[i]);
            for (std::size_t j = 0; j < i; ++j) v += coeff.at(i, j) * x[j];
            x[i] = v;
        }
        for (std::size_t i = 0; i < d; ++i) sem.batch.rows.at(n, i) = x[i];
    }
    return sem;
}

CheckResult checkContraction(std::size_t instances, std::uint64_t seed) {
    auto start = Clock::now();
    CheckResult res{"contraction", true, "", 0.0};
    Rng rng(seed);
    for (std::size_t k = 0; k < instances; ++k) {
        TabularMdp mdp =
            randomMdp(rng, 6, rng.uniform() < 0.5
                                  ? std::vector<std::size_t>{2, 2}
                                  : std::vector<std::size_t>{3, 2});
        FactoredPolicy pi = randomPolicy(mdp, rng);
        CausalWeights w = randomWeightsFixture(mdp.actionDims.size(), rng);
        double alpha = rng.uniform(0.0, 0.5);
        std::size_t nA = mdp.jointActionCount();
        QTable q1(mdp.nStates, nA), q2(mdp.nStates, nA);
        for (double& v : q1.values) v = rng.uniform(-5.0, 5.0);
        for (double& v : q2.values) v = rng.uniform(-5.0, 5.0);
        QTable t1 = applyCausalBellman(mdp, pi, w, q1, alpha);
        QTable t2 = applyCausalBellman(mdp, pi, w, q2, alpha);
        double dIn = 0.0, dOut = 0.0;
        for (std::size_t i = 0; i < q1.values.size(); ++i) {
            dIn = std::max(dIn, std::fabs(q1.values[i] - q2.values[i]));
            dOut = std::max(dOut, std::fabs(t1.values[i] - t2.values[i]));
        }
        if (dOut > mdp.discount * dIn + 1e-12) {
            res.passed = false;
            std::ostringstream os;
            os << "instance " << k << ": out " << dOut << " > gamma*in "
               << mdp.discount * dIn;
            res.detail = os.str();
            break;
        }
    }
    if (res.passed) {
        res.detail =
            std::to_string(instances) + " instances within gamma bound";
    }
    res.seconds = elapsed(start);
    return res;
}

CheckResult checkPolicyImprovement(std::size_t instances,
                                   std::size_t randomPolicies,
                                   std::uint64_t seed) {
    auto start = Clock::now();
    CheckResult res{"policy-improvement", true, "", 0.0};
    Rng rng(seed);
    for (std::size_t k = 0; k < instances && res.passed; ++k) {
        TabularMdp mdp = randomMdp(rng, 8, {2, 2});
        CausalWeights w = randomWeightsFixture(2, rng);
        double alpha = rng.uniform(0.0, 0.3);

        FactoredPolicy pi = FactoredPolicy::uniform(mdp);
        QTable q = policyEvaluationFixedPoint(mdp, pi, w, alpha, 1e-12);
        for (std::size_t round = 0; round < 200; ++round) {
            FactoredPolicy next = policyImprovement(mdp, q, w, alpha, &pi);
            QTable qNext =
                policyEvaluationFixedPoint(mdp, next, w, alpha, 1e-12);
            double change = 0.0;
            for (std::size_t i = 0; i < q.values.size(); ++i) {
                if (qNext.values[i] < q.values[i] - 1e-9) {
                    res.passed = false;
                    std::ostringstream os;
                    os << "mdp " << k << " round " << round
                       << ": Q dropped by " << q.values[i] - qNext.values[i];
                    res.detail = os.str();
                    break;
                }
                change = std::max(
                    change, std::fabs(qNext.values[i] - q.values[i]));
            }
            pi = next;
            q = qNext;
            if (!res.passed || change < 1e-10) break;
        }
        if (!res.passed) break;

        for (std::size_t p = 0; p < randomPolicies; ++p) {
            FactoredPolicy other = randomPolicy(mdp, rng);
            QTable qOther = exactSoftQ(mdp, other, w, alpha);
            for (std::size_t i = 0; i < q.values.size(); ++i)
                if (q.values[i] < qOther.values[i] - 1e-6) {
                    res.passed = false;
                    std::ostringstream os;
                    os << "mdp " << k << ": random policy " << p
                       << " beats final by "
                       << qOther.values[i] - q.values[i];
                    res.detail = os.str();
                    break;
                }
            if (!res.passed) break;
        }
    }
    if (res.passed) {
        res.detail = std::to_string(instances) + " MDPs monotone, dominate " +
                     std::to_string(randomPolicies) + " random policies each";
    }
    res.seconds = elapsed(start);
    return res;
}

CheckResult checkCausalRecovery(std::size_t trials, std::size_t samples,
                                std::size_t requiredPasses,
                                std::uint64_t seed) {
    auto start = Clock::now();
    CheckResult res{"causal-recovery", true, "", 0.0};
    Rng rng(seed);
    std::size_t effectOk = 0, nullOk = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        SemSample sem = randomSem(rng, samples);
        StandardizeResult st = standardize(sem.batch.rows);
        CausalOrdering ordering =
            estimateOrdering(st.data, sem.batch.rewardIndex());
        Matrix adj = estimateEffects(st.data, ordering);
        std::vector<double> est = extractActionRewardWeights(
            adj, sem.batch.stateDim, sem.batch.actionDim);
        // Back to raw units: the pipeline works on standardized columns.
        double sigmaR = std::sqrt(
            variance(sem.batch.rows.column(sem.batch.rewardIndex())));
        bool eOk = true, nOk = true;
        for (std::size_t j = 0; j < sem.batch.actionDim; ++j) {
            double sigmaA = std::sqrt(variance(
                sem.batch.rows.column(sem.batch.stateDim + j)));
            double raw = est[j] * sigmaR / sigmaA;
            double truth = sem.trueActionEffects[j];
            if (truth != 0.0) {
                if (std::fabs(raw - truth) > 0.1) eOk = false;
            } else {
                if (std::fabs(raw) >= 0.05) nOk = false;
            }
        }
        effectOk += eOk;
        nullOk += nOk;
    }
    res.passed = effectOk >= requiredPasses && nullOk >= requiredPasses;
    std::ostringstream os;
    os << "effects ok " << effectOk << "/" << trials << ", null edges ok "
       << nullOk << "/" << trials << " (need " << requiredPasses << ")";
    res.detail = os.str();
    res.seconds = elapsed(start);
    return res;
}

CheckResult checkGradients(std::size_t nets, std::uint64_t seed) {
    auto start = Clock::now();
    CheckResult res{"gradient-check", true, "", 0.0};
    Rng rng(seed);
    std::size_t checked = 0, skippedKinks = 0;
    for (std::size_t k = 0; k < nets && res.passed; ++k) {
        std::vector<std::size_t> widths{2 + rng.index(4)};
        std::size_t hiddenLayers = 1 + rng.index(2);
        for (std::size_t l = 0; l < hiddenLayers; ++l)
            widths.push_back(3 + rng.index(6));
        widths.push_back(1 + rng.index(4));
        NetworkParams net = makeMlp(widths, rng);
        std::vector<double> input(net.inputDim());
        for (double& v : input) v = rng.gaussian();
        std::vector<double> outGrad(net.outputDim());
        for (double& v : outGrad) v = rng.gaussian();

        ForwardTrace trace = forward(net, input);
        Gradients analytic = backward(net, trace, outGrad);

        auto loss = [&](const NetworkParams& n) {
            ForwardTrace t = forward(n, input);
            double s = 0.0;
            for (std::size_t i = 0; i < outGrad.size(); ++i)
                s += outGrad[i] * t.output()[i];
            return s;
        };
        auto crossesKink = [&](NetworkParams& n, double* slot, double h) {
            *slot += h;
            ForwardTrace tp = forward(n, input);
            *slot -= 2 * h;
            ForwardTrace tm = forward(n, input);
            *slot += h;
            for (std::size_t l = 0; l < tp.pre.size(); ++l)
                for (std::size_t i = 0; i < tp.pre[l].size(); ++i)
                    if ((tp.pre[l][i] > 0.0) != (tm.pre[l][i] > 0.0))
                        return true;
            return false;
        };
        const double h = 1e-5;
        auto checkParam = [&](double* slot, double grad) {
            double saved = *slot;
            *slot = saved + h;
            double lp = loss(net);
            *slot = saved - h;
            double lm = loss(net);
            *slot = saved;
            double fd = (lp - lm) / (2 * h);
            double denom = std::max({std::fabs(grad), std::fabs(fd), 1e-4});
            if (std::fabs(grad - fd) / denom > 1e-4) {
                if (crossesKink(net, slot, h)) {
                    ++skippedKinks;
                    return true;  // finite differences invalid at a kink
                }
                std::ostringstream os;
                os << "net " << k << ": grad " << grad << " vs fd " << fd;
                res.detail = os.str();
                return false;
            }
            ++checked;
            return true;
        };
        for (std::size_t l = 0; l < net.layers.size() && res.passed; ++l) {
            Layer& layer = net.layers[l];
            for (std::size_t i = 0;
                 i < layer.weight.data.size() && res.passed; ++i)
                res.passed = checkParam(&layer.weight.data[i],
                                        analytic.weight[l].data[i]);
            for (std::size_t i = 0; i < layer.bias.size() && res.passed; ++i)
                res.passed =
                    checkParam(&layer.bias[i], analytic.bias[l][i]);
        }
    }
    if (res.passed) {
        std::ostringstream os;
        os << checked << " parameters within 1e-4 relative ("
           << skippedKinks << " kink crossings skipped)";
        res.detail = os.str();
    }
    res.seconds = elapsed(start);
    return res;
}

CheckResult checkDormancyArithmetic(std::size_t stuckSeeds,
                                    std::uint64_t seed) {
    auto start = Clock::now();
    CheckResult res{"dormancy-arithmetic", true, "", 0.0};
    auto fail = [&](const std::string& why) {
        res.passed = false;
        res.detail = why;
    };

    {
        GradientRecord g{{{0.0, 0.0, 4.0, 4.0}}};
        if (dormancyDegree(g, 0.025).degree != 0.5)
            fail("fixture [0,0,4,4] tau=0.025: expected degree 0.5");
    }
    if (res.passed) {
        GradientRecord g{{{1.0, 1.0, 1.0, 1.0}}};
        if (dormancyDegree(g, 0.025).degree != 0.0)
            fail("uniform norms: expected degree 0");
    }
    if (res.passed) {
        // Two layers pooled: 2 dormant of 4, then 0 of 2.
        GradientRecord g{{{0.0, 0.0, 4.0, 4.0}, {1.0, 1.0}}};
        double got = dormancyDegree(g, 0.025).degree;
        if (std::fabs(got - 2.0 / 6.0) > 1e-15)
            fail("pooled layers: expected 1/3, got " + std::to_string(got));
    }

    Rng rng(seed);
    if (res.passed) {
        // alpha_tau monotone in tau on random records.
        for (std::size_t t = 0; t < 50 && res.passed; ++t) {
            GradientRecord g;
            g.neuronNorms.resize(1 + rng.index(3));
            for (auto& layer : g.neuronNorms) {
                layer.resize(2 + rng.index(10));
                for (double& n : layer) n = rng.uniform(0.0, 2.0);
            }
            double prev = -1.0;
            for (double tau : {0.0, 0.01, 0.025, 0.1, 0.5, 1.0}) {
                double d = dormancyDegree(g, tau).degree;
                if (d < prev) fail("alpha_tau not monotone in tau");
                prev = d;
            }
        }
    }

    if (res.passed) {
        // eta=0 leaves parameters bit-identical; eta=1 replaces exactly.
        std::vector<std::size_t> widths{3, 8, 8, 2};
        NetworkParams net = makeMlp(widths, rng);
        NetworkParams before = net;
        OptimizerState opt = makeOptimizer(net, 3e-4);
        double eta = softReset(net, opt, 0.0, 0.8, 1234);
        bool identical = eta == 0.0;
        for (std::size_t l = 0; l < net.layers.size() && identical; ++l)
            identical = net.layers[l].weight.data ==
                            before.layers[l].weight.data &&
                        net.layers[l].bias == before.layers[l].bias;
        if (!identical) fail("eta=0 reset changed parameters");
        if (res.passed) {
            softReset(net, opt, 1.0, 1.0, 1234);
            Rng fresh(1234);
            NetworkParams target = makeMlp(widths, fresh);
            bool replaced = true;
            for (std::size_t l = 0; l < net.layers.size() && replaced; ++l)
                replaced = net.layers[l].weight.data ==
                               target.layers[l].weight.data &&
                           net.layers[l].bias == target.layers[l].bias;
            if (!replaced) fail("eta=1 reset is not exact replacement");
        }
    }

    std::size_t recovered = 0;
    if (res.passed) {
        // A network with zeroed-out hidden neurons is stuck: their
        // gradients vanish, so alpha_tau is high; a soft reset must
        // lower it.
        for (std::size_t t = 0; t < stuckSeeds; ++t) {
            Rng netRng(seed + 1000 + t);
            std::vector<std::size_t> widths{4, 16, 16, 2};
            NetworkParams net = makeMlp(widths, netRng);
            for (std::size_t l = 0; l < 2; ++l)
                for (std::size_t i = 0; i < 8; ++i) {
                    for (std::size_t c = 0; c < net.layers[l].weight.cols;
                         ++c)
                        net.layers[l].weight.at(i, c) = 0.0;
                    net.layers[l].bias[i] = 0.0;
                }
            std::vector<std::vector<double>> inputs(8);
            for (auto& in : inputs) {
                in.resize(4);
                for (double& v : in) v = netRng.gaussian();
            }
            std::vector<double> outGrad(2, 1.0);
            auto measure = [&]() {
                Gradients acc = zeroGradients(net);
                for (const auto& in : inputs) {
                    ForwardTrace tr = forward(net, in);
                    backwardAccumulate(net, tr, outGrad, acc);
                }
                return dormancyDegree(gradientNorms(acc), 0.025).degree;
            };
            double before = measure();
            OptimizerState opt = makeOptimizer(net, 3e-4);
            softReset(net, opt, before, 0.8, seed + 2000 + t);
            double after = measure();
            if (after < before) ++recovered;
        }
        if (recovered != stuckSeeds) {
            std::ostringstream os;
            os << "stuck-network reset lowered alpha_tau in " << recovered
               << "/" << stuckSeeds << " seeds";
            fail(os.str());
        }
    }

    if (res.passed) {
        std::ostringstream os;
        os << "fixtures exact; monotone; reset identities exact; stuck reset "
           << recovered << "/" << stuckSeeds;
        res.detail = os.str();
    }
    res.seconds = elapsed(start);
    return res;
}

std::vector<CheckResult> runVerifySuite() {
    return {
        checkContraction(50, 11),
        checkPolicyImprovement(10, 100, 22),
        checkCausalRecovery(10, 2000, 9, 33),
        checkGradients(5, 44),
        checkDormancyArithmetic(5, 55),
    };
}

}  // namespace ace
