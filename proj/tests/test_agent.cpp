#include "doctest.h"

#include <cmath>
#include <numbers>

#include "ace/agent.hpp"

using namespace ace;

namespace {

AgentConfig tinyConfig() {
    AgentConfig c;
    c.hidden = {16, 16};
    c.batchSize = 16;
    c.startSteps = 32;
    c.localBufferSize = 200;
    c.causalInterval = 1000000;   // never during short tests
    c.resetInterval = 1000000;
    return c;
}

void zeroNet(NetworkParams& net, bool biasToo = true) {
    for (auto& l : net.layers) {
        for (double& w : l.weight.data) w = 0.0;
        if (biasToo)
            for (double& b : l.bias) b = 0.0;
    }
}

Transition makeTransition(std::vector<double> s, std::vector<double> a,
                          double r, bool terminal) {
    Transition t;
    t.nextState = s;
    t.state = std::move(s);
    t.action = std::move(a);
    t.reward = r;
    t.terminal = terminal;
    return t;
}

CausalWeights weightsOf(std::vector<double> normalized) {
    CausalWeights w;
    w.raw = normalized;
    w.normalized = std::move(normalized);
    return w;
}

}  // namespace

TEST_CASE("selectAction: zero-weight actor squashes the bias") {
    SacAgent agent(tinyConfig(), 3, 2, 1);
    zeroNet(agent.actor());
    agent.actor().layers.back().bias = {0.4, -0.9, 0.0, 0.0};
    Rng rng(0);
    auto a = agent.selectAction(std::vector<double>{1.0, 2.0, 3.0},
                                ActionMode::Deterministic, rng);
    CHECK(a[0] == doctest::Approx(std::tanh(0.4)).epsilon(1e-15));
    CHECK(a[1] == doctest::Approx(std::tanh(-0.9)).epsilon(1e-15));
}

TEST_CASE("selectAction: stochastic draws are seed-deterministic") {
    SacAgent agent(tinyConfig(), 2, 2, 7);
    std::vector<double> state{0.3, -0.6};
    Rng r1(5), r2(5);
    auto a1 = agent.selectAction(state, ActionMode::Stochastic, r1);
    auto a2 = agent.selectAction(state, ActionMode::Stochastic, r2);
    CHECK(a1 == a2);
    Rng r3(6);
    auto a3 = agent.selectAction(state, ActionMode::Stochastic, r3);
    CHECK(a1 != a3);
}

TEST_CASE("selectAction: pre-squash samples match the head statistics") {
    SacAgent agent(tinyConfig(), 2, 2, 11);
    std::vector<double> state{0.5, -0.2};
    Rng rng(31);
    ActorOutput head = agent.actorEvaluate(state, ActionMode::Deterministic, rng);

    const std::size_t n = 100000;
    std::vector<double> sum(2, 0.0), sumSq(2, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        ActorOutput out = agent.actorEvaluate(state, ActionMode::Stochastic, rng);
        for (std::size_t d = 0; d < 2; ++d) {
            sum[d] += out.preSquash[d];
            sumSq[d] += out.preSquash[d] * out.preSquash[d];
        }
    }
    for (std::size_t d = 0; d < 2; ++d) {
        double sigma = std::exp(head.logStd[d]);
        double empMean = sum[d] / n;
        double empStd = std::sqrt(sumSq[d] / n - empMean * empMean);
        CHECK(std::fabs(empMean - head.mean[d]) <
              3.0 * sigma / std::sqrt(static_cast<double>(n)));
        CHECK(std::fabs(empStd - sigma) <
              3.0 * sigma / std::sqrt(2.0 * static_cast<double>(n)));
    }
}

TEST_CASE("causal entropy term: uniform weights give the standard estimator") {
    SacAgent agent(tinyConfig(), 2, 3, 13);
    Rng rng(17);
    ActorOutput out = agent.actorEvaluate(std::vector<double>{0.1, 0.9},
                                          ActionMode::Stochastic, rng);
    double hc = agent.causalEntropyTerm(out);
    double expected = 0.0;
    for (double lp : out.logProbPerDim) expected -= lp;
    CHECK(hc == expected);
}

TEST_CASE("causal entropy term: one-hot weights use only that dimension") {
    SacAgent agent(tinyConfig(), 2, 3, 13);
    agent.setWeights(weightsOf({3.0, 0.0, 0.0}));
    Rng rng(19);
    ActorOutput out = agent.actorEvaluate(std::vector<double>{-0.4, 0.2},
                                          ActionMode::Stochastic, rng);
    CHECK(agent.causalEntropyTerm(out) ==
          doctest::Approx(-3.0 * out.logProbPerDim[0]).epsilon(1e-15));
}

TEST_CASE("per-dim log density matches an independent evaluator") {
    SacAgent agent(tinyConfig(), 2, 2, 23);
    agent.setWeights(weightsOf({1.3, 0.7}));
    Rng rng(29);
    ActorOutput out = agent.actorEvaluate(std::vector<double>{0.7, 0.7},
                                          ActionMode::Stochastic, rng);
    double expected = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        double sigma = std::exp(out.logStd[i]);
        double u = out.preSquash[i];
        double z = (u - out.mean[i]) / sigma;
        double gauss = -std::log(sigma) -
                       0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * z * z;
        double squash = std::log1p(-out.action[i] * out.action[i]);
        expected -= agent.weights().normalized[i] * (gauss - squash);
    }
    CHECK(agent.causalEntropyTerm(out) ==
          doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("critic target: terminal transitions bootstrap nothing") {
    SacAgent agent(tinyConfig(), 2, 2, 31);
    Transition t = makeTransition({0.1, 0.2}, {0.5, -0.5}, 0.75, true);
    Rng rng(3);
    CHECK(agent.criticTarget(t, rng) == 0.75);
}

TEST_CASE("critic target: matches a hand evaluation of the formula") {
    AgentConfig cfg = tinyConfig();
    cfg.autoAlpha = false;
    cfg.fixedAlpha = 0.2;
    SacAgent agent(cfg, 2, 2, 37);
    Transition t = makeTransition({0.1, -0.3}, {0.2, 0.2}, 1.5, false);

    Rng rngA(41), rngB(41);
    double got = agent.criticTarget(t, rngA);

    ActorOutput next =
        agent.actorEvaluate(t.nextState, ActionMode::Stochastic, rngB);
    std::vector<double> input = t.nextState;
    input.insert(input.end(), next.action.begin(), next.action.end());
    double q1 = forward(agent.target1(), input).output()[0];
    double q2 = forward(agent.target2(), input).output()[0];
    double hc = agent.causalEntropyTerm(next);
    double expected =
        1.5 + cfg.gamma * (std::min(q1, q2) + 0.2 * hc);
    CHECK(got == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("update: critic loss equals the replicated batch computation") {
    AgentConfig cfg = tinyConfig();
    cfg.batchSize = 4;
    SacAgent agent(cfg, 2, 2, 43);
    Rng fill(5);
    for (int i = 0; i < 20; ++i)
        agent.observe(makeTransition({fill.uniform(), fill.uniform()},
                                     {fill.uniform(-1, 1), fill.uniform(-1, 1)},
                                     fill.uniform(-1, 1), i % 7 == 0));

    Rng rngA(47), rngB(47);
    // Replicate the sampling and target computation with a twin stream
    // before the update mutates the networks.
    auto batch = agent.replay().sampleIndices(4, rngB);
    double expectedLoss = 0.0;
    for (std::size_t idx : batch) {
        const Transition& t = agent.replay().at(idx);
        double y = agent.criticTarget(t, rngB);
        std::vector<double> input = t.state;
        input.insert(input.end(), t.action.begin(), t.action.end());
        double d1 = forward(agent.critic1(), input).output()[0] - y;
        double d2 = forward(agent.critic2(), input).output()[0] - y;
        expectedLoss += (d1 * d1 + d2 * d2) / 4.0;
    }
    UpdateMetrics m = agent.update(rngA);
    CHECK(m.criticLoss == doctest::Approx(expectedLoss).epsilon(1e-12));
}

TEST_CASE("update: bandit reward drives the action toward the paying side") {
    AgentConfig cfg = tinyConfig();
    cfg.autoAlpha = false;
    cfg.fixedAlpha = 0.02;
    cfg.batchSize = 32;
    SacAgent agent(cfg, 1, 1, 53);
    Rng rng(59);
    // One-step bandit: reward equals the action coordinate.
    for (int i = 0; i < 512; ++i) {
        double a = rng.uniform(-1.0, 1.0);
        agent.observe(makeTransition({0.0}, {a}, a, true));
    }
    double early = 0.0, late = 0.0;
    for (int i = 0; i < 2000; ++i) {
        UpdateMetrics m = agent.update(rng);
        if (i < 50) early += m.actorLoss / 50.0;
        if (i >= 1950) late += m.actorLoss / 50.0;
    }
    CHECK(late < early);  // loss = -Q - alpha*Hc falls as Q(s, a) is climbed
    Rng dummy(0);
    auto act = agent.selectAction(std::vector<double>{0.0},
                                  ActionMode::Deterministic, dummy);
    CHECK(act[0] > 0.4);
}

TEST_CASE("update: one-hot weights confine the entropy gradient to that head") {
    AgentConfig cfg = tinyConfig();
    cfg.autoAlpha = false;
    cfg.fixedAlpha = 0.3;
    cfg.batchSize = 8;
    SacAgent agent(cfg, 2, 3, 61);
    // Constant-zero critics stay exactly zero on zero-reward terminal
    // data, so the actor update sees dQ/da = 0 and a pure entropy signal.
    zeroNet(agent.critic1());
    zeroNet(agent.critic2());
    agent.setWeights(weightsOf({0.0, 3.0, 0.0}));
    Rng fill(67);
    for (int i = 0; i < 16; ++i)
        agent.observe(makeTransition({fill.uniform(), fill.uniform()},
                                     {0.1, 0.1, 0.1}, 0.0, true));

    Layer outBefore = agent.actor().layers.back();
    Rng rng(71);
    agent.update(rng);
    const Layer& outAfter = agent.actor().layers.back();

    // Output rows: mean_0..2 then logstd_0..2; only dim 1 may move.
    for (std::size_t row : {0u, 2u, 3u, 5u}) {
        for (std::size_t c = 0; c < outBefore.weight.cols; ++c)
            CHECK(outAfter.weight.at(row, c) == outBefore.weight.at(row, c));
        CHECK(outAfter.bias[row] == outBefore.bias[row]);
    }
    bool meanMoved = false, stdMoved = false;
    for (std::size_t c = 0; c < outBefore.weight.cols; ++c) {
        meanMoved = meanMoved ||
                    outAfter.weight.at(1, c) != outBefore.weight.at(1, c);
        stdMoved = stdMoved ||
                   outAfter.weight.at(4, c) != outBefore.weight.at(4, c);
    }
    CHECK(meanMoved);
    CHECK(stdMoved);
}

TEST_CASE("temperature: fresh high-entropy policy lowers alpha") {
    AgentConfig cfg = tinyConfig();
    cfg.batchSize = 16;
    SacAgent agent(cfg, 2, 2, 73);
    Rng rng(79);
    for (int i = 0; i < 64; ++i)
        agent.observe(makeTransition({rng.uniform(), rng.uniform()},
                                     {rng.uniform(-1, 1), rng.uniform(-1, 1)},
                                     rng.uniform(-1, 1), false));
    double a0 = agent.alpha();
    for (int i = 0; i < 30; ++i) agent.update(rng);
    CHECK(agent.alpha() < a0);
}

TEST_CASE("temperature: entropy below target raises alpha") {
    AgentConfig cfg = tinyConfig();
    SacAgent agent(cfg, 2, 1, 83);
    // Near-deterministic head: log-std bias -9 makes log pi large.
    zeroNet(agent.actor());
    agent.actor().layers.back().bias = {0.0, -9.0};
    Rng rng(89);
    for (int i = 0; i < 64; ++i)
        agent.observe(makeTransition({rng.uniform(), rng.uniform()},
                                     {rng.uniform(-1, 1)}, 0.0, true));
    double a0 = agent.alpha();
    agent.update(rng);
    CHECK(agent.alpha() > a0);
}

TEST_CASE("temperature: fixed mode never moves alpha") {
    AgentConfig cfg = tinyConfig();
    cfg.autoAlpha = false;
    cfg.fixedAlpha = 0.17;
    SacAgent agent(cfg, 2, 2, 97);
    Rng rng(101);
    for (int i = 0; i < 64; ++i)
        agent.observe(makeTransition({rng.uniform(), rng.uniform()},
                                     {rng.uniform(-1, 1), rng.uniform(-1, 1)},
                                     rng.uniform(-1, 1), false));
    for (int i = 0; i < 25; ++i) CHECK(agent.update(rng).alpha == 0.17);
}

TEST_CASE("targets lag the critics by the Polyak schedule") {
    AgentConfig cfg = tinyConfig();
    cfg.targetUpdateInterval = 2;
    SacAgent agent(cfg, 2, 2, 103);
    Rng rng(107);
    for (int i = 0; i < 64; ++i)
        agent.observe(makeTransition({rng.uniform(), rng.uniform()},
                                     {rng.uniform(-1, 1), rng.uniform(-1, 1)},
                                     rng.uniform(-1, 1), false));

    NetworkParams initialTarget = agent.target1();
    agent.update(rng);  // update 1: no polyak yet
    CHECK(agent.target1().layers[0].weight.data ==
          initialTarget.layers[0].weight.data);

    agent.update(rng);  // update 2: one polyak blend
    const auto& tgt = agent.target1();
    const auto& src = agent.critic1();
    for (std::size_t l = 0; l < tgt.layers.size(); ++l)
        for (std::size_t i = 0; i < tgt.layers[l].weight.data.size(); ++i) {
            double expect = (1.0 - cfg.tauSoft) *
                                initialTarget.layers[l].weight.data[i] +
                            cfg.tauSoft * src.layers[l].weight.data[i];
            CHECK(tgt.layers[l].weight.data[i] == expect);
        }
}

TEST_CASE("local buffer keeps exactly the most recent N_c transitions") {
    AgentConfig cfg = tinyConfig();
    cfg.localBufferSize = 5;
    SacAgent agent(cfg, 1, 1, 109);
    for (int i = 0; i < 9; ++i)
        agent.observe(makeTransition({static_cast<double>(i)}, {0.0}, 0, false));
    CHECK(agent.localBuffer().size() == 5);
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(agent.localBuffer().at(i).state[0] == static_cast<double>(4 + i));
    CHECK(agent.replay().size() == 9);  // main buffer unaffected
}

TEST_CASE("replay sampling returns distinct in-range indices") {
    ReplayBuffer buf(64);
    for (int i = 0; i < 40; ++i) {
        Transition t;
        t.state = {static_cast<double>(i)};
        buf.add(std::move(t));
    }
    Rng rng(113);
    auto idx = buf.sampleIndices(16, rng);
    CHECK(idx.size() == 16);
    std::sort(idx.begin(), idx.end());
    CHECK(std::adjacent_find(idx.begin(), idx.end()) == idx.end());
    CHECK(idx.back() < 40);
}

TEST_CASE("weight refresh needs at least 100 local samples") {
    SacAgent agent(tinyConfig(), 1, 2, 127);
    Rng rng(131);
    for (int i = 0; i < 99; ++i)
        agent.observe(makeTransition({rng.uniform()},
                                     {rng.uniform(-1, 1), rng.uniform(-1, 1)},
                                     rng.uniform(), false));
    CHECK_FALSE(agent.refreshCausalWeights(10).has_value());
    agent.observe(makeTransition({rng.uniform()},
                                 {rng.uniform(-1, 1), rng.uniform(-1, 1)},
                                 rng.uniform(), false));
    auto w = agent.refreshCausalWeights(10);
    REQUIRE(w.has_value());
    CHECK(w->timestamp == 10);
    CHECK(agent.weights().timestamp == 10);
}

TEST_CASE("weight refresh identifies the paying action dimension") {
    SacAgent agent(tinyConfig(), 1, 2, 137);
    Rng rng(139);
    for (int i = 0; i < 200; ++i) {
        double a0 = rng.uniform(-1.0, 1.0);
        double a1 = rng.uniform(-1.0, 1.0);
        double r = 1.2 * a0 + rng.uniform(-0.2, 0.2);
        agent.observe(makeTransition({rng.uniform(-1.0, 1.0)}, {a0, a1}, r,
                                     false));
    }
    auto w = agent.refreshCausalWeights(200);
    REQUIRE(w.has_value());
    CHECK_FALSE(w->degenerate);
    CHECK(w->normalized[0] > 1.5);
    CHECK(w->normalized[0] > w->normalized[1]);
}

TEST_CASE("weight refresh keeps the last estimate on uninformative windows") {
    SacAgent agent(tinyConfig(), 1, 2, 151);
    Rng rng(149);
    for (int i = 0; i < 200; ++i) {
        double a0 = rng.uniform(-1.0, 1.0);
        double a1 = rng.uniform(-1.0, 1.0);
        double r = 1.2 * a0 + rng.uniform(-0.2, 0.2);
        agent.observe(makeTransition({rng.uniform(-1.0, 1.0)}, {a0, a1}, r,
                                     false));
    }
    auto informed = agent.refreshCausalWeights(200);
    REQUIRE(informed.has_value());
    REQUIRE_FALSE(informed->degenerate);

    // Flood the local buffer with constant-reward transitions; estimation
    // has nothing to work with, so the previous weights must survive.
    for (int i = 0; i < 200; ++i)
        agent.observe(makeTransition({rng.uniform(-1.0, 1.0)},
                                     {rng.uniform(-1, 1), rng.uniform(-1, 1)},
                                     0.0, false));
    auto retained = agent.refreshCausalWeights(400);
    REQUIRE(retained.has_value());
    CHECK(retained->degenerate);
    CHECK(retained->timestamp == 400);
    CHECK(retained->normalized == informed->normalized);
    CHECK(agent.weights().normalized == informed->normalized);
}

TEST_CASE("trainLoop: ablation pair with inert extras is bit-identical") {
    // With no refresh or reset firing inside the horizon, the causal
    // variant's uniform weights make it arithmetically identical to the
    // plain variant.
    AgentConfig ace = tinyConfig();
    ace.useCausalEntropy = true;
    ace.useReset = true;
    AgentConfig sac = ace;
    sac.useCausalEntropy = false;
    sac.useReset = false;

    auto envA = makeEnv("chainreach-2d", RewardMode::Dense);
    auto evalA = makeEnv("chainreach-2d", RewardMode::Dense);
    auto envB = makeEnv("chainreach-2d", RewardMode::Dense);
    auto evalB = makeEnv("chainreach-2d", RewardMode::Dense);
    TrainResult ra = trainLoop(ace, *envA, *evalA, 120, 40, 2, 5);
    TrainResult rb = trainLoop(sac, *envB, *evalB, 120, 40, 2, 5);
    CHECK(ra.finalCheckpointJson == rb.finalCheckpointJson);
    REQUIRE(ra.metrics.size() == rb.metrics.size());
    for (std::size_t i = 0; i < ra.metrics.size(); ++i) {
        CHECK(ra.metrics[i].evalReturn == rb.metrics[i].evalReturn);
        CHECK(ra.metrics[i].alpha == rb.metrics[i].alpha);
        CHECK(ra.metrics[i].dormancy == rb.metrics[i].dormancy);
    }
}

TEST_CASE("trainLoop: refresh cadence follows the configured interval") {
    AgentConfig cfg = tinyConfig();
    cfg.causalInterval = 50;
    cfg.localBufferSize = 150;
    auto env = makeEnv("chainreach-2d", RewardMode::Dense);
    auto evalEnv = makeEnv("chainreach-2d", RewardMode::Dense);
    TrainResult r = trainLoop(cfg, *env, *evalEnv, 300, 100, 2, 3);
    // Refreshes at 100..300 in steps of 50 once D_c holds 100 samples.
    REQUIRE(r.weightTrace.size() == 5);
    for (const auto& row : r.weightTrace) CHECK(row.step % 50 == 0);
    CHECK(r.weightTrace.front().step == 100);
    CHECK(r.weightTrace.back().step == 300);
}

TEST_CASE("trainLoop: reset events carry the applied eta") {
    AgentConfig cfg = tinyConfig();
    cfg.useCausalEntropy = false;
    cfg.resetInterval = 100;
    auto env = makeEnv("chainreach-2d", RewardMode::Dense);
    auto evalEnv = makeEnv("chainreach-2d", RewardMode::Dense);
    TrainResult r = trainLoop(cfg, *env, *evalEnv, 200, 100, 2, 9);
    int resets = 0;
    for (const auto& line : r.events)
        if (line.find("\"type\":\"reset\"") != std::string::npos) ++resets;
    CHECK(resets == 2);
    CHECK(r.metrics.back().resetEta >= 0.0);
    CHECK(r.metrics.back().resetEta <= cfg.etaMax);
}

TEST_CASE("checkpoint JSON carries the full agent state") {
    SacAgent agent(tinyConfig(), 2, 2, 149);
    std::string j = agent.checkpointJson();
    for (const char* key : {"actor", "critic1", "critic2", "target1",
                            "target2", "actorOpt", "logAlpha",
                            "causalNormalized"})
        CHECK(j.find(key) != std::string::npos);
}
