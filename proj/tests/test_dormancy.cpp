#include "doctest.h"

#include <cmath>

#include "ace/dormancy.hpp"
#include "ace/propcheck.hpp"

using namespace ace;

TEST_CASE("equal nonzero norms are never dormant at small tau") {
    GradientRecord g{{{0.3, 0.3, 0.3, 0.3, 0.3}}};
    DormancyReport r = dormancyDegree(g, 0.025);
    CHECK(r.degree == 0.0);
    CHECK(r.layers[0].dormant == 0);
    CHECK(r.layers[0].neurons == 5);
}

TEST_CASE("hand-computed fixture [0,0,4,4] at tau=0.025") {
    GradientRecord g{{{0.0, 0.0, 4.0, 4.0}}};
    DormancyReport r = dormancyDegree(g, 0.025);
    CHECK(r.layers[0].meanNorm == 2.0);
    CHECK(r.layers[0].dormant == 2);
    CHECK(r.degree == 0.5);
}

TEST_CASE("dead layer counts as fully dormant") {
    GradientRecord g{{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}}};
    DormancyReport r = dormancyDegree(g, 0.025);
    CHECK(r.layers[0].deadLayer);
    CHECK(r.layers[0].dormant == 3);
    CHECK(r.degree == 0.5);
}

TEST_CASE("threshold boundary is inclusive per the dormancy definition") {
    // Norm exactly tau * mean is dormant (<= comparison).
    // Layer [1, 79]: mean 40; at tau = 0.025 the cutoff is exactly 1.
    GradientRecord g{{{1.0, 79.0}}};
    CHECK(dormancyDegree(g, 0.025).degree == 0.5);
}

TEST_CASE("degree is the pooled dormant fraction across layers") {
    GradientRecord g{{{0.0, 0.0, 4.0, 4.0}, {1.0, 1.0}}};
    DormancyReport r = dormancyDegree(g, 0.025);
    CHECK(r.degree == doctest::Approx(2.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("combineReports pools counts like one big network") {
    DormancyReport a = dormancyDegree(GradientRecord{{{0.0, 0.0, 4.0, 4.0}}},
                                      0.025, 7);
    DormancyReport b =
        dormancyDegree(GradientRecord{{{1.0, 1.0}}}, 0.025, 7);
    DormancyReport c = combineReports({a, b});
    CHECK(c.degree == doctest::Approx(2.0 / 6.0).epsilon(1e-15));
    CHECK(c.layers.size() == 2);
    CHECK(c.step == 7);
}

TEST_CASE("alpha_tau in [0,1] and monotone in tau") {
    Rng rng(19);
    for (int t = 0; t < 30; ++t) {
        GradientRecord g;
        g.neuronNorms.resize(1 + rng.index(4));
        for (auto& layer : g.neuronNorms) {
            layer.resize(1 + rng.index(12));
            for (double& n : layer) n = rng.uniform(0.0, 3.0);
        }
        double prev = -1.0;
        for (double tau : {0.0, 0.005, 0.025, 0.1, 0.3, 1.0, 2.0}) {
            double d = dormancyDegree(g, tau).degree;
            CHECK(d >= 0.0);
            CHECK(d <= 1.0);
            CHECK(d >= prev);
            prev = d;
        }
    }
}

TEST_CASE("soft reset: eta clipping against the configured maximum") {
    Rng rng(23);
    NetworkParams net = makeMlp({3, 6, 2}, rng);
    OptimizerState opt = makeOptimizer(net, 3e-4);
    CHECK(softReset(net, opt, 0.95, 0.8, 1) == 0.8);
    CHECK(softReset(net, opt, 0.3, 0.8, 2) == doctest::Approx(0.3));
    CHECK(softReset(net, opt, 0.0, 0.8, 3) == 0.0);
}

TEST_CASE("soft reset: eta=0 keeps parameters bit-identical, clears optimizer") {
    Rng rng(29);
    NetworkParams net = makeMlp({4, 8, 2}, rng);
    NetworkParams before = net;
    OptimizerState opt = makeOptimizer(net, 3e-4);
    Gradients g = zeroGradients(net);
    g.weight[0].at(0, 0) = 0.5;
    adamStep(opt, net, g);
    before = net;

    softReset(net, opt, 0.0, 0.8, 99);
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        CHECK(net.layers[l].weight.data == before.layers[l].weight.data);
        CHECK(net.layers[l].bias == before.layers[l].bias);
    }
    CHECK(opt.step == 0);
    for (const auto& m : opt.m.weight)
        for (double v : m.data) CHECK(v == 0.0);
}

TEST_CASE("soft reset: eta=1 is exact replacement by the seeded fresh net") {
    Rng rng(31);
    NetworkParams net = makeMlp({3, 5, 1}, rng);
    OptimizerState opt = makeOptimizer(net, 3e-4);
    softReset(net, opt, 1.0, 1.0, 4242);
    Rng fresh(4242);
    NetworkParams target = makeMlp({3, 5, 1}, fresh);
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        CHECK(net.layers[l].weight.data == target.layers[l].weight.data);
        CHECK(net.layers[l].bias == target.layers[l].bias);
    }
}

TEST_CASE("soft reset: eta=0.8 interpolates element-wise") {
    Rng rng(37);
    NetworkParams net = makeMlp({2, 4, 1}, rng);
    NetworkParams old = net;
    OptimizerState opt = makeOptimizer(net, 3e-4);
    softReset(net, opt, 0.95, 0.8, 7);  // clips to 0.8
    Rng freshRng(7);
    NetworkParams fresh = makeMlp({2, 4, 1}, freshRng);
    for (std::size_t l = 0; l < net.layers.size(); ++l)
        for (std::size_t i = 0; i < net.layers[l].weight.data.size(); ++i) {
            double expect = 0.2 * old.layers[l].weight.data[i] +
                            0.8 * fresh.layers[l].weight.data[i];
            CHECK(net.layers[l].weight.data[i] ==
                  doctest::Approx(expect).epsilon(1e-15));
        }
}

TEST_CASE("interpolation linearity: eta and 1-eta with swapped arguments") {
    Rng rng(41);
    NetworkParams a = makeMlp({3, 7, 2}, rng);
    NetworkParams b = makeMlp({3, 7, 2}, rng);
    for (double eta : {0.25, 0.5, 0.8}) {
        NetworkParams x = a;
        interpolateToward(x, b, eta);
        NetworkParams y = b;
        interpolateToward(y, a, 1.0 - eta);
        for (std::size_t l = 0; l < x.layers.size(); ++l)
            for (std::size_t i = 0; i < x.layers[l].weight.data.size(); ++i)
                CHECK(x.layers[l].weight.data[i] ==
                      doctest::Approx(y.layers[l].weight.data[i])
                          .epsilon(1e-12));
    }
}

TEST_CASE("stuck-network reset lowers the dormancy degree across seeds") {
    CheckResult r = checkDormancyArithmetic(20, 43);
    INFO(r.detail);
    CHECK(r.passed);
}

TEST_CASE("reports serialize to JSON event lines") {
    DormancyReport r = dormancyDegree(GradientRecord{{{0.0, 4.0}}}, 0.025, 12);
    std::string j = r.toJson();
    CHECK(j.find("\"step\":12") != std::string::npos);
    CHECK(j.find("dormancy") != std::string::npos);

    ResetEvent e;
    e.step = 3;
    e.eta = 0.5;
    e.networks = {"actor"};
    CHECK(e.toJson().find("\"eta\":0.5") != std::string::npos);
}
