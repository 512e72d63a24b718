#include <benchmark/benchmark.h>

#include "ace/propcheck.hpp"
#include "ace/tabular.hpp"

namespace {

struct BellmanFixture {
    ace::TabularMdp mdp;
    ace::FactoredPolicy policy;
    ace::CausalWeights weights;
    ace::QTable q;

    explicit BellmanFixture(std::size_t states) {
        ace::Rng rng(7);
        mdp = ace::randomMdp(rng, 2, {3, 3});
        // randomMdp draws a small state count; rebuild at the target size.
        mdp.nStates = states;
        std::size_t nA = mdp.jointActionCount();
        mdp.transition.assign(states * nA * states, 0.0);
        mdp.reward.assign(states * nA, 0.0);
        for (std::size_t s = 0; s < states; ++s)
            for (std::size_t a = 0; a < nA; ++a) {
                double sum = 0.0;
                for (std::size_t sn = 0; sn < states; ++sn) {
                    double p = rng.uniform(0.05, 1.0);
                    mdp.transition[(s * nA + a) * states + sn] = p;
                    sum += p;
                }
                for (std::size_t sn = 0; sn < states; ++sn)
                    mdp.transition[(s * nA + a) * states + sn] /= sum;
                mdp.reward[s * nA + a] = rng.uniform(-1.0, 1.0);
            }
        policy = ace::randomPolicy(mdp, rng);
        weights = ace::randomWeightsFixture(2, rng);
        q = ace::QTable(states, nA);
        for (double& v : q.values) v = rng.uniform(-5.0, 5.0);
    }
};

void bmBellmanSerial(benchmark::State& state) {
    BellmanFixture f(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        ace::QTable out =
            ace::applyCausalBellmanSerial(f.mdp, f.policy, f.weights, f.q, 0.2);
        benchmark::DoNotOptimize(out.values.data());
    }
}

void bmBellmanParallel(benchmark::State& state) {
    BellmanFixture f(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        ace::QTable out =
            ace::applyCausalBellman(f.mdp, f.policy, f.weights, f.q, 0.2);
        benchmark::DoNotOptimize(out.values.data());
    }
}

void bmOrdering(benchmark::State& state) {
    ace::Rng rng(11);
    ace::SemSample sem =
        ace::randomSem(rng, static_cast<std::size_t>(state.range(0)));
    ace::StandardizeResult st = ace::standardize(sem.batch.rows);
    for (auto _ : state) {
        ace::CausalOrdering ord =
            ace::estimateOrdering(st.data, sem.batch.rewardIndex());
        benchmark::DoNotOptimize(ord.order.data());
    }
}

}  // namespace

BENCHMARK(bmBellmanSerial)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(bmBellmanParallel)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(bmOrdering)->Arg(1000)->Arg(5000);

BENCHMARK_MAIN();
