// OpenMP kernels against their serial references.

#include "ml4c/featurize.hpp"
#include "ml4c/gbdt.hpp"
#include "ml4c/synth.hpp"

#include <benchmark/benchmark.h>

using namespace ml4c;

namespace {

struct Workload {
    BayesNet net;
    DiscreteDataset data;
    Skeleton skel;
    std::vector<UnshieldedTriple> uts;
};

const Workload& workload() {
    static const Workload w = [] {
        SynthConfig cfg;
        cfg.node_count_range = {20, 20};
        cfg.sample_size = 10000;
        Rng rng(99);
        Workload out;
        out.net = gen_bayes_net(cfg, rng);
        out.data = forward_sample(out.net, cfg.sample_size, rng);
        out.skel = skeleton_of(out.net.dag);
        out.uts = unshielded_triples(out.skel);
        return out;
    }();
    return w;
}

void featurize(benchmark::State& state, bool parallel) {
    const auto& w = workload();
    const auto basis = EmbeddingBasis::from_seed(0);
    for (auto _ : state) {
        // Fresh tester so the cache does not carry over between iterations.
        const G2Tester tester(w.data);
        auto fv = parallel ? featurize_all(w.skel, w.uts, tester, basis) : featurize_all_serial(w.skel, w.uts, tester, basis);
        benchmark::DoNotOptimize(fv);
    }
    state.counters["triples"] = static_cast<double>(w.uts.size());
}

void gbdt(benchmark::State& state, SplitSearch search) {
    const int n = static_cast<int>(state.range(0));
    const int d = 64;
    Rng rng(7);
    FeatureMatrix x(n, d);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j)
            x.at(i, j) = rng.normal();
        y[static_cast<std::size_t>(i)] = x.at(i, 0) + x.at(i, 1) * x.at(i, 2) + rng.normal() > 0 ? 1 : 0;
    }
    BoostParams p;
    p.n_rounds = 10;
    for (auto _ : state) {
        auto model = train_gbdt(x, y, p, search);
        benchmark::DoNotOptimize(model);
    }
}

} // namespace

BENCHMARK_CAPTURE(featurize, openmp, true)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(featurize, serial, false)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(gbdt, openmp_level_wise, SplitSearch::Parallel)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(gbdt, serial_reference, SplitSearch::SerialReference)->Arg(2000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
