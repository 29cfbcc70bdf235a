#include <benchmark/benchmark.h>

#include "pqr/checkloss.hpp"
#include "pqr/model.hpp"
#include "pqr/noncrossing.hpp"
#include "pqr/sampler.hpp"
#include "pqr/simulation.hpp"

namespace {

using namespace pqr;

struct Fixture {
    Dataset data;
    QuantileModel model;
    RegressionState state;

    explicit Fixture(int design, Eigen::Index n)
        : data(generate_design(spec(design, n), 0)),
          model(make_linear_model(data, ModelSpec::make(QuantileGrid({0.01, 0.05, 0.5})))),
          state(initialize_state(model)) {}

    static DesignSpec spec(int design, Eigen::Index n) {
        DesignSpec s;
        s.design = design;
        s.n = n;
        s.replicates = 1;
        return s;
    }
};

const Fixture& design4() {
    static const Fixture f(4, 350);
    return f;
}

void BM_LogLikelihood(benchmark::State& st) {
    const auto& f = design4();
    for (auto _ : st) benchmark::DoNotOptimize(f.model.log_likelihood(f.state));
    st.SetItemsProcessed(st.iterations() * f.model.size());
}
BENCHMARK(BM_LogLikelihood);

void BM_LogPosterior(benchmark::State& st) {
    const auto& f = design4();
    for (auto _ : st) benchmark::DoNotOptimize(f.model.log_posterior(f.state));
}
BENCHMARK(BM_LogPosterior);

void BM_CombinedBoundsLoop(benchmark::State& st) {
    const auto& f = design4();
    for (auto _ : st)
        benchmark::DoNotOptimize(combined_bounds(f.state, f.model.constraint_weights(), 2, 1));
}
BENCHMARK(BM_CombinedBoundsLoop);

void BM_CombinedBoundsMatrix(benchmark::State& st) {
    const auto& f = design4();
    for (auto _ : st)
        benchmark::DoNotOptimize(combined_bounds_matrix(f.state, f.model.constraint_weights(), 2, 1));
}
BENCHMARK(BM_CombinedBoundsMatrix);

// One full sweep per iteration of the benchmark loop.
void BM_SamplerSweep(benchmark::State& st) {
    const auto& f = design4();
    McmcConfig cfg;
    cfg.iterations = 20;
    cfg.burn_in = 10;
    cfg.thin = 10;
    for (auto _ : st) benchmark::DoNotOptimize(run_chain(f.model, cfg, f.state));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(cfg.iterations));
}
BENCHMARK(BM_SamplerSweep)->Unit(benchmark::kMillisecond);

void BM_CheckLossFit(benchmark::State& st) {
    const Fixture f(1, st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(checkloss_fit(f.data.y, f.data.x, 0.3));
}
BENCHMARK(BM_CheckLossFit)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_NormalQuantile(benchmark::State& st) {
    double p = 0.001;
    for (auto _ : st) {
        benchmark::DoNotOptimize(normal_quantile(p));
        p = p > 0.998 ? 0.001 : p + 0.000731;
    }
}
BENCHMARK(BM_NormalQuantile);

}  // namespace

BENCHMARK_MAIN();
