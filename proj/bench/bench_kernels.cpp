// Serial reference loops against the OpenMP kernels. Thread count follows
// HIERMC_THREADS (or OMP_NUM_THREADS).

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "hiermc/kernels.hpp"
#include "hiermc/most.hpp"
#include "hiermc/parallel.hpp"
#include "hiermc/simulator.hpp"

using namespace hiermc;

namespace {

Execution mode(const benchmark::State& state) { return state.range(1) ? Execution::Parallel : Execution::Serial; }

void label(benchmark::State& state) {
    state.SetLabel(state.range(1) ? "parallel x" + std::to_string(parallel::max_threads()) : "serial");
}

std::vector<int> random_ints(std::uint64_t seed, std::int64_t n) {
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<int> d(-1, 28);
    std::vector<int> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = d(gen);
    return v;
}

void BM_OrdinalPairs(benchmark::State& state) {
    const auto e = random_ints(1, state.range(0));
    const auto c = random_ints(2, state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::ordinal_pairs(e, c, mode(state)));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
    label(state);
}

void BM_HierarchicalPairs(benchmark::State& state) {
    const auto n = state.range(0);
    std::vector<std::vector<double>> e(3), c(3);
    std::mt19937_64 gen(3);
    std::uniform_int_distribution<int> bin(0, 9), vfd(-1, 28);
    for (int k = 0; k < 3; ++k)
        for (std::int64_t i = 0; i < n; ++i) {
            e[static_cast<std::size_t>(k)].push_back(k < 2 ? (bin(gen) == 0 ? 0.0 : 1.0) : vfd(gen));
            c[static_cast<std::size_t>(k)].push_back(k < 2 ? (bin(gen) == 0 ? 0.0 : 1.0) : vfd(gen));
        }
    const std::vector<double> taus{0.0, 0.0, 3.0};
    for (auto _ : state) benchmark::DoNotOptimize(kernels::hierarchical_pairs(e, c, taus, mode(state)));
    state.SetItemsProcessed(state.iterations() * n * n);
    label(state);
}

void BM_CumulativeLogitTerms(benchmark::State& state) {
    const auto cfg = read_simulation_config(HIERMC_CONFIG_DIR "/guiding_example.json");
    const auto data = simulate_trial(cfg.model(), static_cast<int>(state.range(0)), 28, 7);
    TransitionModelSpec spec;
    spec.scale = cfg.scale;
    const auto rows = design_rows(build_transition_records(data), spec);
    Eigen::VectorXd theta(spec.dimension());
    theta << 3.6, -1.0, -6.0, -0.3, 0.03, 0.04, 3.0, 8.0;
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::cumulative_logit_terms(rows, theta, kernels::Derivatives::Hessian, mode(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows.size()));
    label(state);
}

void BM_BootstrapSummary(benchmark::State& state) {
    const auto cfg = read_simulation_config(HIERMC_CONFIG_DIR "/guiding_example.json");
    const auto data = simulate_trial(cfg.model(), 100, 28, 11);
    TransitionModelSpec spec;
    spec.scale = cfg.scale;
    // the bootstrap has no serial switch; the serial arm caps the pool at one thread
    const int saved = parallel::max_threads();
    if (!state.range(1)) parallel::set_max_threads(1);
    label(state);
    for (auto _ : state)
        benchmark::DoNotOptimize(bootstrap_summary(data, spec, {1, 2, 3}, static_cast<int>(state.range(0)), 5));
    parallel::set_max_threads(saved);
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_OrdinalPairs)->ArgsProduct({{500, 2000}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_HierarchicalPairs)->ArgsProduct({{500, 2000}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_CumulativeLogitTerms)->ArgsProduct({{100, 1000}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_BootstrapSummary)->ArgsProduct({{50}, {0, 1}})->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
    parallel::configure_from_env();
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
