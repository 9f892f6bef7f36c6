#include <benchmark/benchmark.h>

#include <cmath>

#include "scpkit/closedform.hpp"
#include "scpkit/montecarlo.hpp"
#include "scpkit/specfun.hpp"

namespace {

scp::Scenario testbed(double density) {
    scp::Scenario s;
    s.layers = scp::testbed_layers(density);
    auto rng = scp::make_stream(11, 0);
    s.route = scp::random_route(s.layers, {6, 6}, rng);
    return s;
}

void BM_MarcumQ1(benchmark::State& state) {
    const double a = static_cast<double>(state.range(0));
    double b = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(scp::marcum_q1(a, b));
        b = b > 2.0 * a + 8.0 ? 0.1 : b + 0.37;
    }
}
BENCHMARK(BM_MarcumQ1)->Arg(0)->Arg(2)->Arg(8)->Arg(30);

void BM_FitAHat(benchmark::State& state) {
    const auto layers = scp::testbed_layers();
    auto rng = scp::make_stream(12, 0);
    std::vector<scp::Hop> hops;
    for (int i = 0; i < state.range(0); ++i) {
        const auto& r = layers[1].link_distance_m;
        hops.push_back({layers[1].id, r.min_m + (r.max_m - r.min_m) * (i + 0.5) / state.range(0),
                        scp::sample_k_factor(layers[1], rng)});
    }
    for (auto _ : state) benchmark::DoNotOptimize(scp::fit_marcum_a_hat(hops, layers[1]));
}
BENCHMARK(BM_FitAHat)->Arg(1)->Arg(3)->Arg(7)->Unit(benchmark::kMicrosecond);

void BM_EndToEndRician(benchmark::State& state) {
    const auto s = testbed(1e-13);
    for (auto _ : state) benchmark::DoNotOptimize(scp::end_to_end_scp_rician(s));
}
BENCHMARK(BM_EndToEndRician)->Unit(benchmark::kMicrosecond);

void BM_MonteCarloTrial(benchmark::State& state) {
    const auto s = testbed(std::pow(10.0, -static_cast<double>(state.range(0))));
    scp::McConfig config;
    std::uint64_t t = 0;
    for (auto _ : state) {
        auto rng = scp::make_stream(13, t++);
        benchmark::DoNotOptimize(scp::simulate_trial(s, config, rng));
    }
}
BENCHMARK(BM_MonteCarloTrial)->Arg(14)->Arg(13)->Arg(12)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
