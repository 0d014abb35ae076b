#include <benchmark/benchmark.h>

#include <numbers>
#include <string>

#include "tds/fsc.hpp"
#include "tds/mid.hpp"
#include "tds/model_io.hpp"
#include "tds/puiseux.hpp"
#include "tds/rootfinder.hpp"

using namespace tds;

namespace {

Quasipolynomial model(const char* name) { return load_model(std::string(TDS_FIXTURE_DIR) + "/" + name); }

void BM_RootsInBox(benchmark::State& state) {
    auto qp = model("example2.json");
    const double h = static_cast<double>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(roots_in_box(qp, std::numbers::pi, ComplexBox::make(-2.1, 1.3, -h, h)));
}
BENCHMARK(BM_RootsInBox)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_CountUnstable(benchmark::State& state) {
    auto qp = model("example3.json");
    for (auto _ : state) benchmark::DoNotOptimize(count_unstable(qp, 2.0));
}
BENCHMARK(BM_CountUnstable)->Unit(benchmark::kMillisecond);

void BM_Sweep(benchmark::State& state) {
    auto qp = model("example2.json");
    SweepOptions opts;
    opts.threads = static_cast<unsigned>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(sweep(qp, 0.0, 3.0, static_cast<int>(state.range(0)), opts));
}
BENCHMARK(BM_Sweep)->Args({1000, 1})->Args({1000, 4})->Args({10000, 1})->Unit(benchmark::kMillisecond);

void BM_NuProfile(benchmark::State& state) {
    auto qp = model("example3.json");
    for (auto _ : state) benchmark::DoNotOptimize(nu_profile(qp, 5.0));
}
BENCHMARK(BM_NuProfile)->Unit(benchmark::kMillisecond);

void BM_PuiseuxAnalysis(benchmark::State& state) {
    auto ev = shifted_evaluator(model("example1.json"), cplx(0.0, 1.0), std::numbers::pi);
    for (auto _ : state) benchmark::DoNotOptimize(analyze_multiple_root(ev, 3));
}
BENCHMARK(BM_PuiseuxAnalysis)->Unit(benchmark::kMicrosecond);

void BM_MidCoefficients(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(max_multiplicity_coefficients(n, n - 1, -1.0, 1.0));
}
BENCHMARK(BM_MidCoefficients)->DenseRange(1, 5)->Unit(benchmark::kMicrosecond);

void BM_CertifyDominance(benchmark::State& state) {
    auto a = max_multiplicity_coefficients(static_cast<int>(state.range(0)), 1, -1.0, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(certify_dominance(a));
}
BENCHMARK(BM_CertifyDominance)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Kummer(benchmark::State& state) {
    const cplx z(3.0, -4.0);
    for (auto _ : state) benchmark::DoNotOptimize(kummer_phi(2.0, 5.0, z));
}
BENCHMARK(BM_Kummer);

}  // namespace

BENCHMARK_MAIN();
