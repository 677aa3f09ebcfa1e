#include <benchmark/benchmark.h>

#include "cpr/evolution.hpp"
#include "cpr/explore.hpp"
#include "cpr/mcsim.hpp"
#include "cpr/potential.hpp"

using namespace cpr;

namespace {

CprSystem irsa(double G, int d) {
    return CprSystem::single(G, DegreeDistribution::regular(d),
                             SuccessModel::slotted_aloha());
}

void BM_BaseEvolve(benchmark::State& state) {
    CprSystem sys = irsa(0.8, 3);
    for (auto _ : state) benchmark::DoNotOptimize(cpr_evolve(sys));
}
BENCHMARK(BM_BaseEvolve);

void BM_CoupledEvolve(benchmark::State& state) {
    CcprSystem sys = CcprSystem::punctured(irsa(0.9, 3), static_cast<int>(state.range(0)), 2);
    for (auto _ : state) benchmark::DoNotOptimize(ccpr_evolve(sys));
}
BENCHMARK(BM_CoupledEvolve)->Arg(10)->Arg(40);

void BM_SpecializedCoupledEvolve(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(
            convolutional_irsa_evolve(0.9, 3, 2, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_SpecializedCoupledEvolve)->Arg(10)->Arg(40);

void BM_PotentialThreshold(benchmark::State& state) {
    ScalarSystem sys(DegreeDistribution::regular(3), SuccessModel::slotted_aloha());
    for (auto _ : state) benchmark::DoNotOptimize(potential_threshold(sys));
}
BENCHMARK(BM_PotentialThreshold);

void BM_ThresholdScan(benchmark::State& state) {
    EvolveOptions opts;
    auto classify = make_single_class_classifier(DegreeDistribution::regular(3),
                                                 SuccessModel::slotted_aloha(), 1, 1, opts);
    for (auto _ : state)
        benchmark::DoNotOptimize(find_threshold(classify, 0.5, 0.9, 1e-3).G_star);
}
BENCHMARK(BM_ThresholdScan);

void BM_PeelInstance(benchmark::State& state) {
    CprSystem sys = irsa(0.8, 3);
    for (auto _ : state) {
        PeelingInstance inst = build_instance(sys, static_cast<int>(state.range(0)), 1);
        benchmark::DoNotOptimize(peel(inst));
    }
}
BENCHMARK(BM_PeelInstance)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
