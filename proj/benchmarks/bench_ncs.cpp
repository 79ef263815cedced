#include <benchmark/benchmark.h>

#include <random>

#include "ncs/abstraction.hpp"
#include "ncs/network.hpp"
#include "ncs/refine.hpp"
#include "ncs/relations.hpp"
#include "ncs/sim.hpp"
#include "ncs/synthesis.hpp"
#include "ncs/vehicle.hpp"
#include "support.hpp"

using namespace ncs;

static void BM_DelayBounds(benchmark::State& st) {
    NetworkParams p = vehicle_network();
    for (auto _ : st) benchmark::DoNotOptimize(compute_delay_bounds(p, 201ull * 201ull * 201ull, 66));
}
BENCHMARK(BM_DelayBounds);

static void BM_VehicleFlow(benchmark::State& st) {
    Scenario s = vehicle_scenario(21, 0.05);
    Vec x{0.1, -0.2, 0.3};
    for (auto _ : st) benchmark::DoNotOptimize(step_map(s.plant, x, s.plant.inputs.back()));
}
BENCHMARK(BM_VehicleFlow);

// Full FC successor set of one vehicle state (all burst lengths), cold cache each round.
static void BM_VehicleFcSuccessors(benchmark::State& st) {
    Scenario s = vehicle_scenario(static_cast<std::size_t>(st.range(0)), 0.05);
    SymbolicState x{{{0, 0, 0}}, 0, false};
    std::size_t n = 0;
    for (auto _ : st) {
        Abstraction abs(s.plant, s.certificate, s.abstraction_config());
        n = abs.successors(x, 1).size();
        benchmark::DoNotOptimize(n);
    }
    st.counters["successors"] = static_cast<double>(n);
}
BENCHMARK(BM_VehicleFcSuccessors)->Arg(21)->Arg(41)->Unit(benchmark::kMillisecond);

static void BM_ScalarGasBuild(benchmark::State& st) {
    Scenario s = scalar_gas_scenario(0.1 / static_cast<double>(st.range(0)), 0.9, 2);
    for (auto _ : st) {
        Abstraction abs(s.plant, s.certificate, s.abstraction_config());
        benchmark::DoNotOptimize(build_symbolic(abs, abs.initial_symbolic_states(), {}).system.num_states());
    }
}
BENCHMARK(BM_ScalarGasBuild)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_SurrogateLazySynthesis(benchmark::State& st) {
    Scenario s = surrogate_gas_scenario(1, 3);
    GameOptions opt;
    opt.jobs = static_cast<unsigned>(st.range(0));
    for (auto _ : st) {
        Abstraction abs(s.plant, s.certificate, s.abstraction_config());
        benchmark::DoNotOptimize(synthesize_lazy(abs, s.spec, s.mu_x, opt).controller.num_states());
    }
}
BENCHMARK(BM_SurrogateLazySynthesis)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_SurrogateExplicitSynthesis(benchmark::State& st) {
    Scenario s = surrogate_gas_scenario(1, 3);
    for (auto _ : st) {
        Abstraction abs(s.plant, s.certificate, s.abstraction_config());
        auto star = build_symbolic(abs, abs.initial_symbolic_states(), {});
        auto lifted = lift_spec(s.spec, s.bounds.n_min, s.bounds.n_max);
        benchmark::DoNotOptimize(synthesize_explicit(star.system, lifted, s.mu_x).controller.num_states());
    }
}
BENCHMARK(BM_SurrogateExplicitSynthesis)->Unit(benchmark::kMillisecond);

static void BM_LargestRelation(benchmark::State& st) {
    std::mt19937_64 rng(7);
    auto a = ncs::testing::random_system(rng, static_cast<std::size_t>(st.range(0)));
    auto b = ncs::testing::random_system(rng, static_cast<std::size_t>(st.range(0)), "t");
    for (auto _ : st) benchmark::DoNotOptimize(strong_alt_bisim(a, b, 0.25).fixpoint.size());
}
BENCHMARK(BM_LargestRelation)->Arg(25)->Arg(100)->Arg(400);

static void BM_ClosedLoop(benchmark::State& st) {
    Scenario s = surrogate_gas_scenario(1, 3);
    Abstraction abs(s.plant, s.certificate, s.abstraction_config());
    auto res = synthesize_lazy(abs, s.spec, s.mu_x);
    auto mc = MealyController::refine(res.controller, s.lattice, s.plant.inputs, s.bounds, s.mu_x);
    std::uint64_t seed = 0;
    for (auto _ : st) {
        DelaySampler ds(s.bounds, policy::Uniform{seed++});
        LoopTrace t = run_loop(s.plant, mc, s.spec.points[s.spec.initial[0]], ds, 94);
        benchmark::DoNotOptimize(verify_trace(t, s.spec, s.epsilon).ok);
    }
}
BENCHMARK(BM_ClosedLoop)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
