#include "cohortsim/cohorting.hpp"
#include "cohortsim/engine.hpp"
#include "cohortsim/rail_network.hpp"
#include "cohortsim/synthetic_city.hpp"

#include <benchmark/benchmark.h>

#include <map>

using namespace cohortsim;

namespace {

const std::filesystem::path kNetworkFile = std::filesystem::path(COHORTSIM_BENCH_DATA) / "mumbai_like_network.txt";

const RailNetwork& network()
{
    static const RailNetwork net = precompute_routes(load_network(kNetworkFile));
    return net;
}

const City& city(std::size_t population)
{
    static std::map<std::size_t, City> cache;
    auto it = cache.find(population);
    if (it == cache.end()) it = cache.emplace(population, generate_city(mumbai_like_city_config(population, 7), network())).first;
    return it->second;
}

void BM_RoutePrecompute(benchmark::State& state)
{
    const auto raw = load_network(kNetworkFile);
    for (auto _ : state) benchmark::DoNotOptimize(precompute_routes(raw));
    state.counters["stations"] = static_cast<double>(raw.stations().size());
}
BENCHMARK(BM_RoutePrecompute)->Unit(benchmark::kMillisecond);

void BM_CoachAssignment(benchmark::State& state)
{
    const auto& c = city(100000);
    const auto commuters = train_commuters(c);
    Rng rng(1);
    const auto plan = form_cohorts(commuters, network(), static_cast<int>(state.range(0)), 0.0, rng, c.population());
    for (auto _ : state) benchmark::DoNotOptimize(assign_coaches(plan.cohorts, network(), 0, CoachCapacity{}, rng));
    state.counters["cohorts"] = static_cast<double>(plan.cohorts.size());
}
BENCHMARK(BM_CoachAssignment)->Arg(1)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Timestep(benchmark::State& state)
{
    const auto& c = city(static_cast<std::size_t>(state.range(0)));
    ScenarioConfig sc;
    sc.policy = PolicyTimeline::no_intervention();
    sc.cohorting.cohort_size = 16;
    sc.horizon_days = 100000;
    Simulation sim(c, network(), sc);
    for (auto _ : state) sim.step();
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Timestep)->Arg(20000)->Arg(100000)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
