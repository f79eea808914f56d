#include <filesystem>
#include <vector>

#include <benchmark/benchmark.h>

#include "rover/planner.hpp"
#include "rover/sample_kernel.hpp"
#include "rover/scenario.hpp"

using namespace rover;

namespace {

struct Fixture {
  Scenario scenario;
  TerrainMap map;
  PlanningProblem problem;
  Eigen::VectorXd x;
  std::vector<Segment> segments;

  explicit Fixture(int n_segments)
      : scenario(load_scenario(std::filesystem::path(ROVER_ASSET_DIR) / "scenarios" / "craters.json")),
        map(load_heightmap(scenario.terrain.path, scenario.terrain.format)),
        problem(map, scenario.power, with_segments(scenario.planner, n_segments), scenario.start,
                scenario.goal),
        x(problem.initial_variables()) {
    problem.update_multipliers(x);
    const MinJerkSpline sp = problem.spline(x);
    for (int i = 0; i < sp.segments(); ++i) segments.push_back(sp.segment(i));
  }

  static PlannerConfig with_segments(PlannerConfig c, int n) {
    c.n_segments = n;
    return c;
  }

  SampleKernelInputs inputs() const {
    SampleKernelInputs in;
    in.map = &map;
    in.params = &problem.params();
    in.config = &problem.config();
    in.lagrangian = &problem.lagrangian();
    in.segments = segments;
    in.samples_per_segment = problem.config().samples_per_segment;
    return in;
  }
};

template <bool Parallel>
void BM_SampleKernel(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  const SampleKernelInputs in = f.inputs();
  std::vector<SampleTerm> out(f.problem.num_samples());
  for (auto _ : state) {
    if constexpr (Parallel) {
      evaluate_samples_parallel(in, out, true);
    } else {
      evaluate_samples_serial(in, out, true);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(out.size()));
}

void BM_ObjectiveGradient(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(f.problem.evaluate(f.x));
}

}  // namespace

BENCHMARK_TEMPLATE(BM_SampleKernel, false)->Arg(8)->Arg(32)->Arg(128);
BENCHMARK_TEMPLATE(BM_SampleKernel, true)->Arg(8)->Arg(32)->Arg(128);
BENCHMARK(BM_ObjectiveGradient)->Arg(8)->Arg(32);

BENCHMARK_MAIN();
