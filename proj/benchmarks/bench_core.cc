#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "containment/comm.h"
#include "containment/dynamics.h"
#include "containment/hull.h"
#include "containment/linalg.h"
#include "containment/sim.h"

namespace {

using namespace containment;

void BM_Expm(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(expm(a));
}
BENCHMARK(BM_Expm)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

std::vector<Vec> random_points(int count, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<Vec> pts;
  for (int k = 0; k < count; ++k) {
    Vec p(dim);
    for (int d = 0; d < dim; ++d) p[d] = u(rng);
    pts.push_back(p);
  }
  return pts;
}

void BM_HullDistance(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const auto pts = random_points(static_cast<int>(state.range(1)), dim, 2);
  const Vec q = Vec::Constant(dim, 7.0);
  for (auto _ : state) benchmark::DoNotOptimize(hull_distance(q, pts));
}
BENCHMARK(BM_HullDistance)->Args({2, 4})->Args({2, 32})->Args({3, 8})->Args({5, 16});

void BM_HullDistanceIterative(benchmark::State& state) {
  const auto pts = random_points(static_cast<int>(state.range(0)), 3, 3);
  const Vec q = Vec::Constant(3, 7.0);
  for (auto _ : state) benchmark::DoNotOptimize(hull_distance_iterative(q, pts));
}
BENCHMARK(BM_HullDistanceIterative)->Arg(8)->Arg(64);

void BM_GenerateSchedule(benchmark::State& state) {
  CommConfig cfg;
  cfg.sampling_period = 0.1;
  cfg.blackout_bound = 1.5;
  cfg.drop_probability = static_cast<double>(state.range(0)) / 100.0;
  cfg.max_delay = 1.0;
  cfg.delay_quantum = 0.01;
  cfg.seed = 7;
  for (auto _ : state) benchmark::DoNotOptimize(generate_schedule(Edge{1, 0}, cfg, 40.0));
}
BENCHMARK(BM_GenerateSchedule)->Arg(0)->Arg(20)->Arg(80);

void BM_SimulateTenAgents(benchmark::State& state) {
  Scenario sc;
  sc.name = "bench";
  sc.weights = ten_agent_topology().weights();
  sc.followers = 6;
  sc.comm.sampling_period = 0.1;
  sc.comm.blackout_bound = 1.5;
  sc.comm.drop_probability = 0.2;
  sc.comm.max_delay = 1.0;
  sc.comm.delay_quantum = 0.01;
  sc.t_end = static_cast<double>(state.range(0));
  const double p0[6][2] = {{-4, 2}, {-3, -4}, {2, -5}, {8, 1}, {7, 7}, {1, 8}};
  const double l0[4][2] = {{0, 0}, {4, -1}, {5, 4}, {-1, 3}};
  for (const auto& p : p0) {
    AgentSpec a;
    a.p0 = Vec(2);
    a.p0 << p[0], p[1];
    a.v0 = Vec::Zero(2);
    sc.agents.push_back(a);
    ControllerSpec c;
    c.variant = ControlVariant::FullState;
    c.gains.k_p = c.gains.k_d = c.gains.L_p = 4.0;
    sc.controllers.push_back(c);
  }
  for (int j = 0; j < 4; ++j) {
    AgentSpec a;
    LeaderTrajectory tr;
    tr.kind = LeaderKind::DampedWave;
    tr.p0 = Vec(2);
    tr.p0 << l0[j][0], l0[j][1];
    tr.v_d = Vec(2);
    tr.v_d << 1.0, 0.1;
    tr.index = 7 + j;
    a.trajectory = tr;
    sc.agents.push_back(a);
  }
  for (auto _ : state) benchmark::DoNotOptimize(run(sc, 7));
}
BENCHMARK(BM_SimulateTenAgents)->Arg(5)->Arg(40)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
