#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mslam/posegraph.hpp"
#include "mslam/registration.hpp"
#include "mslam/sim3.hpp"
#include "mslam/umeyama.hpp"

using namespace mslam;

namespace {

std::mt19937_64 bench_rng(12345);

Sim3 random_sim3(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Sim3 s;
  s.scale = std::exp(0.3 * u(rng));
  s.rotation = Rotation3::from_axis_angle(
      Eigen::Vector3d(u(rng), u(rng), u(rng)).normalized() * 0.5);
  s.translation = 3.0 * Eigen::Vector3d(u(rng), u(rng), u(rng));
  return s;
}

std::vector<Eigen::Vector3d> random_cloud(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  std::vector<Eigen::Vector3d> pts(n);
  for (auto& p : pts) p = Eigen::Vector3d(u(rng), u(rng), u(rng));
  return pts;
}

}  // namespace

static void BM_Sim3ExpLog(benchmark::State& state) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Sim3Tangent xi;
  for (int i = 0; i < 7; ++i) xi(i) = u(bench_rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim3_log(sim3_exp(xi)));
  }
}
BENCHMARK(BM_Sim3ExpLog);

static void BM_WeightedUmeyama(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto src = random_cloud(bench_rng, n);
  const Sim3 truth = random_sim3(bench_rng);
  std::vector<Eigen::Vector3d> dst(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = sim3_apply(truth, src[i]);
  const std::vector<double> w(src.size(), 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(weighted_umeyama(src, dst, w));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_WeightedUmeyama)->Arg(1000)->Arg(10000);

static void BM_RobustSim3(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto src = random_cloud(bench_rng, n);
  const Sim3 truth = random_sim3(bench_rng);
  std::vector<Eigen::Vector3d> dst(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = sim3_apply(truth, src[i]);
  std::uniform_real_distribution<double> u(-60.0, 60.0);
  for (int i = 0; i < n / 5; ++i) {
    dst[i] = Eigen::Vector3d(u(bench_rng), u(bench_rng), u(bench_rng));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_robust_sim3(src, dst));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_RobustSim3)->Arg(2000)->Arg(10000);

static void BM_PoseGraphSolve(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  std::vector<Sim3> truth(k);
  for (int i = 1; i < k; ++i) {
    truth[i] = sim3_compose(truth[i - 1], random_sim3(bench_rng));
  }
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Sim3Edge> edges;
  for (int i = 0; i + 1 < k; ++i) {
    Sim3Tangent noise;
    for (int d = 0; d < 7; ++d) noise(d) = 0.01 * u(bench_rng);
    Sim3Edge e;
    e.from_submap = i;
    e.to_submap = i + 1;
    e.transform = sim3_compose(sim3_exp(noise),
                               sim3_compose(sim3_inverse(truth[i]), truth[i + 1]));
    e.inlier_ratio = 1.0;
    e.accepted = true;
    edges.push_back(e);
  }
  for (int l = 0; l < 10; ++l) {
    const int from = l * k / 12;
    const int to = std::min(k - 1, from + k / 2);
    Sim3Edge e;
    e.from_submap = from;
    e.to_submap = to;
    e.transform = sim3_compose(sim3_inverse(truth[from]), truth[to]);
    e.inlier_ratio = 1.0;
    e.kind = EdgeKind::Loop;
    e.accepted = true;
    edges.push_back(e);
  }
  for (auto _ : state) {
    PoseGraph graph = build_pose_graph(k, edges);
    const auto report = optimize_graph(graph);
    benchmark::DoNotOptimize(report.final_cost);
  }
}
BENCHMARK(BM_PoseGraphSolve)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
