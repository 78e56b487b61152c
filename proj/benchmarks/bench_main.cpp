#include <benchmark/benchmark.h>

#include <memory>

#include "edgemig/actor_critic.hpp"
#include "edgemig/baselines.hpp"
#include "edgemig/harness.hpp"
#include "edgemig/mdp.hpp"
#include "edgemig/neural.hpp"
#include "edgemig/orchestrator.hpp"
#include "edgemig/topology.hpp"

using namespace edgemig;

namespace {

ExperimentConfig desk() {
  ExperimentConfig cfg;
  cfg.topology.n_edge = 4;
  cfg.topology.n_core = 8;
  cfg.workload.count = 80;
  return cfg;
}

void BM_DenseForwardBackward(benchmark::State& st) {
  Rng rng(1);
  const int in = static_cast<int>(st.range(0));
  nn::DenseNet<float> net({in, 256, 128, 64, 49},
                          {nn::Activation::Relu, nn::Activation::Relu, nn::Activation::Relu,
                           nn::Activation::Linear},
                          rng);
  const nn::Matrix<float> x = nn::Matrix<float>::Random(in, 32);
  const nn::Matrix<float> up = nn::Matrix<float>::Ones(49, 32);
  nn::Vector<float> grad = nn::Vector<float>::Zero(net.param_count());
  for (auto _ : st) {
    typename nn::DenseNet<float>::Cache cache;
    benchmark::DoNotOptimize(net.forward(x, cache));
    benchmark::DoNotOptimize(net.backward(cache, up, grad, false));
  }
}
BENCHMARK(BM_DenseForwardBackward)->Arg(84)->Arg(372);

void BM_ShortestPath(benchmark::State& st) {
  const Topology topo = generate_waxman({20, 40, 0.5, 0.2, 3}, {});
  const std::vector<double> residual(static_cast<std::size_t>(topo.link_count()), 3.5);
  int dst = 1;
  for (auto _ : st) {
    benchmark::DoNotOptimize(shortest_feasible_path(topo, 0, dst, 0.3, residual));
    dst = dst % (topo.server_count() - 1) + 1;
  }
}
BENCHMARK(BM_ShortestPath);

void BM_RandomEpisode(benchmark::State& st) {
  const ExperimentConfig cfg = desk();
  const auto topo = std::make_shared<const Topology>(build_topology(cfg));
  const auto reqs = episode_requests(cfg, 0);
  for (auto _ : st) {
    World world(topo, reqs, {cfg.perf, cfg.thresholds});
    RandomPolicy policy(0.5, 9);
    for (TimeStep t = 0;; ++t) {
      world.step(t, policy);
      if (world.finished(t)) break;
    }
  }
}
BENCHMARK(BM_RandomEpisode)->Unit(benchmark::kMillisecond);

void BM_ActorCriticUpdate(benchmark::State& st) {
  Rng rng(2);
  ActorCriticConfig c;
  c.state_dim = state_dimension(12, 4);
  c.actions = action_count(12, 4);
  ActorCritic<float> ac(c, rng);
  std::vector<Experience> batch(64);
  for (auto& e : batch) {
    e.s = Eigen::VectorXf::Random(c.state_dim).cwiseAbs();
    e.s_next = Eigen::VectorXf::Random(c.state_dim).cwiseAbs();
    e.a = static_cast<int>(rng() % static_cast<std::uint64_t>(c.actions));
    e.r = 0.5;
  }
  for (auto _ : st) benchmark::DoNotOptimize(ac.update(batch));
}
BENCHMARK(BM_ActorCriticUpdate)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
