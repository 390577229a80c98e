#include <benchmark/benchmark.h>

#include <cstdint>
#include <utility>

#include "mgap/mgap.hpp"

namespace {

mgap::EmbeddingSet random_unit_set(std::size_t n, std::size_t d, std::uint64_t seed) {
  mgap::Rng rng = mgap::Rng::seeded(seed);
  mgap::Mat m = mgap::gaussian_matrix(n, d, 1.0, rng);
  for (std::size_t i = 0; i < n; ++i) mgap::normalize_in_place(m.row(i), d);
  return mgap::EmbeddingSet::from_mat(std::move(m), "unlabeled", true);
}

mgap::PairedBatch random_batch(std::size_t n, std::size_t d, std::uint64_t seed) {
  return mgap::PairedBatch::make(random_unit_set(n, d, seed),
                                 random_unit_set(n, d, seed + 1));
}

void BM_PairwiseCosineStats(benchmark::State& state) {
  const auto set = random_unit_set(static_cast<std::size_t>(state.range(0)), 512, 1);
  for (auto _ : state) {
    auto stats = mgap::pairwise_cosine_stats(set);
    benchmark::DoNotOptimize(stats);
  }
}
BENCHMARK(BM_PairwiseCosineStats)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_ClipLoss(benchmark::State& state) {
  const auto batch = random_batch(static_cast<std::size_t>(state.range(0)), 512, 2);
  for (auto _ : state) {
    double loss = mgap::clip_loss(batch, 0.1);
    benchmark::DoNotOptimize(loss);
  }
}
BENCHMARK(BM_ClipLoss)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_ClipLossGrad(benchmark::State& state) {
  const auto batch = random_batch(static_cast<std::size_t>(state.range(0)), 512, 3);
  for (auto _ : state) {
    auto grads = mgap::clip_loss_grad(batch, 0.1);
    benchmark::DoNotOptimize(grads);
  }
}
BENCHMARK(BM_ClipLossGrad)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_Svd(benchmark::State& state) {
  mgap::Rng rng = mgap::Rng::seeded(4);
  const mgap::Mat a = mgap::gaussian_matrix(static_cast<std::size_t>(state.range(0)),
                                            static_cast<std::size_t>(state.range(1)), 1.0, rng);
  for (auto _ : state) {
    auto result = mgap::svd(a);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_Svd)->Args({128, 32})->Args({512, 64})->Unit(benchmark::kMillisecond);

void BM_ProcrustesAlign(benchmark::State& state) {
  const auto x = random_unit_set(256, 64, 5);
  const auto y = random_unit_set(256, 64, 6);
  for (auto _ : state) {
    auto map = mgap::procrustes_align(x.m, y.m);
    benchmark::DoNotOptimize(map);
  }
}
BENCHMARK(BM_ProcrustesAlign)->Unit(benchmark::kMillisecond);

void BM_CapFraction(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    double f = mgap::log2_cap_fraction_for_cos(dim, 0.56);
    benchmark::DoNotOptimize(f);
  }
}
BENCHMARK(BM_CapFraction)->Arg(512)->Arg(4096);

void BM_MlpForward(benchmark::State& state) {
  const auto spec =
      mgap::MlpSpec::dense(512, static_cast<std::size_t>(state.range(0)), mgap::Activation::relu);
  const auto mlp = mgap::build_mlp(spec, 7);
  const auto inputs = mgap::materialize(mgap::InputSource::gaussian(256, 512, 8));
  for (auto _ : state) {
    auto out = mgap::forward(mlp, inputs);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_MlpForward)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Theorem1Trial(benchmark::State& state) {
  mgap::Rng rng = mgap::Rng::seeded(9);
  const auto [u, v] = mgap::make_pair_with_cos(32, 0.2, 1.0, rng);
  for (auto _ : state) {
    auto trial = mgap::theorem1_trial(u, v, static_cast<std::size_t>(state.range(0)), rng);
    benchmark::DoNotOptimize(trial);
  }
}
BENCHMARK(BM_Theorem1Trial)->Arg(256)->Arg(2048)->Unit(benchmark::kMicrosecond);

void BM_LandscapeSweep(benchmark::State& state) {
  const auto batch = random_batch(64, 512, 10);
  const auto grid = mgap::uniform_grid(mgap::kDefaultLambdaLo, mgap::kDefaultLambdaHi,
                                       mgap::kDefaultLambdaPoints);
  for (auto _ : state) {
    auto curve = mgap::landscape_sweep(batch, 0.1, grid);
    benchmark::DoNotOptimize(curve);
  }
}
BENCHMARK(BM_LandscapeSweep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
