#include <benchmark/benchmark.h>

#include "cofine/environment.hpp"
#include "cofine/hierarchy.hpp"
#include "cofine/numerics.hpp"
#include "cofine/policy.hpp"
#include "cofine/rng.hpp"

using namespace cofine;

namespace {

hierarchy::ProfileSet bench_population(int dim, int k_true, int count,
                                       std::uint64_t seed) {
  env::PopulationSpec spec;
  spec.dim = dim;
  spec.true_subspace_dim = k_true;
  spec.count = count;
  return env::gen_profile_population(spec, seed);
}

void BM_spd_solve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  rng::Stream stream(1, 0xB1);
  RealMatrix g(n, n);
  for (int j = 0; j < n; ++j) g.col(j) = stream.gaussian_vector(n);
  const RealMatrix a = g * g.transpose() + RealMatrix::Identity(n, n);
  const RealVector b = stream.gaussian_vector(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(numerics::spd_solve(a, b));
  }
}
BENCHMARK(BM_spd_solve)->Arg(25)->Arg(100);

void BM_svd_top_k(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  rng::Stream stream(2, 0xB2);
  RealMatrix w(dim, 77);
  for (int j = 0; j < 77; ++j) w.col(j) = stream.gaussian_vector(dim);
  for (auto _ : state) {
    benchmark::DoNotOptimize(numerics::svd_top_k(w, 5));
  }
}
BENCHMARK(BM_svd_top_k)->Arg(25)->Arg(100);

void BM_learn_u(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const hierarchy::ProfileSet profiles = bench_population(dim, 5, 77, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hierarchy::learn_u(profiles, 5));
  }
}
BENCHMARK(BM_learn_u)->Arg(25)->Arg(100);

void BM_policy_round(benchmark::State& state) {
  // one select + update cycle with 20 candidates
  const int dim = static_cast<int>(state.range(0));
  const auto [w_star, h] = env::gen_synthetic_wstar(dim, 5, 0.25, 4);
  env::EnvironmentSpec spec;
  spec.true_weights = w_star;
  spec.n_actions = 20;
  spec.seed = 9;

  const policy::PolicyConfig cfg = policy::default_config(policy::Variant::CoFine);
  policy::PolicyState st = policy::make_state(cfg, h);
  int round = 0;
  for (auto _ : state) {
    ++round;
    const auto contexts = env::gen_contexts(spec, round);
    const int pick = policy::select(st, contexts, h, cfg);
    const double y = env::sample_reward(spec, contexts[pick], round);
    policy::update(st, contexts[pick], y, h, cfg);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_policy_round)->Arg(25)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
