#include <benchmark/benchmark.h>

#include "hicon/krein.hpp"

using namespace hicon;

namespace {

std::shared_ptr<const geometry::PeriodCellMesh> mesh_for(int level) {
  geometry::CellSpec s;
  s.h = 0.1 / (1 << level);
  s.n_bnd = 32 << level;
  return std::make_shared<const geometry::PeriodCellMesh>(geometry::build_period_cell(s));
}

}  // namespace

static void BM_build_mesh(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(mesh_for(static_cast<int>(state.range(0))));
}
BENCHMARK(BM_build_mesh)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

static void BM_assemble_fibre(benchmark::State& state) {
  const auto mesh = mesh_for(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fem::assemble_fibre(mesh, Vec2(1, 0.5)));
  state.counters["dofs"] = mesh->free_dofs.size();
}
BENCHMARK(BM_assemble_fibre)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

static void BM_m_operator(benchmark::State& state) {
  const auto ctx = fem::assemble_fibre(mesh_for(static_cast<int>(state.range(0))), Vec2(1, 0.5));
  for (auto _ : state) benchmark::DoNotOptimize(triple::m_operator(ctx, 0.125, cd(1, 1)));
}
BENCHMARK(BM_m_operator)->DenseRange(0, 1)->Unit(benchmark::kMillisecond);

static void BM_resolvent_krein(benchmark::State& state) {
  const auto ctx = fem::assemble_fibre(mesh_for(static_cast<int>(state.range(0))), Vec2(1, 0.5));
  for (auto _ : state) benchmark::DoNotOptimize(krein::resolvent_krein(ctx, 0.125, cd(1, 1)));
}
BENCHMARK(BM_resolvent_krein)->DenseRange(0, 1)->Unit(benchmark::kMillisecond);

static void BM_resolvent_direct(benchmark::State& state) {
  const auto ctx = fem::assemble_fibre(mesh_for(static_cast<int>(state.range(0))), Vec2(1, 0.5));
  for (auto _ : state) benchmark::DoNotOptimize(krein::resolvent_direct(ctx, 0.125, cd(1, 1)));
}
BENCHMARK(BM_resolvent_direct)->DenseRange(0, 1)->Unit(benchmark::kMillisecond);

static void BM_weighted_norm(benchmark::State& state) {
  const auto ctx = fem::assemble_fibre(mesh_for(static_cast<int>(state.range(0))), Vec2(1, 0.5));
  const MatXc R = krein::resolvent_direct(ctx, 0.125, cd(1, 1));
  const fem::WeightedSpace G = fem::broken_space(ctx);
  for (auto _ : state) benchmark::DoNotOptimize(fem::weighted_operator_norm(R, G, G));
}
BENCHMARK(BM_weighted_norm)->DenseRange(0, 1)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
