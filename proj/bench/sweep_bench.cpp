// Serial reference sweep vs the OpenMP sweep on the same grid.
// Usage: sweep_bench [--inputs N] [--repeats R] [--threads T]
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <string>

#include <CLI11.hpp>
#include <omp.h>

#include "atd/experiment.hpp"

using namespace atd;

namespace {

bool same(const OutputGrid& a, const OutputGrid& b) {
  if (a.rows.size() != b.rows.size()) return false;
  for (std::size_t r = 0; r < a.rows.size(); ++r) {
    if (a.rows[r].observed != b.rows[r].observed || a.rows[r].failed != b.rows[r].failed) return false;
  }
  return true;
}

template <class F>
double best_of(int repeats, F&& f) {
  double best = 1e300;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial vs OpenMP sweep timing"};
  int n_inputs = 200, repeats = 3, threads = 0;
  app.add_option("--inputs", n_inputs, "random input vectors")->check(CLI::PositiveNumber);
  app.add_option("--repeats", repeats, "timed repetitions (best is reported)")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  CLI11_PARSE(app, argc, argv);
  if (threads > 0) omp_set_num_threads(threads);

  ExperimentConfig cfg;
  const auto n = generate(cfg.bench);
  const auto anns = annotations_for(n, cfg, std::nullopt);
  const auto clocks = sweep_clocks(n, cfg);
  const auto inputs = gen_patterns(static_cast<int>(n.inputs().size()), n_inputs, 1).inputs;
  const int n_read = n.read_cycle().value_or(1);
  const double sims = static_cast<double>(inputs.size() * clocks.size() * anns.size());

  OutputGrid gs, gp;
  const double ts = best_of(repeats, [&] { gs = sweep_serial(n, anns, clocks, inputs, n_read); });
  const double tp = best_of(repeats, [&] { gp = sweep(n, anns, clocks, inputs, n_read); });

  std::printf("grid: %zu inputs x %zu clocks x %zu duties = %.0f simulations\n", inputs.size(), clocks.size(),
              anns.size(), sims);
  std::printf("serial  : %8.3f s  (%.2f us/sim)\n", ts, ts / sims * 1e6);
  std::printf("openmp  : %8.3f s  (%.2f us/sim, %d threads)\n", tp, tp / sims * 1e6, omp_get_max_threads());
  std::printf("speedup : %8.2fx\n", ts / tp);
  std::printf("results : %s\n", same(gs, gp) ? "identical" : "MISMATCH");
  return same(gs, gp) ? 0 : 1;
}
