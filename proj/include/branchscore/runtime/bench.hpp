#pragma once

#include <json.hpp>

#include <functional>
#include <string>
#include <vector>

namespace branchscore::runtime {

struct BenchOptions {
  int n_low = 2;
  int n_high = 10;
  int runs = 100;
};

/// Tick times for one tree depth. Each run starts a fresh engine and steps
/// until the end point is active (2n + 1 units); compilation is not timed.
struct BenchRow {
  int n = 0;
  std::size_t points = 0;
  std::size_t intervals = 0;
  int runs = 0;
  std::size_t ticks = 0; // total over all runs
  double mean_ms = 0;
  double p95_ms = 0;
  double max_ms = 0;
  double wall_s = 0; // whole row including compilation
};

/// Throws std::invalid_argument for bad ranges.
std::vector<BenchRow> run_bench(const BenchOptions &options,
                                const std::function<void(const BenchRow &)> &on_row = {});

std::string bench_table(const std::vector<BenchRow> &rows);
nlohmann::ordered_json bench_json(const std::vector<BenchRow> &rows);

} // namespace branchscore::runtime
