// Compares Measured and Simulated throughput of every grid config on the
// pure workloads, and reports which structure wins under each mode.
#include <CLI11.hpp>
#include <algorithm>
#include <iostream>

#include "idxsel/bench.hpp"
#include "idxsel/cost_model.hpp"
#include "idxsel/csv.hpp"
#include "idxsel/workload.hpp"

using namespace idxsel;

int main(int argc, char** argv) {
  CLI::App app{"Measured against simulated throughput", "idxsel-calibrate"};
  std::uint64_t op_count = 10000;
  std::size_t repeats = 5;
  std::string cost_model, out;
  app.add_option("--op-count", op_count, "Operations per run");
  app.add_option("--repeats", repeats, "Measured runs per config (median kept)")->check(CLI::PositiveNumber);
  app.add_option("--cost-model", cost_model, "Cost model JSON (default builtin)");
  app.add_option("--out", out, "CSV output (default stdout)");
  CLI11_PARSE(app, argc, argv);

  try {
    const Bench bench(ParamGrid(), cost_model.empty() ? CostModel{} : load_cost_model(cost_model));
    const auto configs = enumerate_configs(bench.grid());
    CsvTable table({"workload", "config", "measured", "simulated", "measured_over_simulated"});
    for (auto spec : pure_workloads()) {
      spec.op_count = op_count;
      const auto stream = workload_generate(spec);
      double best_measured = 0.0, best_simulated = 0.0;
      IndexConfig win_measured, win_simulated;
      for (const auto& c : configs) {
        std::vector<double> runs;
        for (std::size_t r = 0; r < repeats; ++r) runs.push_back(bench.run(c, stream, BenchMode::Measured).throughput);
        std::nth_element(runs.begin(), runs.begin() + static_cast<long>(runs.size() / 2), runs.end());
        const double measured = runs[runs.size() / 2];
        const double simulated = bench.run(c, stream, BenchMode::Simulated).throughput;
        table.add_row({spec.name, format_config(c, bench.grid()), format_number(measured), format_number(simulated),
                       format_number(measured / simulated)});
        if (measured > best_measured) best_measured = measured, win_measured = c;
        if (simulated > best_simulated) best_simulated = simulated, win_simulated = c;
      }
      std::cerr << spec.name << ": measured best " << format_config(win_measured, bench.grid()) << ", simulated best "
                << format_config(win_simulated, bench.grid())
                << (win_measured.kind == win_simulated.kind ? "" : "  (structures differ)") << '\n';
    }
    if (out.empty()) {
      table.write(std::cout);
    } else {
      table.save(out);
    }
  } catch (const std::exception& e) {
    std::cerr << "idxsel-calibrate: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
