#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "blesim/scenario.hpp"
#include "blesim/sim.hpp"
#include "blesim/sweep.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_file(out_path, text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blesim - BLE advertising relay mesh simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string sweep_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string trace_path;
  int jobs = 1;
  std::string format = "csv";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Override the scenario seed");
    cmd->add_option("--out", out_path, "Write results here instead of stdout");
    cmd->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"csv", "table"}));
  };

  CLI::App* run_cmd = app.add_subcommand("run", "Simulate one scenario");
  run_cmd->add_option("scenario-file", scenario_path, "Scenario JSON file")
      ->required();
  run_cmd->add_option("--trace", trace_path,
                      "Write a tab-separated event trace to this file");
  add_common(run_cmd);

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "Run a parameter sweep with repetitions");
  sweep_cmd->add_option("sweep-file", sweep_path, "Sweep JSON file")->required();
  sweep_cmd->add_option("--jobs", jobs, "Worker threads")
      ->check(CLI::PositiveNumber);
  add_common(sweep_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      blesim::Scenario scenario =
          blesim::parse_scenario_text(read_file(scenario_path));
      if (seed) scenario.seed = *seed;
      blesim::validate_scenario(scenario);

      blesim::RunOptions opts;
      opts.collect_trace = !trace_path.empty();
      const blesim::RunResult result = blesim::run_scenario(scenario, opts);

      if (!trace_path.empty()) {
        std::ostringstream trace;
        for (const std::string& line : result.trace_lines) trace << line << "\n";
        write_file(trace_path, trace.str());
      }
      if (format == "csv") {
        emit(out_path, blesim::report_to_csv(scenario, result.report, true));
      } else {
        emit(out_path, blesim::report_to_table(scenario, result.report));
      }
      return 0;
    }

    blesim::SweepSpec spec = blesim::parse_sweep_text(read_file(sweep_path));
    if (seed) spec.base.seed = *seed;
    const blesim::SweepResult result = blesim::run_sweep(spec, jobs);
    if (format == "csv") {
      emit(out_path, blesim::sweep_to_csv(spec, result));
    } else {
      emit(out_path, blesim::sweep_to_table(spec, result));
    }
    if (result.aborted) {
      std::cerr << "sweep aborted: " << result.error << "\n";
      return 2;
    }
    return 0;
  } catch (const blesim::ScenarioError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
