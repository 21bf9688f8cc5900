#include "tla/plot.hpp"
#include "tla/run.hpp"
#include "tla/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;

namespace {

constexpr int kExitError = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitViolation = 3;

constexpr const char* kOutDirEnv = "TLA_OUT_DIR";

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::string text;
  for (const auto& l : lines) {
    text += l;
    text += '\n';
  }
  write_file(path, text);
}

// --out wins, then the environment override, then ./out.
fs::path output_dir(const std::string& flag, const std::string& leaf) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return fs::path(env) / leaf;
  return fs::path("out") / leaf;
}

int cmd_run(const std::string& scenario_path, const std::string& out_flag, bool verbose,
            std::optional<std::uint64_t> seed) {
  tla::Scenario scenario;
  try {
    scenario = tla::load_scenario(scenario_path);
    if (seed) scenario.seed = *seed;
  } catch (const tla::ScenarioError& e) {
    std::cerr << "invalid scenario: " << e.what() << "\n";
    return kExitInvalid;
  }

  tla::RunOptions options;
  options.verbose = verbose;
  tla::RunResult result;
  try {
    result = tla::run(scenario, options);
  } catch (const tla::ConstraintViolation& e) {
    std::cerr << "run aborted: " << e.what() << "\n";
    return kExitViolation;
  }

  const fs::path dir = output_dir(out_flag, scenario.name);
  fs::create_directories(dir);
  write_file(dir / "log.csv", tla::format_csv(result.rows));
  write_file(dir / "summary.json", tla::summary_to_json(result.summary, &scenario));
  tla::emit_plots(result.rows, dir, scenario.name);
  if (verbose) {
    write_lines(dir / "replans.csv", result.replans);
    write_lines(dir / "messages.jsonl", result.messages);
  }

  const tla::RunSummary& s = result.summary;
  std::printf("%s: energy %.1f J, min speed %.3f m/s, stops %d, travel time %.1f s, "
              "violations %d, infeasible replans %d -> %s\n",
              s.scenario.c_str(), s.total_energy, s.min_velocity, s.stop_count, s.travel_time,
              s.constraint_violations, s.infeasible_replans, dir.string().c_str());
  return s.constraint_violations == 0 ? 0 : kExitViolation;
}

int cmd_compare(const std::string& a_path, const std::string& b_path, const std::string& out_flag) {
  const tla::RunSummary a = tla::summary_from_json(read_file(a_path));
  const tla::RunSummary b = tla::summary_from_json(read_file(b_path));
  tla::Comparison c;
  try {
    c = tla::compare(a, b);
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return kExitInvalid;
  }
  const std::string json = tla::comparison_to_json(c, a, b);
  fs::path out = out_flag;
  if (out.empty()) {
    const char* env = std::getenv(kOutDirEnv);
    out = (env && *env) ? fs::path(env) / "comparison.json" : fs::path("comparison.json");
  }
  write_file(out, json);
  std::printf("energy delta %.2f %% (baseline %s %.1f J, candidate %s %.1f J), "
              "stop delta %d, time delta %.1f s\n",
              c.energy_delta_percent, a.scenario.c_str(), a.total_energy, b.scenario.c_str(),
              b.total_energy, c.stop_delta, c.time_delta);
  return 0;
}

int cmd_plot(const std::string& log_path, const std::string& out_flag, const std::string& title) {
  const auto rows = tla::parse_csv(read_file(log_path));
  fs::path dir = out_flag.empty() ? fs::path(log_path).parent_path() : fs::path(out_flag);
  if (dir.empty()) dir = ".";
  for (const auto& p : tla::emit_plots(rows, dir, title.empty() ? fs::path(log_path).stem().string() : title)) {
    std::printf("%s\n", p.string().c_str());
  }
  return 0;
}

int cmd_validate(const std::string& path) {
  try {
    const tla::Scenario s = tla::load_scenario(path);
    std::printf("ok: %s\n", s.name.c_str());
    return 0;
  } catch (const tla::ScenarioError& e) {
    std::cerr << "invalid scenario: " << e.what() << "\n";
    return kExitInvalid;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Traffic light assistant simulator"};
  app.require_subcommand(1);

  std::string scenario_path, out, log_path, title, a_path, b_path;
  bool verbose = false;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "Run a scenario in closed loop");
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--out", out, std::string("Output directory (default $") + kOutDirEnv +
                                    "/<name> or out/<name>)");
  run->add_flag("--verbose", verbose, "Also write replans.csv and messages.jsonl");
  run->add_option("--seed", seed, "Seed for the message drop hook");

  auto* cmp = app.add_subcommand("compare", "Compare two run summaries (first is the baseline)");
  cmp->add_option("baseline", a_path, "Baseline summary.json")->required();
  cmp->add_option("candidate", b_path, "Candidate summary.json")->required();
  cmp->add_option("--out", out, "Comparison JSON path");

  auto* plot = app.add_subcommand("plot", "Render SVG plots from a run log");
  plot->add_option("log", log_path, "log.csv")->required();
  plot->add_option("--out", out, "Output directory (default: next to the log)");
  plot->add_option("--title", title, "Plot title");

  auto* val = app.add_subcommand("validate", "Validate a scenario file");
  val->add_option("scenario", scenario_path, "Scenario JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(scenario_path, out, verbose, seed);
    if (*cmp) return cmd_compare(a_path, b_path, out);
    if (*plot) return cmd_plot(log_path, out, title);
    if (*val) return cmd_validate(scenario_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
