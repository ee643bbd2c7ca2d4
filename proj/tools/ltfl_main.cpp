#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ltfl/config.hpp"
#include "ltfl/orchestrator.hpp"
#include "ltfl/presets.hpp"
#include "ltfl/trace.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

namespace fs = std::filesystem;

// LTFL_OUT_DIR beats --out so wrappers can redirect a whole batch without
// touching every command line.
std::string resolve_out_dir(const std::string& cli_value) {
  if (const char* env = std::getenv("LTFL_OUT_DIR")) {
    if (*env != '\0') return env;
  }
  if (cli_value.empty()) {
    throw ltfl::ConfigError(
        "no output directory: pass --out or set LTFL_OUT_DIR");
  }
  return cli_value;
}

int cmd_run(const std::string& config_path, const std::string& out_cli,
            std::optional<std::uint64_t> seed, int jobs) {
  ltfl::MatrixSpec spec = ltfl::load_matrix_spec(config_path);
  if (seed) spec.base.seed = *seed;
  const std::string out_dir = resolve_out_dir(out_cli);

  // A single run is a 1x1 grid unless the config declares axes; either
  // way every cell lands in out_dir with a summary.csv next to it.
  const auto outcomes = ltfl::run_matrix(spec, out_dir, jobs);
  bool all_ok = true;
  for (const auto& cell : outcomes) {
    std::cout << cell.name << ": " << cell.status << "\n";
    if (cell.status != "ok") all_ok = false;
  }
  std::cout << "wrote " << outcomes.size() << " cell(s) to " << out_dir
            << "\n";
  if (!all_ok) {
    std::cerr << "ltfl: some cells failed; see summary.csv\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_trace(const std::string& input, double speed_threshold,
              const std::string& out_cli) {
  const std::string out_dir = resolve_out_dir(out_cli);
  fs::create_directories(out_dir);

  const ltfl::trace::IngestResult ingested = ltfl::trace::ingest(input);

  std::vector<double> losses;
  std::vector<double> speeds;
  losses.reserve(ingested.users.size());
  speeds.reserve(ingested.users.size());
  for (const auto& u : ingested.users) {
    losses.push_back(u.loss_ratio);
    speeds.push_back(u.upload_mbps);
  }
  const auto loss_cdf = ltfl::trace::cdf(losses);
  const auto speed_cdf = ltfl::trace::cdf(speeds);
  ltfl::trace::write_cdf_csv(loss_cdf,
                             (fs::path(out_dir) / "loss_cdf.csv").string());
  ltfl::trace::write_cdf_csv(speed_cdf,
                             (fs::path(out_dir) / "speed_cdf.csv").string());

  char buf[128];
  std::snprintf(buf, sizeof(buf), "users: %zu (rows used %zu, skipped %zu)",
                ingested.users.size(), ingested.rows_used,
                ingested.rows_skipped);
  std::cout << buf << "\n";
  std::snprintf(buf, sizeof(buf),
                "share of users with loss ratio <= 0.1: %.4f",
                ltfl::trace::cdf_at(loss_cdf, 0.1));
  std::cout << buf << "\n";
  std::snprintf(buf, sizeof(buf),
                "share of users with upload speed > %g Mbps: %.4f",
                speed_threshold,
                ltfl::trace::eligible_ratio_at(ingested.users,
                                               speed_threshold));
  std::cout << buf << "\n";
  return kExitOk;
}

int cmd_presets(const std::string& write_dir) {
  if (!write_dir.empty()) {
    fs::create_directories(write_dir);
    for (const auto& p : ltfl::presets()) {
      const fs::path path = fs::path(write_dir) / (p.name + ".json");
      std::ofstream out(path, std::ios::binary);
      if (!out) {
        throw std::runtime_error("presets: cannot open " + path.string());
      }
      out << p.json_text << "\n";
    }
    std::cout << "wrote " << ltfl::presets().size() << " preset(s) to "
              << write_dir << "\n";
    return kExitOk;
  }
  for (const auto& p : ltfl::presets()) {
    std::cout << p.name << ": " << p.description << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator for loss-tolerant cross-device federated learning"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed_value = 0;
  int jobs = 1;

  CLI::App* run = app.add_subcommand(
      "run", "Run the experiment(s) described by a config file");
  run->add_option("--config", config_path, "JSON config file")->required();
  run->add_option("--out", out_dir, "output directory");
  CLI::Option* seed_opt =
      run->add_option("--seed", seed_value, "override the config seed");
  run->add_option("--jobs", jobs, "worker threads for grid cells");

  CLI::App* matrix = app.add_subcommand(
      "matrix", "Run a config as a full experiment grid");
  matrix->add_option("--config", config_path, "JSON config file")->required();
  matrix->add_option("--out", out_dir, "output directory");
  CLI::Option* matrix_seed_opt =
      matrix->add_option("--seed", seed_value, "override the base seed");
  matrix->add_option("--jobs", jobs, "worker threads for grid cells");

  std::string trace_input;
  double speed_threshold = 2.0;
  CLI::App* trace = app.add_subcommand(
      "trace", "Summarize a network measurement CSV into CDFs");
  trace->add_option("--input", trace_input, "measurement CSV")->required();
  trace->add_option("--speed-threshold", speed_threshold,
                    "eligibility speed threshold in Mbps");
  trace->add_option("--out", out_dir, "output directory");

  std::string preset_write_dir;
  CLI::App* presets_cmd =
      app.add_subcommand("presets", "List or export the built-in configs");
  presets_cmd->add_option("--write", preset_write_dir,
                          "write preset JSON files to this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (run->parsed() || matrix->parsed()) {
      std::optional<std::uint64_t> seed;
      const CLI::Option* opt = run->parsed() ? seed_opt : matrix_seed_opt;
      if (opt->count() > 0) seed = seed_value;
      return cmd_run(config_path, out_dir, seed, jobs);
    }
    if (trace->parsed()) {
      return cmd_trace(trace_input, speed_threshold, out_dir);
    }
    return cmd_presets(preset_write_dir);
  } catch (const ltfl::ConfigError& e) {
    std::cerr << "ltfl: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "ltfl: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "ltfl: " << e.what() << "\n";
    return kExitRuntime;
  }
}
