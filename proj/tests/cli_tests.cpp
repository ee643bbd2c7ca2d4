// End-to-end checks of the ltfl binary: exit codes, files on disk, and the
// text contract on stdout.  Each case shells out to the real executable.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "ltfl/config.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// `prefix` lets a case prepend environment assignments (sh syntax).
CliResult run_cli(const std::string& args, const std::string& prefix = "") {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path();
  const fs::path out_file = dir / ("cli_out_" + std::to_string(counter));
  const fs::path err_file = dir / ("cli_err_" + std::to_string(counter));
  ++counter;

  const std::string command = prefix + "\"" LTFL_CLI_PATH "\" " + args +
                              " > \"" + out_file.string() + "\" 2> \"" +
                              err_file.string() + "\"";
  const int raw = std::system(command.c_str());

  CliResult result;
  result.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  result.out = slurp(out_file);
  result.err = slurp(err_file);
  fs::remove(out_file);
  fs::remove(err_file);
  return result;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path path = fs::temp_directory_path() / name;
  std::ofstream out(path, std::ios::binary);
  out << text;
  return path;
}

const char* kSmallConfig = R"json({
  "algorithm": "tra-qfedavg",
  "dataset": {"name": "(1,1)", "num_clients": 8, "features": 6,
              "classes": 3, "min_samples": 10,
              "sample_log_mean": 1.0, "sample_log_sigma": 0.3},
  "rounds": 2,
  "clients_per_round": 3,
  "eligible_ratio": 0.7,
  "loss_ratio": 0.2,
  "seed": 5
})json";

}  // namespace

TEST_CASE("run: happy path writes the cell CSV and a summary") {
  const fs::path config = write_config("cli_small.json", kSmallConfig);
  const fs::path out = fs::temp_directory_path() / "cli_run_out";
  fs::remove_all(out);

  const CliResult r =
      run_cli("run --config \"" + config.string() + "\" --out \"" +
              out.string() + "\"");
  CHECK(r.code == 0);
  CHECK(r.out.find("tra-qfedavg_syn1-1_e0.7_r0.2: ok") != std::string::npos);
  CHECK(r.out.find("wrote 1 cell(s)") != std::string::npos);
  CHECK(fs::exists(out / "tra-qfedavg_syn1-1_e0.7_r0.2.csv"));
  CHECK(fs::exists(out / "summary.csv"));

  const std::string cell = slurp(out / "tra-qfedavg_syn1-1_e0.7_r0.2.csv");
  CHECK(cell.rfind("round,sample_acc,", 0) == 0);
  // header + round 0 + 2 rounds
  CHECK(std::count(cell.begin(), cell.end(), '\n') == 4);

  fs::remove_all(out);
  fs::remove(config);
}

TEST_CASE("run: reruns with the same seed are byte-identical") {
  const fs::path config = write_config("cli_seed.json", kSmallConfig);
  const fs::path out_a = fs::temp_directory_path() / "cli_seed_a";
  const fs::path out_b = fs::temp_directory_path() / "cli_seed_b";
  const fs::path out_c = fs::temp_directory_path() / "cli_seed_c";
  for (const auto& d : {out_a, out_b, out_c}) fs::remove_all(d);

  const std::string base = "run --config \"" + config.string() + "\" ";
  CHECK(run_cli(base + "--seed 7 --out \"" + out_a.string() + "\"").code == 0);
  CHECK(run_cli(base + "--seed 7 --out \"" + out_b.string() + "\"").code == 0);
  CHECK(run_cli(base + "--seed 8 --out \"" + out_c.string() + "\"").code == 0);

  const std::string name = "tra-qfedavg_syn1-1_e0.7_r0.2.csv";
  CHECK(slurp(out_a / name) == slurp(out_b / name));
  CHECK(slurp(out_a / name) != slurp(out_c / name));

  for (const auto& d : {out_a, out_b, out_c}) fs::remove_all(d);
  fs::remove(config);
}

TEST_CASE("run: LTFL_OUT_DIR overrides --out") {
  const fs::path config = write_config("cli_env.json", kSmallConfig);
  const fs::path cli_dir = fs::temp_directory_path() / "cli_env_cli";
  const fs::path env_dir = fs::temp_directory_path() / "cli_env_env";
  fs::remove_all(cli_dir);
  fs::remove_all(env_dir);

  const CliResult r = run_cli(
      "run --config \"" + config.string() + "\" --out \"" + cli_dir.string() +
          "\"",
      "LTFL_OUT_DIR=\"" + env_dir.string() + "\" ");
  CHECK(r.code == 0);
  CHECK(fs::exists(env_dir / "summary.csv"));
  CHECK(!fs::exists(cli_dir));

  fs::remove_all(env_dir);
  fs::remove(config);
}

TEST_CASE("run: no output directory anywhere is a config error") {
  const fs::path config = write_config("cli_noout.json", kSmallConfig);
  const CliResult r = run_cli("run --config \"" + config.string() + "\"",
                              "LTFL_OUT_DIR= ");
  CHECK(r.code == 2);
  CHECK(r.err.find("--out") != std::string::npos);
  fs::remove(config);
}

TEST_CASE("run: config problems exit 2 and name the offender") {
  SUBCASE("missing file") {
    const CliResult r = run_cli(
        "run --config /nonexistent/nope.json --out /tmp/cli_unused");
    CHECK(r.code == 2);
    CHECK(r.err.find("nope.json") != std::string::npos);
  }
  SUBCASE("unknown key") {
    const fs::path config =
        write_config("cli_badkey.json", R"json({"eligible_ration": 0.7})json");
    const CliResult r = run_cli("run --config \"" + config.string() +
                                "\" --out /tmp/cli_unused");
    CHECK(r.code == 2);
    CHECK(r.err.find("eligible_ration") != std::string::npos);
    fs::remove(config);
  }
  SUBCASE("out-of-range value") {
    const fs::path config =
        write_config("cli_badval.json", R"json({"loss_ratio": 1.0})json");
    const CliResult r = run_cli("run --config \"" + config.string() +
                                "\" --out /tmp/cli_unused");
    CHECK(r.code == 2);
    fs::remove(config);
  }
}

TEST_CASE("run: a failing cell exits 3 after finishing the grid") {
  // num_clients = 0 parses but cannot generate data, so the cell errors
  // at run time rather than config time.
  const fs::path config = write_config(
      "cli_fail.json",
      R"json({"dataset": {"num_clients": 0}, "rounds": 1})json");
  const fs::path out = fs::temp_directory_path() / "cli_fail_out";
  fs::remove_all(out);
  const CliResult r = run_cli("run --config \"" + config.string() +
                              "\" --out \"" + out.string() + "\"");
  CHECK(r.code == 3);
  CHECK(r.out.find("error") != std::string::npos);
  CHECK(fs::exists(out / "summary.csv"));
  fs::remove_all(out);
  fs::remove(config);
}

TEST_CASE("matrix: axes fan out into one CSV per cell") {
  const fs::path config = write_config("cli_matrix.json", R"json({
    "base": {
      "dataset": {"name": "(1,1)", "num_clients": 8, "features": 6,
                  "classes": 3, "min_samples": 10,
                  "sample_log_mean": 1.0, "sample_log_sigma": 0.3},
      "rounds": 1,
      "clients_per_round": 3,
      "loss_ratio": 0.1
    },
    "axes": {
      "algorithms": ["fedavg", "tra-fedavg"],
      "eligible_ratios": [1.0, 0.7]
    }
  })json");
  const fs::path out = fs::temp_directory_path() / "cli_matrix_out";
  fs::remove_all(out);

  const CliResult r = run_cli("matrix --config \"" + config.string() +
                              "\" --out \"" + out.string() + "\" --jobs 2");
  CHECK(r.code == 0);
  CHECK(r.out.find("wrote 4 cell(s)") != std::string::npos);
  for (const char* name :
       {"fedavg_syn1-1_e1_r0.1.csv", "fedavg_syn1-1_e0.7_r0.1.csv",
        "tra-fedavg_syn1-1_e1_r0.1.csv", "tra-fedavg_syn1-1_e0.7_r0.1.csv"}) {
    CHECK(fs::exists(out / name));
  }
  fs::remove_all(out);
  fs::remove(config);
}

TEST_CASE("trace: fixture summary lines and CDF files") {
  const fs::path out = fs::temp_directory_path() / "cli_trace_out";
  fs::remove_all(out);
  const CliResult r =
      run_cli("trace --input \"" LTFL_TEST_DATA_DIR "/fcc_fixture.csv\""
              " --out \"" + out.string() + "\"");
  CHECK(r.code == 0);
  CHECK(r.out.find("users: 100 (rows used 105, skipped 6)") !=
        std::string::npos);
  CHECK(r.out.find("share of users with loss ratio <= 0.1: 0.9000") !=
        std::string::npos);
  CHECK(r.out.find("share of users with upload speed > 2 Mbps: 0.7600") !=
        std::string::npos);
  CHECK(fs::exists(out / "loss_cdf.csv"));
  CHECK(fs::exists(out / "speed_cdf.csv"));

  SUBCASE("threshold flag moves the eligibility line") {
    const CliResult r8 =
        run_cli("trace --input \"" LTFL_TEST_DATA_DIR "/fcc_fixture.csv\""
                " --speed-threshold 8 --out \"" + out.string() + "\"");
    CHECK(r8.code == 0);
    CHECK(r8.out.find("share of users with upload speed > 8 Mbps: 0.5100") !=
          std::string::npos);
  }
  fs::remove_all(out);
}

TEST_CASE("trace: a missing input file is a runtime failure") {
  const CliResult r =
      run_cli("trace --input /nonexistent/trace.csv --out /tmp/cli_unused");
  CHECK(r.code == 3);
}

TEST_CASE("presets: listing names every built-in") {
  const CliResult r = run_cli("presets");
  CHECK(r.code == 0);
  for (const char* name :
       {"fig3", "fig4", "fig7", "fig8", "table1", "table2"}) {
    CHECK(r.out.find(name) != std::string::npos);
  }
}

TEST_CASE("presets: exported files load as runnable grids") {
  const fs::path dir = fs::temp_directory_path() / "cli_presets";
  fs::remove_all(dir);
  const CliResult r = run_cli("presets --write \"" + dir.string() + "\"");
  CHECK(r.code == 0);
  CHECK(r.out.find("wrote 6 preset(s)") != std::string::npos);
  for (const char* name :
       {"fig3", "fig4", "fig7", "fig8", "table1", "table2"}) {
    const fs::path file = dir / (std::string(name) + ".json");
    REQUIRE(fs::exists(file));
    CHECK_NOTHROW(ltfl::load_matrix_spec(file.string()));
  }
  fs::remove_all(dir);
}

TEST_CASE("bad invocations exit 2") {
  CHECK(run_cli("").code == 2);             // a subcommand is required
  CHECK(run_cli("explode").code == 2);      // unknown subcommand
  CHECK(run_cli("run").code == 2);          // missing --config
  CHECK(run_cli("run --config").code == 2); // flag without a value
}
