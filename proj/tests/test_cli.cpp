#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mixad/dataset.hpp"

namespace fs = std::filesystem;

namespace {

const char* kSmallConfig =
    "window = 10\n"
    "batch = 16\n"
    "max_epochs = 2\n"
    "patience = 2\n"
    "hidden = 8\n"
    "mem_dim = 8\n"
    "mem_items = 3\n"
    "cheb_k = 1\n"
    "stride = 2\n"
    "# synthetic side\n"
    "synth_nodes = 4\n"
    "synth_t_train = 500\n"
    "synth_t_test = 300\n"
    "synth_anomalies = spike:4:1,shift:30:1,corr:60:2\n";

fs::path workdir() {
  const fs::path dir = fs::temp_directory_path() / "mixad_cli_test";
  return dir;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(MIXAD_CLI_PATH) + " " + args + " >" + log.string() +
                          " 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const fs::path& dir) {
  fs::create_directories(dir);
  const fs::path cfg = dir / "config.txt";
  std::ofstream out(cfg);
  out << kSmallConfig;
  return cfg;
}

}  // namespace

TEST_CASE("synth writes a loadable dataset") {
  const fs::path dir = workdir() / "synth";
  fs::remove_all(dir);
  const fs::path cfg = write_config(workdir());
  const int rc = run_cli("--config " + cfg.string() + " --out " + (dir / "data").string() +
                             " --seed 5 synth",
                         workdir() / "synth.log");
  REQUIRE(rc == 0);
  for (const char* name : {"train.csv", "test.csv", "labels.csv", "interpretation.csv"})
    CHECK(fs::exists(dir / "data" / name));
  const mixad::DatasetBundle bundle = mixad::load_dataset(dir / "data");
  CHECK(bundle.train.rows() == 4);
  CHECK(bundle.test.cols() == 300);
}

TEST_CASE("missing dataset file exits 1 and names the path") {
  const fs::path dir = workdir() / "missing";
  fs::remove_all(dir);
  fs::create_directories(dir / "data");
  const fs::path cfg = write_config(workdir());
  const fs::path log = workdir() / "missing.log";
  const int rc =
      run_cli("--config " + cfg.string() + " --out " + dir.string() + " train --data " +
                  (dir / "data").string(),
              log);
  CHECK(rc == 1);
  CHECK(slurp(log).find("train.csv") != std::string::npos);
}

TEST_CASE("unknown config key exits 1 with line context") {
  const fs::path dir = workdir() / "badcfg";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path cfg = dir / "bad.txt";
  {
    std::ofstream out(cfg);
    out << "window = 10\nnot_a_key = 3\n";
  }
  const fs::path log = dir / "out.log";
  const int rc = run_cli("--config " + cfg.string() + " --out " + dir.string() + " synth", log);
  CHECK(rc == 1);
  const std::string text = slurp(log);
  CHECK(text.find("not_a_key") != std::string::npos);
  CHECK(text.find(":2") != std::string::npos);
}

TEST_CASE("run-all produces a full report and is byte-deterministic per seed") {
  const fs::path cfg = write_config(workdir());
  const fs::path run1 = workdir() / "run1";
  const fs::path run2 = workdir() / "run2";
  fs::remove_all(run1);
  fs::remove_all(run2);

  REQUIRE(run_cli("--config " + cfg.string() + " --seed 7 --out " + run1.string() +
                      " run-all --dump-adjacency",
                  workdir() / "run1.log") == 0);
  REQUIRE(run_cli("--config " + cfg.string() + " --seed 7 --out " + run2.string() + " run-all",
                  workdir() / "run2.log") == 0);

  for (const char* name : {"data/train.csv", "best.ckpt", "train_log.csv", "scores.csv",
                           "threshold.txt", "attention_trace.csv", "segments.json",
                           "report.json"})
    CHECK(fs::exists(run1 / name));
  CHECK(fs::exists(run1 / "adjacency.csv"));

  // Same seed, byte-identical outputs.
  CHECK(slurp(run1 / "scores.csv") == slurp(run2 / "scores.csv"));
  CHECK(slurp(run1 / "report.json") == slurp(run2 / "report.json"));
  CHECK(slurp(run1 / "train_log.csv") == slurp(run2 / "train_log.csv"));

  // Report carries every contract field.
  const auto report = nlohmann::json::parse(slurp(run1 / "report.json"));
  for (const char* key : {"precision", "recall", "f1", "threshold", "hitrate100", "hitrate150",
                          "missed_segments", "per_segment"})
    CHECK(report.contains(key));
  CHECK(report["per_segment"].is_array());
  CHECK(report["per_segment"].size() == 3);

  const auto segments = nlohmann::json::parse(slurp(run1 / "segments.json"));
  CHECK(segments.is_array());
  for (const auto& seg : segments) {
    CHECK(seg.contains("start"));
    CHECK(seg.contains("anchor"));
    CHECK(seg["ranked"].is_array());
  }
}

TEST_CASE("staged subcommands reproduce the run-all artifacts") {
  const fs::path cfg = write_config(workdir());
  const fs::path all = workdir() / "staged_all";
  const fs::path staged = workdir() / "staged";
  fs::remove_all(all);
  fs::remove_all(staged);

  REQUIRE(run_cli("--config " + cfg.string() + " --seed 11 --out " + all.string() + " run-all",
                  workdir() / "staged_all.log") == 0);

  const std::string data = (staged / "data").string();
  REQUIRE(run_cli("--config " + cfg.string() + " --seed 11 --out " + data + " synth",
                  workdir() / "s1.log") == 0);
  REQUIRE(run_cli("--config " + cfg.string() + " --seed 11 --out " + staged.string() +
                      " train --data " + data,
                  workdir() / "s2.log") == 0);
  REQUIRE(run_cli("--config " + cfg.string() + " --seed 11 --out " + staged.string() +
                      " score --data " + data,
                  workdir() / "s3.log") == 0);
  REQUIRE(run_cli("--out " + staged.string() + " interpret", workdir() / "s4.log") == 0);
  REQUIRE(run_cli("--out " + staged.string() + " evaluate --data " + data,
                  workdir() / "s5.log") == 0);

  CHECK(slurp(all / "scores.csv") == slurp(staged / "scores.csv"));
  CHECK(slurp(all / "segments.json") == slurp(staged / "segments.json"));
  CHECK(slurp(all / "report.json") == slurp(staged / "report.json"));
}
