#include <filesystem>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "paraprobe/cli/cli.hpp"
#include "paraprobe/core/util.hpp"

using namespace paraprobe;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string sample() { return std::string(PARAPROBE_SOURCE_DIR) + "/assets/samples/sample.tex"; }

fs::path temp_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("paraprobe-cli-" + std::to_string(::getpid()) + "-" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// JSON lines with the wall-clock fields removed.
std::string without_timestamps(const std::string& jsonl) {
  std::istringstream in(jsonl);
  std::string line;
  std::string out;
  while (std::getline(in, line)) {
    auto j = json::parse(line);
    j.erase("timestamp");
    out += j.dump() + "\n";
  }
  return out;
}

json without_paths(json j) {
  for (auto it = j.begin(); it != j.end();) {
    if (it.key().size() > 5 && it.key().substr(it.key().size() - 5) == "_path") {
      it = j.erase(it);
    } else {
      ++it;
    }
  }
  return j;
}

}  // namespace

TEST_CASE("dry run reports the budget and calls nothing") {
  const auto r = invoke({"attack", sample(), "--dry-run"});
  REQUIRE(r.code == cli::kExitOk);
  const auto j = json::parse(r.out);
  CHECK(j["budget"]["generation_attempts"] == 264);
  CHECK(j["budget"]["max_reviewer_calls"] == 2120);
  const auto small = json::parse(invoke({"attack", sample(), "--dry-run", "-K", "4", "-N", "2", "-T", "16"}).out);
  CHECK(small["budget"]["generation_attempts"] == 68);
  CHECK(small["budget"]["max_reviewer_calls"] == 138);
}

TEST_CASE("configuration errors exit 1 with a useful message") {
  auto r = invoke({"--config", "/nonexistent/paraprobe.json", "attack", sample()});
  CHECK(r.code == cli::kExitConfig);
  CHECK(r.err.find("/nonexistent/paraprobe.json") != std::string::npos);

  r = invoke({"attack", sample(), "--conference", "cvpr", "--dry-run"});
  CHECK(r.code == cli::kExitConfig);
  for (const auto* id : {"acl", "neurips", "icml", "iclr", "aaai"}) CHECK(r.err.find(id) != std::string::npos);

  r = invoke({"attack", "/nonexistent/paper.tex"});
  CHECK(r.code == cli::kExitConfig);

  r = invoke({"frobnicate"});
  CHECK(r.code == cli::kExitConfig);

  const auto dir = temp_dir("cfg");
  write_file((dir / "bad.json").string(), R"({"providers": "remote", "remote": {"reviewer": {"base_url": "http://x", "api_key": "k"}}})");
  r = invoke({"--config", (dir / "bad.json").string(), "review", sample()});
  CHECK(r.code == cli::kExitConfig);
}

TEST_CASE("remote attacks need the ownership acknowledgement") {
  const auto dir = temp_dir("remote");
  write_file((dir / "remote.json").string(),
             R"({"providers": "remote", "retries": 0, "remote": {)"
             R"("generator": {"base_url": "http://127.0.0.1:1", "model": "g", "timeout_ms": 500},)"
             R"( "reviewer": {"base_url": "http://127.0.0.1:1", "model": "r", "timeout_ms": 500},)"
             R"( "sidecar": {"base_url": "http://127.0.0.1:1", "timeout_ms": 500}}})");
  const auto r = invoke({"--config", (dir / "remote.json").string(), "attack", sample(), "-T", "1"});
  CHECK(r.code == cli::kExitConfig);
  CHECK(r.err.find("--i-own-this-target") != std::string::npos);
  // acknowledged, but nothing listens: provider failure
  const auto p = invoke({"--config", (dir / "remote.json").string(), "attack", sample(), "-T", "1", "--i-own-this-target",
                         "--out", (dir / "out").string()});
  CHECK(p.code == cli::kExitProvider);
}

TEST_CASE("review with every template prints three reviews and their mean") {
  const auto r = invoke({"--seed", "2", "review", sample(), "--all-templates"});
  REQUIRE(r.code == cli::kExitOk);
  const auto j = json::parse(r.out);
  REQUIRE(j["reviews"].size() == 3);
  double sum = 0.0;
  for (const auto& rev : j["reviews"]) sum += rev["score"].get<double>();
  CHECK(j["mean_score"].get<double>() == doctest::Approx(sum / 3.0));
}

TEST_CASE("attack writes its artifacts and is deterministic") {
  const auto a = temp_dir("attack-a");
  const auto b = temp_dir("attack-b");
  const std::vector<std::string> common{"--seed", "5", "attack", sample(), "-K", "4", "-N", "2", "-T", "3", "--baseline"};
  auto args_a = common;
  args_a.insert(args_a.begin(), {"--out", a.string()});
  auto args_b = common;
  args_b.insert(args_b.begin(), {"--out", b.string()});
  const auto ra = invoke(args_a);
  const auto rb = invoke(args_b);
  REQUIRE(ra.code == cli::kExitOk);
  REQUIRE(rb.code == cli::kExitOk);
  for (const auto* f : {"result.json", "trajectory.jsonl", "texts.json", "best.tex", "baseline.json"}) {
    CHECK_MESSAGE(fs::exists(a / f), f);
  }
  CHECK(without_paths(json::parse(ra.out)) == without_paths(json::parse(rb.out)));
  CHECK(without_paths(json::parse(read_file((a / "result.json").string()))) ==
        without_paths(json::parse(read_file((b / "result.json").string()))));
  CHECK(without_timestamps(read_file((a / "trajectory.jsonl").string())) ==
        without_timestamps(read_file((b / "trajectory.jsonl").string())));
  CHECK(read_file((a / "best.tex").string()) == read_file((b / "best.tex").string()));
  const auto summary = json::parse(ra.out);
  CHECK(summary["generation_attempts"] == 16);
  CHECK(summary["best_mean_score"].get<double>() >= summary["original_mean_score"].get<double>());
}

TEST_CASE("defend paraphrases and scores") {
  const auto dir = temp_dir("defend");
  auto r = invoke({"--out", dir.string(), "defend", sample(), "--method", "random", "-n", "2", "--score"});
  REQUIRE(r.code == cli::kExitOk);
  const auto j = json::parse(r.out);
  CHECK(j["paragraphs"].size() == 2);
  CHECK(j["change_ratio"].get<double>() ==
        doctest::Approx(j["defended_mean_score"].get<double>() / j["input_mean_score"].get<double>()));
  CHECK(fs::exists(dir / "defended.tex"));
  r = invoke({"--out", dir.string(), "defend", sample(), "--method", "random", "-n", "99"});
  CHECK(r.code == cli::kExitConfig);
}

TEST_CASE("analyze reports") {
  const std::string fixtures = std::string(PARAPROBE_SOURCE_DIR) + "/fixtures/";
  auto r = invoke({"analyze", fixtures + "table3.json", "--report", "transfer"});
  REQUIRE(r.code == cli::kExitOk);
  const auto t = json::parse(r.out);
  CHECK(t["cells"]["Sonnet 4"]["Sonnet 4"].get<double>() == doctest::Approx(4.5));
  CHECK(r.err.find("Sonnet 4") != std::string::npos);

  r = invoke({"analyze", fixtures + "table3.json", "--report", "selfpref"});
  REQUIRE(r.code == cli::kExitOk);
  r = invoke({"analyze", fixtures + "table4_gap.json", "--report", "gap"});
  REQUIRE(r.code == cli::kExitOk);

  const auto dir = temp_dir("analyze");
  write_file((dir / "empty.json").string(), "[]");
  r = invoke({"analyze", (dir / "empty.json").string(), "--report", "selfpref"});
  CHECK(r.code == cli::kExitConfig);
  write_file((dir / "broken.json").string(), "{not json");
  r = invoke({"analyze", (dir / "broken.json").string(), "--report", "gap"});
  CHECK(r.code == cli::kExitConfig);
}

TEST_CASE("simulate writes identical outputs for identical seeds") {
  const auto dir = temp_dir("simulate");
  write_file((dir / "suite.json").string(), R"({"search": {"K": 4, "N": 2, "T": 3}, "random_max_n": 3})");
  const auto run_into = [&](const std::string& name) {
    return invoke({"--out", (dir / name).string(), "simulate", "--documents", "2", "--seeds", "2", "--suite-config",
                   (dir / "suite.json").string(), "--quiet"});
  };
  const auto a = run_into("a");
  const auto b = run_into("b");
  REQUIRE(a.code == cli::kExitOk);
  CHECK(a.out == b.out);
  const auto summary = json::parse(a.out);
  CHECK(summary["runs"] == 4);
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    CHECK_MESSAGE(read_file(entry.path().string()) == read_file((dir / "b" / entry.path().filename()).string()),
                  entry.path().filename().string());
  }
}

TEST_CASE("shipped configurations resolve") {
  const std::string configs = std::string(PARAPROBE_SOURCE_DIR) + "/assets/configs/";
  for (const auto* name : {"mock.json", "remote.example.json"}) {
    const auto r = invoke({"--config", configs + name, "attack", sample(), "--dry-run"});
    CHECK_MESSAGE(r.code == cli::kExitOk, name);
  }
}
