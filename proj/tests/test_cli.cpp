#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "npam/cli.hpp"
#include "npam/corpus.hpp"
#include "npam/snapshot.hpp"

namespace fs = std::filesystem;
using namespace npam;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("npam_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(std::vector<std::string> args, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (out_text) *out_text = out.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("synth writes corpus, vocabulary and truth") {
  const auto dir = scratch("synth");
  REQUIRE(run({"synth", "--grid", "5", "--super", "2", "--sub", "4", "--docs", "100", "--len", "200", "--seed", "7",
               "--out", dir.string()}) == 0);
  CHECK(fs::exists(dir / "corpus.bow"));
  CHECK(fs::exists(dir / "vocab.txt"));
  CHECK(fs::exists(dir / "truth.txt"));
  CHECK(slurp(dir / "corpus.bow").rfind("25 100\n", 0) == 0);

  const auto again = scratch("synth2");
  REQUIRE(run({"synth", "--grid", "5", "--super", "2", "--sub", "4", "--docs", "100", "--len", "200", "--seed", "7",
               "--out", again.string()}) == 0);
  for (const char* f : {"corpus.bow", "vocab.txt", "truth.txt"}) CHECK(slurp(dir / f) == slurp(again / f));

  CHECK(run({"synth", "--sub", "11", "--grid", "5", "--out", dir.string()}) == 1);
  CHECK(run({"synth", "--bogus"}) == 1);
  CHECK(run({}) == 1);
}

TEST_CASE("train writes snapshots, assignments and a manifest") {
  const auto dir = scratch("train");
  REQUIRE(run({"synth", "--docs", "6", "--len", "15", "--seed", "1", "--out", dir.string()}) == 0);
  const auto corpus = (dir / "corpus.bow").string();

  REQUIRE(run({"train", "--corpus", corpus, "--burn-in", "5", "--lag", "2", "--seed", "3", "--out",
               (dir / "run").string()}) == 0);
  int snaps = 0;
  for (const auto& e : fs::directory_iterator(dir / "run"))
    if (e.path().filename().string().rfind("snapshot_", 0) == 0) ++snaps;
  CHECK(snaps == 10);
  const auto manifest = nlohmann::json::parse(slurp(dir / "run" / "manifest.json"));
  CHECK(manifest.at("snapshots").size() == 10);
  CHECK(manifest.at("trace").at("rows").size() == 25);
  CHECK(manifest.at("config").at("train").at("seed") == 3);
  const auto snap = snapshot_from_json(slurp(dir / "run" / "snapshot_0001.json"));
  CHECK(snap.sweep == 7);

  REQUIRE(run({"train", "--corpus", corpus, "--burn-in", "0", "--samples", "1", "--lag", "1", "--out",
               (dir / "one").string()}) == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "one" / "manifest.json")).at("snapshots").size() == 1);

  REQUIRE(run({"train", "--corpus", corpus, "--model", "pam", "--s2", "5", "--s3", "100", "--burn-in", "2",
               "--samples", "1", "--lag", "1", "--out", (dir / "pam").string()}) == 0);
  CHECK(slurp(dir / "pam" / "snapshot_0001.json").find("pam-snapshot") != std::string::npos);

  CHECK(run({"train", "--corpus", (dir / "missing.bow").string(), "--out", (dir / "x").string()}) == 2);
  CHECK(run({"train", "--corpus", corpus, "--lag", "0", "--out", (dir / "x").string()}) == 1);
  CHECK(run({"train", "--corpus", corpus, "--model", "lda"}) == 1);
}

TEST_CASE("eval-likelihood runs k folds") {
  const auto dir = scratch("lik");
  REQUIRE(run({"synth", "--docs", "10", "--len", "20", "--seed", "2", "--out", dir.string()}) == 0);
  const auto corpus = (dir / "corpus.bow").string();
  std::string text;
  REQUIRE(run({"eval-likelihood", "--corpus", corpus, "--folds", "2", "--burn-in", "3", "--samples", "2", "--lag", "1",
               "--n-generated", "20", "--out", dir.string()},
              &text) == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "likelihood.json"));
  CHECK(report.at("fold_log_likelihood").size() == 2);
  CHECK(text.find("mean:") != std::string::npos);

  REQUIRE(run({"eval-likelihood", "--corpus", corpus, "--folds", "5", "--model", "pam", "--s2", "2", "--s3", "3",
               "--burn-in", "2", "--samples", "1", "--lag", "1", "--n-generated", "10", "--out", dir.string()}) == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "likelihood.json")).at("fold_log_likelihood").size() == 5);

  CHECK(run({"eval-likelihood", "--corpus", corpus, "--folds", "1", "--out", dir.string()}) == 1);
}

TEST_CASE("eval-structure scores a perfect fixture and validates token counts") {
  const auto dir = scratch("structure");
  REQUIRE(run({"synth", "--docs", "4", "--len", "10", "--seed", "5", "--out", dir.string()}) == 0);
  std::ifstream tin(dir / "truth.txt");
  const auto truth = read_ground_truth(tin);
  {
    std::ofstream out(dir / "perfect.txt");
    TokenAssignments a = truth.labels;
    for (auto& doc : a)
      for (auto& p : doc) p = TopicPair{p.super_topic + 3, p.sub_topic * 2};
    write_assignments(out, a);
  }
  std::string text;
  REQUIRE(run({"eval-structure", "--truth", (dir / "truth.txt").string(), "--assignments", (dir / "perfect.txt").string(),
               "--out", dir.string()},
              &text) == 0);
  CHECK(text.find("super_accuracy: 100.00") != std::string::npos);
  CHECK(text.find("sub_accuracy: 100.00") != std::string::npos);

  {
    std::ofstream out(dir / "short.txt");
    TokenAssignments a = truth.labels;
    a.back().pop_back();
    write_assignments(out, a);
  }
  CHECK(run({"eval-structure", "--truth", (dir / "truth.txt").string(), "--assignments", (dir / "short.txt").string(),
             "--out", dir.string()}) == 1);

  REQUIRE(run({"train", "--corpus", (dir / "corpus.bow").string(), "--burn-in", "2", "--samples", "2", "--lag", "1",
               "--out", (dir / "run").string()}) == 0);
  REQUIRE(run({"eval-structure", "--truth", (dir / "truth.txt").string(), "--run", (dir / "run").string(), "--out",
               dir.string()}) == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "structure.json")).at("samples") == 2);
}

TEST_CASE("export-topics honours --top") {
  const auto dir = scratch("export");
  REQUIRE(run({"synth", "--docs", "6", "--len", "30", "--seed", "4", "--out", dir.string()}) == 0);
  REQUIRE(run({"train", "--corpus", (dir / "corpus.bow").string(), "--burn-in", "3", "--samples", "1", "--lag", "1",
               "--out", (dir / "run").string()}) == 0);
  const auto snap = (dir / "run" / "snapshot_0001.json").string();
  const auto vocab = (dir / "vocab.txt").string();
  for (int top : {10, 5}) {
    REQUIRE(run({"export-topics", "--snapshot", snap, "--vocab", vocab, "--top", std::to_string(top), "--out",
                 dir.string()}) == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "topics.json"));
    for (const auto& s : j.at("sub")) CHECK(s.at("top_words").size() == static_cast<std::size_t>(std::min(top, 25)));
    CHECK(slurp(dir / "topics.txt").find("r") != std::string::npos);
  }
  CHECK(run({"export-topics", "--snapshot", snap, "--top", "0", "--out", dir.string()}) == 1);
  CHECK(run({"export-topics", "--snapshot", (dir / "nope.json").string(), "--out", dir.string()}) == 2);
}

TEST_CASE("output directory defaults to the environment variable") {
  const auto dir = scratch("env");
  setenv("NPAM_OUTPUT_DIR", dir.string().c_str(), 1);
  REQUIRE(run({"synth", "--docs", "2", "--len", "5"}) == 0);
  unsetenv("NPAM_OUTPUT_DIR");
  CHECK(fs::exists(dir / "corpus.bow"));
}
