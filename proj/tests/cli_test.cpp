#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <sys/wait.h>

#include "skipstep/cli.hpp"
#include "skipstep/trace.hpp"
#include "skipstep/util.hpp"
#include "temp_dir.hpp"

using namespace skipstep;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

// Small splits so every subcommand finishes quickly.
std::string small_config(const TempDir& tmp, const std::string& task) {
  const json j = {{"tasks", {task}},
                  {"iterations", 2},
                  {"dataset_sizes", {{task, {{"train", 120}, {"in_domain_test", 30},
                                             {"ood_easy", 20}, {"ood_hard", 20}}}}}};
  const std::string path = tmp.sub(task + ".json");
  write_file(path, j.dump());
  return path;
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, UsageErrorsAreValidationFailures) {
  EXPECT_EQ(cli({}).code, kExitValidation);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitValidation);
  EXPECT_EQ(cli({"gen", "--bogus"}).code, kExitValidation);
  EXPECT_EQ(cli({"verify"}).code, kExitValidation);  // --in is required
  EXPECT_EQ(cli({"gen", "--task", "chess"}).code, kExitValidation);
  EXPECT_EQ(cli({"iterate", "--learner", "gpt"}).code, kExitValidation);
  EXPECT_EQ(cli({"iterate", "--skip-depths", "1,x"}).code, kExitValidation);
  EXPECT_EQ(cli({"iterate", "--task", "algebra", "--start-mode", "warm"}).code,
            kExitValidation);
  const CliRun help = cli({"--help"});
  EXPECT_EQ(help.code, kExitOk);
  EXPECT_NE(help.out.find("iterate"), std::string::npos);
}

TEST(Cli, GenThenVerifyHasNoRejects) {
  TempDir tmp;
  for (const char* task : {"algebra", "addition", "direction"}) {
    const CliRun g = cli({"gen", "--config", small_config(tmp, task), "--seed", "3", "--out",
                       tmp.sub("data")});
    ASSERT_EQ(g.code, kExitOk) << g.err;
    for (const char* split : {"train", "in_domain_test", "ood_easy", "ood_hard"}) {
      const std::string path =
          (fs::path(tmp.sub("data")) / task / (std::string(split) + ".jsonl")).string();
      ASSERT_TRUE(fs::exists(path));
      const CliRun v = cli({"verify", "--in", path});
      EXPECT_EQ(v.code, kExitOk) << v.out;
      EXPECT_NE(v.out.find(" 0 rejects"), std::string::npos);
    }
  }
}

TEST(Cli, GenIsSeededAndHonoursEnvironment) {
  TempDir tmp;
  const std::string cfg = small_config(tmp, "direction");
  ASSERT_EQ(cli({"gen", "--config", cfg, "--seed", "9", "--out", tmp.sub("a")}).code, 0);
  ::setenv("SKIP_SEED", "9", 1);
  ASSERT_EQ(cli({"gen", "--config", cfg, "--out", tmp.sub("b")}).code, 0);
  ::setenv("SKIP_SEED", "nine", 1);
  EXPECT_EQ(cli({"gen", "--config", cfg, "--out", tmp.sub("c")}).code, kExitValidation);
  ::unsetenv("SKIP_SEED");
  EXPECT_EQ(read_file(tmp.sub("a/direction/train.jsonl")),
            read_file(tmp.sub("b/direction/train.jsonl")));
}

TEST(Cli, VerifyReportsBrokenRecords) {
  TempDir tmp;
  ASSERT_EQ(cli({"gen", "--config", small_config(tmp, "addition"), "--out", tmp.sub("d")}).code,
            0);
  Dataset ds = load_records(tmp.sub("d/addition/train.jsonl"));
  ds[0].question.split = SplitLabel::ood_hard;
  save_records(ds, tmp.sub("broken.jsonl"));
  const CliRun v = cli({"verify", "--in", tmp.sub("broken.jsonl")});
  EXPECT_EQ(v.code, kExitValidation);
  EXPECT_NE(v.out.find(" 1 rejects"), std::string::npos);

  write_file(tmp.sub("schema.jsonl"), "{\"id\": 1}\n");
  EXPECT_EQ(cli({"verify", "--in", tmp.sub("schema.jsonl")}).code, kExitValidation);
  EXPECT_EQ(cli({"verify", "--in", tmp.sub("missing.jsonl")}).code, kExitRuntime);
}

TEST(Cli, WarmstartAppendsSkips) {
  TempDir tmp;
  ASSERT_EQ(cli({"gen", "--config", small_config(tmp, "addition"), "--out", tmp.sub("d")}).code,
            0);
  const CliRun w = cli({"warmstart", "--in", tmp.sub("d/addition/train.jsonl"), "--out",
                     tmp.sub("warm.jsonl"), "--seed", "1"});
  ASSERT_EQ(w.code, kExitOk) << w.err;
  const Dataset aug = load_records(tmp.sub("warm.jsonl"));
  EXPECT_GT(aug.size(), 120u);
  EXPECT_EQ(cli({"verify", "--in", tmp.sub("warm.jsonl")}).code, kExitOk);
}

TEST(Cli, IterateWritesRunDirectory) {
  TempDir tmp;
  const CliRun r = cli({"iterate", "--config", small_config(tmp, "addition"), "--learner",
                     "builtin:stochastic", "--out", tmp.sub("run"), "--jobs", "1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("iter 1: ok"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("iter 2: ok"), std::string::npos);
  const json m = json::parse(read_file(tmp.sub("run/manifest.json")));
  EXPECT_EQ(m.at("status"), "complete");
  EXPECT_EQ(m.at("iterations").size(), 2u);

  // Resuming a finished run with a changed iteration count is refused.
  const CliRun again = cli({"iterate", "--config", small_config(tmp, "addition"),
                         "--iterations", "3", "--out", tmp.sub("run")});
  EXPECT_EQ(again.code, kExitValidation);
}

TEST(Cli, IterateDefaultRunDirectoryUsesEnvironment) {
  TempDir tmp;
  ::setenv("SKIP_RUN_DIR", tmp.sub("runs").c_str(), 1);
  const CliRun r = cli({"iterate", "--config", small_config(tmp, "direction"), "--iterations", "1"});
  ::unsetenv("SKIP_RUN_DIR");
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out.rfind(tmp.sub("runs"), 0), 0u);
  EXPECT_EQ(std::distance(fs::directory_iterator(tmp.sub("runs")), fs::directory_iterator()), 1);
}

TEST(Cli, TrainStandardEvalReport) {
  TempDir tmp;
  const std::string cfg = small_config(tmp, "direction");
  ASSERT_EQ(cli({"gen", "--config", cfg, "--out", tmp.sub("d")}).code, 0);
  const CliRun t = cli({"train-standard", "--config", cfg, "--in",
                     tmp.sub("d/direction/train.jsonl"), "--out", tmp.sub("model.json")});
  ASSERT_EQ(t.code, kExitOk) << t.err;
  EXPECT_EQ(t.out.rfind("m-", 0), 0u);

  const CliRun e = cli({"eval", "--config", cfg, "--model", tmp.sub("model.json"), "--out",
                     tmp.sub("eval")});
  ASSERT_EQ(e.code, kExitOk) << e.err;
  EXPECT_NE(e.out.find("direction in_domain_test: accuracy 100"), std::string::npos) << e.out;
  for (const char* f : {"predictions.jsonl", "report.json", "metrics.csv", "fig4_curve.csv",
                        "fig6_skip.csv"}) {
    EXPECT_TRUE(fs::exists(tmp.sub(std::string("eval/") + f))) << f;
  }

  const CliRun rep = cli({"report", "--in", tmp.sub("eval/predictions.jsonl"), "--out",
                       tmp.sub("report")});
  ASSERT_EQ(rep.code, kExitOk) << rep.err;
  EXPECT_EQ(read_file(tmp.sub("report/metrics.csv")), read_file(tmp.sub("eval/metrics.csv")));

  const CliRun skip = cli({"eval", "--config", cfg, "--model", tmp.sub("model.json"), "--in",
                        tmp.sub("d/direction/ood_easy.jsonl"), "--skip-depth", "1", "--out",
                        tmp.sub("eval2")});
  ASSERT_EQ(skip.code, kExitOk) << skip.err;
  EXPECT_NE(skip.out.find("direction ood_easy: accuracy 100"), std::string::npos) << skip.out;
}

TEST(Cli, BinaryExitCodes) {
  TempDir tmp;
  const std::string bin = SKIPSTEP_CLI_PATH;
  const std::string quiet = " >/dev/null 2>&1";
  EXPECT_EQ(shell(bin + " --help" + quiet), kExitOk);
  EXPECT_EQ(shell(bin + " nosuch" + quiet), kExitValidation);
  EXPECT_EQ(shell(bin + " verify --in " + tmp.sub("none.jsonl") + quiet), kExitRuntime);
  EXPECT_EQ(shell(bin + " gen --config " + small_config(tmp, "addition") + " --out " +
                  tmp.sub("d") + quiet),
            kExitOk);
  EXPECT_EQ(shell(bin + " verify --in " + tmp.sub("d/addition/ood_hard.jsonl") + quiet),
            kExitOk);
}
