// End-to-end tests of the statefulrec command-line tool.

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>

#include <json.hpp>

#include "oracles.hpp"
#include "statefulrec/text.hpp"

using statefulrec::read_file;
using statefulrec::write_file_atomic;

namespace {

const std::string kCli = STATEFULREC_CLI;
const std::filesystem::path kData = std::filesystem::path(STATEFULREC_SOURCE_DIR) / "data";

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(const oracle::TempDir& dir, const std::string& args) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = "cd '" + dir.path().string() + "' && '" + kCli + "' " + args + " >'" +
                          out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

}  // namespace

TEST(Cli, SynthIsDeterministic) {
  oracle::TempDir dir;
  ASSERT_EQ(run(dir, "synth --seed 42 --out a.jsonl").code, 0);
  ASSERT_EQ(run(dir, "synth --seed 42 --out b.jsonl").code, 0);
  ASSERT_EQ(run(dir, "synth --seed 43 --out c.jsonl").code, 0);
  EXPECT_EQ(read_file(dir / "a.jsonl"), read_file(dir / "b.jsonl"));
  EXPECT_NE(read_file(dir / "a.jsonl"), read_file(dir / "c.jsonl"));
  const auto text = read_file(dir / "a.jsonl");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 50);
}

TEST(Cli, SynthUnwritableOutputIsDataError) {
  oracle::TempDir dir;
  EXPECT_EQ(run(dir, "synth --out missing/dir/x.jsonl").code, 3);
}

TEST(Cli, IngestThenRecommend) {
  oracle::TempDir dir;
  ASSERT_EQ(run(dir, "synth --seed 42 --n-questions 30 --n-learners 5 --out log.jsonl").code, 0);
  const auto ingest = run(dir, "ingest --log log.jsonl --store store.jsonl --alpha 0.3");
  ASSERT_EQ(ingest.code, 0) << ingest.err;
  EXPECT_NE(ingest.out.find("learner-0000"), std::string::npos);
  const auto store = read_file(dir / "store.jsonl");
  EXPECT_EQ(std::count(store.begin(), store.end(), '\n'), 5);

  const auto mem = run(dir,
                       "recommend --question 'Why does recursion matter?' --learner learner-0001 "
                       "--condition memory --store store.jsonl");
  ASSERT_EQ(mem.code, 0) << mem.err;
  const auto json_start = mem.out.find("\n\n{");
  ASSERT_NE(json_start, std::string::npos) << mem.out;
  const auto doc = nlohmann::json::parse(mem.out.substr(json_start + 2));
  EXPECT_EQ(doc["condition"], "memory");
  EXPECT_EQ(doc["learner_id"], "learner-0001");
  EXPECT_TRUE(doc["tactic"].is_string());
  EXPECT_EQ(mem.out.substr(0, json_start), doc["text"].get<std::string>());

  const auto ctx = run(dir, "recommend --question 'Why does recursion matter?'");
  ASSERT_EQ(ctx.code, 0) << ctx.err;
  EXPECT_EQ(ctx.out.rfind("Have the student justify: recursion matter", 0), 0u) << ctx.out;
}

TEST(Cli, IngestTwiceIsStaleWithLineNumber) {
  oracle::TempDir dir;
  ASSERT_EQ(run(dir, "synth --n-questions 6 --n-learners 2 --out log.jsonl").code, 0);
  ASSERT_EQ(run(dir, "ingest --log log.jsonl --store store.jsonl").code, 0);
  const auto before = read_file(dir / "store.jsonl");
  const auto again = run(dir, "ingest --log log.jsonl --store store.jsonl");
  EXPECT_EQ(again.code, 3);
  EXPECT_NE(again.err.find("stale-event"), std::string::npos) << again.err;
  EXPECT_NE(again.err.find("log line 1"), std::string::npos) << again.err;
  EXPECT_EQ(read_file(dir / "store.jsonl"), before);
}

TEST(Cli, IngestMalformedLine) {
  oracle::TempDir dir;
  write_file_atomic(dir / "log.jsonl",
                    "{\"learner_id\":\"a\",\"question_id\":\"q1\",\"question_text\":\"why\","
                    "\"timestamp\":1}\n\nnot json\n");
  const auto r = run(dir, "ingest --log log.jsonl --store store.jsonl");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("log line 3"), std::string::npos) << r.err;
  EXPECT_FALSE(std::filesystem::exists(dir / "store.jsonl"));
}

TEST(Cli, RecommendUnknownLearnerIsMissingState) {
  oracle::TempDir dir;
  const auto r = run(dir,
                     "recommend --question 'why?' --learner ghost --condition memory "
                     "--store store.jsonl");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("missing-state"), std::string::npos) << r.err;
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, RecommendHttpBackendUnreachable) {
  oracle::TempDir dir;
  const auto r = run(dir,
                     "recommend --question 'why?' --backend http --endpoint "
                     "http://127.0.0.1:9/generate --timeout-ms 300");
  EXPECT_EQ(r.code, 4) << r.err;
}

TEST(Cli, ConfigErrors) {
  oracle::TempDir dir;
  EXPECT_EQ(run(dir, "experiment --n-questions 1").code, 2);
  EXPECT_EQ(run(dir, "experiment --alpha 1.5").code, 2);
  EXPECT_EQ(run(dir, "experiment --backend http").code, 2);
  EXPECT_EQ(run(dir, "experiment --mapping nowhere.json").code, 2);
  EXPECT_EQ(run(dir, "recommend --question q --condition sideways").code, 2);
  EXPECT_EQ(run(dir, "bogus").code, 2);
  EXPECT_EQ(run(dir, "").code, 2);
  write_file_atomic(dir / "bad.json", "{\"seed\": \"nope\"}");
  EXPECT_EQ(run(dir, "experiment --config bad.json").code, 2);
}

TEST(Cli, ExperimentDeterministicAndDiagnose) {
  oracle::TempDir dir;
  const auto a = run(dir, "experiment --out a.json --items-out items.jsonl");
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(run(dir, "experiment --out b.json").code, 0);
  EXPECT_EQ(read_file(dir / "a.json"), read_file(dir / "b.json"));
  EXPECT_NE(a.out.find("rho contextual:"), std::string::npos);
  EXPECT_NE(a.out.find("divergence probe:"), std::string::npos);

  const auto report = nlohmann::json::parse(read_file(dir / "a.json"));
  EXPECT_GT(report["rho_contextual"].get<double>(), report["rho_memory"].get<double>());

  const auto d = run(dir, "diagnose --items items.jsonl --out d.json");
  ASSERT_EQ(d.code, 0) << d.err;
  const auto diag = nlohmann::json::parse(read_file(dir / "d.json"));
  EXPECT_EQ(diag["rho_contextual"], report["rho_contextual"]);
  EXPECT_EQ(diag["t_result"], report["t_result"]);
  EXPECT_TRUE(diag["divergence"].is_null());
}

TEST(Cli, ConfigFileWithFlagOverride) {
  oracle::TempDir dir;
  write_file_atomic(dir / "cfg.json",
                    "{\"seed\": 7, \"n_questions\": 12, \"mapping\": \"" +
                        (kData / "mapping_engagement_forward.json").string() + "\", \"output\": \"c.json\"}");
  const auto r = run(dir, "experiment --config cfg.json --n-questions 10");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = nlohmann::json::parse(read_file(dir / "c.json"));
  EXPECT_EQ(report["n_items"], 10);
  ASSERT_EQ(run(dir, "experiment --seed 7 --n-questions 10 --out plain.json").code, 0);
  EXPECT_NE(nlohmann::json::parse(read_file(dir / "plain.json"))["config_digest"],
            report["config_digest"]);
}

TEST(Cli, ExperimentOnProvidedLog) {
  oracle::TempDir dir;
  ASSERT_EQ(run(dir, "synth --seed 9 --n-questions 60 --out log.jsonl").code, 0);
  const auto r = run(dir, "experiment --log log.jsonl --n-questions 25 --out r.json");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(read_file(dir / "r.json"))["n_items"], 25);
}

TEST(Cli, MinimalExperiment) {
  oracle::TempDir dir;
  const auto r = run(dir, "experiment --n-questions 2 --out r.json");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(read_file(dir / "r.json"))["n_items"], 2);
}

TEST(Cli, CorruptStoreIsDataError) {
  oracle::TempDir dir;
  write_file_atomic(dir / "store.jsonl", "{broken\n");
  const auto r = run(dir, "recommend --question q --learner a --condition memory --store store.jsonl");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("corrupt-store"), std::string::npos) << r.err;
}
