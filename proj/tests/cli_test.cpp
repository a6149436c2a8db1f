#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("surprise_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
  }

  std::string read(const std::string& name) const {
    std::ifstream in(path(name));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  // Runs the CLI with stdout to out.txt and stderr to err.txt; returns the exit code.
  int run(const std::string& args) const {
    const std::string cmd = std::string("\"") + SURPRISE_CLI + "\" " + args + " > \"" + path("out.txt") +
                            "\" 2> \"" + path("err.txt") + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SimulateTrackDivergencePipeline) {
  write("spec.json",
        R"({"kind":"stationary","seed":11,"length":100000,"distribution":{"mass":[0.4,0.3,0.2,0.1]}})");
  ASSERT_EQ(run("simulate --spec " + path("spec.json") + " --out " + path("ev.jsonl") + " --world-out " +
                path("world.json")),
            0)
      << read("err.txt");
  ASSERT_EQ(run("track " + path("ev.jsonl") + " -o " + path("trace.jsonl") + " --mind-out " +
                path("mind.json")),
            0)
      << read("err.txt");
  ASSERT_EQ(run("divergence --world " + path("world.json") + " --mind " + path("mind.json") +
                " --normalize-mind"),
            0)
      << read("err.txt");
  const auto report = nlohmann::json::parse(read("out.txt"));
  EXPECT_LT(std::abs(report["D_wrel"].get<double>()), 0.1);

  const auto mind = nlohmann::json::parse(read("mind.json"));
  EXPECT_EQ(mind["symbols"].size(), 4u);
  for (const auto& s : mind["stable"]) EXPECT_TRUE(s.get<bool>());
}

TEST_F(Cli, TrackWritesOneRecordPerEvent) {
  write("ev.txt", "a\nb\na\n\nc\n");
  ASSERT_EQ(run("track " + path("ev.txt") + " --emit csv"), 0);
  std::istringstream lines(read("out.txt"));
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "t,symbol,c_stm,c_ltm,u_raw,u_clamped,novelty,change_flag");
  int n = 0;
  while (std::getline(lines, line)) ++n;
  EXPECT_EQ(n, 4);
}

TEST_F(Cli, EmptyInputSucceeds) {
  write("empty.txt", "");
  EXPECT_EQ(run("track " + path("empty.txt")), 0);
  EXPECT_EQ(read("out.txt"), "");
}

TEST_F(Cli, BadFlagsExitOne) {
  write("ev.txt", "a\n");
  EXPECT_EQ(run("track --alpha 1.5 " + path("ev.txt")), 1);
  EXPECT_NE(read("err.txt").find("--alpha"), std::string::npos);
  EXPECT_EQ(run("track --estimator kalman " + path("ev.txt")), 1);
  EXPECT_EQ(run("track --epsilon -3 " + path("ev.txt")), 1);
  EXPECT_EQ(run("divergence --world x.json"), 1);
  EXPECT_EQ(run("nonsense"), 1);
}

TEST_F(Cli, DataErrorsExitTwoWithLine) {
  write("ev.jsonl", "{\"t\":1,\"s\":\"a\"}\n{\"t\":3,\"s\":\"b\"}\n{\"t\":2,\"s\":\"c\"}\n");
  EXPECT_EQ(run("track " + path("ev.jsonl") + " -o " + path("trace.jsonl")), 2);
  EXPECT_NE(read("err.txt").find("line 3"), std::string::npos);
  EXPECT_NE(read("err.txt").find("non-monotonic-time"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("trace.jsonl")));  // no partial output
  EXPECT_EQ(run("track " + path("missing.jsonl")), 2);
}

TEST_F(Cli, ConfigFileAndFlagPrecedence) {
  write("cfg.json", R"({"estimator":"fir","window":2,"epsilon":"off"})");
  write("ev.txt", "a\nb\na\n");
  ASSERT_EQ(run("track --config " + path("cfg.json") + " " + path("ev.txt")), 0);
  // third event: window {a,b}, rate 1/2
  EXPECT_NE(read("out.txt").find("\"c_ltm\":1.000000,\"u_raw\":0.000000"), std::string::npos);
  ASSERT_EQ(run("track --config " + path("cfg.json") + " --window 4 " + path("ev.txt")), 0);
  EXPECT_NE(read("out.txt").find("\"c_ltm\":2.000000,\"u_raw\":1.000000"), std::string::npos);
}

TEST_F(Cli, ReplayMatchesUninterruptedRun) {
  write("spec.json",
        R"({"kind":"zipf","seed":4,"length":3000,"alphabet":12,"exponent":1.0})");
  ASSERT_EQ(run("simulate --spec " + path("spec.json") + " --out " + path("all.jsonl")), 0);
  std::ifstream in(path("all.jsonl"));
  std::ofstream head(path("head.jsonl"));
  std::ofstream tail(path("tail.jsonl"));
  std::string line;
  for (int i = 0; std::getline(in, line); ++i) (i < 1700 ? head : tail) << line << '\n';
  head.close();
  tail.close();

  const std::string flags = " --alpha 0.99 --warmup 100 --theta 1.0";
  ASSERT_EQ(run("track " + path("all.jsonl") + flags + " -o " + path("full.jsonl")), 0);
  ASSERT_EQ(run("track " + path("head.jsonl") + flags + " -o " + path("a.jsonl") + " --snapshot-out " +
                path("snap.json")),
            0);
  ASSERT_EQ(run("replay --snapshot " + path("snap.json") + " " + path("tail.jsonl") + " -o " + path("b.jsonl")),
            0)
      << read("err.txt");
  EXPECT_EQ(read("a.jsonl") + read("b.jsonl"), read("full.jsonl"));

  EXPECT_EQ(run("replay --snapshot " + path("snap.json") + " --alpha 0.5 " + path("tail.jsonl")), 1);
  EXPECT_EQ(run("replay --snapshot " + path("snap.json") + " " + path("head.jsonl")), 2);
}

TEST_F(Cli, ExplainGraphAndBayes) {
  write("g.json", R"({"nodes":[{"id":"c1","prior_bits":2},{"id":"c2","prior_bits":4},{"id":"s"}],
                     "edges":[{"from":"c1","to":"s","bits":3},{"from":"c2","to":"s","bits":0.5}]})");
  ASSERT_EQ(run("explain --graph " + path("g.json") + " --target s --cd 4.5"), 0);
  auto j = nlohmann::json::parse(read("out.txt"));
  EXPECT_EQ(j["best_cause"], "c2");
  EXPECT_EQ(j["u_raw"].get<double>(), 0.0);
  EXPECT_EQ(run("explain --graph " + path("g.json") + " --target nowhere --cd 1"), 2);
  EXPECT_EQ(run("explain --graph " + path("g.json") + " --target s"), 1);

  write("b.json", R"({"observation":"O","evidence":0.1,"causes":[{"id":"M","prior":0.01,"likelihood":0.9}]})");
  ASSERT_EQ(run("explain --bayes " + path("b.json")), 0);
  j = nlohmann::json::parse(read("out.txt"));
  EXPECT_NEAR(j["u_raw"].get<double>(), 3.473931188332412, 1e-9);
  EXPECT_NEAR(j["posterior"].get<double>(), 0.09, 1e-12);
}

TEST_F(Cli, DivergenceRejectsImproperMindWithoutFlag) {
  write("w.json", R"({"symbols":["a","b"],"mass":[0.5,0.5]})");
  write("m.json", R"({"symbols":["a","b"],"bits":[2,2]})");
  EXPECT_EQ(run("divergence --world " + path("w.json") + " --mind " + path("m.json")), 2);
  EXPECT_NE(read("err.txt").find("improper-distribution"), std::string::npos);
  EXPECT_EQ(run("divergence --world " + path("w.json") + " --mind " + path("m.json") + " --normalize-mind"), 0);
}

TEST_F(Cli, SamplesRun) {
  const std::string dir = SURPRISE_SAMPLES_DIR;
  EXPECT_EQ(run("divergence --world " + dir + "/world.json --mind " + dir + "/mind.json --emit csv"), 0)
      << read("err.txt");
  EXPECT_NE(read("out.txt").find("unicorn,"), std::string::npos);
  EXPECT_EQ(run("explain --graph " + dir + "/graph.json --target alarm --cd 1"), 0) << read("err.txt");
  EXPECT_EQ(run("explain --bayes " + dir + "/bayes.json"), 0) << read("err.txt");
  EXPECT_EQ(run("simulate --spec " + dir + "/changepoint.json --out " + path("cp.jsonl")), 0);
  EXPECT_EQ(run("track --config " + dir + "/config.json " + path("cp.jsonl") + " -o " + path("t.jsonl")), 0);
  EXPECT_EQ(run("simulate --spec " + dir + "/bifurcation.json"), 0);
}
