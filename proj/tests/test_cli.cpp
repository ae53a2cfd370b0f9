// Runs the uavmec executable end to end.

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "uavmec/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string output;  // stdout and stderr
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(UAVMEC_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 512> buf{};
  while (fgets(buf.data(), buf.size(), pipe)) r.output += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream f(p);
  std::string line;
  std::getline(f, line);
  return line;
}

std::size_t data_rows(const fs::path& p) {
  std::ifstream f(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(f, line)) ++n;
  return n == 0 ? 0 : n - 1;
}

const std::string kSmall =
    "--set env.N=3 --set env.M=9 --set env.B=60000 --set learning.episodes=30 "
    "--set learning.replay_capacity=64 --set learning.batch_size=16 "
    "--set learning.hidden=16,8";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("uavmec_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }
  std::string dir(const std::string& name) const { return (root_ / name).string(); }
  fs::path root_;
};

}  // namespace

TEST_F(CliTest, TrainWritesDocumentedFiles) {
  const auto r = cli("train " + kSmall + " --seed 7 --out " + dir("t"));
  ASSERT_EQ(r.code, 0) << r.output;
  const fs::path t = dir("t");
  const json manifest = json::parse(slurp(t / "manifest.json"));
  std::vector<std::string> listed = manifest["files"];
  std::vector<std::string> present;
  for (const auto& e : fs::directory_iterator(t)) present.push_back(e.path().filename().string());
  std::sort(listed.begin(), listed.end());
  std::sort(present.begin(), present.end());
  EXPECT_EQ(listed, present);
  for (const char* f : {"checkpoint.txt", "summary.json", "steps.csv", "episodes.csv",
                        "config.txt", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(t / f)) << f;
  }
  EXPECT_EQ(first_line(t / "steps.csv"), uavmec::io::step_trace_header(3));
  EXPECT_EQ(first_line(t / "steps.csv"),
            "episode,t,n,m,mu,e_f,e_h,e_c,W,b,r,delta,tu0_x,tu0_y,tu1_x,tu1_y,tu2_x,tu2_y");
  EXPECT_EQ(first_line(t / "episodes.csv"), uavmec::io::episodes_header(3));
  EXPECT_EQ(data_rows(t / "episodes.csv"), 30u);
  const json summary = json::parse(slurp(t / "summary.json"));
  for (const char* k : {"agent", "seed", "window", "episodes", "env_steps", "mean_reward",
                        "mean_throughput_bits", "tail_mean_reward_500", "qos_percent",
                        "average_reward", "moving_average", "slots", "throughput_bits"}) {
    EXPECT_TRUE(summary.contains(k)) << k;
  }
  EXPECT_EQ(summary["seed"], 7);
  EXPECT_EQ(manifest["command"], "train");
  EXPECT_EQ(manifest["seed"], 7);
  EXPECT_EQ(manifest["config"]["env.M"], "9");
  EXPECT_EQ(data_rows(t / "steps.csv"), summary["env_steps"].get<std::size_t>());
}

TEST_F(CliTest, TrainIsDeterministic) {
  ASSERT_EQ(cli("train " + kSmall + " --agent ddqn --seed 7 --out " + dir("a")).code, 0);
  ASSERT_EQ(cli("train " + kSmall + " --agent ddqn --seed 7 --out " + dir("b")).code, 0);
  for (const char* f : {"checkpoint.txt", "summary.json", "steps.csv", "episodes.csv",
                        "config.txt"}) {
    EXPECT_EQ(slurp(fs::path(dir("a")) / f), slurp(fs::path(dir("b")) / f)) << f;
  }
}

TEST_F(CliTest, ConfigSnapshotReproducesRun) {
  ASSERT_EQ(cli("train " + kSmall + " --agent dqn --seed 3 --out " + dir("a")).code, 0);
  const auto r = cli("train --agent dqn --config " + dir("a") + "/config.txt --out " + dir("b"));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(slurp(fs::path(dir("a")) / "summary.json"), slurp(fs::path(dir("b")) / "summary.json"));
  EXPECT_EQ(slurp(fs::path(dir("a")) / "checkpoint.txt"),
            slurp(fs::path(dir("b")) / "checkpoint.txt"));
}

TEST_F(CliTest, MissingConfigNamesPath) {
  const auto r = cli("train --config /no/such/file.cfg --out " + dir("x"));
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.output.find("/no/such/file.cfg"), std::string::npos) << r.output;
}

TEST_F(CliTest, NonSquareGridNamesField) {
  const auto r = cli("train --set env.M=24 --out " + dir("x"));
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.output.find("env.M"), std::string::npos) << r.output;
}

TEST_F(CliTest, BadFlagsAreUsageErrors) {
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("train --agent sarsa").code, 2);
  EXPECT_EQ(cli("fly").code, 2);
  EXPECT_EQ(cli("train --set env.N").code, 2);
}

TEST_F(CliTest, EvalWritesQosTable) {
  ASSERT_EQ(cli("train " + kSmall + " --seed 2 --out " + dir("t")).code, 0);
  const std::string ck = dir("t") + "/checkpoint.txt";
  EXPECT_EQ(cli("eval " + kSmall + " --checkpoint " + ck + " --episodes 0 --out " + dir("e0")).code,
            2);
  EXPECT_EQ(cli("eval " + kSmall + " --checkpoint " + ck + " --qos-mask maybe --out " + dir("e0"))
                .code,
            2);
  for (const std::string mask : {"on", "off"}) {
    const auto r = cli("eval " + kSmall + " --checkpoint " + ck + " --episodes 15 --qos-mask " +
                       mask + " --out " + dir("e" + mask));
    ASSERT_EQ(r.code, 0) << r.output;
    const fs::path e = dir("e" + mask);
    EXPECT_EQ(first_line(e / "qos.csv"), "tu,qos_percent");
    EXPECT_EQ(data_rows(e / "qos.csv"), 3u);
    const json manifest = json::parse(slurp(e / "manifest.json"));
    EXPECT_EQ(manifest["options"]["qos_mask"], mask);
    EXPECT_EQ(manifest["options"]["episodes"], "15");
  }
}

TEST_F(CliTest, SweepRowsAndEcho) {
  EXPECT_EQ(cli("sweep --vary n --out " + dir("s0")).code, 2);
  EXPECT_EQ(cli("sweep --vary speed --values 1 --out " + dir("s0")).code, 2);
  const auto r = cli("sweep " + kSmall + " --vary vbar --values 1.0,5,20 --agents ddqn,random " +
                     "--eval-episodes 3 --jobs 2 --out " + dir("s"));
  ASSERT_EQ(r.code, 0) << r.output;
  const fs::path s = dir("s");
  EXPECT_EQ(first_line(s / "sweep.csv"), "value,agent,mean_sum_throughput_bits,mean_reward");
  EXPECT_EQ(data_rows(s / "sweep.csv"), 6u);
  const json manifest = json::parse(slurp(s / "manifest.json"));
  EXPECT_EQ(manifest["options"]["values"], "1.0,5,20");
  std::ifstream csv(s / "sweep.csv");
  std::string line;
  std::getline(csv, line);
  std::getline(csv, line);
  EXPECT_EQ(line.rfind("1.0,ddqn,", 0), 0u) << line;
}

TEST_F(CliTest, SingleValueSweepEqualsTrainThenEval) {
  const std::string seed = " --seed 4";
  ASSERT_EQ(cli("sweep " + kSmall + seed + " --vary n --values 3 --eval-episodes 5 --out " +
                dir("s"))
                .code,
            0);
  ASSERT_EQ(cli("train " + kSmall + seed + " --out " + dir("t")).code, 0);
  ASSERT_EQ(cli("eval " + kSmall + seed + " --checkpoint " + dir("t") +
                "/checkpoint.txt --episodes 5 --out " + dir("e"))
                .code,
            0);
  const json eval = json::parse(slurp(fs::path(dir("e")) / "summary.json"));
  std::ifstream csv(fs::path(dir("s")) / "sweep.csv");
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  std::stringstream fields(row);
  std::string value, agent, throughput, reward;
  std::getline(fields, value, ',');
  std::getline(fields, agent, ',');
  std::getline(fields, throughput, ',');
  std::getline(fields, reward, ',');
  EXPECT_EQ(std::stod(reward), eval["mean_reward"].get<double>());
  EXPECT_EQ(std::stod(throughput), eval["mean_throughput_bits"].get<double>());
}

TEST_F(CliTest, TraceWritesTrajectory) {
  ASSERT_EQ(cli("train " + kSmall + " --seed 2 --out " + dir("t")).code, 0);
  const std::string ck = dir("t") + "/checkpoint.txt";
  const auto r = cli("trace " + kSmall + " --checkpoint " + ck + " --out " + dir("tr"));
  ASSERT_EQ(r.code, 0) << r.output;
  const fs::path tr = dir("tr");
  EXPECT_EQ(first_line(tr / "trajectory.csv"), uavmec::io::trajectory_header(3));
  EXPECT_EQ(first_line(tr / "trajectory.csv"),
            "t,uav_fpap,uav_x,uav_y,target_fpap,served_tu,mu,battery,tu0_x,tu0_y,tu1_x,tu1_y,"
            "tu2_x,tu2_y");
  EXPECT_GT(data_rows(tr / "trajectory.csv"), 0u);
  const auto mismatch =
      cli("trace --checkpoint " + ck + " --out " + dir("bad"));  // default N=5, M=25
  EXPECT_EQ(mismatch.code, 1);
  EXPECT_NE(mismatch.output.find("does not match"), std::string::npos) << mismatch.output;
}
