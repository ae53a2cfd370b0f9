#include <map>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "uavmec/agents.hpp"

using namespace uavmec;

namespace {

SimConfig small(int N = 3, int M = 9) {
  SimConfig cfg;
  cfg.N = N;
  cfg.M = M;
  cfg.learning.hidden = {16, 8};
  cfg.learning.replay_capacity = 128;
  cfg.learning.batch_size = 16;
  cfg.learning.sync_interval = 5;
  return cfg;
}

ValueNet constant_output(int in, const std::vector<double>& q) {
  ValueNet net({in, static_cast<int>(q.size())});
  for (std::size_t i = 0; i < q.size(); ++i) net.layers()[0].bias(static_cast<Eigen::Index>(i)) = q[i];
  return net;
}

}  // namespace

TEST(Select, PlainArgmax) {
  Rng rng = make_rng(1, Stream::kAgent);
  const std::vector<double> q{1, 5, 3};
  EXPECT_EQ(select_action_qos(q, 1, 3, {}, 0.0, rng).flat(3), 1);
}

TEST(Select, TiesGoToLowestId) {
  Rng rng = make_rng(1, Stream::kAgent);
  const std::vector<double> q{2, 7, 7, 7};
  EXPECT_EQ(select_action_qos(q, 2, 2, {}, 0.0, rng).flat(2), 1);
  const std::vector<int> unmet{1};
  const std::vector<double> flat(4, 0.0);
  EXPECT_EQ(select_action_qos(flat, 2, 2, unmet, 0.0, rng).flat(2), 2);
}

TEST(Select, MaskedArgmax) {
  Rng rng = make_rng(1, Stream::kAgent);
  const std::vector<double> q{1, 2, 9, 4};
  const std::vector<int> unmet{0};
  EXPECT_EQ(select_action_qos(q, 2, 2, unmet, 0.0, rng).flat(2), 1);
}

TEST(Select, MaskedExplorationIsUniform) {
  Rng rng = make_rng(2, Stream::kAgent);
  const std::vector<double> q{1, 2, 9, 4};
  const std::vector<int> unmet{1};
  std::map<int, int> counts;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++counts[select_action_qos(q, 2, 2, unmet, 1.0, rng).flat(2)];
  EXPECT_EQ(counts.size(), 2u);
  EXPECT_NEAR(counts[2] / static_cast<double>(draws), 0.5, 0.02);
  EXPECT_NEAR(counts[3] / static_cast<double>(draws), 0.5, 0.02);
}

TEST(Select, MaskSoundnessOverRandomTrials) {
  Rng rng = make_rng(3, Stream::kAgent);
  std::uniform_int_distribution<int> size(1, 8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> qv(0.0, 3.0);
  for (int trial = 0; trial < 100000; ++trial) {
    const int N = size(rng);
    const int M = size(rng);
    std::vector<double> q(static_cast<std::size_t>(N * M));
    for (auto& v : q) v = qv(rng);
    std::vector<int> unmet;
    for (int n = 0; n < N; ++n) {
      if (u(rng) < 0.4) unmet.push_back(n);
    }
    if (unmet.empty()) unmet.push_back(N - 1);
    const Action a = select_action_qos(q, N, M, unmet, u(rng), rng);
    ASSERT_TRUE(std::find(unmet.begin(), unmet.end(), a.tu) != unmet.end());
    ASSERT_GE(a.fpap, 0);
    ASSERT_LT(a.fpap, M);
  }
}

TEST(Select, RejectsBadInput) {
  Rng rng = make_rng(1, Stream::kAgent);
  const std::vector<double> q{1, 2, 3};
  EXPECT_THROW(select_action_qos(q, 2, 2, {}, 0.0, rng), std::invalid_argument);
}

TEST(Schedule, Values) {
  LearnConfig cfg;
  EXPECT_EQ(epsilon_schedule(0, cfg), 1.0);
  EXPECT_EQ(epsilon_schedule(1000000, cfg), cfg.epsilon_min);
  LearnConfig lit;
  lit.epsilon0 = 0.1;
  lit.epsilon_min = 0.0;
  EXPECT_NEAR(epsilon_schedule(10, lit), 0.05, 1e-15);
  double prev = 2.0;
  for (long long s = 0; s < 500; ++s) {
    const double e = epsilon_schedule(s, cfg);
    EXPECT_LE(e, prev);
    EXPECT_GE(e, cfg.epsilon_min);
    prev = e;
  }
}

TEST(Targets, ToyPair) {
  const ValueNet predicted = constant_output(1, {1.0, 2.0});
  const ValueNet target = constant_output(1, {10.0, 0.0});
  Transition t;
  t.state = {0.0};
  t.next_state = {0.0};
  t.reward = 1.0;
  EXPECT_DOUBLE_EQ(ddqn_target(t, predicted, target, 0.9), 1.0);
  EXPECT_DOUBLE_EQ(dqn_target(t, target, 0.9), 10.0);
  EXPECT_DOUBLE_EQ(ddqn_target(t, predicted, target, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(dqn_target(t, target, 0.0), 1.0);
  t.terminal = true;
  EXPECT_DOUBLE_EQ(ddqn_target(t, predicted, target, 0.9), 1.0);
  EXPECT_DOUBLE_EQ(dqn_target(t, target, 0.9), 1.0);
  t.terminal = false;
  EXPECT_DOUBLE_EQ(dqn_target(t, ValueNet({1, 2}), 0.9), 1.0);
}

TEST(Targets, DoubleNeverExceedsMax) {
  Rng rng = make_rng(4, Stream::kAgent);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    ValueNet a({5, 8, 6}, rng);
    ValueNet b({5, 8, 6}, rng);
    Transition t;
    t.reward = u(rng) - 0.5;
    t.state.assign(5, 0.0);
    for (int i = 0; i < 5; ++i) t.next_state.push_back(u(rng));
    const double omega = u(rng);
    ASSERT_LE(ddqn_target(t, a, b, omega), dqn_target(t, b, omega));
  }
}

TEST(Discretize, LatticeAndDecile) {
  SimConfig cfg = small(2, 9);
  Environment env(cfg);
  Rng rng = make_rng(5, Stream::kEnvironment);
  env.reset(rng);
  TuState tu;
  tu.position = fpap_position(0, cfg);
  env.set_user(0, tu);
  tu.position = {999.0, 10.0};
  env.set_user(1, tu);
  auto key = discretize_state(env);
  EXPECT_EQ(key, (TableKey{0, 2, 4, 9}));
  tu.position = {990.0, 300.0};  // same cell as (999, 10)
  env.set_user(1, tu);
  env.set_battery(cfg.B * 0.95);
  EXPECT_EQ(discretize_state(env), key);
  env.set_battery(cfg.B * 0.85);
  EXPECT_EQ(discretize_state(env).back(), 8);
}

TEST(Tabular, SingleUpdateArithmetic) {
  SimConfig cfg = small(1, 4);
  cfg.learning.lambda = 1.0;
  cfg.learning.omega = 0.0;
  TabularAgent ql(AgentKind::kQLearning, cfg);
  const TableKey s{0, 1, 9};
  const TableKey next{1, 1, 9};
  ql.update(s, 2, 1.0, next, false, true);
  EXPECT_EQ(ql.table().peek(s)[2], 1.0);
  EXPECT_EQ(ql.table().peek(s)[0], 0.0);
}

TEST(Tabular, ZeroRateLeavesValues) {
  SimConfig cfg = small(1, 4);
  cfg.learning.lambda = 0.0;
  TabularAgent ql(AgentKind::kQLearning, cfg);
  const TableKey s{0, 1, 9};
  ql.mutable_table().row(s)[1] = 0.25;
  ql.update(s, 1, 5.0, s, false, true);
  EXPECT_EQ(ql.table().peek(s)[1], 0.25);
}

TEST(Tabular, DoubleWithEqualTablesMatchesQl) {
  SimConfig cfg = small(1, 4);
  cfg.learning.lambda = 0.3;
  cfg.learning.omega = 0.8;
  TabularAgent ql(AgentKind::kQLearning, cfg);
  TabularAgent dql(AgentKind::kDoubleQLearning, cfg);
  const TableKey s{0, 1, 9};
  const TableKey next{2, 1, 8};
  const std::vector<double> row{0.1, 0.4, -0.2, 0.3};
  const std::vector<double> next_row{0.5, -1.0, 0.7, 0.2};
  ql.mutable_table().row(s) = row;
  ql.mutable_table().row(next) = next_row;
  for (QTable* t : {&dql.mutable_table(), &dql.mutable_second_table()}) {
    t->row(s) = row;
    t->row(next) = next_row;
  }
  ql.update(s, 3, 0.5, next, false, true);
  dql.update(s, 3, 0.5, next, false, true);
  EXPECT_DOUBLE_EQ(dql.table().peek(s)[3], ql.table().peek(s)[3]);
  dql.update(s, 3, 0.5, next, false, false);
  EXPECT_DOUBLE_EQ(dql.second_table().peek(s)[3], ql.table().peek(s)[3]);
}

TEST(Tabular, TerminalDoesNotBootstrap) {
  SimConfig cfg = small(1, 4);
  cfg.learning.lambda = 1.0;
  cfg.learning.omega = 0.9;
  TabularAgent ql(AgentKind::kQLearning, cfg);
  const TableKey s{0, 1, 9};
  const TableKey next{1, 1, 0};
  ql.mutable_table().row(next) = {100, 100, 100, 100};
  ql.update(s, 0, -0.5, next, true, true);
  EXPECT_EQ(ql.table().peek(s)[0], -0.5);
}

TEST(Deep, TrainStepRequiresFullReplay) {
  SimConfig cfg = small();
  Rng rng = make_rng(1, Stream::kAgent);
  DeepAgent agent(AgentKind::kDdqn, cfg, 12, rng);
  EXPECT_THROW(agent.train_step(rng), std::logic_error);
}

TEST(Deep, PerfectTargetsLeaveNetUnchanged) {
  SimConfig cfg = small();
  cfg.learning.omega = 0.0;
  Rng rng = make_rng(1, Stream::kAgent);
  DeepAgent agent(AgentKind::kDdqn, cfg, 12, rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  while (!agent.replay().full()) {
    Transition t;
    for (int i = 0; i < 12; ++i) t.state.push_back(u(rng));
    t.next_state = t.state;
    t.action = static_cast<int>(agent.replay().size() % 27);
    t.reward = agent.predicted().forward(t.state)(t.action);
    agent.mutable_replay().push(std::move(t));
  }
  const ValueNet before = agent.predicted();
  const auto stats = agent.train_step(rng);
  EXPECT_NEAR(stats.loss, 0.0, 1e-24);
  EXPECT_TRUE(agent.predicted().layers()[0].weight.isApprox(before.layers()[0].weight, 1e-15));
}

TEST(Deep, SyncAtInterval) {
  SimConfig cfg = small();
  Rng rng = make_rng(2, Stream::kAgent);
  DeepAgent agent(AgentKind::kDqn, cfg, 12, rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  while (!agent.replay().full()) {
    Transition t;
    for (int i = 0; i < 12; ++i) t.state.push_back(u(rng));
    t.next_state = t.state;
    t.action = static_cast<int>(agent.replay().size() % 27);
    t.reward = u(rng);
    agent.mutable_replay().push(std::move(t));
  }
  for (int i = 1; i <= 2 * cfg.learning.sync_interval; ++i) {
    const auto stats = agent.train_step(rng);
    EXPECT_EQ(stats.synced, i % cfg.learning.sync_interval == 0);
    if (stats.synced) {
      EXPECT_EQ(agent.target(), agent.predicted());
    } else {
      EXPECT_FALSE(agent.target() == agent.predicted());
    }
  }
}

TEST(Deep, SampledIndicesDeterministic) {
  auto run = [] {
    SimConfig cfg = small();
    Rng rng = make_rng(3, Stream::kAgent);
    DeepAgent agent(AgentKind::kDdqn, cfg, 12, rng);
    for (int i = 0; i < cfg.learning.replay_capacity; ++i) {
      Transition t;
      t.state.assign(12, 0.01 * i);
      t.next_state = t.state;
      t.action = i % 27;
      agent.mutable_replay().push(std::move(t));
    }
    agent.train_step(rng);
    return agent.last_sample();
  };
  EXPECT_EQ(run(), run());
}

TEST(Checkpoint, DeepRoundTrip) {
  SimConfig cfg = small();
  Rng rng = make_rng(4, Stream::kAgent);
  auto agent = make_agent(AgentKind::kDdqn, cfg, rng);
  std::stringstream buf;
  agent->save(buf, cfg, 1234);
  const auto loaded = load_agent(buf, cfg);
  EXPECT_EQ(loaded.agent->kind(), AgentKind::kDdqn);
  EXPECT_EQ(loaded.epsilon_step, 1234);
  EXPECT_EQ(loaded.learning_echo.at("learning.omega"), "0.9");
  const auto& a = dynamic_cast<const DeepAgent&>(*agent);
  const auto& b = dynamic_cast<const DeepAgent&>(*loaded.agent);
  EXPECT_EQ(a.predicted(), b.predicted());
}

TEST(Checkpoint, TabularRoundTrip) {
  SimConfig cfg = small();
  Rng rng = make_rng(4, Stream::kAgent);
  TabularAgent agent(AgentKind::kDoubleQLearning, cfg);
  agent.mutable_table().row({1, 2, 3, 4, 9})[5] = 0.125;
  agent.mutable_second_table().row({0, 0, 0, 4, 3})[7] = -1.0 / 3.0;
  std::stringstream buf;
  agent.save(buf, cfg, 7);
  const auto loaded = load_agent(buf, cfg);
  const auto& b = dynamic_cast<const TabularAgent&>(*loaded.agent);
  EXPECT_EQ(b.table(), agent.table());
  EXPECT_EQ(b.second_table(), agent.second_table());
  EXPECT_EQ(b.key_count(), 2u);
}

TEST(Checkpoint, ShapeMismatchRejected) {
  SimConfig cfg = small();
  Rng rng = make_rng(4, Stream::kAgent);
  auto agent = make_agent(AgentKind::kDqn, cfg, rng);
  std::stringstream buf;
  agent->save(buf, cfg, 0);
  SimConfig other = small(4, 9);
  EXPECT_THROW(load_agent(buf, other), std::invalid_argument);
  std::stringstream junk("hello");
  EXPECT_THROW(load_agent(junk, cfg), std::runtime_error);
}

TEST(Kinds, Names) {
  for (auto k : {AgentKind::kDdqn, AgentKind::kDqn, AgentKind::kQLearning,
                 AgentKind::kDoubleQLearning, AgentKind::kRandom}) {
    EXPECT_EQ(parse_agent_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_agent_kind("sarsa"), std::invalid_argument);
}

TEST(RandomPolicy, StaysInsideMask) {
  SimConfig cfg = small();
  Rng rng = make_rng(5, Stream::kAgent);
  RandomAgent agent(cfg);
  Observation obs;
  obs.unmet = {2};
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(agent.act(obs, 0.0, true, rng).tu, 2);
  std::set<int> seen;
  for (int i = 0; i < 2000; ++i) seen.insert(agent.act(obs, 0.0, false, rng).tu);
  EXPECT_EQ(seen.size(), 3u);
}
