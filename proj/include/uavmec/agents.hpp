#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "uavmec/config.hpp"
#include "uavmec/environment.hpp"
#include "uavmec/replay.hpp"
#include "uavmec/rng.hpp"
#include "uavmec/valuenet.hpp"

namespace uavmec {

enum class AgentKind { kDdqn, kDqn, kQLearning, kDoubleQLearning, kRandom };

std::string to_string(AgentKind kind);
AgentKind parse_agent_kind(const std::string& name);

// ---------------------------------------------------------------------------
// Action selection

/// Index of the largest entry; the lowest index wins ties.
int argmax(std::span<const double> values);

/// QoS-based epsilon-greedy selection over flat action ids (id = n * M + m).
///
/// With every user satisfied (`unmet` empty) this is plain epsilon-greedy.
/// Otherwise both the random branch and the greedy branch are confined to
/// actions whose user is in `unmet`: exploration draws uniformly from that
/// subset and exploitation takes its argmax. This has the same distribution
/// as redrawing epsilon-greedy actions until one serves an unmet user.
Action select_action_qos(std::span<const double> q_values, int N, int M,
                         std::span<const int> unmet, double epsilon, Rng& rng);

/// max(epsilon_min, epsilon0 - delta * step).
double epsilon_schedule(long long step, const LearnConfig& cfg);

// ---------------------------------------------------------------------------
// Bootstrap targets

double ddqn_target(const Transition& t, const ValueNet& predicted, const ValueNet& target,
                   double omega);
double dqn_target(const Transition& t, const ValueNet& target, double omega);

// ---------------------------------------------------------------------------
// Tabular state

/// Discretised world: one lattice cell per user, the UAV hover point and the
/// battery decile (0..9).
using TableKey = std::vector<int>;

struct TableKeyHash {
  std::size_t operator()(const TableKey& key) const noexcept;
};

TableKey discretize_state(const Environment& env);

class QTable {
 public:
  explicit QTable(int actions) : actions_(actions) {}

  /// Row for `key`, created as zeros on first access.
  std::vector<double>& row(const TableKey& key);
  /// Row for `key` without inserting; zeros when unseen.
  std::vector<double> peek(const TableKey& key) const;
  bool contains(const TableKey& key) const { return rows_.contains(key); }

  std::size_t size() const { return rows_.size(); }
  /// Number of stored Q-values.
  std::size_t entries() const { return rows_.size() * static_cast<std::size_t>(actions_); }
  int actions() const { return actions_; }
  const std::unordered_map<TableKey, std::vector<double>, TableKeyHash>& rows() const {
    return rows_;
  }

  void save(std::ostream& out) const;
  static QTable load(std::istream& in);

  friend bool operator==(const QTable& a, const QTable& b) {
    return a.actions_ == b.actions_ && a.rows_ == b.rows_;
  }

 private:
  int actions_;
  std::unordered_map<TableKey, std::vector<double>, TableKeyHash> rows_;
};

// ---------------------------------------------------------------------------
// Agents

/// What an agent sees of the world at decision time.
struct Observation {
  std::vector<double> features;  // deep agents
  TableKey key;                  // tabular agents
  std::vector<int> unmet;        // users still below Z
};

/// Bootstrap targets computed for one training sample.
struct TargetProbe {
  double ddqn = 0.0;
  double dqn = 0.0;
};

class Agent {
 public:
  virtual ~Agent() = default;

  virtual AgentKind kind() const = 0;
  virtual Observation observe(const Environment& env) const;
  virtual Action act(const Observation& obs, double epsilon, bool qos_mask, Rng& rng) const = 0;
  /// Feeds back one slot. `next` is the observation after the step.
  virtual void learn(const Observation& obs, const Action& action, double reward,
                     const Observation& next, bool terminal, Rng& rng) = 0;

  /// Writes a checkpoint; `epsilon_step` is the exploration schedule counter.
  virtual void save(std::ostream& out, const SimConfig& cfg, long long epsilon_step) const = 0;

 protected:
  Agent(int N, int M) : N_(N), M_(M) {}
  int N_;
  int M_;
};

struct TrainStats {
  double loss = 0.0;
  bool synced = false;
};

/// DDQN or DQN agent with experience replay and a periodically synced
/// target network.
class DeepAgent : public Agent {
 public:
  DeepAgent(AgentKind kind, const SimConfig& cfg, int state_size, Rng& rng);
  DeepAgent(AgentKind kind, const SimConfig& cfg, ValueNet net);

  AgentKind kind() const override { return kind_; }
  Observation observe(const Environment& env) const override;
  Action act(const Observation& obs, double epsilon, bool qos_mask, Rng& rng) const override;
  void learn(const Observation& obs, const Action& action, double reward,
             const Observation& next, bool terminal, Rng& rng) override;
  void save(std::ostream& out, const SimConfig& cfg, long long epsilon_step) const override;

  /// One mini-batch update of the predicted network. Requires a full replay
  /// memory.
  TrainStats train_step(Rng& rng);

  /// Called with both bootstrap targets of every non-terminal sample used in
  /// training.
  void set_target_probe(std::function<void(const TargetProbe&)> probe) {
    probe_ = std::move(probe);
  }

  const ValueNet& predicted() const { return predicted_; }
  const ValueNet& target() const { return target_; }
  ValueNet& mutable_predicted() { return predicted_; }
  ValueNet& mutable_target() { return target_; }
  const ReplayMemory& replay() const { return replay_; }
  ReplayMemory& mutable_replay() { return replay_; }
  long long train_steps() const { return train_steps_; }
  const std::vector<std::size_t>& last_sample() const { return last_sample_; }

 private:
  AgentKind kind_;
  LearnConfig learn_;
  ValueNet predicted_;
  ValueNet target_;
  ReplayMemory replay_;
  long long train_steps_ = 0;
  std::vector<std::size_t> last_sample_;
  std::function<void(const TargetProbe&)> probe_;
};

/// Q-learning (one table) or double Q-learning (two tables, a fair coin picks
/// which one is updated, the other evaluates).
class TabularAgent : public Agent {
 public:
  TabularAgent(AgentKind kind, const SimConfig& cfg);

  AgentKind kind() const override { return kind_; }
  Observation observe(const Environment& env) const override;
  Action act(const Observation& obs, double epsilon, bool qos_mask, Rng& rng) const override;
  void learn(const Observation& obs, const Action& action, double reward,
             const Observation& next, bool terminal, Rng& rng) override;
  void save(std::ostream& out, const SimConfig& cfg, long long epsilon_step) const override;

  /// Single update with an explicit coin (true: update table A). The coin is
  /// ignored for plain Q-learning.
  void update(const TableKey& s, int action, double reward, const TableKey& next, bool terminal,
              bool update_first);

  const QTable& table() const { return a_; }
  const QTable& second_table() const { return b_; }
  QTable& mutable_table() { return a_; }
  QTable& mutable_second_table() { return b_; }
  /// Distinct keys across the agent's tables.
  std::size_t key_count() const;
  std::size_t entry_count() const { return a_.entries() + b_.entries(); }

 private:
  std::vector<double> combined(const TableKey& key) const;

  AgentKind kind_;
  LearnConfig learn_;
  QTable a_;
  QTable b_;
};

/// Uniform choice within the QoS mask; never learns.
class RandomAgent : public Agent {
 public:
  explicit RandomAgent(const SimConfig& cfg) : Agent(cfg.N, cfg.M) {}
  AgentKind kind() const override { return AgentKind::kRandom; }
  Action act(const Observation& obs, double epsilon, bool qos_mask, Rng& rng) const override;
  void learn(const Observation&, const Action&, double, const Observation&, bool, Rng&) override {}
  void save(std::ostream& out, const SimConfig& cfg, long long epsilon_step) const override;
};

std::unique_ptr<Agent> make_agent(AgentKind kind, const SimConfig& cfg, Rng& rng);

/// Loads any checkpoint written by Agent::save. Throws std::runtime_error on
/// malformed input and std::invalid_argument when the checkpoint does not fit
/// `cfg` (state size or action count).
struct LoadedAgent {
  std::unique_ptr<Agent> agent;
  long long epsilon_step = 0;
  std::map<std::string, std::string> learning_echo;
};
LoadedAgent load_agent(std::istream& in, const SimConfig& cfg);

}  // namespace uavmec
