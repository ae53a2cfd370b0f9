#include "uavmec/agents.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace uavmec {

namespace {

constexpr const char* kAgentMagic = "uavmec-agent";
constexpr const char* kTableMagic = "uavmec-qtable";

void write_header(std::ostream& out, AgentKind kind, const SimConfig& cfg,
                  long long epsilon_step) {
  out << kAgentMagic << " 1\n";
  out << "kind " << to_string(kind) << '\n';
  out << "epsilon_step " << epsilon_step << '\n';
  for (const auto& [key, value] : to_key_values(cfg)) {
    if (key.rfind("learning.", 0) == 0) out << key << " = " << value << '\n';
  }
  out << "end\n";
}

}  // namespace

std::string to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::kDdqn: return "ddqn";
    case AgentKind::kDqn: return "dqn";
    case AgentKind::kQLearning: return "ql";
    case AgentKind::kDoubleQLearning: return "dql";
    case AgentKind::kRandom: return "random";
  }
  return "unknown";
}

AgentKind parse_agent_kind(const std::string& name) {
  if (name == "ddqn") return AgentKind::kDdqn;
  if (name == "dqn") return AgentKind::kDqn;
  if (name == "ql") return AgentKind::kQLearning;
  if (name == "dql") return AgentKind::kDoubleQLearning;
  if (name == "random") return AgentKind::kRandom;
  throw std::invalid_argument("unknown agent '" + name + "' (expected ddqn, dqn, ql, dql, random)");
}

int argmax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax of an empty range");
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

Action select_action_qos(std::span<const double> q_values, int N, int M,
                         std::span<const int> unmet, double epsilon, Rng& rng) {
  if (static_cast<int>(q_values.size()) != N * M) {
    throw std::invalid_argument("select_action_qos: expected N*M Q-values");
  }
  std::bernoulli_distribution explore(std::clamp(epsilon, 0.0, 1.0));
  const bool random_branch = explore(rng);

  if (unmet.empty()) {
    if (random_branch) {
      std::uniform_int_distribution<int> pick(0, N * M - 1);
      return Action::from_flat(pick(rng), M);
    }
    return Action::from_flat(argmax(q_values), M);
  }

  if (random_branch) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(unmet.size()) * M - 1);
    const int r = pick(rng);
    return {unmet[static_cast<std::size_t>(r / M)], r % M};
  }
  // Restricted argmax; users are visited in ascending order so the lowest
  // flat id wins ties.
  std::vector<int> users(unmet.begin(), unmet.end());
  std::sort(users.begin(), users.end());
  int best = -1;
  double best_q = -std::numeric_limits<double>::infinity();
  for (int n : users) {
    if (n < 0 || n >= N) throw std::out_of_range("select_action_qos: user index out of range");
    for (int m = 0; m < M; ++m) {
      const int id = n * M + m;
      const double q = q_values[static_cast<std::size_t>(id)];
      if (best < 0 || q > best_q) {
        best = id;
        best_q = q;
      }
    }
  }
  return Action::from_flat(best, M);
}

double epsilon_schedule(long long step, const LearnConfig& cfg) {
  const double e = cfg.epsilon0 - cfg.delta * static_cast<double>(std::max(0LL, step));
  return std::max(cfg.epsilon_min, e);
}

double ddqn_target(const Transition& t, const ValueNet& predicted, const ValueNet& target,
                   double omega) {
  if (t.terminal) return t.reward;
  const Eigen::VectorXd q1 = predicted.forward(t.next_state);
  const Eigen::VectorXd q2 = target.forward(t.next_state);
  const int best = argmax(std::span<const double>(q1.data(), static_cast<std::size_t>(q1.size())));
  return t.reward + omega * q2(best);
}

double dqn_target(const Transition& t, const ValueNet& target, double omega) {
  if (t.terminal) return t.reward;
  const Eigen::VectorXd q2 = target.forward(t.next_state);
  return t.reward + omega * q2.maxCoeff();
}

// ---------------------------------------------------------------------------

std::size_t TableKeyHash::operator()(const TableKey& key) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (int v : key) {
    h ^= static_cast<std::size_t>(static_cast<unsigned>(v)) + 0x9e3779b97f4a7c15ULL + (h << 6) +
         (h >> 2);
  }
  return h;
}

TableKey discretize_state(const Environment& env) {
  const SimConfig& cfg = env.config();
  const int side = grid_side(cfg.M);
  const double sx = cfg.area_width / side;
  const double sy = cfg.area_height / side;
  TableKey key;
  key.reserve(static_cast<std::size_t>(cfg.N) + 2);
  for (const auto& tu : env.users()) {
    const int col = std::clamp(static_cast<int>(std::floor(tu.position.x / sx)), 0, side - 1);
    const int row = std::clamp(static_cast<int>(std::floor(tu.position.y / sy)), 0, side - 1);
    key.push_back(row * side + col);
  }
  key.push_back(env.uav().fpap_index);
  const int decile = static_cast<int>(std::floor(10.0 * env.uav().battery / cfg.B));
  key.push_back(std::clamp(decile, 0, 9));
  return key;
}

std::vector<double>& QTable::row(const TableKey& key) {
  auto it = rows_.find(key);
  if (it == rows_.end()) {
    it = rows_.emplace(key, std::vector<double>(static_cast<std::size_t>(actions_), 0.0)).first;
  }
  return it->second;
}

std::vector<double> QTable::peek(const TableKey& key) const {
  const auto it = rows_.find(key);
  if (it == rows_.end()) return std::vector<double>(static_cast<std::size_t>(actions_), 0.0);
  return it->second;
}

// Layout: magic, "<actions> <rows>", then one line per row in key order:
//   <key length> <key...> <values...>
void QTable::save(std::ostream& out) const {
  std::vector<const std::pair<const TableKey, std::vector<double>>*> sorted;
  sorted.reserve(rows_.size());
  for (const auto& entry : rows_) sorted.push_back(&entry);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->first < b->first; });

  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << kTableMagic << " 1\n" << actions_ << ' ' << rows_.size() << '\n';
  for (const auto* entry : sorted) {
    out << entry->first.size();
    for (int k : entry->first) out << ' ' << k;
    for (double v : entry->second) out << ' ' << v;
    out << '\n';
  }
  out.precision(old_precision);
}

QTable QTable::load(std::istream& in) {
  std::string magic;
  int version = 0;
  int actions = 0;
  std::size_t rows = 0;
  if (!(in >> magic >> version >> actions >> rows) || magic != kTableMagic || version != 1 ||
      actions < 1) {
    throw std::runtime_error("QTable::load: not a Q-table checkpoint");
  }
  QTable table(actions);
  std::string token;
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t len = 0;
    if (!(in >> len)) throw std::runtime_error("QTable::load: truncated table");
    TableKey key(len);
    for (auto& k : key) {
      if (!(in >> k)) throw std::runtime_error("QTable::load: truncated key");
    }
    auto& row = table.row(key);
    for (auto& v : row) {
      if (!(in >> token)) throw std::runtime_error("QTable::load: truncated values");
      v = std::strtod(token.c_str(), nullptr);
    }
  }
  return table;
}

// ---------------------------------------------------------------------------

Observation Agent::observe(const Environment& env) const {
  Observation obs;
  obs.unmet = env.qos_unmet();
  return obs;
}

namespace {

std::vector<int> net_sizes(const SimConfig& cfg, int state_size) {
  std::vector<int> sizes{state_size};
  sizes.insert(sizes.end(), cfg.learning.hidden.begin(), cfg.learning.hidden.end());
  sizes.push_back(cfg.N * cfg.M);
  return sizes;
}

}  // namespace

DeepAgent::DeepAgent(AgentKind kind, const SimConfig& cfg, int state_size, Rng& rng)
    : DeepAgent(kind, cfg, ValueNet(net_sizes(cfg, state_size), rng)) {}

DeepAgent::DeepAgent(AgentKind kind, const SimConfig& cfg, ValueNet net)
    : Agent(cfg.N, cfg.M),
      kind_(kind),
      learn_(cfg.learning),
      predicted_(std::move(net)),
      target_(predicted_),
      replay_(static_cast<std::size_t>(cfg.learning.replay_capacity)) {
  if (kind != AgentKind::kDdqn && kind != AgentKind::kDqn) {
    throw std::invalid_argument("DeepAgent supports ddqn and dqn only");
  }
  if (predicted_.output_size() != cfg.N * cfg.M) {
    throw std::invalid_argument("DeepAgent: network output does not match N*M actions");
  }
}

Observation DeepAgent::observe(const Environment& env) const {
  Observation obs = Agent::observe(env);
  obs.features = env.encode_state();
  if (static_cast<int>(obs.features.size()) != predicted_.input_size()) {
    throw std::invalid_argument("DeepAgent: state size does not match the network input");
  }
  return obs;
}

Action DeepAgent::act(const Observation& obs, double epsilon, bool qos_mask, Rng& rng) const {
  const Eigen::VectorXd q = predicted_.forward(obs.features);
  const std::span<const double> qs(q.data(), static_cast<std::size_t>(q.size()));
  const std::vector<int> none;
  return select_action_qos(qs, N_, M_, qos_mask ? std::span<const int>(obs.unmet) : none,
                           epsilon, rng);
}

void DeepAgent::learn(const Observation& obs, const Action& action, double reward,
                      const Observation& next, bool terminal, Rng& rng) {
  replay_.push({obs.features, action.flat(M_), reward, next.features, terminal});
  if (replay_.full()) train_step(rng);
}

TrainStats DeepAgent::train_step(Rng& rng) {
  if (!replay_.full()) throw std::logic_error("DeepAgent::train_step before replay is full");
  const auto K = static_cast<std::size_t>(learn_.batch_size);
  last_sample_ = replay_.sample_indices(K, rng);

  const auto dim = static_cast<Eigen::Index>(predicted_.input_size());
  Eigen::MatrixXd states(dim, static_cast<Eigen::Index>(K));
  Eigen::MatrixXd next(dim, static_cast<Eigen::Index>(K));
  std::vector<int> actions(K);
  for (std::size_t k = 0; k < K; ++k) {
    const Transition& t = replay_.slot(last_sample_[k]);
    const auto col = static_cast<Eigen::Index>(k);
    states.col(col) = Eigen::Map<const Eigen::VectorXd>(t.state.data(), dim);
    next.col(col) = Eigen::Map<const Eigen::VectorXd>(t.next_state.data(), dim);
    actions[k] = t.action;
  }

  const Eigen::MatrixXd q_target_next = target_.forward_batch(next);
  Eigen::MatrixXd q_pred_next;
  if (kind_ == AgentKind::kDdqn || probe_) q_pred_next = predicted_.forward_batch(next);

  std::vector<double> targets(K);
  for (std::size_t k = 0; k < K; ++k) {
    const Transition& t = replay_.slot(last_sample_[k]);
    if (t.terminal) {
      targets[k] = t.reward;
      continue;
    }
    const auto col = static_cast<Eigen::Index>(k);
    const double max_q2 = q_target_next.col(col).maxCoeff();
    double ddqn = 0.0;
    if (q_pred_next.size() > 0) {
      const auto q1 = q_pred_next.col(col);
      Eigen::Index best = 0;
      for (Eigen::Index i = 1; i < q1.size(); ++i) {
        if (q1(i) > q1(best)) best = i;
      }
      ddqn = t.reward + learn_.omega * q_target_next(best, col);
    }
    const double dqn = t.reward + learn_.omega * max_q2;
    targets[k] = kind_ == AgentKind::kDdqn ? ddqn : dqn;
    if (probe_) probe_({ddqn, dqn});
  }

  const Eigen::MatrixXd q_now = predicted_.forward_batch(states);
  std::vector<double> predicted(K);
  for (std::size_t k = 0; k < K; ++k) {
    predicted[k] = q_now(actions[k], static_cast<Eigen::Index>(k));
  }

  TrainStats stats;
  stats.loss = loss(predicted, targets);
  predicted_.sgd_update(predicted_.backward(states, actions, targets), learn_.lambda);
  ++train_steps_;
  if (train_steps_ % learn_.sync_interval == 0) {
    sync(target_, predicted_);
    stats.synced = true;
  }
  return stats;
}

void DeepAgent::save(std::ostream& out, const SimConfig& cfg, long long epsilon_step) const {
  write_header(out, kind_, cfg, epsilon_step);
  predicted_.save(out);
}

// ---------------------------------------------------------------------------

TabularAgent::TabularAgent(AgentKind kind, const SimConfig& cfg)
    : Agent(cfg.N, cfg.M), kind_(kind), learn_(cfg.learning), a_(cfg.N * cfg.M),
      b_(cfg.N * cfg.M) {
  if (kind != AgentKind::kQLearning && kind != AgentKind::kDoubleQLearning) {
    throw std::invalid_argument("TabularAgent supports ql and dql only");
  }
}

Observation TabularAgent::observe(const Environment& env) const {
  Observation obs = Agent::observe(env);
  obs.key = discretize_state(env);
  return obs;
}

std::vector<double> TabularAgent::combined(const TableKey& key) const {
  std::vector<double> q = a_.peek(key);
  if (kind_ == AgentKind::kDoubleQLearning) {
    const std::vector<double> qb = b_.peek(key);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += qb[i];
  }
  return q;
}

Action TabularAgent::act(const Observation& obs, double epsilon, bool qos_mask, Rng& rng) const {
  const std::vector<double> q = combined(obs.key);
  const std::vector<int> none;
  return select_action_qos(q, N_, M_, qos_mask ? std::span<const int>(obs.unmet) : none, epsilon,
                           rng);
}

void TabularAgent::update(const TableKey& s, int action, double reward, const TableKey& next,
                          bool terminal, bool update_first) {
  const auto a = static_cast<std::size_t>(action);
  if (kind_ == AgentKind::kQLearning) {
    // Touch the successor so every visited state is counted in the table.
    const std::vector<double>& next_row = a_.row(next);
    const double bootstrap = terminal ? 0.0 : *std::max_element(next_row.begin(), next_row.end());
    auto& row = a_.row(s);
    row[a] += learn_.lambda * (reward + learn_.omega * bootstrap - row[a]);
    return;
  }
  QTable& updated = update_first ? a_ : b_;
  QTable& evaluator = update_first ? b_ : a_;
  const std::vector<double>& sel = updated.row(next);
  const std::vector<double>& eval = evaluator.row(next);
  const double bootstrap = terminal ? 0.0 : eval[static_cast<std::size_t>(argmax(sel))];
  auto& row = updated.row(s);
  row[a] += learn_.lambda * (reward + learn_.omega * bootstrap - row[a]);
}

void TabularAgent::learn(const Observation& obs, const Action& action, double reward,
                         const Observation& next, bool terminal, Rng& rng) {
  bool first = true;
  if (kind_ == AgentKind::kDoubleQLearning) {
    std::bernoulli_distribution coin(0.5);
    first = coin(rng);
  }
  update(obs.key, action.flat(M_), reward, next.key, terminal, first);
}

std::size_t TabularAgent::key_count() const {
  if (kind_ == AgentKind::kQLearning) return a_.size();
  std::size_t n = a_.size();
  for (const auto& entry : b_.rows()) {
    if (!a_.contains(entry.first)) ++n;
  }
  return n;
}

void TabularAgent::save(std::ostream& out, const SimConfig& cfg, long long epsilon_step) const {
  write_header(out, kind_, cfg, epsilon_step);
  a_.save(out);
  if (kind_ == AgentKind::kDoubleQLearning) b_.save(out);
}

// ---------------------------------------------------------------------------

Action RandomAgent::act(const Observation& obs, double, bool qos_mask, Rng& rng) const {
  const std::vector<double> zeros(static_cast<std::size_t>(N_ * M_), 0.0);
  const std::vector<int> none;
  return select_action_qos(zeros, N_, M_, qos_mask ? std::span<const int>(obs.unmet) : none, 1.0,
                           rng);
}

void RandomAgent::save(std::ostream& out, const SimConfig& cfg, long long epsilon_step) const {
  write_header(out, AgentKind::kRandom, cfg, epsilon_step);
}

std::unique_ptr<Agent> make_agent(AgentKind kind, const SimConfig& cfg, Rng& rng) {
  const int state_size = cfg.qos_in_state ? 3 * cfg.N + 3 : 2 * cfg.N + 3;
  switch (kind) {
    case AgentKind::kDdqn:
    case AgentKind::kDqn:
      return std::make_unique<DeepAgent>(kind, cfg, state_size, rng);
    case AgentKind::kQLearning:
    case AgentKind::kDoubleQLearning:
      return std::make_unique<TabularAgent>(kind, cfg);
    case AgentKind::kRandom:
      return std::make_unique<RandomAgent>(cfg);
  }
  throw std::invalid_argument("make_agent: unknown kind");
}

LoadedAgent load_agent(std::istream& in, const SimConfig& cfg) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kAgentMagic || version != 1) {
    throw std::runtime_error("load_agent: not an agent checkpoint");
  }
  LoadedAgent out;
  std::string word;
  std::string kind_name;
  if (!(in >> word >> kind_name) || word != "kind") {
    throw std::runtime_error("load_agent: missing agent kind");
  }
  if (!(in >> word >> out.epsilon_step) || word != "epsilon_step") {
    throw std::runtime_error("load_agent: missing epsilon_step");
  }
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line) && line != "end") {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw std::runtime_error("load_agent: bad config echo line");
    out.learning_echo[line.substr(0, eq)] = line.substr(eq + 3);
  }
  if (line != "end") throw std::runtime_error("load_agent: truncated header");

  const AgentKind kind = parse_agent_kind(kind_name);
  const int state_size = cfg.qos_in_state ? 3 * cfg.N + 3 : 2 * cfg.N + 3;
  switch (kind) {
    case AgentKind::kDdqn:
    case AgentKind::kDqn: {
      ValueNet net = ValueNet::load(in);
      if (net.input_size() != state_size || net.output_size() != cfg.N * cfg.M) {
        throw std::invalid_argument(
            "checkpoint network " + std::to_string(net.input_size()) + "->" +
            std::to_string(net.output_size()) + " does not match config (state " +
            std::to_string(state_size) + ", actions " + std::to_string(cfg.N * cfg.M) + ")");
      }
      out.agent = std::make_unique<DeepAgent>(kind, cfg, std::move(net));
      break;
    }
    case AgentKind::kQLearning:
    case AgentKind::kDoubleQLearning: {
      auto agent = std::make_unique<TabularAgent>(kind, cfg);
      QTable a = QTable::load(in);
      if (a.actions() != cfg.N * cfg.M) {
        throw std::invalid_argument("checkpoint Q-table does not match N*M actions");
      }
      agent->mutable_table() = std::move(a);
      if (kind == AgentKind::kDoubleQLearning) agent->mutable_second_table() = QTable::load(in);
      out.agent = std::move(agent);
      break;
    }
    case AgentKind::kRandom:
      out.agent = std::make_unique<RandomAgent>(cfg);
      break;
  }
  return out;
}

}  // namespace uavmec
