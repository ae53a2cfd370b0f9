#include "uavmec/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace uavmec {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(key, "expected a number, got '" + text + "'");
  }
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(key, "expected an integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "on") return true;
  if (t == "false" || t == "0" || t == "off") return false;
  throw ConfigError(key, "expected true/false, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct Field {
  std::function<std::string(const SimConfig&)> get;
  std::function<void(SimConfig&, const std::string& key, const std::string&)> set;
};

template <typename T>
Field real_field(T SimConfig::*member) {
  return {[member](const SimConfig& c) { return format_double(c.*member); },
          [member](SimConfig& c, const std::string& k, const std::string& v) {
            c.*member = parse_double(k, v);
          }};
}

template <typename T>
Field int_field(T SimConfig::*member) {
  return {[member](const SimConfig& c) { return std::to_string(c.*member); },
          [member](SimConfig& c, const std::string& k, const std::string& v) {
            c.*member = static_cast<T>(parse_int(k, v));
          }};
}

Field mobility_real(double MobilityParams::*member) {
  return {[member](const SimConfig& c) { return format_double(c.mobility.*member); },
          [member](SimConfig& c, const std::string& k, const std::string& v) {
            c.mobility.*member = parse_double(k, v);
          }};
}

Field learning_real(double LearnConfig::*member) {
  return {[member](const SimConfig& c) { return format_double(c.learning.*member); },
          [member](SimConfig& c, const std::string& k, const std::string& v) {
            c.learning.*member = parse_double(k, v);
          }};
}

Field learning_int(int LearnConfig::*member) {
  return {[member](const SimConfig& c) { return std::to_string(c.learning.*member); },
          [member](SimConfig& c, const std::string& k, const std::string& v) {
            c.learning.*member = static_cast<int>(parse_int(k, v));
          }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> f;
    f["seed"] = {[](const SimConfig& c) { return std::to_string(c.seed); },
                 [](SimConfig& c, const std::string& k, const std::string& v) {
                   const long long s = parse_int(k, v);
                   if (s < 0) throw ConfigError(k, "must be non-negative");
                   c.seed = static_cast<std::uint64_t>(s);
                 }};
    f["env.N"] = int_field(&SimConfig::N);
    f["env.M"] = int_field(&SimConfig::M);
    f["env.area_width"] = {
        [](const SimConfig& c) { return format_double(c.area_width); },
        [](SimConfig& c, const std::string& k, const std::string& v) {
          set_area(c, parse_double(k, v), c.area_height);
        }};
    f["env.area_height"] = {
        [](const SimConfig& c) { return format_double(c.area_height); },
        [](SimConfig& c, const std::string& k, const std::string& v) {
          set_area(c, c.area_width, parse_double(k, v));
        }};
    f["env.H"] = real_field(&SimConfig::H);
    f["env.B"] = real_field(&SimConfig::B);
    f["env.V"] = real_field(&SimConfig::V);
    f["env.P_f"] = real_field(&SimConfig::P_f);
    f["env.P_h"] = real_field(&SimConfig::P_h);
    f["env.P_t"] = real_field(&SimConfig::P_t);
    f["env.sigma2"] = real_field(&SimConfig::sigma2);
    f["env.rho0"] = real_field(&SimConfig::rho0);
    f["env.pathloss_exponent"] = real_field(&SimConfig::pathloss_exponent);
    f["env.bandwidth"] = real_field(&SimConfig::bandwidth);
    f["env.gamma_c"] = real_field(&SimConfig::gamma_c);
    f["env.C"] = real_field(&SimConfig::C);
    f["env.f_c"] = real_field(&SimConfig::f_c);
    f["env.N_b"] = real_field(&SimConfig::N_b);
    f["env.mu_max"] = int_field(&SimConfig::mu_max);
    f["env.eta"] = real_field(&SimConfig::eta);
    f["env.beta"] = real_field(&SimConfig::beta);
    f["env.Z"] = int_field(&SimConfig::Z);
    f["env.start_fpap"] = int_field(&SimConfig::start_fpap);
    f["env.max_slots"] = int_field(&SimConfig::max_slots);
    f["env.qos_in_state"] = {
        [](const SimConfig& c) { return std::string(c.qos_in_state ? "true" : "false"); },
        [](SimConfig& c, const std::string& k, const std::string& v) {
          c.qos_in_state = parse_bool(k, v);
        }};

    f["mobility.kappa1"] = mobility_real(&MobilityParams::kappa1);
    f["mobility.kappa2"] = mobility_real(&MobilityParams::kappa2);
    f["mobility.v_bar"] = mobility_real(&MobilityParams::v_bar);
    f["mobility.phi_mean"] = mobility_real(&MobilityParams::phi_mean);
    f["mobility.phi_std"] = mobility_real(&MobilityParams::phi_std);
    f["mobility.psi_mean"] = mobility_real(&MobilityParams::psi_mean);
    f["mobility.psi_std"] = mobility_real(&MobilityParams::psi_std);
    f["mobility.theta_bar"] = {
        [](const SimConfig& c) {
          std::string out;
          for (std::size_t i = 0; i < c.mobility.theta_bar.size(); ++i) {
            if (i) out += ",";
            out += format_double(c.mobility.theta_bar[i]);
          }
          return out;
        },
        [](SimConfig& c, const std::string& k, const std::string& v) {
          c.mobility.theta_bar.clear();
          for (const auto& item : split_list(v)) {
            c.mobility.theta_bar.push_back(parse_double(k, item));
          }
        }};

    f["learning.omega"] = learning_real(&LearnConfig::omega);
    f["learning.lambda"] = learning_real(&LearnConfig::lambda);
    f["learning.epsilon0"] = learning_real(&LearnConfig::epsilon0);
    f["learning.epsilon_min"] = learning_real(&LearnConfig::epsilon_min);
    f["learning.delta"] = learning_real(&LearnConfig::delta);
    f["learning.decay_unit"] = {
        [](const SimConfig& c) {
          return std::string(c.learning.decay_unit == DecayUnit::kStep ? "step" : "episode");
        },
        [](SimConfig& c, const std::string& k, const std::string& v) {
          const std::string t = trim(v);
          if (t == "step") {
            c.learning.decay_unit = DecayUnit::kStep;
          } else if (t == "episode") {
            c.learning.decay_unit = DecayUnit::kEpisode;
          } else {
            throw ConfigError(k, "expected 'step' or 'episode', got '" + v + "'");
          }
        }};
    f["learning.batch_size"] = learning_int(&LearnConfig::batch_size);
    f["learning.replay_capacity"] = learning_int(&LearnConfig::replay_capacity);
    f["learning.sync_interval"] = learning_int(&LearnConfig::sync_interval);
    f["learning.episodes"] = learning_int(&LearnConfig::episodes);
    f["learning.moving_average_window"] = learning_int(&LearnConfig::moving_average_window);
    f["learning.hidden"] = {
        [](const SimConfig& c) {
          std::string out;
          for (std::size_t i = 0; i < c.learning.hidden.size(); ++i) {
            if (i) out += ",";
            out += std::to_string(c.learning.hidden[i]);
          }
          return out;
        },
        [](SimConfig& c, const std::string& k, const std::string& v) {
          c.learning.hidden.clear();
          for (const auto& item : split_list(v)) {
            c.learning.hidden.push_back(static_cast<int>(parse_int(k, item)));
          }
        }};
    return f;
  }();
  return table;
}

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

}  // namespace

int grid_side(int M) {
  if (M <= 0) throw ConfigError("env.M", "must be positive");
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(M))));
  if (side * side != M) {
    throw ConfigError("env.M", "must be a perfect square, got " + std::to_string(M));
  }
  return side;
}

void set_area(SimConfig& cfg, double width, double height) {
  cfg.area_width = width;
  cfg.area_height = height;
  cfg.mobility.area_width = width;
  cfg.mobility.area_height = height;
}

void validate(const SimConfig& cfg) {
  require(cfg.N >= 1, "env.N", "must be at least 1");
  grid_side(cfg.M);
  require(cfg.area_width > 0, "env.area_width", "must be positive");
  require(cfg.area_height > 0, "env.area_height", "must be positive");
  require(cfg.mobility.area_width == cfg.area_width &&
              cfg.mobility.area_height == cfg.area_height,
          "env.area_width", "mobility area out of sync with environment area");
  require(cfg.H > 0, "env.H", "must be positive");
  require(cfg.B > 0, "env.B", "must be positive");
  require(cfg.V > 0, "env.V", "must be positive");
  require(cfg.P_f > 0, "env.P_f", "must be positive");
  require(cfg.P_h > 0, "env.P_h", "must be positive");
  require(cfg.P_t > 0, "env.P_t", "must be positive");
  require(cfg.sigma2 > 0, "env.sigma2", "must be positive");
  require(cfg.rho0 > 0, "env.rho0", "must be positive");
  require(cfg.pathloss_exponent > 0, "env.pathloss_exponent", "must be positive");
  require(cfg.bandwidth > 0, "env.bandwidth", "must be positive");
  require(cfg.gamma_c > 0, "env.gamma_c", "must be positive");
  require(cfg.C > 0, "env.C", "must be positive");
  require(cfg.f_c > 0, "env.f_c", "must be positive");
  require(cfg.N_b > 0, "env.N_b", "must be positive");
  require(cfg.mu_max >= 1, "env.mu_max", "must be at least 1");
  require(cfg.eta > 0, "env.eta", "must be positive");
  require(cfg.beta > 0, "env.beta", "must be positive");
  require(cfg.Z >= 0, "env.Z", "must be non-negative");
  require(cfg.start_fpap >= -1 && cfg.start_fpap < cfg.M, "env.start_fpap",
          "must be -1 (centre) or a valid FPAP index");
  require(cfg.max_slots >= 1, "env.max_slots", "must be at least 1");

  const auto& m = cfg.mobility;
  require(m.kappa1 >= 0 && m.kappa1 <= 1, "mobility.kappa1", "must lie in [0, 1]");
  require(m.kappa2 >= 0 && m.kappa2 <= 1, "mobility.kappa2", "must lie in [0, 1]");
  require(m.v_bar >= 0, "mobility.v_bar", "must be non-negative");
  require(m.phi_std >= 0, "mobility.phi_std", "must be non-negative");
  require(m.psi_std >= 0, "mobility.psi_std", "must be non-negative");
  require(m.theta_bar.empty() || static_cast<int>(m.theta_bar.size()) == cfg.N,
          "mobility.theta_bar", "must be empty or hold exactly N directions");

  const auto& l = cfg.learning;
  require(l.omega >= 0 && l.omega <= 1, "learning.omega", "must lie in [0, 1]");
  require(l.lambda > 0 && l.lambda <= 1, "learning.lambda", "must lie in (0, 1]");
  require(l.epsilon0 >= 0 && l.epsilon0 <= 1, "learning.epsilon0", "must lie in [0, 1]");
  require(l.epsilon_min >= 0 && l.epsilon_min <= l.epsilon0, "learning.epsilon_min",
          "must lie in [0, epsilon0]");
  require(l.delta >= 0, "learning.delta", "must be non-negative");
  require(l.batch_size >= 1, "learning.batch_size", "must be at least 1");
  require(l.replay_capacity >= l.batch_size, "learning.replay_capacity",
          "must be at least batch_size");
  require(l.sync_interval >= 1, "learning.sync_interval", "must be at least 1");
  require(l.episodes >= 0, "learning.episodes", "must be non-negative");
  require(l.moving_average_window >= 1, "learning.moving_average_window",
          "must be at least 1");
  require(!l.hidden.empty(), "learning.hidden", "needs at least one hidden layer");
  for (int h : l.hidden) require(h >= 1, "learning.hidden", "layer widths must be positive");
}

std::vector<std::string> feasibility_warnings(const SimConfig& cfg) {
  std::vector<std::string> out;
  // Expected tasks per served slot is mu_max / 2, so at least
  // ceil(Z / (mu_max / 2)) slots per user are needed on average.
  const double expected_mu = cfg.mu_max / 2.0;
  const double slots_needed = cfg.N * std::ceil(cfg.Z / expected_mu);
  const double worst_compute = cfg.gamma_c * cfg.C * cfg.f_c * cfg.f_c * cfg.mu_max * cfg.N_b;
  const double typical_slot = worst_compute;
  if (typical_slot > 0 && cfg.B / typical_slot < slots_needed) {
    out.push_back("QoS threshold Z=" + std::to_string(cfg.Z) +
                  " may be infeasible: battery affords about " +
                  std::to_string(static_cast<int>(cfg.B / typical_slot)) +
                  " worst-case slots, about " + std::to_string(static_cast<int>(slots_needed)) +
                  " are needed");
  }
  return out;
}

void set_field(SimConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = fields();
  const auto it = table.find(trim(key));
  if (it == table.end()) throw ConfigError(trim(key), "unknown configuration key");
  it->second.set(cfg, it->first, value);
}

std::map<std::string, std::string> to_key_values(const SimConfig& cfg) {
  std::map<std::string, std::string> out;
  for (const auto& [key, field] : fields()) out[key] = field.get(cfg);
  return out;
}

SimConfig parse_config(const std::string& text, SimConfig base) {
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    set_field(base, key, line.substr(eq + 1));
  }
  return base;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string to_config_text(const SimConfig& cfg) {
  std::string out;
  for (const auto& [key, value] : to_key_values(cfg)) {
    out += key + " = " + value + "\n";
  }
  return out;
}

}  // namespace uavmec
