#include "config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "rng.hpp"
#include "tensor_io.hpp"

namespace hammer {

RunMode parse_run_mode(const std::string& name) {
  if (name == "hammer") return RunMode::kHammer;
  if (name == "independent") return RunMode::kIndependent;
  if (name == "random_message") return RunMode::kRandomMessage;
  if (name == "centralized") return RunMode::kCentralized;
  throw std::invalid_argument("unknown mode '" + name +
                           "' (expected hammer, independent, random_message, or centralized)");
}

EnvKind parse_env_kind(const std::string& name) {
  if (name == "nav") return EnvKind::kNav;
  if (name == "nav_continuous") return EnvKind::kNavContinuous;
  throw std::invalid_argument("unknown env '" + name + "' (expected nav or nav_continuous)");
}

std::string run_mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::kHammer: return "hammer";
    case RunMode::kIndependent: return "independent";
    case RunMode::kRandomMessage: return "random_message";
    case RunMode::kCentralized: return "centralized";
  }
  throw std::logic_error("bad RunMode");
}

std::string env_kind_name(EnvKind env) {
  switch (env) {
    case EnvKind::kNav: return "nav";
    case EnvKind::kNavContinuous: return "nav_continuous";
  }
  throw std::logic_error("bad EnvKind");
}

ExperimentConfig::ExperimentConfig() {
  central.lr = 3e-4;
  central.batch_size = 2000;
  local.lr = 1e-2;
  local.batch_size = 4000;
}

void ExperimentConfig::resolve() {
  if (n_agents < 1) throw std::runtime_error("n_agents must be >= 1");
  if (message_length == 0) message_length = n_agents <= 3 ? 4 : 8;
  if (message_length < 1) throw std::runtime_error("message_length must be >= 1");
  if (total_episodes < 0) throw std::runtime_error("total_episodes must be >= 0");
  if (hidden_units < 1) throw std::runtime_error("hidden_units must be >= 1");
  if (checkpoint_every < 0) throw std::runtime_error("checkpoint_every must be >= 0");
  if (eval_episodes < 0) throw std::runtime_error("eval_episodes must be >= 0");
  if (env == EnvKind::kNavContinuous && n_agents < 1)
    throw std::runtime_error("nav_continuous needs at least one agent");
  auto check_hp = [](const PpoHyperparams& hp, const std::string& prefix) {
    if (hp.gamma < 0.0 || hp.gamma > 1.0)
      throw std::runtime_error(prefix + ".gamma must be in [0,1]");
    if (hp.clip_epsilon <= 0.0) throw std::runtime_error(prefix + ".clip_epsilon must be > 0");
    if (hp.lr < 0.0) throw std::runtime_error(prefix + ".lr must be >= 0");
    if (hp.update_epochs < 1) throw std::runtime_error(prefix + ".update_epochs must be >= 1");
    if (hp.minibatch_size < 1) throw std::runtime_error(prefix + ".minibatch_size must be >= 1");
    if (hp.batch_size < 1) throw std::runtime_error(prefix + ".batch_size must be >= 1");
    if (hp.max_grad_norm <= 0.0) throw std::runtime_error(prefix + ".max_grad_norm must be > 0");
  };
  check_hp(central, "central");
  check_hp(local, "local");
}

namespace {

// --- key table ---

struct KeyEntry {
  std::string name;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

int parse_int(const std::string& key, const std::string& value) {
  int out = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || p != value.data() + value.size())
    throw std::invalid_argument("bad integer for '" + key + "': '" + value + "'");
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || p != value.data() + value.size())
    throw std::invalid_argument("bad unsigned integer for '" + key + "': '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("bad boolean for '" + key + "': '" + value + "'");
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    return parse_double(value);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad real for '" + key + "': '" + value + "'");
  }
}

void append_hp_keys(std::vector<KeyEntry>& keys, const std::string& prefix,
                    PpoHyperparams ExperimentConfig::* member) {
  auto real_key = [&](const std::string& field, double PpoHyperparams::* fp) {
    keys.push_back({prefix + "." + field,
                    [member, fp](const ExperimentConfig& c) { return format_double(c.*member.*fp); },
                    [member, fp, field](ExperimentConfig& c, const std::string& v) {
                      c.*member.*fp = parse_real(field, v);
                    }});
  };
  auto int_key = [&](const std::string& field, int PpoHyperparams::* fp) {
    keys.push_back({prefix + "." + field,
                    [member, fp](const ExperimentConfig& c) { return std::to_string(c.*member.*fp); },
                    [member, fp, field](ExperimentConfig& c, const std::string& v) {
                      c.*member.*fp = parse_int(field, v);
                    }});
  };
  real_key("gamma", &PpoHyperparams::gamma);
  real_key("clip_epsilon", &PpoHyperparams::clip_epsilon);
  real_key("lr", &PpoHyperparams::lr);
  int_key("update_epochs", &PpoHyperparams::update_epochs);
  int_key("minibatch_size", &PpoHyperparams::minibatch_size);
  real_key("value_coef", &PpoHyperparams::value_coef);
  real_key("entropy_coef", &PpoHyperparams::entropy_coef);
  int_key("batch_size", &PpoHyperparams::batch_size);
  real_key("max_grad_norm", &PpoHyperparams::max_grad_norm);
}

const std::vector<KeyEntry>& key_table() {
  static const std::vector<KeyEntry> table = [] {
    std::vector<KeyEntry> keys;
    keys.push_back({"mode",
                    [](const ExperimentConfig& c) { return run_mode_name(c.mode); },
                    [](ExperimentConfig& c, const std::string& v) { c.mode = parse_run_mode(v); }});
    keys.push_back({"env",
                    [](const ExperimentConfig& c) { return env_kind_name(c.env); },
                    [](ExperimentConfig& c, const std::string& v) { c.env = parse_env_kind(v); }});
    keys.push_back({"n_agents",
                    [](const ExperimentConfig& c) { return std::to_string(c.n_agents); },
                    [](ExperimentConfig& c, const std::string& v) {
                      c.n_agents = parse_int("n_agents", v);
                    }});
    keys.push_back({"message_length",
                    [](const ExperimentConfig& c) { return std::to_string(c.message_length); },
                    [](ExperimentConfig& c, const std::string& v) {
                      c.message_length = parse_int("message_length", v);
                    }});
    keys.push_back({"total_episodes",
                    [](const ExperimentConfig& c) { return std::to_string(c.total_episodes); },
                    [](ExperimentConfig& c, const std::string& v) {
                      c.total_episodes = parse_int("total_episodes", v);
                    }});
    keys.push_back({"seed",
                    [](const ExperimentConfig& c) { return std::to_string(c.seed); },
                    [](ExperimentConfig& c, const std::string& v) {
                      c.seed = parse_u64("seed", v);
                    }});
    keys.push_back({"hidden_units",
                    [](const ExperimentConfig& c) { return std::to_string(c.hidden_units); },
                    [](ExperimentConfig& c, const std::string& v) {
                      c.hidden_units = parse_int("hidden_units", v);
                    }});
    keys.push_back({"checkpoint_every",
                    [](const ExperimentConfig& c) { return std::to_string(c.checkpoint_every); },
                    [](ExperimentConfig& c, const std::string& v) {
                      c.checkpoint_every = parse_int("checkpoint_every", v);
                    }});
    keys.push_back({"eval_episodes",
                    [](const ExperimentConfig& c) { return std::to_string(c.eval_episodes); },
                    [](ExperimentConfig& c, const std::string& v) {
                      c.eval_episodes = parse_int("eval_episodes", v);
                    }});
    keys.push_back({"eval_stochastic",
                    [](const ExperimentConfig& c) { return c.eval_stochastic ? "true" : "false"; },
                    [](ExperimentConfig& c, const std::string& v) {
                      c.eval_stochastic = parse_bool("eval_stochastic", v);
                    }});
    keys.push_back({"output_dir",
                    [](const ExperimentConfig& c) { return c.output_dir; },
                    [](ExperimentConfig& c, const std::string& v) { c.output_dir = v; }});
    append_hp_keys(keys, "central", &ExperimentConfig::central);
    append_hp_keys(keys, "local", &ExperimentConfig::local);
    return keys;
  }();
  return table;
}

const KeyEntry& find_key(const std::string& key) {
  for (const KeyEntry& entry : key_table())
    if (entry.name == key) return entry;
  throw std::invalid_argument("unknown config key '" + key + "'");
}

std::string strip(const std::string& s) {
  const char* ws = " \t\r";
  auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace

void set_config_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  find_key(key).set(cfg, value);
}

std::string get_config_key(const ExperimentConfig& cfg, const std::string& key) {
  return find_key(key).get(cfg);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const KeyEntry& entry : key_table()) {
    out += entry.name;
    out += " = ";
    out += entry.get(cfg);
    out += '\n';
  }
  return out;
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = strip(line);
    if (s.empty() || s[0] == '#') continue;
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": missing '=' in '" + s + "'");
    std::string key = strip(s.substr(0, eq));
    std::string value = strip(s.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
    try {
      set_config_key(cfg, key, value);
    } catch (const std::exception& e) {
      throw std::runtime_error("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config_text(buf.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void save_config_file(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write config file '" + path + "'");
  out << serialize_config(cfg);
  if (!out) throw std::runtime_error("short write to '" + path + "'");
}

std::string config_fingerprint(const ExperimentConfig& cfg) {
  std::uint64_t h = fnv1a64(serialize_config(cfg));
  char buf[17];
  static const char* hex = "0123456789abcdef";
  for (int i = 0; i < 16; ++i) buf[i] = hex[(h >> (60 - 4 * i)) & 0xf];
  buf[16] = '\0';
  return std::string(buf);
}

std::string run_name(const ExperimentConfig& cfg) {
  std::string name = run_mode_name(cfg.mode) + "_" + env_kind_name(cfg.env) + "_n" +
                     std::to_string(cfg.n_agents);
  if (cfg.mode == RunMode::kHammer || cfg.mode == RunMode::kRandomMessage)
    name += "_m" + std::to_string(cfg.message_length);
  name += "_seed" + std::to_string(cfg.seed);
  return name;
}

}  // namespace hammer
