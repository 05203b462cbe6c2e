#pragma once

#include <cstdint>
#include <string>

#include "ppo.hpp"

namespace hammer {

enum class RunMode { kHammer, kIndependent, kRandomMessage, kCentralized };
enum class EnvKind { kNav, kNavContinuous };

RunMode parse_run_mode(const std::string& name);    // throws on unknown names
EnvKind parse_env_kind(const std::string& name);
std::string run_mode_name(RunMode mode);
std::string env_kind_name(EnvKind env);

// Everything a run needs, resolvable to a canonical flat key=value text form.
// message_length == 0 means "pick from team size" and is filled by resolve().
struct ExperimentConfig {
  RunMode mode = RunMode::kHammer;
  EnvKind env = EnvKind::kNav;
  int n_agents = 3;
  int message_length = 0;
  int total_episodes = 30000;
  std::uint64_t seed = 1;
  int hidden_units = 64;
  int checkpoint_every = 0;  // additionally checkpoint every k episodes; 0 = final only
  int eval_episodes = 20;
  bool eval_stochastic = false;
  std::string output_dir = "runs";
  PpoHyperparams central;
  PpoHyperparams local;

  ExperimentConfig();

  // Fills derived fields and validates ranges; throws std::runtime_error with
  // the offending key on bad values.
  void resolve();
};

// Canonical serialization: fixed key order, `key = value` lines, reals in
// shortest round-trip form. parse(serialize(c)) == c byte-for-byte when
// re-serialized.
std::string serialize_config(const ExperimentConfig& cfg);
ExperimentConfig parse_config_text(const std::string& text);  // errors carry line numbers
ExperimentConfig load_config_file(const std::string& path);
void save_config_file(const ExperimentConfig& cfg, const std::string& path);

// Single key access shared by the parser, the CLI overrides, and the C API.
void set_config_key(ExperimentConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_key(const ExperimentConfig& cfg, const std::string& key);

// Stable hex digest of the canonical text, recorded in manifests and sweep
// summaries so runs are attributable to an exact configuration.
std::string config_fingerprint(const ExperimentConfig& cfg);

// "hammer_nav_n3_m4_seed7"-style directory stem.
std::string run_name(const ExperimentConfig& cfg);

}  // namespace hammer
