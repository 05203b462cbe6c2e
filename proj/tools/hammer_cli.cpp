// Command-line front end. Talks to the training library exclusively through
// the public C interface.
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hammer/hammer.h"

namespace {

struct ConfigDeleter {
  void operator()(hmr_config* cfg) const { hmr_config_free(cfg); }
};
using ConfigPtr = std::unique_ptr<hmr_config, ConfigDeleter>;

[[noreturn]] void die(const std::string& context) {
  std::fprintf(stderr, "error: %s: %s\n", context.c_str(), hmr_last_error());
  std::exit(1);
}

void check(hmr_status status, const std::string& context) {
  if (status != HMR_OK) die(context);
}

// Flag overrides shared by `train` and `sweep`. Each maps onto a config key;
// values set on the command line win over the config file.
struct Overrides {
  std::vector<std::pair<std::string, std::string>> pairs;

  void add_option(CLI::App* cmd, const std::string& flag, const std::string& key,
                  const std::string& help) {
    auto setter = [this, key](const std::string& value) {
      pairs.emplace_back(key, value);
      return true;
    };
    cmd->add_option_function<std::string>(flag, setter, help);
  }
};

ConfigPtr build_config(const std::string& config_path, const Overrides& overrides,
                       const std::vector<std::string>& sets) {
  hmr_config* raw = nullptr;
  if (config_path.empty()) {
    check(hmr_config_create(&raw), "creating config");
  } else {
    check(hmr_config_load(config_path.c_str(), &raw), "loading " + config_path);
  }
  ConfigPtr cfg(raw);
  for (const auto& [key, value] : overrides.pairs)
    check(hmr_config_set(cfg.get(), key.c_str(), value.c_str()), "setting " + key);
  for (const std::string& kv : sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      std::exit(1);
    }
    std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    check(hmr_config_set(cfg.get(), key.c_str(), value.c_str()), "setting " + key);
  }
  return cfg;
}

void add_override_flags(CLI::App* cmd, Overrides& ov) {
  ov.add_option(cmd, "--mode", "mode", "hammer | independent | random_message | centralized");
  ov.add_option(cmd, "--env", "env", "nav | nav_continuous");
  ov.add_option(cmd, "--n-agents", "n_agents", "team size (landmark count follows)");
  ov.add_option(cmd, "--message-length", "message_length",
                "per-agent message size; 0 picks 4 (n<=3) or 8");
  ov.add_option(cmd, "--episodes", "total_episodes", "training episodes");
  ov.add_option(cmd, "--seed", "seed", "master seed (derives all rng streams)");
  ov.add_option(cmd, "--hidden-units", "hidden_units", "hidden layer width");
  ov.add_option(cmd, "--output-dir", "output_dir", "parent directory for run output");
  ov.add_option(cmd, "--checkpoint-every", "checkpoint_every",
                "extra checkpoint interval in episodes (0 = final only)");
  ov.add_option(cmd, "--eval-episodes", "eval_episodes", "greedy evaluation episodes after training");
}

std::string join_u64(const std::vector<std::uint64_t>& xs) {
  std::string out;
  for (std::uint64_t x : xs) {
    if (!out.empty()) out += ',';
    out += std::to_string(x);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HAMMER: central-agent message passing over independent PPO learners"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.set_version_flag("--version", std::string(hmr_version()));

  // --- train ---
  auto* train = app.add_subcommand("train", "train one run and write its run directory");
  std::string train_config;
  std::vector<std::string> train_sets;
  Overrides train_ov;
  train->add_option("--config", train_config, "config file (flat key = value lines)");
  add_override_flags(train, train_ov);
  train->add_option("--set", train_sets, "extra key=value override (repeatable)");

  // --- sweep ---
  auto* sweep = app.add_subcommand("sweep", "train a grid over one axis and aggregate");
  std::string sweep_config, axis, values_csv, sweep_dir = "sweeps";
  std::vector<std::string> sweep_sets;
  std::vector<std::uint64_t> seed_list;
  int seed_count = 3;
  std::uint64_t first_seed = 1;
  int jobs = 1, sweep_window = 500;
  Overrides sweep_ov;
  sweep->add_option("--config", sweep_config, "base config file");
  sweep->add_option("--axis", axis, "message-length | mode | n-agents")->required();
  sweep->add_option("--values", values_csv, "comma-separated axis values")->required();
  sweep->add_option("--seeds", seed_count, "number of seeds (first-seed, first-seed+1, ...)");
  sweep->add_option("--seed-list", seed_list, "explicit seeds (overrides --seeds)")->delimiter(',');
  sweep->add_option("--first-seed", first_seed, "first seed when using --seeds");
  sweep->add_option("--sweep-dir", sweep_dir, "output directory for the sweep");
  sweep->add_option("--jobs", jobs, "parallel training jobs");
  sweep->add_option("--window", sweep_window, "episodes in the final-score window");
  add_override_flags(sweep, sweep_ov);
  sweep->add_option("--set", sweep_sets, "extra key=value override (repeatable)");

  // --- aggregate ---
  auto* aggregate = app.add_subcommand("aggregate", "mean/stderr of finished run directories");
  std::vector<std::string> agg_dirs;
  int agg_window = 500;
  aggregate->add_option("run_dirs", agg_dirs, "run directories with metrics.csv")->required();
  aggregate->add_option("--window", agg_window, "episodes in the final-score window");

  // --- gradcheck ---
  auto* gradcheck = app.add_subcommand("gradcheck", "verify analytic gradients against finite differences");
  int gc_trials = 100;
  std::uint64_t gc_seed = 12345;
  gradcheck->add_option("--trials", gc_trials, "number of random networks");
  gradcheck->add_option("--seed", gc_seed, "rng seed for network shapes");

  // --- plot ---
  auto* plot = app.add_subcommand("plot", "render smoothed learning curves to SVG");
  std::vector<std::string> plot_csvs, plot_labels;
  std::string plot_out, plot_title;
  int plot_window = 500;
  plot->add_option("csvs", plot_csvs, "metrics.csv files")->required();
  plot->add_option("--out", plot_out, "output SVG path")->required();
  plot->add_option("--label", plot_labels, "series label (repeatable, pairs with csvs)");
  plot->add_option("--title", plot_title, "chart title");
  plot->add_option("--window", plot_window, "trailing-mean window");

  CLI11_PARSE(app, argc, argv);

  if (train->parsed()) {
    ConfigPtr cfg = build_config(train_config, train_ov, train_sets);
    char run_dir[4096];
    check(hmr_train(cfg.get(), run_dir, sizeof(run_dir)), "training");
    std::printf("%s\n", run_dir);
    return 0;
  }

  if (sweep->parsed()) {
    ConfigPtr cfg = build_config(sweep_config, sweep_ov, sweep_sets);
    if (seed_list.empty()) {
      if (seed_count < 1) {
        std::fprintf(stderr, "error: --seeds must be >= 1\n");
        return 1;
      }
      for (int i = 0; i < seed_count; ++i) seed_list.push_back(first_seed + static_cast<std::uint64_t>(i));
    }
    std::string seeds_csv = join_u64(seed_list);
    int rows = 0, failures = 0;
    check(hmr_sweep(cfg.get(), axis.c_str(), values_csv.c_str(), seeds_csv.c_str(),
                    sweep_dir.c_str(), jobs, sweep_window, &rows, &failures),
          "sweeping " + axis);
    std::printf("%s/summary.csv: %d aggregate rows, %d failed runs\n", sweep_dir.c_str(), rows,
                failures);
    return failures == 0 ? 0 : 2;
  }

  if (aggregate->parsed()) {
    std::vector<const char*> dirs;
    dirs.reserve(agg_dirs.size());
    for (const std::string& d : agg_dirs) dirs.push_back(d.c_str());
    double mean = 0.0, stderr_val = 0.0;
    check(hmr_aggregate(dirs.data(), dirs.size(), agg_window, &mean, &stderr_val), "aggregating");
    std::printf("runs %zu mean %.17g stderr %.17g\n", dirs.size(), mean, stderr_val);
    return 0;
  }

  if (gradcheck->parsed()) {
    double worst = 0.0;
    hmr_status status = hmr_gradcheck(gc_seed, gc_trials, &worst);
    if (status == HMR_OK) {
      std::printf("gradcheck ok: %d networks, max relative error %.3g\n", gc_trials, worst);
      return 0;
    }
    if (status == HMR_ERR_NUMERIC) {
      std::fprintf(stderr, "gradcheck FAILED: max relative error %.3g (limit 1e-4)\n", worst);
      return 1;
    }
    die("gradcheck");
  }

  if (plot->parsed()) {
    if (!plot_labels.empty() && plot_labels.size() != plot_csvs.size()) {
      std::fprintf(stderr, "error: got %zu labels for %zu csvs\n", plot_labels.size(),
                   plot_csvs.size());
      return 1;
    }
    std::vector<const char*> csvs, labels;
    for (const std::string& p : plot_csvs) csvs.push_back(p.c_str());
    for (const std::string& l : plot_labels) labels.push_back(l.c_str());
    check(hmr_plot(csvs.data(), labels.empty() ? nullptr : labels.data(), csvs.size(),
                   plot_window, plot_title.c_str(), plot_out.c_str()),
          "plotting");
    std::printf("%s\n", plot_out.c_str());
    return 0;
  }

  return 0;
}
