#include "hammer/hammer.h"

#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"
#include "hammer.hpp"
#include "metrics.hpp"
#include "mlp.hpp"
#include "nav_env.hpp"
#include "plot.hpp"
#include "ppo.hpp"
#include "rng.hpp"
#include "sweep.hpp"

// Opaque handle definitions. Kept as plain structs wrapping the C++ types so
// the library ABI never exposes Eigen or the STL.
struct hmr_config {
  hammer::ExperimentConfig cfg;
};

struct hmr_env {
  hammer::NavWorld world;
  hammer::Rng rng;
  bool live = false;  // reset() has produced a usable state
};

namespace {

thread_local std::string g_last_error;

void set_last_error(const std::string& what) { g_last_error = what; }

template <typename Fn>
hmr_status guarded(Fn&& fn) noexcept {
  try {
    return fn();
  } catch (const hammer::PpoNumericError& e) {
    set_last_error(e.what());
    return HMR_ERR_NUMERIC;
  } catch (const std::invalid_argument& e) {
    set_last_error(e.what());
    return HMR_ERR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    set_last_error(e.what());
    return HMR_ERR_RUNTIME;
  } catch (...) {
    set_last_error("unknown error");
    return HMR_ERR_INTERNAL;
  }
}

hmr_status fail_invalid(const char* what) {
  set_last_error(what);
  return HMR_ERR_INVALID_ARGUMENT;
}

hmr_status copy_out(const std::string& value, char* buf, size_t buf_size) {
  if (buf == nullptr || buf_size == 0) return fail_invalid("output buffer is null or empty");
  if (value.size() + 1 > buf_size) {
    set_last_error("buffer of " + std::to_string(buf_size) + " bytes cannot hold " +
                   std::to_string(value.size() + 1));
    return HMR_ERR_BUFFER_TOO_SMALL;
  }
  std::memcpy(buf, value.c_str(), value.size() + 1);
  return HMR_OK;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

extern "C" {

const char* hmr_status_name(hmr_status status) {
  switch (status) {
    case HMR_OK: return "ok";
    case HMR_ERR_INVALID_ARGUMENT: return "invalid argument";
    case HMR_ERR_RUNTIME: return "runtime error";
    case HMR_ERR_NUMERIC: return "numeric error";
    case HMR_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case HMR_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* hmr_last_error(void) { return g_last_error.c_str(); }

const char* hmr_version(void) {
  static const std::string version = hammer::version_string();
  return version.c_str();
}

/* --- configuration ------------------------------------------------------ */

hmr_status hmr_config_create(hmr_config** out) {
  if (out == nullptr) return fail_invalid("out is null");
  return guarded([&] {
    *out = new hmr_config{};
    return HMR_OK;
  });
}

void hmr_config_free(hmr_config* cfg) { delete cfg; }

hmr_status hmr_config_load(const char* path, hmr_config** out) {
  if (path == nullptr || out == nullptr) return fail_invalid("path or out is null");
  return guarded([&] {
    auto* handle = new hmr_config{hammer::load_config_file(path)};
    *out = handle;
    return HMR_OK;
  });
}

hmr_status hmr_config_save(const hmr_config* cfg, const char* path) {
  if (cfg == nullptr || path == nullptr) return fail_invalid("cfg or path is null");
  return guarded([&] {
    hammer::save_config_file(cfg->cfg, path);
    return HMR_OK;
  });
}

hmr_status hmr_config_set(hmr_config* cfg, const char* key, const char* value) {
  if (cfg == nullptr || key == nullptr || value == nullptr)
    return fail_invalid("cfg, key, or value is null");
  return guarded([&] {
    hammer::set_config_key(cfg->cfg, key, value);
    return HMR_OK;
  });
}

hmr_status hmr_config_get(const hmr_config* cfg, const char* key, char* buf, size_t buf_size) {
  if (cfg == nullptr || key == nullptr) return fail_invalid("cfg or key is null");
  std::string value;
  hmr_status status = guarded([&] {
    value = hammer::get_config_key(cfg->cfg, key);
    return HMR_OK;
  });
  if (status != HMR_OK) return status;
  return copy_out(value, buf, buf_size);
}

/* --- training ------------------------------------------------------------ */

hmr_status hmr_train(const hmr_config* cfg, char* run_dir_buf, size_t buf_size) {
  if (cfg == nullptr) return fail_invalid("cfg is null");
  std::string run_dir;
  hmr_status status = guarded([&] {
    run_dir = hammer::train_and_write(cfg->cfg);
    return HMR_OK;
  });
  if (status != HMR_OK) return status;
  if (run_dir_buf == nullptr) return HMR_OK;
  return copy_out(run_dir, run_dir_buf, buf_size);
}

hmr_status hmr_sweep(const hmr_config* base, const char* axis, const char* values,
                     const char* seeds, const char* sweep_dir, int jobs, int score_window,
                     int* rows_out, int* failures_out) {
  if (base == nullptr || axis == nullptr || values == nullptr || seeds == nullptr ||
      sweep_dir == nullptr)
    return fail_invalid("base, axis, values, seeds, or sweep_dir is null");
  return guarded([&] {
    std::vector<std::uint64_t> seed_list;
    for (const std::string& s : split_commas(seeds)) {
      if (s.empty()) throw std::invalid_argument("empty seed in list");
      seed_list.push_back(std::stoull(s));
    }
    hammer::SweepOutcome outcome = hammer::run_sweep(
        base->cfg, axis, split_commas(values), seed_list, sweep_dir, jobs,
        score_window > 0 ? score_window : 500);
    if (rows_out) *rows_out = static_cast<int>(outcome.rows.size());
    if (failures_out) *failures_out = static_cast<int>(outcome.failures.size());
    return HMR_OK;
  });
}

hmr_status hmr_aggregate(const char* const* run_dirs, size_t n_dirs, int score_window,
                         double* mean_out, double* stderr_out) {
  if (run_dirs == nullptr || n_dirs == 0) return fail_invalid("run_dirs is null or empty");
  return guarded([&] {
    std::vector<std::string> dirs;
    dirs.reserve(n_dirs);
    for (size_t i = 0; i < n_dirs; ++i) {
      if (run_dirs[i] == nullptr) throw std::invalid_argument("run_dirs entry is null");
      dirs.emplace_back(run_dirs[i]);
    }
    hammer::AggregateResult agg =
        hammer::aggregate_run_dirs("aggregate", dirs, score_window > 0 ? score_window : 500);
    if (mean_out) *mean_out = agg.mean;
    if (stderr_out) *stderr_out = agg.stderr_;
    return HMR_OK;
  });
}

hmr_status hmr_plot(const char* const* csv_paths, const char* const* labels, size_t n_series,
                    int window, const char* title, const char* out_path) {
  if (csv_paths == nullptr || n_series == 0 || out_path == nullptr)
    return fail_invalid("csv_paths is null/empty or out_path is null");
  return guarded([&] {
    std::vector<hammer::PlotSeries> series;
    series.reserve(n_series);
    for (size_t i = 0; i < n_series; ++i) {
      if (csv_paths[i] == nullptr) throw std::invalid_argument("csv_paths entry is null");
      hammer::PlotSeries s;
      s.values = hammer::reward_column(hammer::read_metrics(csv_paths[i]));
      if (labels != nullptr && labels[i] != nullptr) {
        s.label = labels[i];
      } else {
        s.label = std::filesystem::path(csv_paths[i]).parent_path().filename().string();
        if (s.label.empty()) s.label = std::filesystem::path(csv_paths[i]).stem().string();
      }
      series.push_back(std::move(s));
    }
    hammer::PlotOptions opts;
    opts.smoothing_window = window > 0 ? window : 1;
    if (title != nullptr) opts.title = title;
    hammer::write_svg_plot(series, opts, out_path);
    return HMR_OK;
  });
}

hmr_status hmr_gradcheck(unsigned long long seed, int trials, double* max_err_out) {
  return guarded([&] {
    double worst = hammer::gradcheck_random_nets(seed, trials);
    if (max_err_out) *max_err_out = worst;
    if (worst >= 1e-4) {
      set_last_error("gradient check failed: worst relative error " +
                     hammer::format_double(worst));
      return HMR_ERR_NUMERIC;
    }
    return HMR_OK;
  });
}

/* --- environment --------------------------------------------------------- */

hmr_status hmr_env_create(int n_agents, unsigned long long seed, hmr_env** out) {
  if (out == nullptr) return fail_invalid("out is null");
  return guarded([&] {
    *out = new hmr_env{hammer::make_nav_world(n_agents),
                       hammer::named_stream(seed, "env"), false};
    return HMR_OK;
  });
}

void hmr_env_free(hmr_env* env) { delete env; }

hmr_status hmr_env_reset(hmr_env* env) {
  if (env == nullptr) return fail_invalid("env is null");
  return guarded([&] {
    hammer::nav_reset(env->world, env->rng);
    env->live = true;
    return HMR_OK;
  });
}

hmr_status hmr_env_obs_dim(const hmr_env* env, int* out) {
  if (env == nullptr || out == nullptr) return fail_invalid("env or out is null");
  *out = hammer::nav_obs_dim(env->world.n_agents, env->world.n_landmarks);
  return HMR_OK;
}

hmr_status hmr_env_observe(const hmr_env* env, int agent, double* buf, size_t buf_len) {
  if (env == nullptr || buf == nullptr) return fail_invalid("env or buf is null");
  if (!env->live) return fail_invalid("environment has not been reset");
  if (agent < 0 || agent >= env->world.n_agents) return fail_invalid("agent index out of range");
  return guarded([&] {
    hammer::Vec obs = hammer::observe(env->world, agent);
    if (buf_len < static_cast<size_t>(obs.size())) {
      set_last_error("observation buffer too short");
      return HMR_ERR_BUFFER_TOO_SMALL;
    }
    std::memcpy(buf, obs.data(), sizeof(double) * obs.size());
    return HMR_OK;
  });
}

hmr_status hmr_env_step(hmr_env* env, const int* actions, size_t n_actions,
                        double* team_reward_out, int* collisions_out, int* done_out) {
  if (env == nullptr || actions == nullptr) return fail_invalid("env or actions is null");
  if (!env->live) return fail_invalid("environment has not been reset");
  if (n_actions != static_cast<size_t>(env->world.n_agents))
    return fail_invalid("one action per agent is required");
  return guarded([&] {
    std::vector<int> acts(actions, actions + n_actions);
    hammer::StepResult step = hammer::nav_step(env->world, acts);
    if (team_reward_out) *team_reward_out = step.rewards[0];
    if (collisions_out) *collisions_out = step.collisions;
    if (done_out) *done_out = step.done ? 1 : 0;
    if (step.done) env->live = false;
    return HMR_OK;
  });
}

} /* extern "C" */
