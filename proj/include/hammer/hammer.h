/* C interface to the hammer training library.
 *
 * Conventions:
 *   - Every fallible call returns an hmr_status; HMR_OK is 0.
 *   - On failure, hmr_last_error() returns a thread-local description of the
 *     most recent error from this thread. The pointer stays valid until the
 *     next failing call on the same thread.
 *   - String outputs copy into caller buffers and are always NUL-terminated;
 *     HMR_ERR_BUFFER_TOO_SMALL is returned when they do not fit.
 *   - Handles are opaque; free functions accept NULL.
 */
#ifndef HAMMER_HAMMER_H_
#define HAMMER_HAMMER_H_

#include <stddef.h>

#if defined(_WIN32)
#define HMR_API __declspec(dllexport)
#else
#define HMR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hmr_status {
  HMR_OK = 0,
  HMR_ERR_INVALID_ARGUMENT = 1, /* NULL handle, bad key, out-of-range value */
  HMR_ERR_RUNTIME = 2,          /* I/O failures, malformed files, failed runs */
  HMR_ERR_NUMERIC = 3,          /* non-finite loss or gradient during training */
  HMR_ERR_BUFFER_TOO_SMALL = 4,
  HMR_ERR_INTERNAL = 5,
} hmr_status;

HMR_API const char* hmr_status_name(hmr_status status);
HMR_API const char* hmr_last_error(void);
HMR_API const char* hmr_version(void);

/* --- configuration ------------------------------------------------------ */

typedef struct hmr_config hmr_config;

/* Fresh config with default hyperparameters. */
HMR_API hmr_status hmr_config_create(hmr_config** out);
HMR_API void hmr_config_free(hmr_config* cfg);

HMR_API hmr_status hmr_config_load(const char* path, hmr_config** out);
HMR_API hmr_status hmr_config_save(const hmr_config* cfg, const char* path);

/* Keys are the flat names used in config files ("mode", "n_agents",
 * "local.lr", ...). Values are parsed/rendered exactly as in the file
 * format. */
HMR_API hmr_status hmr_config_set(hmr_config* cfg, const char* key, const char* value);
HMR_API hmr_status hmr_config_get(const hmr_config* cfg, const char* key, char* buf,
                                  size_t buf_size);

/* --- training ------------------------------------------------------------ */

/* Runs a full training job and writes the run directory (resolved config,
 * metrics.csv, checkpoints, manifest). The directory path is copied into
 * run_dir_buf when given. */
HMR_API hmr_status hmr_train(const hmr_config* cfg, char* run_dir_buf, size_t buf_size);

/* Sweeps one axis ("message-length", "mode", or "n-agents") over
 * comma-separated values and seeds, training every cell under sweep_dir and
 * writing summary.csv. Per-cell failures are isolated and counted, not
 * fatal. */
HMR_API hmr_status hmr_sweep(const hmr_config* base, const char* axis, const char* values,
                             const char* seeds, const char* sweep_dir, int jobs,
                             int score_window, int* rows_out, int* failures_out);

/* Mean and standard error of the final score (mean reward over the last
 * score_window episodes) across finished run directories. */
HMR_API hmr_status hmr_aggregate(const char* const* run_dirs, size_t n_dirs, int score_window,
                                 double* mean_out, double* stderr_out);

/* Renders the learning curves of n_series metrics.csv files into one SVG,
 * smoothing with a trailing mean of `window` episodes. labels may be NULL
 * (file stems are used). */
HMR_API hmr_status hmr_plot(const char* const* csv_paths, const char* const* labels,
                            size_t n_series, int window, const char* title,
                            const char* out_path);

/* Analytic-vs-finite-difference gradient verification over `trials` randomly
 * shaped networks covering every output head. Writes the worst relative
 * error observed; errors above 1e-4 fail with HMR_ERR_NUMERIC. */
HMR_API hmr_status hmr_gradcheck(unsigned long long seed, int trials, double* max_err_out);

/* --- environment --------------------------------------------------------- */

/* Standalone cooperative-navigation simulator handle for embedders that
 * bring their own policies. Resets consume the handle's seeded stream, so a
 * (seed, action sequence) pair replays exactly. */
typedef struct hmr_env hmr_env;

HMR_API hmr_status hmr_env_create(int n_agents, unsigned long long seed, hmr_env** out);
HMR_API void hmr_env_free(hmr_env* env);

HMR_API hmr_status hmr_env_reset(hmr_env* env);
HMR_API hmr_status hmr_env_obs_dim(const hmr_env* env, int* out);
/* Copies agent i's observation (obs_dim doubles) into buf. */
HMR_API hmr_status hmr_env_observe(const hmr_env* env, int agent, double* buf, size_t buf_len);
/* actions: one entry per agent in [0,5) = stay,+x,-x,+y,-y. */
HMR_API hmr_status hmr_env_step(hmr_env* env, const int* actions, size_t n_actions,
                                double* team_reward_out, int* collisions_out, int* done_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* HAMMER_HAMMER_H_ */
