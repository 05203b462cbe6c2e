#include "sweep.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "hammer.hpp"

namespace hammer {

namespace fs = std::filesystem;

namespace {

int parse_axis_int(const std::string& axis, const std::string& value) {
  int out = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || p != value.data() + value.size())
    throw std::runtime_error("axis '" + axis + "': bad integer value '" + value + "'");
  return out;
}

std::string sanitize(const std::string& label) {
  std::string out = label;
  for (char& c : out)
    if (c == '=' || c == '/' || c == ' ') c = '_';
  return out;
}

// Fingerprint of the point's configuration with the per-cell fields (seed,
// output location) normalized away, so all seeds of a point share it.
std::string point_fingerprint(ExperimentConfig cfg) {
  cfg.seed = 0;
  cfg.output_dir = "";
  cfg.resolve();
  return config_fingerprint(cfg);
}

}  // namespace

std::vector<SweepPoint> expand_axis(const ExperimentConfig& base, const std::string& axis,
                                    const std::vector<std::string>& values) {
  if (values.empty()) throw std::runtime_error("sweep needs at least one axis value");
  std::string axis_key = axis;
  for (char& c : axis_key)
    if (c == '_') c = '-';
  std::vector<SweepPoint> points;
  points.reserve(values.size());
  for (const std::string& value : values) {
    SweepPoint point;
    point.config = base;
    if (axis_key == "message-length") {
      point.config.message_length = parse_axis_int(axis, value);
      point.label = "message_length=" + value;
    } else if (axis_key == "mode") {
      point.config.mode = parse_run_mode(value);
      point.label = "mode=" + value;
    } else if (axis_key == "n-agents") {
      point.config.n_agents = parse_axis_int(axis, value);
      point.label = "n_agents=" + value;
    } else {
      throw std::runtime_error("unknown sweep axis '" + axis +
                               "' (expected message-length, mode, or n-agents)");
    }
    point.dir_name = sanitize(point.label);
    points.push_back(std::move(point));
  }
  return points;
}

SweepOutcome run_sweep(const ExperimentConfig& base, const std::string& axis,
                       const std::vector<std::string>& values,
                       const std::vector<std::uint64_t>& seeds, const std::string& sweep_dir,
                       int jobs, int score_window) {
  if (seeds.empty()) throw std::runtime_error("sweep needs at least one seed");
  if (jobs < 1) jobs = 1;
  std::vector<SweepPoint> points = expand_axis(base, axis, values);
  fs::path root(resolve_output_dir(sweep_dir));
  fs::create_directories(root);

  struct Cell {
    size_t point;
    std::uint64_t seed;
    std::string run_dir;   // empty on failure
    std::string error;     // empty on success
    double score = 0.0;
  };
  std::vector<Cell> cells;
  for (size_t p = 0; p < points.size(); ++p)
    for (std::uint64_t seed : seeds) cells.push_back({p, seed, "", "", 0.0});

  auto run_cell = [&](Cell& cell) {
    try {
      ExperimentConfig cfg = points[cell.point].config;
      cfg.seed = cell.seed;
      cfg.output_dir = (root / points[cell.point].dir_name).string();
      cell.run_dir = train_and_write(cfg);
      std::vector<MetricsRow> rows = read_metrics((fs::path(cell.run_dir) / "metrics.csv").string());
      cell.score = final_score(rows, score_window);
    } catch (const std::exception& e) {
      cell.run_dir.clear();
      cell.error = e.what();
    }
  };

  if (jobs == 1 || cells.size() <= 1) {
    for (Cell& cell : cells) run_cell(cell);
  } else {
    std::mutex mu;
    size_t next = 0;
    auto worker = [&] {
      for (;;) {
        size_t i;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next >= cells.size()) return;
          i = next++;
        }
        run_cell(cells[i]);
      }
    };
    std::vector<std::thread> pool;
    int n_threads = std::min<int>(jobs, static_cast<int>(cells.size()));
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  SweepOutcome out;
  size_t cell_at = 0;
  for (size_t p = 0; p < points.size(); ++p) {
    std::vector<double> scores;
    for (size_t s = 0; s < seeds.size(); ++s, ++cell_at) {
      const Cell& cell = cells[cell_at];
      if (cell.error.empty()) {
        scores.push_back(cell.score);
        out.run_dirs.push_back(cell.run_dir);
      } else {
        out.failures.push_back(points[p].label + " seed=" + std::to_string(cell.seed) + ": " +
                               cell.error);
      }
    }
    if (!scores.empty())
      out.rows.push_back(
          aggregate_scores(points[p].label, scores, point_fingerprint(points[p].config)));
  }

  out.summary_path = (root / "summary.csv").string();
  write_summary_csv(out.rows, out.summary_path);
  if (!out.failures.empty()) {
    std::ofstream fail(root / "failures.txt", std::ios::binary);
    for (const std::string& f : out.failures) fail << f << '\n';
  }
  return out;
}

AggregateResult aggregate_run_dirs(const std::string& label,
                                   const std::vector<std::string>& run_dirs, int score_window) {
  if (run_dirs.empty()) throw std::runtime_error("aggregate needs at least one run directory");
  std::vector<double> scores;
  std::string fingerprint;
  for (const std::string& dir : run_dirs) {
    std::vector<MetricsRow> rows = read_metrics((fs::path(dir) / "metrics.csv").string());
    scores.push_back(final_score(rows, score_window));
    ExperimentConfig cfg = load_config_file((fs::path(dir) / "config.txt").string());
    std::string fp = point_fingerprint(cfg);
    if (fingerprint.empty()) {
      fingerprint = fp;
    } else if (fingerprint != fp) {
      fingerprint = "mixed";
    }
  }
  return aggregate_scores(label, scores, fingerprint);
}

}  // namespace hammer
