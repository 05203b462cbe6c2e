#include "metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tensor_io.hpp"

namespace hammer {

namespace {

std::string opt_field(const std::optional<double>& v) {
  return v ? format_double17(*v) : std::string();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string metrics_row_line(const MetricsRow& row) {
  std::string line = std::to_string(row.episode);
  line += ',';
  line += format_double17(row.mean_reward_per_agent);
  line += ',';
  line += std::to_string(row.collisions);
  line += ',';
  line += opt_field(row.central_loss);
  line += ',';
  line += opt_field(row.local_loss);
  line += ',';
  line += opt_field(row.entropy);
  line += ',';
  line += std::to_string(row.wall_ms);
  return line;
}

void write_metrics(const std::vector<MetricsRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write metrics file '" + path + "'");
  out << kMetricsHeader << '\n';
  for (const MetricsRow& row : rows) out << metrics_row_line(row) << '\n';
  if (!out) throw std::runtime_error("short write to '" + path + "'");
}

std::vector<MetricsRow> read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics file '" + path + "'");
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetricsHeader)
    throw std::runtime_error(path + ":1: unexpected header '" + line + "'");
  std::vector<MetricsRow> rows;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv(line);
    if (f.size() != 7) fail("expected 7 fields, got " + std::to_string(f.size()));
    MetricsRow row;
    auto to_int = [&](const std::string& s, const char* what) {
      int v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size())
        fail(std::string("bad ") + what + " '" + s + "'");
      return v;
    };
    auto to_opt = [&](const std::string& s, const char* what) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      try {
        return parse_double(s);
      } catch (const std::exception&) {
        fail(std::string("bad ") + what + " '" + s + "'");
      }
      return std::nullopt;  // unreachable
    };
    row.episode = to_int(f[0], "episode");
    try {
      row.mean_reward_per_agent = parse_double(f[1]);
    } catch (const std::exception&) {
      fail("bad mean_reward_per_agent '" + f[1] + "'");
    }
    row.collisions = to_int(f[2], "collisions");
    row.central_loss = to_opt(f[3], "central_loss");
    row.local_loss = to_opt(f[4], "local_loss");
    row.entropy = to_opt(f[5], "entropy");
    std::int64_t wall = 0;
    auto [p, ec] = std::from_chars(f[6].data(), f[6].data() + f[6].size(), wall);
    if (ec != std::errc() || p != f[6].data() + f[6].size()) fail("bad wall_ms '" + f[6] + "'");
    row.wall_ms = wall;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> rolling_mean(const std::vector<double>& values, int window) {
  if (window < 1) throw std::runtime_error("rolling_mean window must be >= 1");
  std::vector<double> out(values.size());
  double acc = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    acc += values[i];
    if (i >= static_cast<size_t>(window)) acc -= values[i - window];
    size_t count = std::min(i + 1, static_cast<size_t>(window));
    out[i] = acc / static_cast<double>(count);
  }
  return out;
}

std::vector<double> reward_column(const std::vector<MetricsRow>& rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const MetricsRow& row : rows) out.push_back(row.mean_reward_per_agent);
  return out;
}

double final_score(const std::vector<MetricsRow>& rows, int window) {
  if (rows.empty()) throw std::runtime_error("final_score: no rows");
  if (window < 1) throw std::runtime_error("final_score window must be >= 1");
  size_t take = std::min(rows.size(), static_cast<size_t>(window));
  double acc = 0.0;
  for (size_t i = rows.size() - take; i < rows.size(); ++i)
    acc += rows[i].mean_reward_per_agent;
  return acc / static_cast<double>(take);
}

AggregateResult aggregate_scores(const std::string& label, const std::vector<double>& per_seed,
                                 const std::string& fingerprint) {
  if (per_seed.empty()) throw std::runtime_error("aggregate_scores: no per-seed values");
  AggregateResult out;
  out.label = label;
  out.per_seed = per_seed;
  out.fingerprint = fingerprint;
  double n = static_cast<double>(per_seed.size());
  double acc = 0.0;
  for (double v : per_seed) acc += v;
  out.mean = acc / n;
  if (per_seed.size() > 1) {
    double ss = 0.0;
    for (double v : per_seed) ss += (v - out.mean) * (v - out.mean);
    out.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return out;
}

void write_summary_csv(const std::vector<AggregateResult>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write summary file '" + path + "'");
  out << kSummaryHeader << '\n';
  for (const AggregateResult& row : rows) {
    out << row.label << ',' << row.per_seed.size() << ',' << format_double17(row.mean) << ','
        << format_double17(row.stderr_) << ',' << row.fingerprint << '\n';
  }
  if (!out) throw std::runtime_error("short write to '" + path + "'");
}

}  // namespace hammer
