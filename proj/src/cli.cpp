// Copyright 2026 The qkrr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qkrr/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qkrr/dv_sim.hpp"
#include "qkrr/encoding.hpp"
#include "qkrr/error.hpp"
#include "qkrr/krr.hpp"
#include "qkrr/parallel.hpp"
#include "qkrr/random.hpp"

#ifndef QKRR_DATA_DIR
#define QKRR_DATA_DIR "data"
#endif

namespace qkrr::cli {
namespace {

using nlohmann::ordered_json;

constexpr double kFixtureChi = 1.0;
constexpr std::size_t kFixtureSamples = 8;
constexpr std::size_t kFixtureFeatures = 4;
constexpr std::size_t kFixtureQueries = 20;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_real(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return value;
}

double require_real(std::string_view key, std::string_view text) {
  const auto v = parse_real(text);
  if (!v || !std::isfinite(*v)) {
    throw ContractError("config: " + std::string(key) + " expects a real number, got '" +
                        std::string(text) + "'");
  }
  return *v;
}

std::uint64_t require_count(std::string_view key, std::string_view text) {
  const double v = require_real(key, text);
  if (v < 0.0 || v != std::floor(v) || v > 9.0e15) {
    throw ContractError("config: " + std::string(key) + " expects a nonnegative integer, got '" +
                        std::string(text) + "'");
  }
  return static_cast<std::uint64_t>(v);
}

// Rows of a header-led CSV file as numbers.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table parse_table(std::istream& in, const std::string& source) {
  Table table;
  std::string line;
  std::size_t row = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++row;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto cells = split(view, ',');
    if (!have_header) {
      for (auto c : cells) table.header.emplace_back(c);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      std::ostringstream msg;
      msg << source << ": row " << row << " has " << cells.size() << " columns, expected "
          << table.header.size();
      throw DataError(msg.str());
    }
    std::vector<double> values;
    values.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = parse_real(cells[c]);
      if (!v || !std::isfinite(*v)) {
        std::ostringstream msg;
        msg << source << ": row " << row << ", column " << c + 1 << ": '" << cells[c]
            << "' is not a finite number";
        throw DataError(msg.str());
      }
      values.push_back(*v);
    }
    table.rows.push_back(std::move(values));
  }
  if (!have_header) throw DataError(source + ": empty file");
  return table;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return in;
}

void write_output(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ContractError("cannot write '" + path + "'");
  out << text;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ordered_json json_number(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

ordered_json config_json(const RunConfig& config) {
  ordered_json out = ordered_json::object();
  for (const auto& [k, v] : echo(config)) out[k] = v;
  return out;
}

std::string csv_config_header(const RunConfig& config) {
  std::string out;
  for (const auto& [k, v] : echo(config)) out += "# " + k + " = " + v + "\n";
  return out;
}

// Rows of `data` in the given order.
Dataset subset(const Dataset& data, const std::vector<std::size_t>& rows) {
  std::vector<Sample> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(data[r]);
  return Dataset(std::move(out));
}

double fixture_target(const std::vector<double>& a, Rng& rng) {
  return std::sin(a[0]) + 0.5 * a[1] * a[2] - 0.3 * a[3] * a[3] + 0.01 * rng.normal();
}

std::vector<double> fixture_point(Rng& rng) {
  std::vector<double> a(kFixtureFeatures);
  for (auto& x : a) x = std::clamp(0.6 * rng.normal(), -2.0, 2.0);
  return a;
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

Dataset parse_csv(std::istream& in, const std::string& source) {
  const Table table = parse_table(in, source);
  if (table.header.size() < 2) {
    throw DataError(source + ": need at least one feature column and a target column");
  }
  if (table.rows.empty()) throw DataError(source + ": no data rows");
  std::vector<Sample> samples;
  samples.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    Sample s;
    s.features.assign(row.begin(), row.end() - 1);
    s.target = row.back();
    samples.push_back(std::move(s));
  }
  return Dataset(std::move(samples));
}

Dataset ingest_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return parse_csv(in, path.string());
}

void emit_csv(const Dataset& data, std::ostream& out) {
  for (std::size_t j = 0; j < data.dimension(); ++j) out << "x" << j + 1 << ",";
  out << "y\n";
  for (const auto& s : data.samples()) {
    for (double x : s.features) out << format_double(x) << ",";
    out << format_double(s.target) << "\n";
  }
}

TestPoints ingest_test_points(const std::filesystem::path& path, std::size_t dimension) {
  std::ifstream in = open_input(path);
  const Table table = parse_table(in, path.string());
  const std::size_t cols = table.header.size();
  if (cols != dimension && cols != dimension + 1) {
    std::ostringstream msg;
    msg << path.string() << ": expected " << dimension << " or " << dimension + 1
        << " columns, found " << cols;
    throw DataError(msg.str());
  }
  if (table.rows.empty()) throw DataError(path.string() + ": no data rows");
  TestPoints out;
  for (const auto& row : table.rows) {
    out.points.emplace_back(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(dimension));
    out.targets.push_back(cols > dimension ? std::optional<double>(row.back()) : std::nullopt);
  }
  return out;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "dataset", "test",       "holdout",     "encoder",        "tier",
      "chi",     "eta",        "s",           "epsilon_q",      "shots",
      "homodyne_draws",        "grid_points", "grid_extent",    "seed",
      "out",     "format"};
  return keys;
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
  value = trim(value);
  auto& p = config.pipeline;
  if (key == "dataset") {
    config.dataset = value;
  } else if (key == "test") {
    config.test = value;
  } else if (key == "holdout") {
    config.holdout = require_real(key, value);
  } else if (key == "encoder") {
    encoding::parse_encoder(value);
    config.encoder = value;
  } else if (key == "tier") {
    p.tier = pipeline::parse_tier(value);
  } else if (key == "chi") {
    p.chi = require_real(key, value);
  } else if (key == "eta") {
    if (value == "auto") {
      p.eta.reset();
    } else {
      p.eta = require_real(key, value);
    }
  } else if (key == "s") {
    p.s = require_real(key, value);
  } else if (key == "epsilon_q") {
    p.epsilon_q = require_real(key, value);
  } else if (key == "shots") {
    p.shots = require_count(key, value);
  } else if (key == "homodyne_draws") {
    p.homodyne_draws = require_count(key, value);
  } else if (key == "grid_points") {
    p.grid_points = require_count(key, value);
  } else if (key == "grid_extent") {
    p.grid_extent = require_real(key, value);
  } else if (key == "seed") {
    p.seed = require_count(key, value);
  } else if (key == "out") {
    config.out = value;
  } else if (key == "format") {
    if (value == "json") {
      config.format = OutputFormat::kJson;
    } else if (value == "csv") {
      config.format = OutputFormat::kCsv;
    } else {
      throw ContractError("config: format must be json or csv, got '" + std::string(value) + "'");
    }
  } else {
    throw ContractError("config: unknown key '" + std::string(key) + "'");
  }
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ContractError("cannot open config '" + path.string() + "'");
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      std::ostringstream msg;
      msg << path.string() << ":" << row << ": expected key = value";
      throw ContractError(msg.str());
    }
    const std::string key(trim(view.substr(0, eq)));
    std::string value(trim(view.substr(eq + 1)));
    // Data paths in a config file are relative to the file.
    if ((key == "dataset" || key == "test") && !value.empty() &&
        std::filesystem::path(value).is_relative()) {
      value = (path.parent_path() / value).lexically_normal().string();
    }
    with_context(path.string() + ":" + std::to_string(row), [&] {
      apply_setting(base, key, value);
    });
  }
  return base;
}

std::vector<std::pair<std::string, std::string>> echo(const RunConfig& config) {
  const auto& p = config.pipeline;
  return {
      {"dataset", config.dataset},
      {"test", config.test},
      {"holdout", format_double(config.holdout)},
      {"encoder", encoding::describe(encoding::parse_encoder(config.encoder))},
      {"tier", pipeline::to_string(p.tier)},
      {"chi", format_double(p.chi)},
      {"eta", p.eta ? format_double(*p.eta) : "auto"},
      {"s", format_double(p.s)},
      {"epsilon_q", format_double(p.epsilon_q)},
      {"shots", std::to_string(p.shots)},
      {"homodyne_draws", std::to_string(p.homodyne_draws)},
      {"grid_points", std::to_string(p.grid_points)},
      {"grid_extent", format_double(p.grid_extent)},
      {"seed", std::to_string(p.seed)},
      {"out", config.out},
      {"format", config.format == OutputFormat::kJson ? "json" : "csv"},
  };
}

void validate(const RunConfig& config) {
  if (config.dataset.empty()) throw ContractError("no dataset given (use --dataset)");
  if (config.test.empty() && !(config.holdout > 0.0 && config.holdout < 1.0)) {
    throw ContractError("holdout must lie in (0, 1)");
  }
  encoding::validate(encoding::parse_encoder(config.encoder));
  pipeline::validate(config.pipeline);
}

Split resolve_data(const RunConfig& config) {
  const Dataset data = ingest_csv(config.dataset);
  if (!config.test.empty()) {
    return {data, ingest_test_points(config.test, data.dimension())};
  }
  const std::size_t m = data.size();
  if (m < 2) throw DataError(config.dataset + ": holdout needs at least 2 samples");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(config.pipeline.seed);
  for (std::size_t i = m - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1));
    std::swap(order[i], order[std::min(j, i)]);
  }
  const auto held = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(config.holdout * static_cast<double>(m))), 1, m - 1);
  std::vector<std::size_t> train(order.begin(), order.end() - static_cast<std::ptrdiff_t>(held));
  std::vector<std::size_t> test(order.end() - static_cast<std::ptrdiff_t>(held), order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  Split out{subset(data, train), {}};
  for (auto r : test) {
    out.test.points.push_back(data[r].features);
    out.test.targets.emplace_back(data[r].target);
  }
  return out;
}

std::string render_results(const RunConfig& config, const TestPoints& test,
                           const std::vector<pipeline::PredictionResult>& results) {
  std::vector<double> rel;
  std::vector<double> abs;
  std::size_t accepted = 0;
  std::size_t total = 0;
  for (const auto& r : results) {
    rel.push_back(r.rel_error);
    abs.push_back(r.abs_error);
    accepted += r.accepted_shots;
    total += r.total_shots;
  }
  const double acceptance =
      total > 0 ? static_cast<double>(accepted) / static_cast<double>(total)
                : std::numeric_limits<double>::quiet_NaN();

  if (config.format == OutputFormat::kCsv) {
    std::ostringstream out;
    out << csv_config_header(config);
    out << "index,tier,y_quantum,y_prime,y_oracle,y_true,success_prob,stderr,abs_error,"
           "rel_error,headline,origin_density,accepted_shots,total_shots,shots\n";
    for (const auto& r : results) {
      const auto& target = test.targets[r.index];
      out << r.index << "," << pipeline::to_string(r.tier) << ","
          << format_double(r.y_quantum) << "," << format_double(r.y_prime) << ","
          << format_double(r.y_oracle) << "," << (target ? format_double(*target) : "") << ","
          << format_double(r.success_prob) << "," << format_double(r.std_error) << ","
          << format_double(r.abs_error) << "," << format_double(r.rel_error) << ","
          << r.headline << "," << format_double(r.origin_density) << "," << r.accepted_shots
          << "," << r.total_shots << "," << r.shots << "\n";
    }
    return out.str();
  }

  ordered_json doc;
  doc["format"] = "qkrr-results";
  doc["version"] = 1;
  doc["command"] = "fit-predict";
  doc["config"] = config_json(config);
  doc["summary"] = {{"points", results.size()},
                    {"median_rel_error", json_number(median(rel))},
                    {"max_rel_error", json_number(rel.empty() ? 0.0
                                                              : *std::max_element(rel.begin(),
                                                                                  rel.end()))},
                    {"median_abs_error", json_number(median(abs))},
                    {"accepted_shots", accepted},
                    {"total_shots", total},
                    {"acceptance_rate", json_number(acceptance)}};
  ordered_json rows = ordered_json::array();
  for (const auto& r : results) {
    const auto& target = test.targets[r.index];
    ordered_json row;
    row["index"] = r.index;
    row["tier"] = pipeline::to_string(r.tier);
    row["y_quantum"] = json_number(r.y_quantum);
    row["y_prime"] = json_number(r.y_prime);
    row["y_oracle"] = json_number(r.y_oracle);
    row["y_true"] = target ? ordered_json(*target) : ordered_json(nullptr);
    row["success_prob"] = json_number(r.success_prob);
    row["stderr"] = json_number(r.std_error);
    row["abs_error"] = json_number(r.abs_error);
    row["rel_error"] = json_number(r.rel_error);
    row["headline"] = r.headline;
    row["origin_density"] = json_number(r.origin_density);
    row["accepted_shots"] = r.accepted_shots;
    row["total_shots"] = r.total_shots;
    row["shots"] = r.shots;
    ordered_json window = ordered_json::array();
    for (const auto& w : r.window) {
      window.push_back({{"q1", w.q1}, {"q2", w.q2}, {"y_prime", w.y_prime},
                        {"y_quantum", json_number(w.y_quantum)}});
    }
    row["window"] = std::move(window);
    rows.push_back(std::move(row));
  }
  doc["results"] = std::move(rows);
  return doc.dump(2) + "\n";
}

int cmd_fit_predict(const RunConfig& config, std::ostream& log) {
  validate(config);
  const Split split = resolve_data(config);
  const auto enc = encoding::parse_encoder(config.encoder);
  const auto results = pipeline::run_regression(split.train, enc, config.pipeline,
                                                split.test.points);
  write_output(config.out, render_results(config, split.test, results), std::cout);

  std::vector<double> rel;
  std::size_t accepted = 0;
  std::size_t total = 0;
  for (const auto& r : results) {
    rel.push_back(r.rel_error);
    accepted += r.accepted_shots;
    total += r.total_shots;
  }
  log << "fit-predict: " << results.size() << " points, tier "
      << pipeline::to_string(config.pipeline.tier) << ", median rel_error "
      << format_double(median(rel));
  if (total > 0) {
    log << ", acceptance " << accepted << "/" << total;
  }
  log << "\n";
  return kExitOk;
}

int cmd_sweep(const RunConfig& config, const SweepOptions& sweep, std::ostream& log) {
  static const std::vector<std::string> axes{"s", "chi", "epsilon_q", "shots"};
  if (std::find(axes.begin(), axes.end(), sweep.axis) == axes.end()) {
    throw ContractError("sweep: invalid axis '" + sweep.axis +
                        "' (expected s, chi, epsilon_q or shots)");
  }
  if (sweep.values.size() < 2) throw ContractError("sweep: need at least 2 values");
  if (sweep.seeds < 1) throw ContractError("sweep: seeds must be >= 1");
  validate(config);
  const auto enc = encoding::parse_encoder(config.encoder);

  struct Job {
    double value;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (double v : sweep.values) {
    for (std::size_t k = 0; k < sweep.seeds; ++k) jobs.push_back({v, config.pipeline.seed + k});
  }
  std::vector<std::vector<pipeline::PredictionResult>> outcomes(jobs.size());
  std::vector<RunConfig> configs(jobs.size(), config);
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    apply_setting(configs[j], sweep.axis, format_double(jobs[j].value));
    configs[j].pipeline.seed = jobs[j].seed;
    validate(configs[j]);
  }
  parallel_for(jobs.size(), [&](std::size_t j) {
    const Split split = resolve_data(configs[j]);
    const pipeline::QuantumRegressor model(split.train, enc, configs[j].pipeline);
    for (std::size_t k = 0; k < split.test.points.size(); ++k) {
      outcomes[j].push_back(model.predict(split.test.points[k], k));
    }
  });

  std::optional<pipeline::SuccessRateStudy> study;
  if (sweep.axis == "epsilon_q") {
    const Split split = resolve_data(config);
    study = pipeline::success_rate_study(split.train, enc, config.pipeline.eta,
                                         config.pipeline.chi, sweep.values);
  }

  struct Summary {
    double value;
    double median_rel_error;
    double median_abs_error;
    double median_abs_y;
    double acceptance;
  };
  std::vector<Summary> summaries;
  for (double v : sweep.values) {
    std::vector<double> rel, abs, y;
    std::size_t accepted = 0, total = 0;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].value != v) continue;
      for (const auto& r : outcomes[j]) {
        rel.push_back(r.rel_error);
        abs.push_back(r.abs_error);
        y.push_back(std::abs(r.y_quantum));
        accepted += r.accepted_shots;
        total += r.total_shots;
      }
    }
    summaries.push_back({v, median(rel), median(abs), median(y),
                         total > 0 ? static_cast<double>(accepted) / static_cast<double>(total)
                                   : std::numeric_limits<double>::quiet_NaN()});
  }

  std::string text;
  if (config.format == OutputFormat::kCsv) {
    std::ostringstream out;
    out << csv_config_header(config);
    out << "axis,value,seed,index,y_quantum,y_oracle,abs_error,rel_error,success_prob,"
           "accepted_shots,total_shots\n";
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      for (const auto& r : outcomes[j]) {
        out << sweep.axis << "," << format_double(jobs[j].value) << "," << jobs[j].seed << ","
            << r.index << "," << format_double(r.y_quantum) << ","
            << format_double(r.y_oracle) << "," << format_double(r.abs_error) << ","
            << format_double(r.rel_error) << "," << format_double(r.success_prob) << ","
            << r.accepted_shots << "," << r.total_shots << "\n";
      }
    }
    if (study) {
      for (const auto& p : study->points) {
        out << "# success_rate epsilon_q = " << format_double(p.epsilon_q) << ", s = "
            << format_double(p.s) << ", probability = " << format_double(p.probability) << "\n";
      }
      out << "# slope = " << format_double(study->slope) << "\n";
    }
    text = out.str();
  } else {
    ordered_json doc;
    doc["format"] = "qkrr-sweep";
    doc["version"] = 1;
    doc["command"] = "sweep";
    doc["config"] = config_json(config);
    doc["axis"] = sweep.axis;
    doc["values"] = sweep.values;
    doc["seeds"] = sweep.seeds;
    ordered_json summary = ordered_json::array();
    for (const auto& s : summaries) {
      summary.push_back({{"value", s.value},
                         {"median_rel_error", json_number(s.median_rel_error)},
                         {"median_abs_error", json_number(s.median_abs_error)},
                         {"median_abs_y_quantum", json_number(s.median_abs_y)},
                         {"acceptance_rate", json_number(s.acceptance)}});
    }
    doc["summary"] = std::move(summary);
    ordered_json rows = ordered_json::array();
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      for (const auto& r : outcomes[j]) {
        rows.push_back({{"value", jobs[j].value},
                        {"seed", jobs[j].seed},
                        {"index", r.index},
                        {"y_quantum", json_number(r.y_quantum)},
                        {"y_oracle", json_number(r.y_oracle)},
                        {"abs_error", json_number(r.abs_error)},
                        {"rel_error", json_number(r.rel_error)},
                        {"success_prob", json_number(r.success_prob)},
                        {"accepted_shots", r.accepted_shots},
                        {"total_shots", r.total_shots}});
      }
    }
    doc["rows"] = std::move(rows);
    if (study) {
      ordered_json table = ordered_json::array();
      for (const auto& p : study->points) {
        table.push_back({{"epsilon_q", p.epsilon_q}, {"s", p.s}, {"probability", p.probability}});
      }
      doc["success_rate"] = {{"alpha_typical", study->alpha_typical}, {"table", table}};
      doc["slope"] = study->slope;
    }
    text = doc.dump(2) + "\n";
  }
  write_output(config.out, text, std::cout);

  log << "sweep over " << sweep.axis << ":";
  for (const auto& s : summaries) {
    log << " " << format_double(s.value) << " -> " << format_double(s.median_rel_error) << ";";
  }
  if (study) log << " slope " << format_double(study->slope);
  log << "\n";
  return kExitOk;
}

namespace {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::string max_error_detail(double err, double tol) {
  return "max error " + format_double(err) + " (tolerance " + format_double(tol) + ")";
}

}  // namespace

int cmd_validate(const ValidateOptions& options, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const std::filesystem::path dir = options.data_dir.empty() ? default_data_dir()
                                                             : options.data_dir;
  const RunConfig fixture = load_config(dir / "fixture.conf");
  const Dataset train = ingest_csv(fixture.dataset);
  const TestPoints test = ingest_test_points(fixture.test, train.dimension());
  const double chi = fixture.pipeline.chi;
  const auto fixture_encoder = encoding::parse_encoder(fixture.encoder);
  const double bump = 1.0 + options.perturb_kernel;

  std::vector<std::vector<double>> points;
  for (const auto& s : train.samples()) points.push_back(s.features);
  for (const auto& p : test.points) points.push_back(p);

  std::vector<std::function<Check()>> suite;

  suite.push_back([&] {
    std::ifstream in = open_input(dir / "fixture_oracle.csv");
    const Table table = parse_table(in, "fixture_oracle.csv");
    const auto model = krr::fit(train, fixture_encoder, chi);
    double err = 0.0;
    if (table.rows.size() != test.points.size()) err = INFINITY;
    for (std::size_t k = 0; k < table.rows.size() && k < test.points.size(); ++k) {
      const double y = krr::predict(model, test.points[k]);
      err = std::max(err, std::abs(y - table.rows[k].back()) /
                              std::max(1e-300, std::abs(table.rows[k].back())));
    }
    return Check{"fixture-oracle", err <= 1e-10, max_error_detail(err, 1e-10)};
  });

  suite.push_back([&] {
    double err = 0.0;
    const encoding::FeatureEncoder enc = encoding::Coherent{16};
    for (const auto& a : points) {
      for (const auto& b : points) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) d2 += (a[j] - b[j]) * (a[j] - b[j]);
        const double k = bump * encoding::kernel_via_state(enc, a, b).real();
        err = std::max(err, std::abs(k - std::exp(-0.5 * d2)));
      }
    }
    return Check{"kernel-coherent-gaussian", err <= 1e-6, max_error_detail(err, 1e-6)};
  });

  suite.push_back([&] {
    double err = 0.0;
    for (int d : {1, 2, 3}) {
      const encoding::FeatureEncoder enc = encoding::PolyTensor{d};
      for (const auto& a : points) {
        for (const auto& b : points) {
          double ab = 0.0, aa = 0.0, bb = 0.0;
          for (std::size_t j = 0; j < a.size(); ++j) {
            ab += a[j] * b[j];
            aa += a[j] * a[j];
            bb += b[j] * b[j];
          }
          const Complex k = encoding::kernel_via_state(enc, a, b);
          const double normalized = bump * k.real() / std::pow(std::sqrt(aa * bb), d);
          err = std::max(err, std::abs(normalized - std::pow(ab / std::sqrt(aa * bb), d)));
        }
      }
    }
    return Check{"kernel-tensor-power", err <= 1e-12, max_error_detail(err, 1e-12)};
  });

  suite.push_back([&] {
    double err = 0.0;
    const std::vector<encoding::FeatureEncoder> encoders{
        encoding::Amplitude{},          encoding::PolyTensor{2},
        encoding::AffineAmplitude{1.0, 2}, encoding::Coherent{16},
        encoding::PositionWavepacket{}, encoding::Evolution{}};
    for (const auto& enc : encoders) {
      RealMatrix k = krr::gram(train, enc);
      k.diagonal() /= bump;
      k *= bump;
      const ComplexMatrix rho = dv::reduced_density(dv::prepare_psi_A(train, enc));
      err = std::max(err, (rho - (k / k.trace()).cast<Complex>()).cwiseAbs().maxCoeff());
    }
    return Check{"partial-trace-gram", err <= 1e-10, max_error_detail(err, 1e-10)};
  });

  suite.push_back([&] {
    pipeline::PipelineConfig c;
    c.chi = chi;
    c.s = 4.0;
    c.tier = pipeline::Tier::kCvGrid;
    const pipeline::QuantumRegressor model(train, fixture_encoder, c);
    const double trace = model.trace();
    cv::PhaseBlockState state(model.grid(), c.s, model.schmidt().coefficients);
    state.apply_conditional_phase(model.eta() * trace, model.schmidt().coefficients.cwiseAbs2());
    state.apply_regularization(model.eta() * trace, chi / trace);
    double err = 0.0;
    const auto mid = (model.grid().points() - 1) / 2;
    for (std::size_t d1 : {mid, mid + 1, mid + 3}) {
      for (std::size_t d2 : {mid, mid + 2}) {
        const double q1 = model.grid().position(d1);
        const double q2 = model.grid().position(d2);
        const auto post = state.postselect(q1, q2);
        for (Eigen::Index i = 0; i < post.dv_weights.size(); ++i) {
          const Complex expected = model.schmidt().coefficients(i) *
                                   cv::analytic_B(model.alphas()(i), c.s, q1, q2);
          err = std::max(err, std::abs(post.dv_weights(i) - expected) / std::abs(expected));
        }
      }
    }
    return Check{"closed-form-vs-grid", err <= 1e-6, max_error_detail(err, 1e-6)};
  });

  suite.push_back([&] {
    pipeline::PipelineConfig c;
    c.chi = chi;
    const auto results = pipeline::run_regression(train, fixture_encoder, c, test.points);
    double err = 0.0;
    for (const auto& r : results) err = std::max(err, r.rel_error);
    return Check{"ideal-oracle", err <= 1e-10, max_error_detail(err, 1e-10)};
  });

  suite.push_back([&] {
    RealMatrix k = krr::gram(subset(train, {0, 1, 2, 3}), fixture_encoder);
    const ComplexMatrix rho = (k / k.trace()).cast<Complex>();
    std::vector<double> n, e;
    for (int copies : {8, 16, 32, 64, 128}) {
      n.push_back(copies);
      e.push_back(dv::dme_approximate(rho, 1.0, copies).error);
    }
    const double slope = pipeline::log_log_slope(n, e);
    return Check{"dme-scaling", std::abs(slope + 1.0) <= 0.15,
                 "slope " + format_double(slope) + " (expected -1 +- 0.15)"};
  });

  suite.push_back([&] {
    RunConfig c = fixture;
    c.pipeline.tier = pipeline::Tier::kShotSampled;
    c.pipeline.s = 2.0;
    c.pipeline.shots = 1000;
    c.pipeline.homodyne_draws = 2000;
    c.pipeline.epsilon_q = 0.2;
    auto render = [&] {
      const auto results = pipeline::run_regression(train, fixture_encoder, c.pipeline,
                                                    test.points);
      return render_results(c, test, results);
    };
    const bool same = render() == render();
    return Check{"determinism", same, same ? "identical output" : "outputs differ"};
  });

  std::size_t failures = 0;
  for (const auto& check : suite) {
    Check result;
    const auto begin = std::chrono::steady_clock::now();
    try {
      result = check();
    } catch (const Error& e) {
      result = Check{"(error)", false, e.what()};
    }
    const double took =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
    if (!result.pass) ++failures;
    log << (result.pass ? "PASS " : "FAIL ") << result.name << ": " << result.detail << " ["
        << format_double(std::round(took * 100.0) / 100.0) << " s]\n";
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  log << "validate: " << suite.size() - failures << "/" << suite.size() << " invariants hold ("
      << format_double(std::round(seconds * 100.0) / 100.0) << " s)\n";
  return failures == 0 ? kExitOk : kExitNumerical;
}

int cmd_generate_fixture(const std::filesystem::path& dir, std::uint64_t seed,
                         std::ostream& log) {
  std::filesystem::create_directories(dir);
  Rng rng(seed);
  std::vector<Sample> samples;
  for (std::size_t m = 0; m < kFixtureSamples; ++m) {
    Sample s;
    s.features = fixture_point(rng);
    s.target = fixture_target(s.features, rng);
    samples.push_back(std::move(s));
  }
  const Dataset train(std::move(samples));
  std::vector<Sample> queries;
  for (std::size_t k = 0; k < kFixtureQueries; ++k) {
    Sample s;
    s.features = fixture_point(rng);
    s.target = fixture_target(s.features, rng);
    queries.push_back(std::move(s));
  }
  const Dataset test(std::move(queries));

  const std::string encoder = "coherent:cutoff=16";
  {
    std::ofstream out(dir / "fixture.csv", std::ios::binary);
    emit_csv(train, out);
  }
  {
    std::ofstream out(dir / "fixture_test.csv", std::ios::binary);
    emit_csv(test, out);
  }
  {
    const auto model = krr::fit(train, encoding::parse_encoder(encoder), kFixtureChi);
    std::ofstream out(dir / "fixture_oracle.csv", std::ios::binary);
    out << "index,y_oracle\n";
    for (std::size_t k = 0; k < test.size(); ++k) {
      out << k << "," << format_double(krr::predict(model, test[k].features)) << "\n";
    }
  }
  {
    std::ofstream out(dir / "fixture.conf", std::ios::binary);
    out << "# Bundled fixture: " << kFixtureSamples << " samples, " << kFixtureFeatures
        << " features, seed " << seed << ".\n"
        << "dataset = fixture.csv\n"
        << "test = fixture_test.csv\n"
        << "encoder = " << encoder << "\n"
        << "chi = " << format_double(kFixtureChi) << "\n"
        << "tier = ideal\n"
        << "seed = " << seed << "\n";
  }
  log << "generate-fixture: wrote fixture.csv, fixture_test.csv, fixture_oracle.csv and "
         "fixture.conf to "
      << dir.string() << "\n";
  return kExitOk;
}

std::string default_data_dir() { return QKRR_DATA_DIR; }

namespace {

struct Overrides {
  std::string config;
  std::vector<std::pair<std::string, std::string>> settings;
};

void add_run_options(CLI::App& app, Overrides& o) {
  app.add_option("--config", o.config, "key = value configuration file");
  struct Flag {
    const char* flag;
    const char* key;
    const char* help;
  };
  static const Flag flags[] = {
      {"--dataset", "dataset", "training CSV (last column is the target)"},
      {"--test", "test", "query CSV (features, optional trailing target)"},
      {"--holdout", "holdout", "fraction held out when no query file is given"},
      {"--encoder", "encoder", "feature map, e.g. coherent:cutoff=16 or poly:d=2"},
      {"--tier", "tier", "ideal, cv-analytic, cv-grid or shot-sampled"},
      {"--chi", "chi", "ridge parameter"},
      {"--eta", "eta", "phase-estimation strength or 'auto'"},
      {"--s", "s", "squeezing width of the resource state"},
      {"--epsilon-q", "epsilon_q", "post-selection window area"},
      {"--shots", "shots", "ancilla-test repetitions"},
      {"--homodyne-draws", "homodyne_draws", "homodyne samples per test point"},
      {"--grid-points", "grid_points", "qumode grid points per axis (0: automatic)"},
      {"--grid-extent", "grid_extent", "momentum extent of the grid (0: automatic)"},
      {"--seed", "seed", "random seed"},
      {"--out", "out", "output file (default: standard output)"},
      {"--format", "format", "json or csv"},
  };
  for (const auto& f : flags) {
    const std::string key = f.key;
    app.add_option_function<std::string>(
        f.flag, [&o, key](const std::string& v) { o.settings.emplace_back(key, v); }, f.help);
  }
}

RunConfig build_config(const Overrides& o) {
  RunConfig config = o.config.empty() ? RunConfig{} : load_config(o.config);
  for (const auto& [k, v] : o.settings) apply_setting(config, k, v);
  return config;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  for (auto cell : split(text, ',')) out.push_back(require_real("values", cell));
  return out;
}

void apply_thread_limit() {
  const char* env = std::getenv("QKRR_THREADS");
  if (env == nullptr || *env == '\0') return;
  const auto v = parse_real(env);
  if (!v || *v < 1.0 || *v != std::floor(*v)) {
    throw ContractError("QKRR_THREADS must be a positive integer, got '" + std::string(env) + "'");
  }
  set_max_workers(static_cast<std::size_t>(*v));
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hybrid DV/CV quantum kernel ridge regression simulator", "qkrr"};
  app.require_subcommand(1);

  Overrides fit_opts;
  auto* fit = app.add_subcommand("fit-predict", "fit on a dataset and predict test points");
  add_run_options(*fit, fit_opts);

  Overrides sweep_opts;
  SweepOptions sweep;
  std::string values;
  auto* sw = app.add_subcommand("sweep", "repeat fit-predict along one parameter axis");
  add_run_options(*sw, sweep_opts);
  sw->add_option("--axis", sweep.axis, "s, chi, epsilon_q or shots")->required();
  sw->add_option("--values", values, "comma-separated axis values")->required();
  sw->add_option("--seeds", sweep.seeds, "seeds per value (consecutive from --seed)");

  ValidateOptions validate_opts;
  auto* val = app.add_subcommand("validate", "check invariants on the bundled fixture");
  val->add_option("--data-dir", validate_opts.data_dir, "fixture directory");
  val->add_option("--perturb-kernel", validate_opts.perturb_kernel,
                  "relative error injected into kernel values");

  std::string fixture_dir = default_data_dir();
  std::uint64_t fixture_seed = 2026;
  auto* gen = app.add_subcommand("generate-fixture", "regenerate the bundled fixture files");
  gen->add_option("--dir", fixture_dir, "output directory");
  gen->add_option("--seed", fixture_seed, "fixture seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    apply_thread_limit();
    if (fit->parsed()) return cmd_fit_predict(build_config(fit_opts), err);
    if (sw->parsed()) {
      sweep.values = parse_values(values);
      return cmd_sweep(build_config(sweep_opts), sweep, err);
    }
    if (val->parsed()) return cmd_validate(validate_opts, out);
    if (gen->parsed()) return cmd_generate_fixture(fixture_dir, fixture_seed, err);
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const ContractError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace qkrr::cli
