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

#pragma once

// Batch front end: CSV ingestion, key=value run configuration, and the
// fit-predict / sweep / validate / generate-fixture commands.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qkrr/dataset.hpp"
#include "qkrr/pipeline.hpp"

namespace qkrr::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitData = 3,
  kExitNumerical = 4,
};

/// Header row, comma-separated reals, last column the target. Throws
/// DataError naming the (1-based, header = row 1) row and column.
Dataset parse_csv(std::istream& in, const std::string& source = "<input>");
Dataset ingest_csv(const std::filesystem::path& path);
/// Header x1..xN,y; reals in shortest round-trip form.
void emit_csv(const Dataset& data, std::ostream& out);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double value);

struct TestPoints {
  std::vector<std::vector<double>> points;
  std::vector<std::optional<double>> targets;
};

/// Query file: N feature columns, or N + 1 with a trailing target.
TestPoints ingest_test_points(const std::filesystem::path& path, std::size_t dimension);

enum class OutputFormat { kJson, kCsv };

struct RunConfig {
  std::string dataset;
  std::string test;        // query file; empty: hold out a fraction of the dataset
  double holdout = 0.25;   // in (0, 1)
  std::string encoder = "coherent:cutoff=16";
  pipeline::PipelineConfig pipeline;
  std::string out;         // empty: standard output
  OutputFormat format = OutputFormat::kJson;
};

/// Keys accepted by apply_setting and config files, in echo order.
const std::vector<std::string>& config_keys();

/// Sets one key; throws ContractError for unknown keys or unparsable values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Reads "key = value" lines ('#' starts a comment) on top of `base`.
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Every key of config_keys() with its current value.
std::vector<std::pair<std::string, std::string>> echo(const RunConfig& config);

/// Checks paths and ranges; throws ContractError.
void validate(const RunConfig& config);

struct Split {
  Dataset train;
  TestPoints test;
};

/// Explicit query file, or a seeded shuffle that holds out
/// ceil(holdout * M) samples (at least one sample stays in training).
Split resolve_data(const RunConfig& config);

/// Serialized fit-predict results (byte-stable for a given input).
std::string render_results(const RunConfig& config, const TestPoints& test,
                           const std::vector<pipeline::PredictionResult>& results);

int cmd_fit_predict(const RunConfig& config, std::ostream& log);

struct SweepOptions {
  std::string axis;  // s, chi, epsilon_q or shots
  std::vector<double> values;
  std::size_t seeds = 1;
};

int cmd_sweep(const RunConfig& config, const SweepOptions& sweep, std::ostream& log);

struct ValidateOptions {
  std::string data_dir;          // directory holding the bundled fixture
  double perturb_kernel = 0.0;   // relative error injected into kernel values
};

int cmd_validate(const ValidateOptions& options, std::ostream& log);

/// Writes fixture.csv, fixture_test.csv, fixture_oracle.csv and fixture.conf.
int cmd_generate_fixture(const std::filesystem::path& dir, std::uint64_t seed, std::ostream& log);

/// Default location of the bundled fixture.
std::string default_data_dir();

/// Full command-line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qkrr::cli
