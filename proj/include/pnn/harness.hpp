#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pnn/datagen.hpp"
#include "pnn/stats.hpp"
#include "pnn/trainer.hpp"

namespace pnn {

/// Features file: n rows of t comma-separated numbers (optionally preceded
/// by one header line). Targets file: t numbers, one per line. Throws
/// ParseError with 1-based row and column on a malformed or non-finite cell.
Dataset load_csv_dataset(const std::string& features_path, const std::string& targets_path,
                         bool header = false);

/// Numeric CSV matrix with the same rules as the features file above.
Matrix load_csv_matrix(const std::string& path, bool header = false);
/// Rows as lines, shortest round-trip number formatting.
void write_csv_matrix(const Matrix& m, const std::string& path);

struct SplitFractions {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;

  void validate() const;
};

struct DataSplit {
  Dataset train;
  Dataset val;
  Dataset test;
  std::vector<Index> order;  // shuffled sample indices: train, then val, then test
};

/// Seeded shuffle, then contiguous slices: train and validation get the floor
/// of their share, test gets the remainder.
DataSplit split_dataset(const Dataset& d, const SplitFractions& f, std::uint64_t seed);

/// Candidate values per tunable; an empty list keeps the configured value.
struct HyperGrid {
  std::vector<int> layers;
  std::vector<int> features;
  std::vector<int> orders;
  std::vector<double> lambda0;

  bool empty() const { return layers.empty() && features.empty() && orders.empty() && lambda0.empty(); }
};

struct HyperChoice {
  int layers = 2;
  int features = 8;
  int order = 2;
  double lambda0 = 10.0;
};

struct ExperimentConfig {
  TrainMode mode = TrainMode::Joint;
  std::optional<SyntheticSpec> synthetic = SyntheticSpec{};
  std::string features_path;
  std::string targets_path;
  bool csv_header = false;
  SplitFractions fractions;
  int repeats = 5;
  std::uint64_t seed = 0;
  JointConfig joint;
  PnnConfig pnn;
  HyperGrid grid;
  /// Skips grid search and trains with these hyperparameters.
  std::optional<HyperChoice> frozen;
  std::string output;
  unsigned workers = 1;
  bool record_timing = false;

  void validate() const;
};

struct RepeatRecord {
  int repeat = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  double mae = 0.0;
  double mse = 0.0;
  std::optional<double> precision_l1;
  std::optional<double> precision_frobenius;
  std::optional<Index> zero_count;
  std::optional<double> wall_time;
};

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 with fewer than two values
  int count = 0;
};

struct GridScore {
  HyperChoice choice;
  bool ok = true;
  double val_mae = 0.0;
};

struct ExperimentResult {
  std::string mode;
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
  HyperChoice selected;
  std::vector<GridScore> grid_scores;
  std::vector<RepeatRecord> repeats;
  /// Keyed by metric name: mae, mse, precision_l1, precision_frobenius, zero_count.
  std::vector<std::pair<std::string, Aggregate>> aggregates;

  const Aggregate& aggregate(const std::string& name) const;
};

Aggregate aggregate_values(const std::vector<double>& values);

/// Canonical JSON of the configuration fields that determine results.
std::string experiment_config_json(const ExperimentConfig& cfg);
/// Fills fields present in `json_text` on top of `base`.
ExperimentConfig experiment_config_from_json(const std::string& json_text, ExperimentConfig base = {});
/// 64-bit FNV-1a of experiment_config_json, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// Grid search on the validation split of the first repeat, then `repeats`
/// independent train/test runs with the chosen hyperparameters. Fails only
/// when every repeat fails.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Writes `path` (JSON) and the same path with a .csv extension (one row per
/// repeat).
void emit_results(const ExperimentResult& r, const std::string& path);
ExperimentResult read_results(const std::string& path);
std::string results_json(const ExperimentResult& r);
std::string results_csv(const ExperimentResult& r);

}  // namespace pnn
