// Copyright 2026 The zc-evolve Authors.
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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace zcevo {

/// One architecture: its precomputed proxy features and ground-truth target.
/// Higher target is better for every problem.
struct ArchRecord {
  std::string arch_id;
  std::vector<double> features;
  double target = 0.0;

  bool operator==(const ArchRecord&) const = default;
};

/// A single (search space, task) pair.
struct Problem {
  std::string id;
  std::string target_name;
  std::string group;  // optional presentational grouping; may be empty
  std::vector<ArchRecord> rows;

  bool operator==(const Problem&) const = default;
};

/// Validated multi-problem table. Construct through make_dataset or
/// load_manifest; both enforce the invariants below.
///
///  * feature_names are unique, non-empty, [a-z0-9_]+
///  * problems non-empty with unique ids, each with >= 2 rows
///  * arch_ids unique within a problem
///  * every row has one finite value per feature and a finite target
class BenchmarkDataset {
 public:
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<Problem>& problems() const { return problems_; }
  std::size_t num_features() const { return feature_names_.size(); }

  /// Index of a problem id, or throws UsageError.
  std::size_t problem_index(const std::string& id) const;

  /// Index of a feature name, or throws UsageError.
  std::size_t feature_index(const std::string& name) const;

  bool operator==(const BenchmarkDataset&) const = default;

 private:
  friend BenchmarkDataset make_dataset(std::vector<std::string>, std::vector<Problem>);
  std::vector<std::string> feature_names_;
  std::vector<Problem> problems_;
};

/// Validates and wraps; throws DataError naming the offending problem/row/column.
BenchmarkDataset make_dataset(std::vector<std::string> feature_names,
                              std::vector<Problem> problems);

bool is_valid_feature_name(const std::string& name);

/// Reads a manifest JSON and the CSV files it references (paths relative to
/// the manifest's directory).
BenchmarkDataset load_manifest(const std::filesystem::path& path);

/// Writes `manifest.json` plus one `<problem id>.csv` per problem into `dir`
/// in canonical form (shortest round-trip decimal reals).
void write_manifest(const BenchmarkDataset& dataset, const std::filesystem::path& dir);

/// Canonical CSV text of one problem.
std::string problem_csv(const BenchmarkDataset& dataset, std::size_t problem);

/// Dense n x d matrix in column-major order, with aligned targets and ids.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double at(std::size_t row, std::size_t col) const { return data_[col * rows_ + row]; }
  double& at(std::size_t row, std::size_t col) { return data_[col * rows_ + row]; }

  std::span<const double> column(std::size_t col) const {
    return {data_.data() + col * rows_, rows_};
  }
  std::vector<double> row(std::size_t r) const;

  std::string problem_id;
  std::vector<double> targets;
  std::vector<std::string> arch_ids;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class ViewLabel { kTrain, kTest, kFull };

const char* to_string(ViewLabel label);
ViewLabel parse_view_label(const std::string& text);

/// Row subsets over a shared immutable dataset.
class DatasetView {
 public:
  DatasetView(std::shared_ptr<const BenchmarkDataset> dataset,
              std::vector<std::vector<std::size_t>> indices, ViewLabel label);

  static DatasetView full(std::shared_ptr<const BenchmarkDataset> dataset);

  const BenchmarkDataset& dataset() const { return *dataset_; }
  ViewLabel label() const { return label_; }
  /// Row indices for problem i, in view order.
  const std::vector<std::size_t>& indices(std::size_t problem) const {
    return indices_.at(problem);
  }

  /// All problems' matrices, in dataset problem order.
  std::vector<FeatureMatrix> matrices() const;

 private:
  std::shared_ptr<const BenchmarkDataset> dataset_;
  std::vector<std::vector<std::size_t>> indices_;
  ViewLabel label_;
};

/// Per problem, shuffles row indices with a generator seeded from (seed,
/// problem id) and cuts at floor(train_fraction * n). Throws UsageError if
/// either side of any problem would have fewer than 2 rows.
std::pair<DatasetView, DatasetView> split_train_test(
    std::shared_ptr<const BenchmarkDataset> dataset, double train_fraction,
    std::uint64_t seed);

FeatureMatrix problem_matrix(const DatasetView& view, const std::string& problem_id);

}  // namespace zcevo
