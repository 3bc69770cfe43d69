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

#include "zcevo/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "zcevo/error.hpp"
#include "zcevo/rng.hpp"
#include "zcevo/text.hpp"

namespace zcevo {

namespace fs = std::filesystem;
using nlohmann::json;

bool is_valid_feature_name(const std::string& name) {
  return !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

BenchmarkDataset make_dataset(std::vector<std::string> feature_names,
                              std::vector<Problem> problems) {
  std::set<std::string> seen_features;
  for (const auto& name : feature_names) {
    if (!is_valid_feature_name(name)) {
      throw DataError(fmt::format("invalid feature name '{}' (expected [a-z0-9_]+)", name));
    }
    if (!seen_features.insert(name).second) {
      throw DataError(fmt::format("duplicate feature name '{}'", name));
    }
  }
  if (problems.empty()) throw DataError("dataset has no problems");

  std::set<std::string> seen_problems;
  for (const auto& p : problems) {
    if (p.id.empty()) throw DataError("problem with empty id");
    if (!seen_problems.insert(p.id).second) {
      throw DataError(fmt::format("duplicate problem id '{}'", p.id));
    }
    if (p.rows.size() < 2) {
      throw DataError(fmt::format("problem '{}': needs at least 2 rows, has {}", p.id,
                                  p.rows.size()));
    }
    std::set<std::string> seen_ids;
    for (std::size_t r = 0; r < p.rows.size(); ++r) {
      const auto& rec = p.rows[r];
      if (!seen_ids.insert(rec.arch_id).second) {
        throw DataError(
            fmt::format("problem '{}', row {}: duplicate arch_id '{}'", p.id, r, rec.arch_id));
      }
      if (rec.features.size() != feature_names.size()) {
        throw DataError(fmt::format("problem '{}', row {}: {} features, expected {}", p.id, r,
                                    rec.features.size(), feature_names.size()));
      }
      for (std::size_t c = 0; c < rec.features.size(); ++c) {
        if (!std::isfinite(rec.features[c])) {
          throw DataError(fmt::format("problem '{}', row {}, column '{}': non-finite value", p.id,
                                      r, feature_names[c]));
        }
      }
      if (!std::isfinite(rec.target)) {
        throw DataError(fmt::format("problem '{}', row {}, column '{}': non-finite value", p.id,
                                    r, p.target_name));
      }
    }
  }

  BenchmarkDataset ds;
  ds.feature_names_ = std::move(feature_names);
  ds.problems_ = std::move(problems);
  return ds;
}

std::size_t BenchmarkDataset::problem_index(const std::string& id) const {
  for (std::size_t i = 0; i < problems_.size(); ++i) {
    if (problems_[i].id == id) return i;
  }
  throw UsageError(fmt::format("unknown problem id '{}'", id));
}

std::size_t BenchmarkDataset::feature_index(const std::string& name) const {
  auto it = std::find(feature_names_.begin(), feature_names_.end(), name);
  if (it == feature_names_.end()) throw UsageError(fmt::format("unknown feature '{}'", name));
  return static_cast<std::size_t>(it - feature_names_.begin());
}

namespace {

std::vector<std::string> split_commas(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    cells.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

Problem read_problem_csv(const fs::path& path, const std::string& id,
                         const std::string& target_column,
                         const std::vector<std::string>& feature_names) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("problem '{}': cannot open '{}'", id, path.string()));

  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(fmt::format("problem '{}': '{}' is empty", id, path.string()));
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_commas(line);
  std::vector<std::string> expected{"arch_id"};
  expected.insert(expected.end(), feature_names.begin(), feature_names.end());
  expected.push_back(target_column);
  if (header != expected) {
    for (std::size_t c = 0; c < std::max(header.size(), expected.size()); ++c) {
      const std::string got = c < header.size() ? header[c] : "<missing>";
      const std::string want = c < expected.size() ? expected[c] : "<none>";
      if (got != want) {
        throw DataError(fmt::format(
            "problem '{}', row 0 (header), column {}: got '{}', manifest expects '{}'", id, c,
            got, want));
      }
    }
  }

  Problem p;
  p.id = id;
  p.target_name = target_column;
  std::set<std::string> seen_ids;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_commas(line);
    const std::size_t row = p.rows.size() + 1;
    if (cells.size() != expected.size()) {
      throw DataError(fmt::format("problem '{}', row {} (line {}): {} cells, expected {}", id, row,
                                  line_no, cells.size(), expected.size()));
    }
    ArchRecord rec;
    rec.arch_id = cells[0];
    rec.features.reserve(feature_names.size());
    for (std::size_t c = 1; c < cells.size(); ++c) {
      auto value = parse_real(cells[c]);
      if (!value) {
        throw DataError(fmt::format("problem '{}', row {} (line {}), column '{}': non-numeric "
                                    "cell '{}'",
                                    id, row, line_no, expected[c], cells[c]));
      }
      if (!std::isfinite(*value)) {
        throw DataError(fmt::format("problem '{}', row {} (line {}), column '{}': non-finite "
                                    "cell '{}'",
                                    id, row, line_no, expected[c], cells[c]));
      }
      if (c + 1 == cells.size()) {
        rec.target = *value;
      } else {
        rec.features.push_back(*value);
      }
    }
    if (!seen_ids.insert(rec.arch_id).second) {
      throw DataError(fmt::format("problem '{}', row {} (line {}), column 'arch_id': duplicate "
                                  "arch_id '{}'",
                                  id, row, line_no, rec.arch_id));
    }
    p.rows.push_back(std::move(rec));
  }
  return p;
}

}  // namespace

BenchmarkDataset load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open manifest '{}'", path.string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(fmt::format("manifest '{}': {}", path.string(), e.what()));
  }

  std::vector<std::string> feature_names;
  std::vector<Problem> problems;
  try {
    feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    const fs::path base = path.parent_path();
    for (const auto& entry : doc.at("problems")) {
      const auto id = entry.at("id").get<std::string>();
      const auto csv = entry.at("csv").get<std::string>();
      const auto target = entry.at("target_column").get<std::string>();
      auto problem = read_problem_csv(base / csv, id, target, feature_names);
      problem.group = entry.value("group", std::string{});
      problems.push_back(std::move(problem));
    }
  } catch (const json::exception& e) {
    throw DataError(fmt::format("manifest '{}': {}", path.string(), e.what()));
  }
  return make_dataset(std::move(feature_names), std::move(problems));
}

std::string problem_csv(const BenchmarkDataset& dataset, std::size_t problem) {
  const auto& p = dataset.problems().at(problem);
  std::string out = "arch_id";
  for (const auto& f : dataset.feature_names()) {
    out += ',';
    out += f;
  }
  out += ',';
  out += p.target_name;
  out += '\n';
  for (const auto& rec : p.rows) {
    out += rec.arch_id;
    for (double v : rec.features) {
      out += ',';
      out += format_real(v);
    }
    out += ',';
    out += format_real(rec.target);
    out += '\n';
  }
  return out;
}

void write_manifest(const BenchmarkDataset& dataset, const fs::path& dir) {
  fs::create_directories(dir);
  json doc;
  doc["feature_names"] = dataset.feature_names();
  doc["problems"] = json::array();
  for (std::size_t i = 0; i < dataset.problems().size(); ++i) {
    const auto& p = dataset.problems()[i];
    json entry{{"id", p.id}, {"csv", p.id + ".csv"}, {"target_column", p.target_name}};
    if (!p.group.empty()) entry["group"] = p.group;
    doc["problems"].push_back(std::move(entry));
    std::ofstream(dir / (p.id + ".csv"), std::ios::binary) << problem_csv(dataset, i);
  }
  std::ofstream(dir / "manifest.json", std::ios::binary) << doc.dump(2) << '\n';
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

std::vector<double> FeatureMatrix::row(std::size_t r) const {
  std::vector<double> out(cols_);
  for (std::size_t c = 0; c < cols_; ++c) out[c] = at(r, c);
  return out;
}

const char* to_string(ViewLabel label) {
  switch (label) {
    case ViewLabel::kTrain: return "train";
    case ViewLabel::kTest: return "test";
    case ViewLabel::kFull: return "full";
  }
  return "?";
}

ViewLabel parse_view_label(const std::string& text) {
  if (text == "train") return ViewLabel::kTrain;
  if (text == "test") return ViewLabel::kTest;
  if (text == "full") return ViewLabel::kFull;
  throw UsageError(fmt::format("unknown view '{}' (expected train, test or full)", text));
}

DatasetView::DatasetView(std::shared_ptr<const BenchmarkDataset> dataset,
                         std::vector<std::vector<std::size_t>> indices, ViewLabel label)
    : dataset_(std::move(dataset)), indices_(std::move(indices)), label_(label) {
  if (!dataset_) throw UsageError("view over null dataset");
  if (indices_.size() != dataset_->problems().size()) {
    throw UsageError("view index sets do not cover every problem");
  }
}

DatasetView DatasetView::full(std::shared_ptr<const BenchmarkDataset> dataset) {
  std::vector<std::vector<std::size_t>> idx;
  for (const auto& p : dataset->problems()) {
    std::vector<std::size_t> all(p.rows.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    idx.push_back(std::move(all));
  }
  return DatasetView(std::move(dataset), std::move(idx), ViewLabel::kFull);
}

namespace {

FeatureMatrix build_matrix(const BenchmarkDataset& ds, std::size_t problem,
                           const std::vector<std::size_t>& idx) {
  const auto& p = ds.problems()[problem];
  FeatureMatrix m(idx.size(), ds.num_features());
  m.problem_id = p.id;
  m.targets.reserve(idx.size());
  m.arch_ids.reserve(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto& rec = p.rows.at(idx[r]);
    for (std::size_t c = 0; c < rec.features.size(); ++c) m.at(r, c) = rec.features[c];
    m.targets.push_back(rec.target);
    m.arch_ids.push_back(rec.arch_id);
  }
  return m;
}

}  // namespace

std::vector<FeatureMatrix> DatasetView::matrices() const {
  std::vector<FeatureMatrix> out;
  out.reserve(indices_.size());
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    out.push_back(build_matrix(*dataset_, i, indices_[i]));
  }
  return out;
}

FeatureMatrix problem_matrix(const DatasetView& view, const std::string& problem_id) {
  const std::size_t i = view.dataset().problem_index(problem_id);
  return build_matrix(view.dataset(), i, view.indices(i));
}

std::pair<DatasetView, DatasetView> split_train_test(
    std::shared_ptr<const BenchmarkDataset> dataset, double train_fraction,
    std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw UsageError(fmt::format("train fraction {} outside (0, 1)", train_fraction));
  }
  std::vector<std::vector<std::size_t>> train, test;
  for (const auto& p : dataset->problems()) {
    const std::size_t n = p.rows.size();
    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
    if (n_train < 2 || n - n_train < 2) {
      throw UsageError(fmt::format(
          "problem '{}': split {} of {} rows leaves {} train / {} test (need >= 2 each)", p.id,
          train_fraction, n, n_train, n - n_train));
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng = substream(seed, Stream::kSplit, stable_hash(p.id));
    std::shuffle(idx.begin(), idx.end(), rng);
    train.emplace_back(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    test.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  }
  return {DatasetView(dataset, std::move(train), ViewLabel::kTrain),
          DatasetView(dataset, std::move(test), ViewLabel::kTest)};
}

}  // namespace zcevo
