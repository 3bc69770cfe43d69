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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "zcevo/rng.hpp"
#include "zcevo/zoo.hpp"

namespace zcevo {

/// Categorical architecture: position i takes a value in [0, arity_i).
struct ArchEncoding {
  std::vector<int> values;

  std::string to_string() const;  // "0-3-1-..."
  static ArchEncoding parse(std::string_view text);

  auto operator<=>(const ArchEncoding&) const = default;
};

/// Fully tabulated space: every encoding has exactly one feature row.
class ToySearchSpace {
 public:
  /// Throws DataError unless `rows` holds each encoding of `arity` exactly once
  /// with `feature_names.size()` finite features.
  ToySearchSpace(std::vector<int> arity, std::vector<std::string> feature_names,
                 std::vector<std::pair<ArchEncoding, std::vector<double>>> rows);

  const std::vector<int>& arity() const { return arity_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  std::uint64_t size() const { return features_.size(); }

  bool contains(const ArchEncoding& enc) const;
  std::uint64_t index_of(const ArchEncoding& enc) const;
  ArchEncoding encoding_at(std::uint64_t index) const;
  /// Throws DataError on a lookup miss.
  const std::vector<double>& features(const ArchEncoding& enc) const;

 private:
  std::vector<int> arity_;
  std::vector<std::string> feature_names_;
  std::vector<std::vector<double>> features_;
};

/// Reads `{ "arity": [...], "csv": path, "target_column": name? }`. The CSV
/// header is arch_id followed by feature columns (and the optional target
/// column, which is ignored).
ToySearchSpace load_space(const std::filesystem::path& manifest);

/// Proxy value of one encoding; non-finite values map to -infinity.
double proxy_score(const ToySearchSpace& space, const NamedProxy& proxy, const ArchEncoding& enc);

struct AgingParams {
  int population_size = 50;
  int sample_size = 10;
  int cycles = 2000;  // total evaluations, including the initial population
  std::uint64_t seed = 0;
};

void validate(const AgingParams& params);

/// Changes exactly one position (chosen among positions with arity > 1) to a
/// different value. Throws UsageError if every arity is 1.
ArchEncoding mutate_arch(const ArchEncoding& enc, const ToySearchSpace& space, Rng& rng);

struct CycleRecord {
  int cycle = 0;
  std::optional<ArchEncoding> parent;  // empty while seeding the population
  ArchEncoding child;
  double child_score = 0.0;
  double best_score = 0.0;
};

struct AgingResult {
  ArchEncoding best;
  double best_score = 0.0;
  std::vector<CycleRecord> history;
};

/// Aging (regularized) evolution with a FIFO population.
AgingResult aging_evolution(const ToySearchSpace& space, const NamedProxy& proxy,
                            const AgingParams& params);

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

/// Proxy-maximal encoding; ties go to the lexicographically smallest.
std::pair<ArchEncoding, double> exhaustive_argmax(const ToySearchSpace& space,
                                                  const NamedProxy& proxy,
                                                  std::uint64_t cap = kDefaultEnumerationCap);

/// Proxy score of every encoding, in index (lexicographic) order.
std::vector<double> enumerate_scores(const ToySearchSpace& space, const NamedProxy& proxy,
                                     std::uint64_t cap = kDefaultEnumerationCap);

}  // namespace zcevo
