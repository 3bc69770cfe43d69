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
#include <span>
#include <vector>

#include "zcevo/dataset.hpp"
#include "zcevo/expr.hpp"

namespace zcevo {

/// Kendall tau-b between two equal-length vectors, in O(n log n).
///
/// Ties are handled with the tau-b correction. If either vector is constant
/// the correlation is defined as 0. Throws UsageError on length mismatch,
/// fewer than two elements, or non-finite entries.
double kendall_tau(std::span<const double> x, std::span<const double> y);

/// Per-problem raw tau values for one expression, in problem order.
using TauVector = std::vector<double>;

/// Tau assigned to a problem whose proxy scores contain a non-finite value.
inline constexpr double kPenaltyTau = -1.0;

/// Score contribution of a problem whose bounds have not yet widened.
inline constexpr double kDegenerateTerm = 0.5;

TauVector raw_tau_vector(const ExpressionTree& tree, std::span<const FeatureMatrix> problems);

/// Lowest and highest tau seen so far per problem. Bounds only ever widen.
class ScoreBounds {
 public:
  ScoreBounds() = default;
  explicit ScoreBounds(std::size_t problems)
      : lo_(problems, 0.0), hi_(problems, 0.0), populated_(problems, false) {}

  std::size_t size() const { return lo_.size(); }
  bool populated(std::size_t i) const { return populated_[i]; }
  bool fully_populated() const;
  double lo(std::size_t i) const { return lo_[i]; }
  double hi(std::size_t i) const { return hi_[i]; }

  /// Widens in place. Throws UsageError on length mismatch.
  void update(const TauVector& tau);

  bool operator==(const ScoreBounds&) const = default;

 private:
  std::vector<double> lo_;
  std::vector<double> hi_;
  std::vector<bool> populated_;
};

ScoreBounds update_bounds(ScoreBounds bounds, const TauVector& tau);

/// Sum over problems of (tau_i - lo_i) / (hi_i - lo_i), with 0.5 for any
/// problem where hi_i == lo_i. Throws UsageError if some problem's bounds are
/// unpopulated. The result is in [0, N] whenever each tau_i lies within its
/// bounds; under externally pinned bounds it may fall outside.
double normalized_score(const TauVector& tau, const ScoreBounds& bounds);

}  // namespace zcevo
