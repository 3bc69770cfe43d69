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

#include "zcevo/fitness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include <fmt/format.h>

#include "zcevo/error.hpp"

namespace zcevo {

namespace {

/// Sum of t*(t-1)/2 over runs of equal adjacent values.
template <typename Eq>
std::int64_t tied_pairs(std::size_t n, Eq same_as_previous) {
  std::int64_t total = 0;
  std::int64_t run = 1;
  for (std::size_t i = 1; i < n; ++i) {
    if (same_as_previous(i)) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total + run * (run - 1) / 2;
}

/// Stable merge sort of `v`, returning the number of strict inversions.
std::int64_t sort_count_inversions(std::vector<double>& v, std::vector<double>& buf,
                                   std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = sort_count_inversions(v, buf, lo, mid) + sort_count_inversions(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw UsageError(fmt::format("kendall_tau: length mismatch ({} vs {})", x.size(), y.size()));
  }
  const std::size_t n = x.size();
  if (n < 2) throw UsageError("kendall_tau: need at least 2 observations");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw UsageError(fmt::format("kendall_tau: non-finite value at index {}", i));
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  const std::int64_t x_ties = tied_pairs(n, [&](std::size_t i) {
    return x[order[i]] == x[order[i - 1]];
  });
  const std::int64_t joint_ties = tied_pairs(n, [&](std::size_t i) {
    return x[order[i]] == x[order[i - 1]] && y[order[i]] == y[order[i - 1]];
  });

  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  std::vector<double> buf(n);
  const std::int64_t swaps = sort_count_inversions(ys, buf, 0, n);
  const std::int64_t y_ties = tied_pairs(n, [&](std::size_t i) { return ys[i] == ys[i - 1]; });

  const auto pairs = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  const std::int64_t numerator = pairs - x_ties - y_ties + joint_ties - 2 * swaps;
  const double denominator = std::sqrt(static_cast<double>(pairs - x_ties) *
                                       static_cast<double>(pairs - y_ties));
  if (denominator == 0.0) return 0.0;
  return std::clamp(static_cast<double>(numerator) / denominator, -1.0, 1.0);
}

TauVector raw_tau_vector(const ExpressionTree& tree, std::span<const FeatureMatrix> problems) {
  TauVector out;
  out.reserve(problems.size());
  for (const auto& m : problems) {
    const auto scores = evaluate_batch(tree, m);
    const bool bad = std::any_of(scores.begin(), scores.end(),
                                 [](double v) { return !std::isfinite(v); });
    out.push_back(bad ? kPenaltyTau : kendall_tau(scores, m.targets));
  }
  return out;
}

bool ScoreBounds::fully_populated() const {
  return std::all_of(populated_.begin(), populated_.end(), [](bool b) { return b; });
}

void ScoreBounds::update(const TauVector& tau) {
  if (tau.size() != lo_.size()) {
    throw UsageError(fmt::format("bounds cover {} problems, tau vector has {}", lo_.size(),
                                 tau.size()));
  }
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (!populated_[i]) {
      lo_[i] = hi_[i] = tau[i];
      populated_[i] = true;
    } else {
      lo_[i] = std::min(lo_[i], tau[i]);
      hi_[i] = std::max(hi_[i], tau[i]);
    }
  }
}

ScoreBounds update_bounds(ScoreBounds bounds, const TauVector& tau) {
  bounds.update(tau);
  return bounds;
}

double normalized_score(const TauVector& tau, const ScoreBounds& bounds) {
  if (tau.size() != bounds.size()) {
    throw UsageError(fmt::format("bounds cover {} problems, tau vector has {}", bounds.size(),
                                 tau.size()));
  }
  double score = 0.0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (!bounds.populated(i)) {
      throw UsageError(fmt::format("score bounds for problem {} are unpopulated", i));
    }
    const double width = bounds.hi(i) - bounds.lo(i);
    score += width > 0.0 ? (tau[i] - bounds.lo(i)) / width : kDegenerateTerm;
  }
  return score;
}

}  // namespace zcevo
