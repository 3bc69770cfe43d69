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

#include <array>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zcevo/dataset.hpp"
#include "zcevo/expr.hpp"

namespace zcevo {

/// The sixteen hand-crafted proxies known to the registry.
inline constexpr std::array<std::string_view, 16> kBaselineNames = {
    "flops", "params", "jacov", "nwot", "synflow", "snip", "epe_nas", "fisher",
    "grad_norm", "grasp", "l2_norm", "zen", "plain", "zico", "meco", "swap"};

/// Best evolved metric:
///   zico * meco^2 * log(flops) /
///   ((meco + zen) * (sqrt(snip) * (meco + zen + 2 * l2_norm) + meco))
/// Constant-free: the square is meco*meco and the doubling is l2_norm + l2_norm.
inline constexpr std::string_view kEq2Expression =
    "(div (mul (mul zico (mul meco meco)) (log flops)) "
    "(mul (add meco zen) (add (mul (sqrt snip) (add (add meco zen) (add l2_norm l2_norm))) meco)))";

/// Best expression of the first generation: zico / l2_norm * sqrt(meco).
inline constexpr std::string_view kEq3Expression = "(mul (div zico l2_norm) (sqrt meco))";

inline constexpr std::string_view kEq2Name = "sr-nas-eq2";
inline constexpr std::string_view kEq3Name = "sr-nas-eq3";

struct NamedProxy {
  std::string name;
  ExpressionTree tree;
  /// Single-leaf baseline; exempt from the minimum-depth rule.
  bool passthrough = false;
};

/// Registry names: the sixteen baselines followed by the two evolved fixtures.
std::vector<std::string> registry_names();

/// Resolves a registry name, or any feature of `feature_names` as a
/// pass-through. Throws UsageError (listing the registry) for unknown names
/// or when a required feature is missing from `feature_names`.
NamedProxy builtin_proxy(std::string_view name, std::span<const std::string> feature_names);

/// Every dataset feature as a pass-through proxy, in feature order.
std::vector<NamedProxy> all_baselines(std::span<const std::string> feature_names);

struct ReportTable {
  std::vector<std::string> proxies;          // row order: average rank ascending
  std::vector<std::string> problems;         // column order: dataset order
  std::vector<std::string> groups;           // per problem, may be empty strings
  std::vector<std::vector<double>> tau;      // [proxy][problem]
  std::vector<std::vector<int>> rank;        // dense, 1 = best tau
  std::vector<double> average_rank;
};

/// Kendall tau of every proxy on every problem. A proxy producing any
/// non-finite score on a problem gets tau -1 there.
ReportTable evaluate_report(std::span<const NamedProxy> proxies,
                            std::span<const FeatureMatrix> problems,
                            std::span<const std::string> groups = {});

std::string render_csv(const ReportTable& table);
std::string render_markdown(const ReportTable& table);
std::string render_json(const ReportTable& table);

/// For each feature, how many of `expressions` contain it at least once.
std::map<std::string, std::size_t> feature_frequency(std::span<const ExpressionTree> expressions,
                                                     std::span<const std::string> feature_names);

/// Copy of `tree` with every `from` leaf replaced by `to`.
ExpressionTree substitute_feature(const ExpressionTree& tree, std::string_view from,
                                  std::string_view to, std::span<const std::string> feature_names);

}  // namespace zcevo
