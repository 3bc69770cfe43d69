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
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zcevo/dataset.hpp"
#include "zcevo/rng.hpp"

namespace zcevo {

enum class OperatorKind : std::uint8_t { kAdd, kSub, kMul, kDiv, kNeg, kLog, kSqrt };

inline constexpr std::array<OperatorKind, 7> kAllOperators = {
    OperatorKind::kAdd, OperatorKind::kSub, OperatorKind::kMul, OperatorKind::kDiv,
    OperatorKind::kNeg, OperatorKind::kLog, OperatorKind::kSqrt};

constexpr int arity(OperatorKind op) {
  return op == OperatorKind::kNeg || op == OperatorKind::kLog || op == OperatorKind::kSqrt ? 1
                                                                                           : 2;
}

std::string_view symbol(OperatorKind op);

/// Tree depth limits. A lone leaf has depth 1.
inline constexpr int kMinDepth = 2;
inline constexpr int kMaxDepth = 10;

/// Threshold under which div and log take their protected branch.
inline constexpr double kProtectEpsilon = 1e-6;

/// Returned by evaluate when any intermediate leaves the finite range.
inline constexpr double kNonFinite = std::numeric_limits<double>::quiet_NaN();

struct Node {
  static constexpr std::uint32_t kNoFeature = std::numeric_limits<std::uint32_t>::max();

  OperatorKind op = OperatorKind::kAdd;
  std::uint32_t feature = kNoFeature;

  static Node leaf(std::uint32_t feature_index) { return {OperatorKind::kAdd, feature_index}; }
  static Node internal(OperatorKind kind) { return {kind, kNoFeature}; }

  bool is_leaf() const { return feature != kNoFeature; }
  int arity() const { return is_leaf() ? 0 : zcevo::arity(op); }

  auto operator<=>(const Node&) const = default;
};

/// Operator/feature tree stored in prefix order. Immutable value type; every
/// edit returns a new tree. Well-formedness (arity closure) is always
/// guaranteed; the depth rule is checked separately by validate(), since
/// baseline pass-through proxies are single leaves.
class ExpressionTree {
 public:
  ExpressionTree() = default;

  /// Throws UsageError unless `nodes` is exactly one complete prefix tree.
  static ExpressionTree from_prefix(std::vector<Node> nodes);
  static ExpressionTree leaf(std::uint32_t feature_index);
  static ExpressionTree make(OperatorKind op, std::span<const ExpressionTree> children);
  static ExpressionTree make(OperatorKind op, const ExpressionTree& child);
  static ExpressionTree make(OperatorKind op, const ExpressionTree& lhs,
                             const ExpressionTree& rhs);

  std::span<const Node> nodes() const { return nodes_; }
  const Node& node(std::size_t i) const { return nodes_[i]; }
  const Node& root() const { return nodes_.front(); }
  bool empty() const { return nodes_.empty(); }

  /// Node count.
  std::size_t size() const { return nodes_.size(); }
  int depth() const;

  /// One past the last node of the subtree rooted at `i`.
  std::size_t subtree_end(std::size_t i) const;
  ExpressionTree subtree(std::size_t i) const;
  /// Copy with the subtree at `i` replaced by `replacement`.
  ExpressionTree replace_subtree(std::size_t i, const ExpressionTree& replacement) const;
  /// Copy with node `i` swapped for a node of the same arity.
  ExpressionTree replace_node(std::size_t i, Node replacement) const;

  /// Indices of direct children of node `i`, left to right.
  std::vector<std::size_t> children(std::size_t i) const;
  /// Depth of each node measured from the root (root = 1).
  std::vector<int> node_levels() const;

  auto operator<=>(const ExpressionTree&) const = default;
  bool operator==(const ExpressionTree&) const = default;

 private:
  explicit ExpressionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}
  std::vector<Node> nodes_;
};

struct ExpressionTreeHash {
  std::size_t operator()(const ExpressionTree& t) const noexcept;
};

/// Throws UsageError if depth is outside [kMinDepth, kMaxDepth] or a feature
/// index is out of range.
void validate(const ExpressionTree& tree, std::size_t n_features);
bool is_valid(const ExpressionTree& tree, std::size_t n_features);

/// Parses a prefix s-expression such as "(mul snip (add snip meco))".
/// Throws ParseError on unknown symbols, arity errors, numeric literals and
/// depth violations. With allow_leaf, a bare feature name is accepted.
ExpressionTree parse(std::string_view text, std::span<const std::string> feature_names,
                     bool allow_leaf = false);

std::string print_canonical(const ExpressionTree& tree,
                            std::span<const std::string> feature_names);

/// Human-readable infix rendering with minimal parentheses.
std::string print_infix(const ExpressionTree& tree, std::span<const std::string> feature_names);

/// Protected evaluation of one feature row. Returns kNonFinite (NaN) if any
/// intermediate value is not finite.
double evaluate(const ExpressionTree& tree, std::span<const double> features);

/// evaluate() applied to every row of `matrix`.
std::vector<double> evaluate_batch(const ExpressionTree& tree, const FeatureMatrix& matrix);

inline bool is_non_finite(double v) { return !(v - v == 0.0); }

enum class GenMethod { kFull, kGrow, kRampedHalfAndHalf };

struct TreeGenConfig {
  int min_depth = kMinDepth;
  int max_depth_init = 6;
  int max_depth = kMaxDepth;
  GenMethod method = GenMethod::kRampedHalfAndHalf;
};

void validate(const TreeGenConfig& config);

/// Random valid tree with depth in [config.min_depth, config.max_depth_init].
ExpressionTree random_tree(Rng& rng, const TreeGenConfig& config, std::size_t n_features);

/// Random tree of exactly `target_depth` (full) or at most `target_depth`
/// (grow). With root_may_be_leaf, grow can return a single leaf.
ExpressionTree generate_tree(Rng& rng, GenMethod method, int target_depth,
                             std::size_t n_features, bool root_may_be_leaf = false);

/// Sorted, de-duplicated feature indices appearing in `tree`.
std::vector<std::uint32_t> features_used(const ExpressionTree& tree);

/// Reads an expression file: one s-expression per line, '#' starts a comment,
/// blank lines skipped. ParseError messages carry the 1-based line number.
struct ExpressionLine {
  std::size_t line = 0;
  ExpressionTree tree;
};
std::vector<ExpressionLine> parse_expression_file(std::string_view contents,
                                                  std::span<const std::string> feature_names,
                                                  bool allow_leaf = false);

}  // namespace zcevo
