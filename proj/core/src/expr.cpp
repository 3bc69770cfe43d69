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

#include "zcevo/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/format.h>

#include "zcevo/error.hpp"
#include "zcevo/text.hpp"

namespace zcevo {

std::string_view symbol(OperatorKind op) {
  switch (op) {
    case OperatorKind::kAdd: return "add";
    case OperatorKind::kSub: return "sub";
    case OperatorKind::kMul: return "mul";
    case OperatorKind::kDiv: return "div";
    case OperatorKind::kNeg: return "neg";
    case OperatorKind::kLog: return "log";
    case OperatorKind::kSqrt: return "sqrt";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Structure

ExpressionTree ExpressionTree::from_prefix(std::vector<Node> nodes) {
  // Open slots still waiting for a subtree; starts at 1 for the root.
  std::size_t open = 1;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (open == 0) throw UsageError("prefix node list has trailing nodes");
    if (!nodes[i].is_leaf() && static_cast<std::uint8_t>(nodes[i].op) > 6) {
      throw UsageError("unknown operator code");
    }
    open = open - 1 + static_cast<std::size_t>(nodes[i].arity());
  }
  if (open != 0) throw UsageError("prefix node list is incomplete");
  return ExpressionTree(std::move(nodes));
}

ExpressionTree ExpressionTree::leaf(std::uint32_t feature_index) {
  return ExpressionTree({Node::leaf(feature_index)});
}

ExpressionTree ExpressionTree::make(OperatorKind op, std::span<const ExpressionTree> children) {
  if (children.size() != static_cast<std::size_t>(arity(op))) {
    throw UsageError(fmt::format("operator '{}' takes {} operand(s), got {}", symbol(op),
                                 arity(op), children.size()));
  }
  std::vector<Node> nodes{Node::internal(op)};
  for (const auto& c : children) {
    if (c.empty()) throw UsageError("empty child tree");
    nodes.insert(nodes.end(), c.nodes_.begin(), c.nodes_.end());
  }
  return ExpressionTree(std::move(nodes));
}

ExpressionTree ExpressionTree::make(OperatorKind op, const ExpressionTree& child) {
  return make(op, std::span<const ExpressionTree>(&child, 1));
}

ExpressionTree ExpressionTree::make(OperatorKind op, const ExpressionTree& lhs,
                                    const ExpressionTree& rhs) {
  const std::array<ExpressionTree, 2> pair{lhs, rhs};
  return make(op, pair);
}

std::size_t ExpressionTree::subtree_end(std::size_t i) const {
  std::size_t open = 1;
  while (open > 0) {
    open = open - 1 + static_cast<std::size_t>(nodes_[i].arity());
    ++i;
  }
  return i;
}

ExpressionTree ExpressionTree::subtree(std::size_t i) const {
  return ExpressionTree(std::vector<Node>(nodes_.begin() + static_cast<std::ptrdiff_t>(i),
                                          nodes_.begin() + static_cast<std::ptrdiff_t>(subtree_end(i))));
}

ExpressionTree ExpressionTree::replace_subtree(std::size_t i,
                                               const ExpressionTree& replacement) const {
  const std::size_t end = subtree_end(i);
  std::vector<Node> out;
  out.reserve(nodes_.size() - (end - i) + replacement.size());
  out.insert(out.end(), nodes_.begin(), nodes_.begin() + static_cast<std::ptrdiff_t>(i));
  out.insert(out.end(), replacement.nodes_.begin(), replacement.nodes_.end());
  out.insert(out.end(), nodes_.begin() + static_cast<std::ptrdiff_t>(end), nodes_.end());
  return ExpressionTree(std::move(out));
}

ExpressionTree ExpressionTree::replace_node(std::size_t i, Node replacement) const {
  if (replacement.arity() != nodes_.at(i).arity()) {
    throw UsageError("replacement node must keep the same arity");
  }
  auto copy = nodes_;
  copy[i] = replacement;
  return ExpressionTree(std::move(copy));
}

std::vector<std::size_t> ExpressionTree::children(std::size_t i) const {
  std::vector<std::size_t> out;
  std::size_t next = i + 1;
  for (int k = 0; k < nodes_[i].arity(); ++k) {
    out.push_back(next);
    next = subtree_end(next);
  }
  return out;
}

std::vector<int> ExpressionTree::node_levels() const {
  std::vector<int> levels(nodes_.size(), 0);
  // Stack of (level, remaining children) for open internal nodes.
  std::vector<std::pair<int, int>> open;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const int level = open.empty() ? 1 : open.back().first + 1;
    levels[i] = level;
    if (!open.empty() && --open.back().second == 0) open.pop_back();
    if (nodes_[i].arity() > 0) open.emplace_back(level, nodes_[i].arity());
  }
  return levels;
}

int ExpressionTree::depth() const {
  if (nodes_.empty()) return 0;
  const auto levels = node_levels();
  return *std::max_element(levels.begin(), levels.end());
}

std::size_t ExpressionTreeHash::operator()(const ExpressionTree& t) const noexcept {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (const auto& n : t.nodes()) {
    h = splitmix64(h ^ (static_cast<std::uint64_t>(n.op) << 32) ^ n.feature);
  }
  return static_cast<std::size_t>(h);
}

void validate(const ExpressionTree& tree, std::size_t n_features) {
  if (tree.empty()) throw UsageError("empty expression tree");
  for (const auto& n : tree.nodes()) {
    if (n.is_leaf() && n.feature >= n_features) {
      throw UsageError(fmt::format("feature index {} out of range ({} features)", n.feature,
                                   n_features));
    }
  }
  const int d = tree.depth();
  if (d < kMinDepth || d > kMaxDepth) {
    throw UsageError(
        fmt::format("tree depth {} outside [{}, {}]", d, kMinDepth, kMaxDepth));
  }
}

bool is_valid(const ExpressionTree& tree, std::size_t n_features) {
  if (tree.empty()) return false;
  for (const auto& n : tree.nodes()) {
    if (n.is_leaf() && n.feature >= n_features) return false;
  }
  const int d = tree.depth();
  return d >= kMinDepth && d <= kMaxDepth;
}

std::vector<std::uint32_t> features_used(const ExpressionTree& tree) {
  std::vector<std::uint32_t> out;
  for (const auto& n : tree.nodes()) {
    if (n.is_leaf()) out.push_back(n.feature);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Text

namespace {

class Parser {
 public:
  Parser(std::string_view text, std::span<const std::string> names)
      : text_(text), names_(names) {}

  ExpressionTree run(bool allow_leaf) {
    skip_space();
    if (pos_ >= text_.size()) fail("empty expression");
    std::vector<Node> nodes;
    expr(nodes, 1);
    skip_space();
    if (pos_ < text_.size()) fail("unexpected trailing input");
    auto tree = ExpressionTree::from_prefix(std::move(nodes));
    const int d = tree.depth();
    if (d < kMinDepth && !allow_leaf) {
      throw ParseError(fmt::format("tree depth {} below minimum {}", d, kMinDepth), 0);
    }
    return tree;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(fmt::format("{} at offset {}", what, pos_), pos_);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string_view atom() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  static bool looks_numeric(std::string_view tok) {
    if (parse_real(tok)) return true;
    const char c = tok.empty() ? '\0' : tok.front();
    return std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+';
  }

  void expr(std::vector<Node>& out, int level) {
    if (level > kMaxDepth) {
      fail(fmt::format("tree depth exceeds maximum {}", kMaxDepth));
    }
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    if (text_[pos_] == ')') fail("unexpected ')'");
    if (text_[pos_] != '(') {
      const std::size_t at = pos_;
      const auto tok = atom();
      if (looks_numeric(tok)) {
        pos_ = at;
        fail(fmt::format("constant '{}' not allowed", tok));
      }
      for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == tok) {
          out.push_back(Node::leaf(static_cast<std::uint32_t>(i)));
          return;
        }
      }
      pos_ = at;
      if (op_from(tok)) fail(fmt::format("operator '{}' used without parentheses", tok));
      fail(fmt::format("unknown symbol '{}'", tok));
    }
    ++pos_;  // '('
    skip_space();
    const std::size_t head_at = pos_;
    const auto head = atom();
    auto op = op_from(head);
    if (!op) {
      pos_ = head_at;
      if (head.empty()) fail("expected operator after '('");
      fail(fmt::format("unknown operator '{}'", head));
    }
    out.push_back(Node::internal(*op));
    int count = 0;
    while (true) {
      skip_space();
      if (pos_ >= text_.size()) fail("missing ')'");
      if (text_[pos_] == ')') break;
      if (count == arity(*op)) {
        fail(fmt::format("operator '{}' takes {} operand(s), got more", symbol(*op), arity(*op)));
      }
      expr(out, level + 1);
      ++count;
    }
    if (count != arity(*op)) {
      fail(fmt::format("operator '{}' takes {} operand(s), got {}", symbol(*op), arity(*op),
                       count));
    }
    ++pos_;  // ')'
  }

  static std::optional<OperatorKind> op_from(std::string_view tok) {
    for (auto op : kAllOperators) {
      if (symbol(op) == tok) return op;
    }
    return std::nullopt;
  }

  std::string_view text_;
  std::span<const std::string> names_;
  std::size_t pos_ = 0;
};

const std::string& feature_name(std::span<const std::string> names, std::uint32_t idx) {
  if (idx >= names.size()) {
    throw UsageError(fmt::format("feature index {} has no name ({} names)", idx, names.size()));
  }
  return names[idx];
}

void print_prefix(const ExpressionTree& t, std::span<const std::string> names, std::size_t i,
                  std::string& out) {
  const auto& n = t.node(i);
  if (n.is_leaf()) {
    out += feature_name(names, n.feature);
    return;
  }
  out += '(';
  out += symbol(n.op);
  for (auto c : t.children(i)) {
    out += ' ';
    print_prefix(t, names, c, out);
  }
  out += ')';
}

int precedence(const Node& n) {
  if (n.is_leaf()) return 4;
  switch (n.op) {
    case OperatorKind::kAdd:
    case OperatorKind::kSub: return 1;
    case OperatorKind::kMul:
    case OperatorKind::kDiv: return 2;
    case OperatorKind::kNeg: return 3;
    case OperatorKind::kLog:
    case OperatorKind::kSqrt: return 4;
  }
  return 4;
}

std::string infix(const ExpressionTree& t, std::span<const std::string> names, std::size_t i) {
  const auto& n = t.node(i);
  if (n.is_leaf()) return feature_name(names, n.feature);
  const auto kids = t.children(i);
  switch (n.op) {
    case OperatorKind::kLog:
    case OperatorKind::kSqrt:
      return fmt::format("{}({})", symbol(n.op), infix(t, names, kids[0]));
    case OperatorKind::kNeg: {
      const auto& c = t.node(kids[0]);
      auto inner = infix(t, names, kids[0]);
      if (precedence(c) < 4) return "-(" + inner + ")";
      return "-" + inner;
    }
    default: break;
  }
  static constexpr std::string_view kInfixSymbol[] = {" + ", " - ", " * ", " / "};
  const int prec = precedence(n);
  const auto& lhs = t.node(kids[0]);
  const auto& rhs = t.node(kids[1]);
  auto left = infix(t, names, kids[0]);
  auto right = infix(t, names, kids[1]);
  if (precedence(lhs) < prec) left = "(" + left + ")";
  const bool non_assoc = n.op == OperatorKind::kSub || n.op == OperatorKind::kDiv;
  if (precedence(rhs) < prec || (non_assoc && precedence(rhs) == prec) ||
      (!rhs.is_leaf() && rhs.op == OperatorKind::kNeg)) {
    right = "(" + right + ")";
  }
  return left + std::string(kInfixSymbol[static_cast<int>(n.op)]) + right;
}

}  // namespace

ExpressionTree parse(std::string_view text, std::span<const std::string> feature_names,
                     bool allow_leaf) {
  return Parser(text, feature_names).run(allow_leaf);
}

std::string print_canonical(const ExpressionTree& tree,
                            std::span<const std::string> feature_names) {
  if (tree.empty()) return {};
  std::string out;
  print_prefix(tree, feature_names, 0, out);
  return out;
}

std::string print_infix(const ExpressionTree& tree, std::span<const std::string> feature_names) {
  if (tree.empty()) return {};
  return infix(tree, feature_names, 0);
}

std::vector<ExpressionLine> parse_expression_file(std::string_view contents,
                                                  std::span<const std::string> feature_names,
                                                  bool allow_leaf) {
  std::vector<ExpressionLine> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= contents.size()) {
    auto end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    ++line_no;
    auto line = contents.substr(start, end - start);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) {
      line.remove_suffix(1);
    }
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) {
      line.remove_prefix(1);
    }
    if (!line.empty()) {
      try {
        out.push_back({line_no, parse(line, feature_names, allow_leaf)});
      } catch (const ParseError& e) {
        throw ParseError(fmt::format("line {}: {}", line_no, e.what()), e.offset());
      }
    }
    if (end == contents.size()) break;
    start = end + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

inline bool finite(double v) { return std::isfinite(v); }

inline double apply_unary(OperatorKind op, double a) {
  if (!finite(a)) return kNonFinite;
  double r = 0.0;
  switch (op) {
    case OperatorKind::kNeg: r = -a; break;
    case OperatorKind::kLog: r = std::fabs(a) > kProtectEpsilon ? std::log(std::fabs(a)) : 0.0; break;
    case OperatorKind::kSqrt: r = std::sqrt(std::fabs(a)); break;
    default: return kNonFinite;
  }
  return finite(r) ? r : kNonFinite;
}

inline double apply_binary(OperatorKind op, double a, double b) {
  if (!finite(a) || !finite(b)) return kNonFinite;
  double r = 0.0;
  switch (op) {
    case OperatorKind::kAdd: r = a + b; break;
    case OperatorKind::kSub: r = a - b; break;
    case OperatorKind::kMul: r = a * b; break;
    case OperatorKind::kDiv: r = std::fabs(b) > kProtectEpsilon ? a / b : 1.0; break;
    default: return kNonFinite;
  }
  return finite(r) ? r : kNonFinite;
}

}  // namespace

double evaluate(const ExpressionTree& tree, std::span<const double> features) {
  if (tree.empty()) throw UsageError("evaluate on empty tree");
  const auto nodes = tree.nodes();
  std::vector<double> stack;
  stack.reserve(nodes.size());
  for (std::size_t k = nodes.size(); k-- > 0;) {
    const auto& n = nodes[k];
    if (n.is_leaf()) {
      if (n.feature >= features.size()) {
        throw UsageError(fmt::format("feature index {} but row has {} values", n.feature,
                                     features.size()));
      }
      stack.push_back(features[n.feature]);
    } else if (n.arity() == 1) {
      stack.back() = apply_unary(n.op, stack.back());
    } else {
      // Operands were pushed right-to-left, so the left operand is on top.
      const double lhs = stack.back();
      stack.pop_back();
      stack.back() = apply_binary(n.op, lhs, stack.back());
    }
  }
  return stack.back();
}

std::vector<double> evaluate_batch(const ExpressionTree& tree, const FeatureMatrix& matrix) {
  if (tree.empty()) throw UsageError("evaluate on empty tree");
  const std::size_t n = matrix.rows();
  const auto nodes = tree.nodes();
  for (const auto& node : nodes) {
    if (node.is_leaf() && node.feature >= matrix.cols()) {
      throw UsageError(fmt::format("feature index {} but matrix has {} columns", node.feature,
                                   matrix.cols()));
    }
  }
  std::vector<std::vector<double>> stack;
  std::vector<std::vector<double>> spare;
  auto fresh = [&]() {
    if (spare.empty()) return std::vector<double>(n);
    auto v = std::move(spare.back());
    spare.pop_back();
    return v;
  };
  for (std::size_t k = nodes.size(); k-- > 0;) {
    const auto& node = nodes[k];
    if (node.is_leaf()) {
      auto col = matrix.column(node.feature);
      auto v = fresh();
      std::copy(col.begin(), col.end(), v.begin());
      stack.push_back(std::move(v));
    } else if (node.arity() == 1) {
      auto& v = stack.back();
      for (std::size_t r = 0; r < n; ++r) v[r] = apply_unary(node.op, v[r]);
    } else {
      auto lhs = std::move(stack.back());
      stack.pop_back();
      auto& rhs = stack.back();
      for (std::size_t r = 0; r < n; ++r) rhs[r] = apply_binary(node.op, lhs[r], rhs[r]);
      spare.push_back(std::move(lhs));
    }
  }
  return std::move(stack.back());
}

// ---------------------------------------------------------------------------
// Generation

void validate(const TreeGenConfig& config) {
  if (config.min_depth < kMinDepth || config.max_depth_init < config.min_depth ||
      config.max_depth < config.max_depth_init || config.max_depth > kMaxDepth) {
    throw UsageError(fmt::format(
        "tree generation depths must satisfy {} <= min ({}) <= max_init ({}) <= max ({}) <= {}",
        kMinDepth, config.min_depth, config.max_depth_init, config.max_depth, kMaxDepth));
  }
}

namespace {

void grow_into(std::vector<Node>& out, Rng& rng, GenMethod method, int level, int target,
               std::size_t n_features, bool force_operator) {
  bool make_leaf = level >= target;
  if (!make_leaf && !force_operator && method == GenMethod::kGrow) {
    make_leaf = uniform01(rng) < 0.5;
  }
  if (make_leaf) {
    out.push_back(Node::leaf(static_cast<std::uint32_t>(uniform_index(rng, n_features))));
    return;
  }
  const auto op = kAllOperators[uniform_index(rng, kAllOperators.size())];
  out.push_back(Node::internal(op));
  for (int k = 0; k < arity(op); ++k) {
    grow_into(out, rng, method, level + 1, target, n_features, false);
  }
}

}  // namespace

ExpressionTree generate_tree(Rng& rng, GenMethod method, int target_depth,
                             std::size_t n_features, bool root_may_be_leaf) {
  if (n_features == 0) throw UsageError("cannot generate trees over zero features");
  if (method == GenMethod::kRampedHalfAndHalf) {
    method = uniform01(rng) < 0.5 ? GenMethod::kFull : GenMethod::kGrow;
  }
  std::vector<Node> nodes;
  grow_into(nodes, rng, method, 1, target_depth, n_features, !root_may_be_leaf);
  return ExpressionTree::from_prefix(std::move(nodes));
}

ExpressionTree random_tree(Rng& rng, const TreeGenConfig& config, std::size_t n_features) {
  validate(config);
  const int span = config.max_depth_init - config.min_depth + 1;
  const int target = config.min_depth + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(span)));
  return generate_tree(rng, config.method, target, n_features);
}

}  // namespace zcevo
