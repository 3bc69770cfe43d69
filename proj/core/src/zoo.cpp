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

#include "zcevo/zoo.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "zcevo/error.hpp"
#include "zcevo/fitness.hpp"
#include "zcevo/text.hpp"

namespace zcevo {

std::vector<std::string> registry_names() {
  std::vector<std::string> out(kBaselineNames.begin(), kBaselineNames.end());
  out.emplace_back(kEq2Name);
  out.emplace_back(kEq3Name);
  return out;
}

namespace {

std::optional<std::uint32_t> find_feature(std::span<const std::string> names, std::string_view f) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == f) return static_cast<std::uint32_t>(i);
  }
  return std::nullopt;
}

std::string registry_listing() {
  std::string out;
  for (const auto& n : registry_names()) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

NamedProxy fixture(std::string_view name, std::string_view text,
                   std::span<const std::string> feature_names) {
  try {
    return {std::string(name), parse(text, feature_names), false};
  } catch (const ParseError& e) {
    throw UsageError(fmt::format("proxy '{}' cannot be built over this feature set: {}", name,
                                 e.what()));
  }
}

}  // namespace

NamedProxy builtin_proxy(std::string_view name, std::span<const std::string> feature_names) {
  if (name == kEq2Name) return fixture(name, kEq2Expression, feature_names);
  if (name == kEq3Name) return fixture(name, kEq3Expression, feature_names);
  if (auto idx = find_feature(feature_names, name)) {
    return {std::string(name), ExpressionTree::leaf(*idx), true};
  }
  if (std::find(kBaselineNames.begin(), kBaselineNames.end(), name) != kBaselineNames.end()) {
    throw UsageError(fmt::format("baseline '{}' is not a feature of this dataset", name));
  }
  throw UsageError(fmt::format("unknown proxy '{}'; registry: {}", name, registry_listing()));
}

std::vector<NamedProxy> all_baselines(std::span<const std::string> feature_names) {
  std::vector<NamedProxy> out;
  for (std::size_t i = 0; i < feature_names.size(); ++i) {
    out.push_back({feature_names[i], ExpressionTree::leaf(static_cast<std::uint32_t>(i)), true});
  }
  return out;
}

ReportTable evaluate_report(std::span<const NamedProxy> proxies,
                            std::span<const FeatureMatrix> problems,
                            std::span<const std::string> groups) {
  if (proxies.empty()) throw UsageError("report needs at least one proxy");
  if (problems.empty()) throw UsageError("report needs at least one problem");
  std::set<std::string> names;
  for (const auto& p : proxies) {
    if (!names.insert(p.name).second) {
      throw UsageError(fmt::format("duplicate proxy name '{}' in report", p.name));
    }
  }

  const std::size_t np = proxies.size();
  const std::size_t nq = problems.size();
  std::vector<std::vector<double>> tau(np);
  for (std::size_t p = 0; p < np; ++p) tau[p] = raw_tau_vector(proxies[p].tree, problems);

  std::vector<std::vector<int>> rank(np, std::vector<int>(nq, 0));
  for (std::size_t q = 0; q < nq; ++q) {
    std::vector<double> distinct;
    for (std::size_t p = 0; p < np; ++p) distinct.push_back(tau[p][q]);
    std::sort(distinct.begin(), distinct.end(), std::greater<>());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (std::size_t p = 0; p < np; ++p) {
      const auto it = std::find(distinct.begin(), distinct.end(), tau[p][q]);
      rank[p][q] = static_cast<int>(it - distinct.begin()) + 1;
    }
  }

  std::vector<double> avg(np);
  for (std::size_t p = 0; p < np; ++p) {
    avg[p] = std::accumulate(rank[p].begin(), rank[p].end(), 0.0) / static_cast<double>(nq);
  }

  std::vector<std::size_t> order(np);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return avg[a] < avg[b]; });

  ReportTable t;
  for (const auto& m : problems) t.problems.push_back(m.problem_id);
  t.groups.assign(nq, std::string{});
  for (std::size_t q = 0; q < std::min(nq, groups.size()); ++q) t.groups[q] = groups[q];
  for (auto p : order) {
    t.proxies.push_back(proxies[p].name);
    t.tau.push_back(tau[p]);
    t.rank.push_back(rank[p]);
    t.average_rank.push_back(avg[p]);
  }
  return t;
}

namespace {

std::string fixed(double v, int digits) { return fmt::format("{:.{}f}", v, digits); }

bool has_groups(const ReportTable& t) {
  return std::any_of(t.groups.begin(), t.groups.end(), [](const auto& g) { return !g.empty(); });
}

}  // namespace

std::string render_csv(const ReportTable& t) {
  std::string out = "proxy";
  for (const auto& p : t.problems) out += "," + p;
  out += ",average_rank\n";
  if (has_groups(t)) {
    out += "group";
    for (const auto& g : t.groups) out += "," + g;
    out += ",\n";
  }
  for (std::size_t r = 0; r < t.proxies.size(); ++r) {
    out += t.proxies[r];
    for (double v : t.tau[r]) out += "," + format_real(v);
    out += "," + format_real(t.average_rank[r]) + "\n";
  }
  return out;
}

std::string render_markdown(const ReportTable& t) {
  std::string out = "| proxy |";
  for (std::size_t q = 0; q < t.problems.size(); ++q) {
    out += " " + t.problems[q];
    if (!t.groups[q].empty()) out += " (" + t.groups[q] + ")";
    out += " |";
  }
  out += " avg rank |\n|---|";
  for (std::size_t q = 0; q < t.problems.size(); ++q) out += "---:|";
  out += "---:|\n";
  for (std::size_t r = 0; r < t.proxies.size(); ++r) {
    out += "| " + t.proxies[r] + " |";
    for (std::size_t q = 0; q < t.problems.size(); ++q) {
      out += " " + fixed(t.tau[r][q], 3);
      if (t.rank[r][q] == 1) out += " *";
      out += " |";
    }
    out += " " + fixed(t.average_rank[r], 2) + " |\n";
  }
  return out;
}

std::string render_json(const ReportTable& t) {
  nlohmann::json doc;
  doc["problems"] = t.problems;
  doc["groups"] = t.groups;
  doc["rows"] = nlohmann::json::array();
  for (std::size_t r = 0; r < t.proxies.size(); ++r) {
    nlohmann::json cells = nlohmann::json::array();
    for (std::size_t q = 0; q < t.problems.size(); ++q) {
      cells.push_back({{"problem", t.problems[q]}, {"tau", t.tau[r][q]}, {"rank", t.rank[r][q]}});
    }
    doc["rows"].push_back(
        {{"proxy", t.proxies[r]}, {"average_rank", t.average_rank[r]}, {"cells", cells}});
  }
  return doc.dump(2) + "\n";
}

std::map<std::string, std::size_t> feature_frequency(std::span<const ExpressionTree> expressions,
                                                     std::span<const std::string> feature_names) {
  if (expressions.empty()) throw UsageError("feature_frequency needs at least one expression");
  std::map<std::string, std::size_t> counts;
  for (const auto& name : feature_names) counts[name] = 0;
  for (const auto& tree : expressions) {
    for (auto f : features_used(tree)) {
      if (f >= feature_names.size()) throw UsageError("expression uses an unknown feature index");
      ++counts[feature_names[f]];
    }
  }
  return counts;
}

ExpressionTree substitute_feature(const ExpressionTree& tree, std::string_view from,
                                  std::string_view to, std::span<const std::string> feature_names) {
  const auto src = find_feature(feature_names, from);
  const auto dst = find_feature(feature_names, to);
  if (!src) throw UsageError(fmt::format("unknown feature '{}'", from));
  if (!dst) throw UsageError(fmt::format("unknown feature '{}'", to));
  ExpressionTree out = tree;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    if (tree.node(i).is_leaf() && tree.node(i).feature == *src) {
      out = out.replace_node(i, Node::leaf(*dst));
    }
  }
  return out;
}

}  // namespace zcevo
