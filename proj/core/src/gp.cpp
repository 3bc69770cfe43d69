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

#include "zcevo/gp.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <numeric>
#include <set>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "zcevo/error.hpp"

namespace zcevo {

const char* to_string(Survival s) {
  return s == Survival::kTruncation ? "truncation" : "tournament";
}

Survival parse_survival(const std::string& text) {
  if (text == "truncation") return Survival::kTruncation;
  if (text == "tournament") return Survival::kTournament;
  throw UsageError(fmt::format("unknown survival '{}' (expected truncation or tournament)", text));
}

void validate(const GpConfig& c) {
  if (c.pop_size < 2 || c.pop_size % 2 != 0) {
    throw UsageError(fmt::format("pop_size must be even and >= 2 (got {})", c.pop_size));
  }
  if (c.generations < 1) {
    throw UsageError(fmt::format("generations must be >= 1 (got {})", c.generations));
  }
  const std::pair<const char*, double> probs[] = {{"p_crossover", c.p_crossover},
                                                  {"p_subtree_mut", c.p_subtree_mut},
                                                  {"p_hoist_mut", c.p_hoist_mut},
                                                  {"p_point_mut", c.p_point_mut}};
  for (const auto& [name, p] : probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw UsageError(fmt::format("{} must be in [0, 1] (got {})", name, p));
  }
  if (c.p_reproduce() < -1e-12) {
    throw UsageError(fmt::format("variation probabilities sum to {} > 1", 1.0 - c.p_reproduce()));
  }
  validate(c.tree_gen);
  if (c.max_depth < c.tree_gen.max_depth_init || c.max_depth > kMaxDepth) {
    throw UsageError(fmt::format("max_depth {} outside [max_depth_init={}, {}]", c.max_depth,
                                 c.tree_gen.max_depth_init, kMaxDepth));
  }
  if (c.subtree_mut_depth < 1) throw UsageError("subtree_mut_depth must be >= 1");
  if (c.variation_retries < 0) throw UsageError("variation_retries must be >= 0");
  if (c.jobs < 1) throw UsageError(fmt::format("jobs must be >= 1 (got {})", c.jobs));
}

bool better(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  const auto sa = a.individual->tree.size();
  const auto sb = b.individual->tree.size();
  if (sa != sb) return sa < sb;
  return a.individual->canonical < b.individual->canonical;
}

// ---------------------------------------------------------------------------

std::vector<ExpressionTree> initialize(const GpConfig& config, std::size_t n_features) {
  validate(config);
  if (n_features == 0) throw UsageError("cannot initialize over zero features");
  Rng rng = substream(config.seed, Stream::kInit);
  const int span = config.tree_gen.max_depth_init - config.tree_gen.min_depth + 1;
  std::set<ExpressionTree> seen;
  std::vector<ExpressionTree> out;
  out.reserve(static_cast<std::size_t>(config.pop_size));
  for (int i = 0; i < config.pop_size; ++i) {
    GenMethod method = config.tree_gen.method;
    int target = config.tree_gen.min_depth + (i / 2) % span;
    if (method == GenMethod::kRampedHalfAndHalf) {
      method = i % 2 == 0 ? GenMethod::kFull : GenMethod::kGrow;
    } else {
      target = config.tree_gen.min_depth + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(span)));
    }
    ExpressionTree tree = generate_tree(rng, method, target, n_features);
    for (int attempt = 0; attempt < config.init_dedup_attempts && seen.contains(tree); ++attempt) {
      tree = generate_tree(rng, method, target, n_features);
    }
    seen.insert(tree);
    out.push_back(std::move(tree));
  }
  return out;
}

std::vector<std::size_t> tournament_indices(std::span<const Candidate> pool, std::size_t count,
                                            Rng& rng) {
  if (pool.empty()) throw UsageError("tournament over an empty pool");
  std::vector<std::size_t> winners;
  winners.reserve(count);
  if (pool.size() == 1) {
    winners.assign(count, 0);
    return winners;
  }
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  while (winners.size() < count) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t k = 0; k + 1 < order.size() && winners.size() < count; k += 2) {
      const auto a = order[k];
      const auto b = order[k + 1];
      winners.push_back(better(pool[a], pool[b]) ? a : b);
    }
  }
  return winners;
}

std::vector<Individual> binary_tournament(std::span<const Candidate> pool, std::size_t count,
                                          Rng& rng) {
  std::vector<Individual> out;
  for (auto i : tournament_indices(pool, count, rng)) out.push_back(*pool[i].individual);
  return out;
}

std::pair<ExpressionTree, ExpressionTree> swap_subtrees(const ExpressionTree& a, std::size_t i,
                                                        const ExpressionTree& b, std::size_t j) {
  if (i >= a.size() || j >= b.size()) throw UsageError("swap point out of range");
  return {a.replace_subtree(i, b.subtree(j)), b.replace_subtree(j, a.subtree(i))};
}

ExpressionTree hoist_at(const ExpressionTree& t, std::size_t s, std::size_t inner) {
  if (s >= t.size() || inner < s || inner >= t.subtree_end(s)) {
    throw UsageError("hoist point must lie inside the chosen subtree");
  }
  return t.replace_subtree(s, t.subtree(inner));
}

std::pair<ExpressionTree, ExpressionTree> crossover(const ExpressionTree& a,
                                                    const ExpressionTree& b, Rng& rng,
                                                    const DepthLimits& limits) {
  for (int attempt = 0; attempt <= limits.retries; ++attempt) {
    const auto i = uniform_index(rng, a.size());
    const auto j = uniform_index(rng, b.size());
    auto [child_a, child_b] = swap_subtrees(a, i, b, j);
    if (limits.admits(child_a) && limits.admits(child_b)) {
      return {std::move(child_a), std::move(child_b)};
    }
  }
  return {a, b};
}

ExpressionTree subtree_mutation(const ExpressionTree& t, Rng& rng, std::size_t n_features,
                                int new_depth, const DepthLimits& limits) {
  for (int attempt = 0; attempt <= limits.retries; ++attempt) {
    const auto i = uniform_index(rng, t.size());
    const auto fresh = generate_tree(rng, GenMethod::kGrow, new_depth, n_features, true);
    auto child = t.replace_subtree(i, fresh);
    if (limits.admits(child)) return child;
  }
  return t;
}

ExpressionTree hoist_mutation(const ExpressionTree& t, Rng& rng, const DepthLimits& limits) {
  for (int attempt = 0; attempt <= limits.retries; ++attempt) {
    const auto i = uniform_index(rng, t.size());
    const auto end = t.subtree_end(i);
    const auto j = i + uniform_index(rng, end - i);
    auto child = hoist_at(t, i, j);
    if (limits.admits(child)) return child;
  }
  return t;
}

ExpressionTree point_mutation(const ExpressionTree& t, Rng& rng, std::size_t n_features,
                              const DepthLimits& limits) {
  for (int attempt = 0; attempt <= limits.retries; ++attempt) {
    const auto i = uniform_index(rng, t.size());
    const Node& old = t.node(i);
    Node replacement = old;
    if (old.is_leaf()) {
      if (n_features > 1) {
        auto f = static_cast<std::uint32_t>(uniform_index(rng, n_features - 1));
        if (f >= old.feature) ++f;
        replacement = Node::leaf(f);
      }
    } else {
      std::vector<OperatorKind> options;
      for (auto op : kAllOperators) {
        if (op != old.op && arity(op) == old.arity()) options.push_back(op);
      }
      replacement = Node::internal(options[uniform_index(rng, options.size())]);
    }
    auto child = t.replace_node(i, replacement);
    if (limits.admits(child)) return child;
  }
  return t;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<TauVector> evaluate_parallel(const std::vector<const ExpressionTree*>& trees,
                                         std::span<const FeatureMatrix> train, int jobs) {
  std::vector<TauVector> out(trees.size());
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), trees.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < trees.size(); ++i) out[i] = raw_tau_vector(*trees[i], train);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < trees.size(); i = next++) {
            out[i] = raw_tau_vector(*trees[i], train);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

class Engine {
 public:
  Engine(const GpConfig& config, std::span<const std::string> names,
         std::span<const FeatureMatrix> train)
      : config_(config), names_(names), train_(train), bounds_(train.size()) {
    limits_.max_depth = config.max_depth;
    limits_.retries = config.variation_retries;
  }

  /// Fills raw_tau for each individual, computing each distinct tree once.
  void evaluate(std::vector<Individual>& individuals) {
    std::vector<const ExpressionTree*> pending;
    std::unordered_map<ExpressionTree, std::size_t, ExpressionTreeHash> pending_index;
    for (const auto& ind : individuals) {
      if (cache_.contains(ind.tree) || pending_index.contains(ind.tree)) continue;
      pending_index.emplace(ind.tree, pending.size());
      pending.push_back(&ind.tree);
    }
    std::vector<TauVector> fresh;
    try {
      fresh = evaluate_parallel(pending, train_, config_.jobs);
    } catch (const std::exception& e) {
      throw DataError(fmt::format("evaluation failed in generation {}: {}", generation_, e.what()));
    }
    evaluations_ += fresh.size();
    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (!(config_.freeze_bounds && generation_ > 0)) bounds_.update(fresh[i]);
      cache_.emplace(*pending[i], std::move(fresh[i]));
    }
    for (auto& ind : individuals) ind.raw_tau = cache_.at(ind.tree);
  }

  Individual make_individual(ExpressionTree tree) const {
    Individual ind;
    ind.canonical = print_canonical(tree, names_);
    ind.tree = std::move(tree);
    ind.birth_generation = generation_;
    return ind;
  }

  std::vector<Candidate> score(const std::vector<Individual>& pop) const {
    std::vector<Candidate> out;
    out.reserve(pop.size());
    for (const auto& ind : pop) out.push_back({&ind, normalized_score(ind.raw_tau, bounds_)});
    return out;
  }

  GenerationRecord record(const std::vector<Individual>& pop) const {
    auto scored = score(pop);
    const auto best = std::min_element(scored.begin(), scored.end(), better);
    GenerationRecord r;
    r.gen = generation_;
    r.best_score = best->score;
    double total = 0.0;
    for (const auto& c : scored) total += c.score;
    r.mean_score = total / static_cast<double>(scored.size());
    r.best_tau = best->individual->raw_tau;
    r.best_expr = best->individual->canonical;
    std::set<std::string_view> distinct;
    for (const auto& ind : pop) distinct.insert(ind.canonical);
    r.distinct_individuals = distinct.size();
    return r;
  }

  std::vector<Individual> vary(const std::vector<Individual>& parents) {
    Rng rng = substream(config_.seed, Stream::kVariation, static_cast<std::uint64_t>(generation_));
    const double c1 = config_.p_crossover;
    const double c2 = c1 + config_.p_subtree_mut;
    const double c3 = c2 + config_.p_hoist_mut;
    const double c4 = c3 + config_.p_point_mut;
    const std::size_t nf = names_.size();
    std::vector<Individual> kids;
    kids.reserve(parents.size());
    for (std::size_t k = 0; k + 1 < parents.size(); k += 2) {
      const auto& a = parents[k].tree;
      const auto& b = parents[k + 1].tree;
      const double r = uniform01(rng);
      if (r < c1) {
        auto [x, y] = crossover(a, b, rng, limits_);
        kids.push_back(make_individual(std::move(x)));
        kids.push_back(make_individual(std::move(y)));
        continue;
      }
      for (const auto* parent : {&a, &b}) {
        ExpressionTree child;
        if (r < c2) {
          child = subtree_mutation(*parent, rng, nf, config_.subtree_mut_depth, limits_);
        } else if (r < c3) {
          child = hoist_mutation(*parent, rng, limits_);
        } else if (r < c4) {
          child = point_mutation(*parent, rng, nf, limits_);
        } else {
          child = *parent;
        }
        kids.push_back(make_individual(std::move(child)));
      }
    }
    return kids;
  }

  SearchResult run(const GenerationObserver& observer) {
    SearchResult result;
    generation_ = 0;
    std::vector<Individual> pop;
    for (auto& t : initialize(config_, names_.size())) pop.push_back(make_individual(std::move(t)));
    evaluate(pop);
    if (observer) observer({0, pop, pop, &bounds_});
    result.history.push_back(record(pop));
    log(result.history.back());

    const auto pop_size = static_cast<std::size_t>(config_.pop_size);
    for (generation_ = 1; generation_ <= config_.generations; ++generation_) {
      Rng pairing = substream(config_.seed, Stream::kPairing, static_cast<std::uint64_t>(generation_));
      const auto scored = score(pop);
      std::vector<Individual> parents;
      parents.reserve(pop_size);
      for (auto i : tournament_indices(scored, pop_size, pairing)) parents.push_back(pop[i]);

      auto offspring = vary(parents);
      evaluate(offspring);

      std::vector<Individual> pool = std::move(pop);
      pool.insert(pool.end(), std::make_move_iterator(offspring.begin()),
                  std::make_move_iterator(offspring.end()));
      pop = survive(pool);
      if (observer) observer({generation_, pool, pop, &bounds_});
      result.history.push_back(record(pop));
      log(result.history.back());
    }
    generation_ = config_.generations;

    auto scored = score(pop);
    const auto best = std::min_element(scored.begin(), scored.end(), better);
    result.best = *best->individual;
    result.best_score = best->score;
    result.final_bounds = bounds_;
    result.final_population = std::move(pop);
    result.evaluations = evaluations_;
    return result;
  }

 private:
  std::vector<Individual> survive(const std::vector<Individual>& pool) const {
    const auto pop_size = static_cast<std::size_t>(config_.pop_size);
    auto scored = score(pool);
    std::vector<std::size_t> chosen;
    if (config_.survival == Survival::kTruncation) {
      std::vector<std::size_t> order(scored.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t x, std::size_t y) { return better(scored[x], scored[y]); });
      chosen.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(pop_size));
    } else {
      Rng rng = substream(config_.seed, Stream::kSurvival, static_cast<std::uint64_t>(generation_));
      chosen = tournament_indices(scored, pop_size, rng);
    }
    std::vector<Individual> out;
    out.reserve(pop_size);
    for (auto i : chosen) out.push_back(pool[i]);
    return out;
  }

  void log(const GenerationRecord& r) const {
    spdlog::debug("gen {:>3}  best {:.4f}  mean {:.4f}  distinct {:>3}  {}", r.gen, r.best_score,
                  r.mean_score, r.distinct_individuals, r.best_expr);
  }

  const GpConfig& config_;
  std::span<const std::string> names_;
  std::span<const FeatureMatrix> train_;
  ScoreBounds bounds_;
  DepthLimits limits_;
  std::unordered_map<ExpressionTree, TauVector, ExpressionTreeHash> cache_;
  std::size_t evaluations_ = 0;
  int generation_ = 0;
};

}  // namespace

SearchResult evolve(const GpConfig& config, std::span<const std::string> feature_names,
                    std::span<const FeatureMatrix> train, const GenerationObserver& observer) {
  validate(config);
  if (train.empty()) throw UsageError("evolve needs at least one training problem");
  if (feature_names.empty()) throw UsageError("evolve needs at least one feature");
  for (const auto& m : train) {
    if (m.cols() != feature_names.size()) {
      throw UsageError(fmt::format("problem '{}' has {} columns, expected {}", m.problem_id,
                                   m.cols(), feature_names.size()));
    }
  }
  Engine engine(config, feature_names, train);
  return engine.run(observer);
}

}  // namespace zcevo
