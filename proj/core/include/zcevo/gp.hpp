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
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "zcevo/dataset.hpp"
#include "zcevo/expr.hpp"
#include "zcevo/fitness.hpp"
#include "zcevo/rng.hpp"

namespace zcevo {

enum class Survival {
  kTruncation,  // the pop_size best of parents + offspring
  kTournament,  // one round of pairwise tournaments over parents + offspring
};

const char* to_string(Survival s);
Survival parse_survival(const std::string& text);

struct GpConfig {
  int pop_size = 100;
  int generations = 50;

  double p_crossover = 0.6;
  double p_subtree_mut = 0.15;
  double p_hoist_mut = 0.1;
  double p_point_mut = 0.1;
  // remainder (0.05 by default) copies parents unchanged

  TreeGenConfig tree_gen;
  int max_depth = kMaxDepth;
  int subtree_mut_depth = 4;
  int variation_retries = 10;
  int init_dedup_attempts = 20;

  Survival survival = Survival::kTruncation;
  std::uint64_t seed = 0;
  int jobs = 1;

  /// Test mode: stop widening score bounds after generation 0.
  bool freeze_bounds = false;

  double p_reproduce() const {
    return 1.0 - p_crossover - p_subtree_mut - p_hoist_mut - p_point_mut;
  }
};

/// Throws UsageError describing the first violated constraint.
void validate(const GpConfig& config);

struct Individual {
  ExpressionTree tree;
  std::string canonical;
  TauVector raw_tau;
  int birth_generation = 0;
};

/// An individual paired with its score under the bounds current at the time
/// of comparison.
struct Candidate {
  const Individual* individual = nullptr;
  double score = 0.0;
};

/// Total order used for every comparison: higher score, then smaller tree,
/// then lexicographically smaller canonical string.
bool better(const Candidate& a, const Candidate& b);

/// pop_size valid trees by ramped half-and-half: individual i alternates
/// full/grow and ramps its target depth over [min_depth, max_depth_init].
/// Structural duplicates are regenerated up to init_dedup_attempts times.
std::vector<ExpressionTree> initialize(const GpConfig& config, std::size_t n_features);

/// Pool indices of `count` tournament winners. Each round shuffles the pool
/// into floor(|pool|/2) disjoint pairs and keeps each pair's better member.
std::vector<std::size_t> tournament_indices(std::span<const Candidate> pool, std::size_t count,
                                            Rng& rng);

std::vector<Individual> binary_tournament(std::span<const Candidate> pool, std::size_t count,
                                          Rng& rng);

/// Depth limits used by the variation operators.
struct DepthLimits {
  int min_depth = kMinDepth;
  int max_depth = kMaxDepth;
  int retries = 10;

  bool admits(const ExpressionTree& t) const {
    const int d = t.depth();
    return d >= min_depth && d <= max_depth;
  }
};

/// Children of exchanging the subtree at `i` of `a` with the subtree at `j` of `b`.
std::pair<ExpressionTree, ExpressionTree> swap_subtrees(const ExpressionTree& a, std::size_t i,
                                                        const ExpressionTree& b, std::size_t j);

/// `t` with the subtree at `s` replaced by its own subtree at `inner`
/// (which must lie within [s, t.subtree_end(s))).
ExpressionTree hoist_at(const ExpressionTree& t, std::size_t s, std::size_t inner);

/// Swaps uniformly chosen subtrees. If either child breaks the depth limits
/// after `retries` further attempts, both parents are returned unchanged.
std::pair<ExpressionTree, ExpressionTree> crossover(const ExpressionTree& a,
                                                    const ExpressionTree& b, Rng& rng,
                                                    const DepthLimits& limits = {});

/// Replaces a uniformly chosen subtree by a fresh grow tree of depth at most
/// `new_depth` (which may be a single leaf).
ExpressionTree subtree_mutation(const ExpressionTree& t, Rng& rng, std::size_t n_features,
                                int new_depth = 4, const DepthLimits& limits = {});

/// Replaces a chosen subtree s by a subtree of s.
ExpressionTree hoist_mutation(const ExpressionTree& t, Rng& rng,
                              const DepthLimits& limits = {});

/// Swaps one node for another of the same arity: an operator for a different
/// operator, a leaf for a different feature (when more than one exists).
ExpressionTree point_mutation(const ExpressionTree& t, Rng& rng, std::size_t n_features,
                              const DepthLimits& limits = {});

struct GenerationRecord {
  int gen = 0;
  double best_score = 0.0;
  double mean_score = 0.0;
  TauVector best_tau;
  std::size_t distinct_individuals = 0;
  std::string best_expr;
};

struct SearchResult {
  Individual best;
  double best_score = 0.0;
  std::vector<GenerationRecord> history;
  ScoreBounds final_bounds;
  std::vector<Individual> final_population;
  /// Number of raw tau vectors actually computed.
  std::size_t evaluations = 0;
};

/// Called once per generation with the comparison pool (generation 0: the
/// initial population; later: parents + offspring) and the survivors.
struct GenerationEvent {
  int gen = 0;
  std::span<const Individual> pool;
  std::span<const Individual> survivors;
  const ScoreBounds* bounds = nullptr;
};
using GenerationObserver = std::function<void(const GenerationEvent&)>;

/// Runs the generational loop over the training problems. Deterministic in
/// (config minus jobs, data).
SearchResult evolve(const GpConfig& config, std::span<const std::string> feature_names,
                    std::span<const FeatureMatrix> train, const GenerationObserver& observer = {});

}  // namespace zcevo
