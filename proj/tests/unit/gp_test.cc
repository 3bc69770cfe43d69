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
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "zcevo/error.hpp"

namespace zcevo {
namespace {

const std::vector<std::string> kNames{"snip", "meco", "zen", "zico"};

ExpressionTree p(std::string_view s) { return parse(s, kNames); }

Individual ind(std::string_view s) {
  Individual i;
  i.tree = p(s);
  i.canonical = print_canonical(i.tree, kNames);
  return i;
}

/// Problems where the first feature is a noisy copy of the target.
std::vector<FeatureMatrix> toy_problems(std::size_t n_problems, std::size_t rows,
                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  std::normal_distribution<double> noise(0.0, 0.5);
  std::vector<FeatureMatrix> out;
  for (std::size_t k = 0; k < n_problems; ++k) {
    FeatureMatrix m(rows, kNames.size());
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < kNames.size(); ++c) m.at(r, c) = u(rng);
      m.targets.push_back(m.at(r, 0) * m.at(r, 1) + noise(rng));
    }
    out.push_back(std::move(m));
  }
  return out;
}

GpConfig small_config(std::uint64_t seed) {
  GpConfig c;
  c.pop_size = 20;
  c.generations = 8;
  c.seed = seed;
  return c;
}

TEST(GpConfig, Validation) {
  EXPECT_NO_THROW(validate(GpConfig{}));
  auto bad = [](auto mutate) {
    GpConfig c;
    mutate(c);
    EXPECT_THROW(validate(c), UsageError);
  };
  bad([](GpConfig& c) { c.pop_size = 101; });
  bad([](GpConfig& c) { c.pop_size = 0; });
  bad([](GpConfig& c) { c.generations = 0; });
  bad([](GpConfig& c) { c.p_crossover = 0.9; });
  bad([](GpConfig& c) { c.p_point_mut = -0.1; });
  bad([](GpConfig& c) { c.tree_gen.max_depth_init = 11; });
  bad([](GpConfig& c) { c.jobs = 0; });
  EXPECT_DOUBLE_EQ(GpConfig{}.p_reproduce(), 0.05);
}

TEST(Initialize, DepthRangeAndDeterminism) {
  GpConfig c;
  c.seed = 5;
  const auto a = initialize(c, kNames.size());
  ASSERT_EQ(a.size(), 100u);
  for (const auto& t : a) {
    EXPECT_GE(t.depth(), 2);
    EXPECT_LE(t.depth(), c.tree_gen.max_depth_init);
  }
  EXPECT_EQ(a, initialize(c, kNames.size()));
  EXPECT_GT(std::set<ExpressionTree>(a.begin(), a.end()).size(), 90u);
}

TEST(Initialize, SingleFeature) {
  GpConfig c;
  c.pop_size = 2;
  const auto pop = initialize(c, 1);
  ASSERT_EQ(pop.size(), 2u);
  for (const auto& t : pop) EXPECT_EQ(features_used(t), std::vector<std::uint32_t>{0});
}

TEST(BinaryTournament, HigherScoreWins) {
  auto a = ind("(neg meco)"), b = ind("(neg zen)");
  std::vector<Candidate> pool{{&a, 1.0}, {&b, 2.0}};
  Rng rng(1);
  const auto w = binary_tournament(pool, 1, rng);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].canonical, "(neg zen)");
}

TEST(BinaryTournament, TwoRoundsOfDisjointPairs) {
  std::vector<Individual> inds{ind("(neg snip)"), ind("(neg meco)"), ind("(neg zen)"),
                               ind("(neg zico)")};
  std::vector<Candidate> pool;
  for (std::size_t i = 0; i < 4; ++i) pool.push_back({&inds[i], static_cast<double>(i)});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto w = tournament_indices(pool, 4, rng);
    ASSERT_EQ(w.size(), 4u);
    // Each round: two distinct winners, and the best member (index 3) always wins its pair.
    for (int round = 0; round < 2; ++round) {
      EXPECT_NE(w[2 * round], w[2 * round + 1]);
      EXPECT_TRUE(w[2 * round] == 3 || w[2 * round + 1] == 3);
      EXPECT_NE(w[2 * round], 0u);
      EXPECT_NE(w[2 * round + 1], 0u);
    }
  }
}

TEST(BinaryTournament, TieBreaks) {
  auto big = ind("(add meco (neg zen))"), small = ind("(add meco zen)");
  std::vector<Candidate> pool{{&big, 1.0}, {&small, 1.0}};
  Rng rng(3);
  EXPECT_EQ(binary_tournament(pool, 1, rng)[0].canonical, "(add meco zen)");

  auto x = ind("(add meco zen)"), y = ind("(add meco snip)");
  EXPECT_TRUE(better({&y, 0.5}, {&x, 0.5}));
  EXPECT_FALSE(better({&x, 0.5}, {&y, 0.5}));
  EXPECT_TRUE(better({&x, 0.6}, {&y, 0.5}));
}

TEST(Crossover, RootSwapExchangesParents) {
  const auto a = p("(mul snip (add snip meco))"), b = p("(neg zen)");
  const auto [x, y] = swap_subtrees(a, 0, b, 0);
  EXPECT_EQ(x, b);
  EXPECT_EQ(y, a);
}

TEST(Crossover, ExhaustedRetriesReturnParents) {
  std::string chain = "(add meco snip)";
  for (int i = 0; i < 8; ++i) chain = "(neg " + chain + ")";
  const auto a = p(chain), b = p("(mul zen (sqrt zico))");
  ASSERT_EQ(a.depth(), 10);
  // Limits no child can meet force every attempt to fail.
  DepthLimits impossible{.min_depth = 2, .max_depth = 1, .retries = 10};
  Rng rng(1);
  const auto [x, y] = crossover(a, b, rng, impossible);
  EXPECT_EQ(x, a);
  EXPECT_EQ(y, b);
}

TEST(Crossover, ChainsAtMaxDepth) {
  std::string chain_a = "meco", chain_b = "zen";
  for (int i = 0; i < 9; ++i) {
    chain_a = "(neg " + chain_a + ")";
    chain_b = "(sqrt " + chain_b + ")";
  }
  const auto a = p(chain_a), b = p(chain_b);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const auto [x, y] = crossover(a, b, rng);
    EXPECT_LE(x.depth(), 10);
    EXPECT_LE(y.depth(), 10);
    EXPECT_GE(x.depth(), 2);
    EXPECT_GE(y.depth(), 2);
    EXPECT_EQ(x.size() + y.size(), a.size() + b.size());
  }
}

TEST(Crossover, FixedSeedIsDeterministicAndValid) {
  const auto a = p("(mul snip (add snip meco))"), b = p("(neg zen)");
  Rng r1(42), r2(42);
  const auto first = crossover(a, b, r1);
  EXPECT_EQ(first, crossover(a, b, r2));
  EXPECT_TRUE(is_valid(first.first, kNames.size()));
  EXPECT_TRUE(is_valid(first.second, kNames.size()));
  EXPECT_EQ(first.first.size() + first.second.size(), a.size() + b.size());
}

TEST(Mutation, HoistExample) {
  const auto t = p("(neg (sqrt meco))");
  EXPECT_EQ(print_canonical(hoist_at(t, 0, 1), kNames), "(sqrt meco)");
  EXPECT_THROW(hoist_at(t, 1, 0), UsageError);
}

TEST(Mutation, PointAtRootKeepsArity) {
  const auto t = p("(add snip meco)");
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Rng rng(seed);
    const auto m = point_mutation(t, rng, kNames.size());
    ASSERT_EQ(m.size(), 3u);
    if (m.root().op != OperatorKind::kAdd) {
      seen.insert(std::string(symbol(m.root().op)));
      EXPECT_EQ(m.subtree(1), t.subtree(1));
      EXPECT_EQ(m.subtree(2), t.subtree(2));
    } else {
      EXPECT_NE(m, t);  // a leaf changed instead
    }
  }
  EXPECT_EQ(seen, (std::set<std::string>{"sub", "mul", "div"}));
}

TEST(Mutation, HoistNeverGrows) {
  Rng rng(12);
  for (int i = 0; i < 2000; ++i) {
    const auto t = random_tree(rng, {.max_depth_init = 8}, kNames.size());
    const auto h = hoist_mutation(t, rng);
    EXPECT_LE(h.size(), t.size());
    EXPECT_TRUE(is_valid(h, kNames.size()));
  }
}

TEST(Mutation, OperatorsPreserveValidity) {
  Rng rng(21);
  for (int i = 0; i < 2000; ++i) {
    const auto t = random_tree(rng, {.max_depth_init = 10}, kNames.size());
    EXPECT_TRUE(is_valid(subtree_mutation(t, rng, kNames.size()), kNames.size()));
    EXPECT_TRUE(is_valid(point_mutation(t, rng, kNames.size()), kNames.size()));
    const auto u = random_tree(rng, {.max_depth_init = 10}, kNames.size());
    const auto [x, y] = crossover(t, u, rng);
    EXPECT_TRUE(is_valid(x, kNames.size()));
    EXPECT_TRUE(is_valid(y, kNames.size()));
  }
}

TEST(Evolve, SmokeOnIdentityFeature) {
  FeatureMatrix m(20, 1);
  for (std::size_t r = 0; r < 20; ++r) {
    m.at(r, 0) = 1.0 + static_cast<double>(r);
    m.targets.push_back(m.at(r, 0));
  }
  GpConfig c;
  c.pop_size = 2;
  c.generations = 1;
  const std::vector<std::string> names{"m"};
  const std::vector<FeatureMatrix> train{m};
  const auto res = evolve(c, names, train);
  EXPECT_EQ(res.history.size(), 2u);
  EXPECT_EQ(res.final_population.size(), 2u);
  // with a single feature, any tree increasing in m reaches tau 1
  const auto tau = raw_tau_vector(res.best.tree, train);
  EXPECT_EQ(tau, res.best.raw_tau);
}

TEST(Evolve, DeterministicAcrossRunsAndJobs) {
  const auto train = toy_problems(3, 60, 4);
  auto c = small_config(99);
  const auto a = evolve(c, kNames, train);
  const auto b = evolve(c, kNames, train);
  c.jobs = 4;
  const auto d = evolve(c, kNames, train);
  for (const auto* other : {&b, &d}) {
    EXPECT_EQ(a.best.canonical, other->best.canonical);
    EXPECT_EQ(a.best_score, other->best_score);
    EXPECT_EQ(a.evaluations, other->evaluations);
    ASSERT_EQ(a.history.size(), other->history.size());
    for (std::size_t g = 0; g < a.history.size(); ++g) {
      EXPECT_EQ(a.history[g].best_expr, other->history[g].best_expr);
      EXPECT_EQ(a.history[g].mean_score, other->history[g].mean_score);
    }
    ASSERT_EQ(a.final_population.size(), other->final_population.size());
    for (std::size_t i = 0; i < a.final_population.size(); ++i) {
      EXPECT_EQ(a.final_population[i].canonical, other->final_population[i].canonical);
    }
  }
}

TEST(Evolve, InvariantsHoldEveryGeneration) {
  const auto train = toy_problems(2, 50, 8);
  for (auto survival : {Survival::kTruncation, Survival::kTournament}) {
    auto c = small_config(3);
    c.survival = survival;
    int calls = 0;
    const auto res = evolve(c, kNames, train, [&](const GenerationEvent& ev) {
      EXPECT_EQ(ev.gen, calls++);
      EXPECT_EQ(ev.survivors.size(), static_cast<std::size_t>(c.pop_size));
      EXPECT_EQ(ev.pool.size(), static_cast<std::size_t>(ev.gen == 0 ? c.pop_size : 2 * c.pop_size));
      std::set<std::string> pool_exprs;
      for (const auto& i : ev.pool) {
        EXPECT_TRUE(is_valid(i.tree, kNames.size()));
        EXPECT_EQ(print_canonical(i.tree, kNames), i.canonical);
        pool_exprs.insert(i.canonical);
        for (double t : i.raw_tau) EXPECT_TRUE(t >= -1.0 && t <= 1.0);
      }
      for (const auto& s : ev.survivors) EXPECT_TRUE(pool_exprs.contains(s.canonical));
      for (std::size_t k = 0; k < ev.bounds->size(); ++k) EXPECT_TRUE(ev.bounds->populated(k));
    });
    EXPECT_EQ(calls, c.generations + 1);
    EXPECT_LE(res.evaluations, static_cast<std::size_t>(c.pop_size * (c.generations + 1)));
    EXPECT_GT(res.evaluations, 0u);
  }
}

TEST(Evolve, FrozenBoundsGiveNonDecreasingBest) {
  const auto train = toy_problems(3, 40, 1);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto c = small_config(seed);
    c.generations = 12;
    c.freeze_bounds = true;
    const auto res = evolve(c, kNames, train);
    for (std::size_t g = 1; g < res.history.size(); ++g) {
      EXPECT_GE(res.history[g].best_score, res.history[g - 1].best_score) << "seed " << seed;
    }
  }
}

TEST(Evolve, BestMatchesFinalPopulation) {
  const auto train = toy_problems(2, 40, 2);
  const auto res = evolve(small_config(17), kNames, train);
  EXPECT_EQ(res.best_score, normalized_score(res.best.raw_tau, res.final_bounds));
  for (const auto& i : res.final_population) {
    EXPECT_LE(normalized_score(i.raw_tau, res.final_bounds), res.best_score);
  }
  EXPECT_EQ(res.history.back().best_expr, res.best.canonical);
}

}  // namespace
}  // namespace zcevo
