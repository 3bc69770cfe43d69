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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "zcevo/error.hpp"

namespace zcevo {
namespace {

using testing::kendall_tau_b_pairs;

double tau(std::vector<double> x, std::vector<double> y) { return kendall_tau(x, y); }

TEST(KendallTau, Examples) {
  EXPECT_EQ(tau({1, 2, 3}, {10, 20, 30}), 1.0);
  EXPECT_EQ(tau({1, 2, 3}, {3, 2, 1}), -1.0);
  EXPECT_NEAR(tau({1, 2, 3, 4}, {1, 3, 2, 4}), 4.0 / 6.0, 1e-15);
  EXPECT_NEAR(tau({1, 1, 2}, {1, 2, 3}), 2.0 / std::sqrt(6.0), 1e-15);
  // the oracle agrees with the hand counts
  EXPECT_NEAR(kendall_tau_b_pairs({1, 2, 3, 4}, {1, 3, 2, 4}), 4.0 / 6.0, 1e-15);
  EXPECT_NEAR(kendall_tau_b_pairs({1, 1, 2}, {1, 2, 3}), 2.0 / std::sqrt(6.0), 1e-15);
}

TEST(KendallTau, ConstantInputIsZero) {
  EXPECT_EQ(tau({2, 2, 2}, {1, 2, 3}), 0.0);
  EXPECT_EQ(tau({1, 2, 3}, {5, 5, 5}), 0.0);
}

TEST(KendallTau, RejectsBadInput) {
  EXPECT_THROW(tau({1, 2}, {1, 2, 3}), UsageError);
  EXPECT_THROW(tau({1}, {1}), UsageError);
  EXPECT_THROW(tau({1, NAN}, {1, 2}), UsageError);
  EXPECT_THROW(tau({1, 2}, {INFINITY, 2}), UsageError);
}

TEST(KendallTau, MatchesPairCountingOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> len(2, 50);
  std::uniform_int_distribution<int> lv(1, 8);
  std::normal_distribution<double> g;
  for (int i = 0; i < 2000; ++i) {
    const std::size_t n = len(rng);
    auto x = testing::tie_heavy(rng, n, lv(rng));
    auto y = testing::tie_heavy(rng, n, lv(rng));
    if (i % 3 == 0) for (auto& v : y) v = g(rng);
    ASSERT_NEAR(kendall_tau(x, y), kendall_tau_b_pairs(x, y), 1e-12) << "trial " << i;
  }
}

TEST(KendallTau, InvariantUnderMonotoneMaps) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    auto x = testing::tie_heavy(rng, 30, 6);
    auto y = testing::tie_heavy(rng, 30, 6);
    auto fx = x;
    for (auto& v : fx) v = std::exp(v) * 3.0 + 1.0;
    EXPECT_NEAR(kendall_tau(fx, y), kendall_tau(x, y), 1e-12);
    auto ny = y;
    for (auto& v : ny) v = -v;
    EXPECT_NEAR(kendall_tau(x, ny), -kendall_tau(x, y), 1e-12);
    EXPECT_NEAR(kendall_tau(y, x), kendall_tau(x, y), 1e-12);
  }
}

FeatureMatrix matrix_1col(std::vector<double> feature, std::vector<double> target) {
  FeatureMatrix m(feature.size(), 1);
  for (std::size_t r = 0; r < feature.size(); ++r) m.at(r, 0) = feature[r];
  m.targets = std::move(target);
  return m;
}

TEST(RawTauVector, Examples) {
  const std::vector<std::string> names{"meco"};
  const auto t = parse("(add meco meco)", names);
  std::vector<FeatureMatrix> one{matrix_1col({3, 1, 2, 5}, {3, 1, 2, 5})};
  EXPECT_EQ(raw_tau_vector(t, one), (TauVector{1.0}));

  // protected division by an all-zero column: scores finite, tau regular
  const std::vector<std::string> two_names{"a", "z"};
  FeatureMatrix m(4, 2);
  for (std::size_t r = 0; r < 4; ++r) m.at(r, 0) = static_cast<double>(r);
  m.targets = {0, 1, 2, 3};
  const auto d = raw_tau_vector(parse("(div a z)", two_names), std::vector<FeatureMatrix>{m});
  EXPECT_EQ(d, (TauVector{0.0}));  // every score is the fallback 1.0

  std::vector<FeatureMatrix> three{matrix_1col({1, 2, 3}, {1, 2, 3}),
                                   matrix_1col({1, 1e200, 3}, {1, 2, 3}),
                                   matrix_1col({3, 2, 1}, {1, 2, 3})};
  const auto sq = parse("(mul meco meco)", names);
  EXPECT_EQ(raw_tau_vector(sq, three), (TauVector{1.0, kPenaltyTau, -1.0}));
  const auto ng = parse("(neg (mul meco meco))", names);
  EXPECT_EQ(raw_tau_vector(ng, three), (TauVector{-1.0, kPenaltyTau, 1.0}));
}

TEST(ScoreBounds, Examples) {
  auto b = update_bounds(ScoreBounds(2), {0.5, 0.2});
  EXPECT_EQ(b.lo(0), 0.5);
  EXPECT_EQ(b.hi(0), 0.5);
  EXPECT_EQ(b.lo(1), 0.2);
  EXPECT_EQ(b.hi(1), 0.2);

  auto c = update_bounds(update_bounds(ScoreBounds(2), {0, 0}), {1, 1});
  EXPECT_EQ(update_bounds(c, {0.5, 0.9}), c);

  auto d = update_bounds(update_bounds(ScoreBounds(1), {0.2}), {0.4});
  d = update_bounds(d, {0.6});
  EXPECT_EQ(d.lo(0), 0.2);
  EXPECT_EQ(d.hi(0), 0.6);
  EXPECT_THROW(update_bounds(d, {0.1, 0.2}), UsageError);
}

TEST(ScoreBounds, FoldIsMinMaxAndOrderFree) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<TauVector> taus(40, TauVector(3));
  for (auto& t : taus) for (auto& v : t) v = u(rng);
  ScoreBounds fwd(3), rev(3);
  for (const auto& t : taus) fwd.update(t);
  for (auto it = taus.rbegin(); it != taus.rend(); ++it) rev.update(*it);
  EXPECT_EQ(fwd, rev);
  for (std::size_t i = 0; i < 3; ++i) {
    double lo = 2, hi = -2;
    for (const auto& t : taus) lo = std::min(lo, t[i]), hi = std::max(hi, t[i]);
    EXPECT_EQ(fwd.lo(i), lo);
    EXPECT_EQ(fwd.hi(i), hi);
  }
}

TEST(NormalizedScore, Examples) {
  ScoreBounds unit(3);
  unit.update({0, 0, 0});
  unit.update({1, 1, 1});
  EXPECT_EQ(normalized_score({1, 1, 1}, unit), 3.0);
  EXPECT_EQ(normalized_score({0, 0, 0}, unit), 0.0);

  ScoreBounds two(2);
  two.update({-0.3, 0.1});
  two.update({0.7, 0.4});
  EXPECT_EQ(normalized_score({-0.3, 0.1}, two), 0.0);
  EXPECT_EQ(normalized_score({0.7, 0.4}, two), 2.0);

  ScoreBounds one(1);
  one.update({0});
  one.update({1});
  EXPECT_EQ(normalized_score({0.5}, one), 0.5);

  const TauVector first{0.3, -0.2, 0.9};
  EXPECT_EQ(normalized_score(first, update_bounds(ScoreBounds(3), first)), 1.5);

  EXPECT_THROW(normalized_score({0.1, 0.1}, ScoreBounds(2)), UsageError);
}

TEST(NormalizedScore, StrictlyMonotoneInEachCoordinate) {
  ScoreBounds b(3);
  b.update({-1, -1, -1});
  b.update({1, 1, 1});
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 1000; ++i) {
    TauVector t{u(rng), u(rng), u(rng)};
    const double base = normalized_score(t, b);
    EXPECT_GE(base, 0.0);
    EXPECT_LE(base, 3.0);
    for (std::size_t k = 0; k < 3; ++k) {
      auto up = t;
      up[k] = std::min(1.0, t[k] + 1e-3);
      if (up[k] > t[k]) {
        EXPECT_GT(normalized_score(up, b), base);
      }
    }
  }
}

}  // namespace
}  // namespace zcevo
