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

#include "zcevo/nas_search.hpp"

#include <cmath>
#include <deque>
#include <fstream>
#include <limits>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "zcevo/error.hpp"
#include "zcevo/text.hpp"

namespace zcevo {

std::string ArchEncoding::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(values[i]);
  }
  return out;
}

ArchEncoding ArchEncoding::parse(std::string_view text) {
  ArchEncoding enc;
  std::size_t start = 0;
  while (true) {
    const auto dash = text.find('-', start);
    const auto part = text.substr(start, dash == std::string_view::npos ? dash : dash - start);
    int v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size() || v < 0) {
      throw DataError(fmt::format("malformed encoding '{}'", text));
    }
    enc.values.push_back(v);
    if (dash == std::string_view::npos) break;
    start = dash + 1;
  }
  return enc;
}

ToySearchSpace::ToySearchSpace(std::vector<int> arity, std::vector<std::string> feature_names,
                               std::vector<std::pair<ArchEncoding, std::vector<double>>> rows)
    : arity_(std::move(arity)), feature_names_(std::move(feature_names)) {
  if (arity_.empty()) throw DataError("search space needs at least one position");
  std::uint64_t total = 1;
  for (int a : arity_) {
    if (a < 1) throw DataError(fmt::format("arity entries must be positive (got {})", a));
    total *= static_cast<std::uint64_t>(a);
    if (total > (std::uint64_t{1} << 32)) throw DataError("search space too large to tabulate");
  }
  features_.resize(total);
  std::vector<bool> seen(total, false);
  for (auto& [enc, feats] : rows) {
    if (!contains(enc)) {
      throw DataError(fmt::format("encoding '{}' does not fit arity", enc.to_string()));
    }
    if (feats.size() != feature_names_.size()) {
      throw DataError(fmt::format("encoding '{}': {} features, expected {}", enc.to_string(),
                                  feats.size(), feature_names_.size()));
    }
    for (std::size_t c = 0; c < feats.size(); ++c) {
      if (!std::isfinite(feats[c])) {
        throw DataError(fmt::format("encoding '{}', column '{}': non-finite value",
                                    enc.to_string(), feature_names_[c]));
      }
    }
    const auto idx = index_of(enc);
    if (seen[idx]) throw DataError(fmt::format("encoding '{}' listed twice", enc.to_string()));
    seen[idx] = true;
    features_[idx] = std::move(feats);
  }
  for (std::uint64_t i = 0; i < total; ++i) {
    if (!seen[i]) {
      throw DataError(fmt::format("encoding '{}' missing from table", encoding_at(i).to_string()));
    }
  }
}

bool ToySearchSpace::contains(const ArchEncoding& enc) const {
  if (enc.values.size() != arity_.size()) return false;
  for (std::size_t i = 0; i < arity_.size(); ++i) {
    if (enc.values[i] < 0 || enc.values[i] >= arity_[i]) return false;
  }
  return true;
}

std::uint64_t ToySearchSpace::index_of(const ArchEncoding& enc) const {
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < arity_.size(); ++i) {
    idx = idx * static_cast<std::uint64_t>(arity_[i]) + static_cast<std::uint64_t>(enc.values[i]);
  }
  return idx;
}

ArchEncoding ToySearchSpace::encoding_at(std::uint64_t index) const {
  ArchEncoding enc;
  enc.values.resize(arity_.size());
  for (std::size_t i = arity_.size(); i-- > 0;) {
    const auto a = static_cast<std::uint64_t>(arity_[i]);
    enc.values[i] = static_cast<int>(index % a);
    index /= a;
  }
  return enc;
}

const std::vector<double>& ToySearchSpace::features(const ArchEncoding& enc) const {
  if (!contains(enc)) {
    throw DataError(fmt::format("encoding '{}' not in search space", enc.to_string()));
  }
  return features_[index_of(enc)];
}

ToySearchSpace load_space(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw DataError(fmt::format("cannot open space manifest '{}'", manifest.string()));
  std::vector<int> arity;
  std::filesystem::path csv;
  std::string target;
  try {
    const auto doc = nlohmann::json::parse(in);
    arity = doc.at("arity").get<std::vector<int>>();
    csv = manifest.parent_path() / doc.at("csv").get<std::string>();
    target = doc.value("target_column", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("space manifest '{}': {}", manifest.string(), e.what()));
  }

  std::ifstream table(csv);
  if (!table) throw DataError(fmt::format("cannot open space table '{}'", csv.string()));
  std::string line;
  if (!std::getline(table, line)) throw DataError(fmt::format("'{}' is empty", csv.string()));
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  for (std::size_t s = 0;;) {
    const auto c = line.find(',', s);
    header.push_back(line.substr(s, c == std::string::npos ? c : c - s));
    if (c == std::string::npos) break;
    s = c + 1;
  }
  if (header.empty() || header[0] != "arch_id") {
    throw DataError(fmt::format("'{}': first column must be arch_id", csv.string()));
  }
  std::vector<std::string> names;
  std::vector<bool> is_feature(header.size(), false);
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c] == target) continue;
    is_feature[c] = true;
    names.push_back(header[c]);
  }

  std::vector<std::pair<ArchEncoding, std::vector<double>>> rows;
  std::size_t line_no = 1;
  while (std::getline(table, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> feats;
    ArchEncoding enc;
    std::size_t col = 0;
    for (std::size_t s = 0;; ++col) {
      const auto c = line.find(',', s);
      const std::string_view cell(line.data() + s, (c == std::string::npos ? line.size() : c) - s);
      if (col >= header.size()) {
        throw DataError(fmt::format("'{}' line {}: too many cells", csv.string(), line_no));
      }
      if (col == 0) {
        enc = ArchEncoding::parse(cell);
      } else if (is_feature[col]) {
        auto v = parse_real(cell);
        if (!v || !std::isfinite(*v)) {
          throw DataError(fmt::format("'{}' line {}, column '{}': bad cell '{}'", csv.string(),
                                      line_no, header[col], cell));
        }
        feats.push_back(*v);
      }
      if (c == std::string::npos) break;
      s = c + 1;
    }
    if (col + 1 != header.size()) {
      throw DataError(fmt::format("'{}' line {}: {} cells, expected {}", csv.string(), line_no,
                                  col + 1, header.size()));
    }
    rows.emplace_back(std::move(enc), std::move(feats));
  }
  return ToySearchSpace(std::move(arity), std::move(names), std::move(rows));
}

double proxy_score(const ToySearchSpace& space, const NamedProxy& proxy, const ArchEncoding& enc) {
  const double v = evaluate(proxy.tree, space.features(enc));
  return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
}

void validate(const AgingParams& p) {
  if (p.population_size < 2) {
    throw UsageError(fmt::format("population size must be >= 2 (got {})", p.population_size));
  }
  if (p.sample_size < 1 || p.sample_size > p.population_size) {
    throw UsageError(fmt::format("sample size must be in [1, {}] (got {})", p.population_size,
                                 p.sample_size));
  }
  if (p.cycles < p.population_size) {
    throw UsageError(fmt::format("cycles ({}) must be >= population size ({})", p.cycles,
                                 p.population_size));
  }
}

ArchEncoding mutate_arch(const ArchEncoding& enc, const ToySearchSpace& space, Rng& rng) {
  if (!space.contains(enc)) {
    throw UsageError(fmt::format("encoding '{}' not in search space", enc.to_string()));
  }
  std::vector<std::size_t> mutable_positions;
  for (std::size_t i = 0; i < space.arity().size(); ++i) {
    if (space.arity()[i] > 1) mutable_positions.push_back(i);
  }
  if (mutable_positions.empty()) throw UsageError("no position has more than one value");
  const auto pos = mutable_positions[uniform_index(rng, mutable_positions.size())];
  auto v = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(space.arity()[pos] - 1)));
  if (v >= enc.values[pos]) ++v;
  ArchEncoding out = enc;
  out.values[pos] = v;
  return out;
}

namespace {

struct Scored {
  ArchEncoding enc;
  double score;
};

bool beats(const Scored& a, const Scored& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.enc < b.enc;
}

}  // namespace

AgingResult aging_evolution(const ToySearchSpace& space, const NamedProxy& proxy,
                            const AgingParams& params) {
  validate(params);
  Rng rng = substream(params.seed, Stream::kAging);
  AgingResult result;
  std::deque<Scored> population;
  std::optional<Scored> best;
  int cycle = 0;

  auto admit = [&](std::optional<ArchEncoding> parent, ArchEncoding child) {
    const double s = proxy_score(space, proxy, child);
    Scored entry{child, s};
    if (!best || beats(entry, *best)) best = entry;
    population.push_back(entry);
    result.history.push_back({++cycle, std::move(parent), std::move(child), s, best->score});
  };

  for (int i = 0; i < params.population_size; ++i) {
    admit(std::nullopt, space.encoding_at(uniform_index(rng, space.size())));
  }

  const bool can_mutate = space.size() > 1;
  while (can_mutate && cycle < params.cycles) {
    // Sample without replacement: partial Fisher-Yates over queue positions.
    std::vector<std::size_t> slots(population.size());
    for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = i;
    std::optional<std::size_t> parent_slot;
    for (int k = 0; k < params.sample_size; ++k) {
      const auto j = static_cast<std::size_t>(k) + uniform_index(rng, slots.size() - static_cast<std::size_t>(k));
      std::swap(slots[static_cast<std::size_t>(k)], slots[j]);
      const auto cand = slots[static_cast<std::size_t>(k)];
      if (!parent_slot || beats(population[cand], population[*parent_slot])) parent_slot = cand;
    }
    const ArchEncoding parent = population[*parent_slot].enc;
    admit(parent, mutate_arch(parent, space, rng));
    population.pop_front();
  }

  result.best = best->enc;
  result.best_score = best->score;
  return result;
}

std::vector<double> enumerate_scores(const ToySearchSpace& space, const NamedProxy& proxy,
                                     std::uint64_t cap) {
  if (space.size() > cap) {
    throw UsageError(fmt::format("space of {} encodings exceeds enumeration cap {}", space.size(),
                                 cap));
  }
  std::vector<double> out(space.size());
  for (std::uint64_t i = 0; i < space.size(); ++i) {
    out[i] = proxy_score(space, proxy, space.encoding_at(i));
  }
  return out;
}

std::pair<ArchEncoding, double> exhaustive_argmax(const ToySearchSpace& space,
                                                  const NamedProxy& proxy, std::uint64_t cap) {
  const auto scores = enumerate_scores(space, proxy, cap);
  std::uint64_t best = 0;
  for (std::uint64_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return {space.encoding_at(best), scores[best]};
}

}  // namespace zcevo
