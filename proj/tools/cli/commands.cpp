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

#include "commands.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "zcevo/dataset.hpp"
#include "zcevo/error.hpp"
#include "zcevo/expr.hpp"
#include "zcevo/fitness.hpp"
#include "zcevo/gp.hpp"
#include "zcevo/nas_search.hpp"
#include "zcevo/text.hpp"
#include "zcevo/zoo.hpp"

namespace zcevo::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

void configure_logging() {
  auto logger = spdlog::get("zc-evolve");
  if (!logger) logger = spdlog::stderr_color_mt("zc-evolve");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("ZC_EVOLVE_LOG")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << contents;
}

ojson tau_object(const std::vector<FeatureMatrix>& problems, const TauVector& tau) {
  ojson obj = ojson::object();
  for (std::size_t i = 0; i < problems.size(); ++i) obj[problems[i].problem_id] = tau[i];
  return obj;
}

struct DatasetOptions {
  std::string manifest;
  double split = 0.7;
  std::uint64_t seed = 0;
  std::string view = "full";
};

/// Loads the manifest and returns the matrices for the requested view.
std::vector<FeatureMatrix> load_view(const DatasetOptions& opts,
                                     std::shared_ptr<const BenchmarkDataset>& dataset) {
  dataset = std::make_shared<const BenchmarkDataset>(load_manifest(opts.manifest));
  const auto label = parse_view_label(opts.view);
  if (label == ViewLabel::kFull) return DatasetView::full(dataset).matrices();
  auto [train, test] = split_train_test(dataset, opts.split, opts.seed);
  return label == ViewLabel::kTrain ? train.matrices() : test.matrices();
}

std::vector<std::string> problem_groups(const BenchmarkDataset& ds) {
  std::vector<std::string> out;
  for (const auto& p : ds.problems()) out.push_back(p.group);
  return out;
}

/// A --proxies entry: registry name, "all-baselines", or "file:<path>".
std::vector<NamedProxy> resolve_proxies(const std::vector<std::string>& specs,
                                        std::span<const std::string> names) {
  std::vector<NamedProxy> out;
  for (const auto& spec : specs) {
    if (spec == "all-baselines") {
      auto all = all_baselines(names);
      out.insert(out.end(), all.begin(), all.end());
    } else if (spec.rfind("file:", 0) == 0) {
      const fs::path path = spec.substr(5);
      const auto lines = parse_expression_file(read_file(path), names, /*allow_leaf=*/true);
      for (const auto& l : lines) {
        const auto label = lines.size() == 1 ? path.stem().string()
                                             : fmt::format("{}:{}", path.stem().string(), l.line);
        out.push_back({label, l.tree, l.tree.depth() < kMinDepth});
      }
    } else {
      out.push_back(builtin_proxy(spec, names));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// evolve

struct EvolveOptions {
  DatasetOptions data;
  GpConfig gp;
  std::string survival = "truncation";
  std::string out = "best.expr";
  std::string log;
  int runs = 1;
};

struct RunOutput {
  SearchResult result;
  TauVector train_tau;
  TauVector test_tau;
  std::uint64_t seed = 0;
};

int cmd_evolve(EvolveOptions opts, std::ostream& out) {
  opts.gp.survival = parse_survival(opts.survival);
  opts.gp.seed = opts.data.seed;
  validate(opts.gp);
  if (opts.runs < 1) throw UsageError("--runs must be >= 1");

  auto dataset = std::make_shared<const BenchmarkDataset>(load_manifest(opts.data.manifest));
  auto [train_view, test_view] = split_train_test(dataset, opts.data.split, opts.data.seed);
  const auto train = train_view.matrices();
  const auto test = test_view.matrices();
  const auto& names = dataset->feature_names();

  std::vector<RunOutput> runs(static_cast<std::size_t>(opts.runs));
  auto run_one = [&](std::size_t k, int eval_jobs) {
    GpConfig cfg = opts.gp;
    cfg.seed = opts.data.seed + k;
    cfg.jobs = eval_jobs;
    auto& r = runs[k];
    r.seed = cfg.seed;
    r.result = evolve(cfg, names, train);
    r.train_tau = raw_tau_vector(r.result.best.tree, train);
    r.test_tau = raw_tau_vector(r.result.best.tree, test);
  };

  if (opts.runs == 1) {
    run_one(0, opts.gp.jobs);
  } else {
    // Independent runs in parallel, one evaluation thread each.
    const auto workers = std::min(opts.gp.jobs, opts.runs);
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    {
      std::vector<std::jthread> pool;
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (auto k = next++; k < runs.size(); k = next++) run_one(k, 1);
          } catch (...) {
            errors[static_cast<std::size_t>(w)] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  const fs::path out_path = opts.out;
  const fs::path log_path =
      opts.log.empty() ? (out_path.has_parent_path() ? out_path.parent_path() / "run.jsonl"
                                                     : fs::path("run.jsonl"))
                       : fs::path(opts.log);

  std::string expr_text;
  std::string log_text;
  ojson sidecar_runs = ojson::array();
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& r = runs[k];
    if (runs.size() > 1) expr_text += fmt::format("# run {} seed {}\n", k, r.seed);
    expr_text += r.result.best.canonical + "\n";
    for (const auto& h : r.result.history) {
      ojson rec;
      if (runs.size() > 1) rec["run"] = k;
      rec["gen"] = h.gen;
      rec["best_score"] = h.best_score;
      rec["mean_score"] = h.mean_score;
      rec["best_tau"] = tau_object(train, h.best_tau);
      rec["distinct_individuals"] = h.distinct_individuals;
      rec["best_expr"] = h.best_expr;
      log_text += rec.dump() + "\n";
    }
    ojson side;
    side["seed"] = r.seed;
    side["expression"] = r.result.best.canonical;
    side["infix"] = print_infix(r.result.best.tree, names);
    side["score"] = r.result.best_score;
    side["evaluations"] = r.result.evaluations;
    side["train"] = tau_object(train, r.train_tau);
    side["test"] = tau_object(test, r.test_tau);
    sidecar_runs.push_back(std::move(side));
  }

  ojson sidecar;
  sidecar["config"] = {{"pop", opts.gp.pop_size},
                       {"gens", opts.gp.generations},
                       {"split", opts.data.split},
                       {"p_crossover", opts.gp.p_crossover},
                       {"p_subtree", opts.gp.p_subtree_mut},
                       {"p_hoist", opts.gp.p_hoist_mut},
                       {"p_point", opts.gp.p_point_mut},
                       {"p_reproduce", opts.gp.p_reproduce()},
                       {"max_depth_init", opts.gp.tree_gen.max_depth_init},
                       {"survival", to_string(opts.gp.survival)}};
  if (runs.size() == 1) {
    for (auto& [key, value] : sidecar_runs[0].items()) sidecar[key] = value;
  } else {
    sidecar["runs"] = std::move(sidecar_runs);
  }

  write_file(out_path, expr_text);
  write_file(fs::path(out_path.string() + ".json"), sidecar.dump(2) + "\n");
  write_file(log_path, log_text);

  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& r = runs[k];
    if (runs.size() > 1) out << fmt::format("run {} (seed {})\n", k, r.seed);
    out << r.result.best.canonical << "\n";
    for (std::size_t i = 0; i < test.size(); ++i) {
      out << fmt::format("  test tau {:<16} {:.4f}\n", test[i].problem_id, r.test_tau[i]);
    }
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  DatasetOptions data;
  std::string expr_file;
  std::vector<std::string> proxies;
  std::string format = "text";
};

int cmd_eval(const EvalOptions& opts, std::ostream& out) {
  std::shared_ptr<const BenchmarkDataset> dataset;
  const auto problems = load_view(opts.data, dataset);
  const auto& names = dataset->feature_names();

  std::vector<NamedProxy> proxies;
  if (!opts.expr_file.empty()) {
    for (const auto& l : parse_expression_file(read_file(opts.expr_file), names, true)) {
      proxies.push_back({fmt::format("line {}", l.line), l.tree, l.tree.depth() < kMinDepth});
    }
  }
  auto named = resolve_proxies(opts.proxies, names);
  proxies.insert(proxies.end(), named.begin(), named.end());
  if (proxies.empty()) throw UsageError("nothing to evaluate: pass --expr and/or --proxy");

  ojson doc = ojson::array();
  for (const auto& p : proxies) {
    const auto tau = raw_tau_vector(p.tree, problems);
    const auto expr = print_canonical(p.tree, names);
    if (opts.format == "json") {
      doc.push_back({{"name", p.name}, {"expression", expr}, {"tau", tau_object(problems, tau)}});
      continue;
    }
    out << p.name << ": " << expr << "\n";
    for (std::size_t i = 0; i < problems.size(); ++i) {
      out << fmt::format("  {:<16} {:.4f}\n", problems[i].problem_id, tau[i]);
    }
  }
  if (opts.format == "json") out << doc.dump(2) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// search

struct SearchOptions {
  std::string space;
  std::string proxy = std::string(kEq2Name);
  AgingParams params;
  std::string log = "search.jsonl";
  bool exhaustive = false;
};

NamedProxy search_proxy(const std::string& spec, std::span<const std::string> names) {
  if (fs::is_regular_file(spec)) {
    const auto lines = parse_expression_file(read_file(spec), names, true);
    if (lines.empty()) throw UsageError(fmt::format("'{}' holds no expression", spec));
    return {fs::path(spec).stem().string(), lines.front().tree, lines.front().tree.depth() < kMinDepth};
  }
  return builtin_proxy(spec, names);
}

int cmd_search(const SearchOptions& opts, std::ostream& out) {
  validate(opts.params);
  const auto space = load_space(opts.space);
  const auto proxy = search_proxy(opts.proxy, space.feature_names());
  const auto result = aging_evolution(space, proxy, opts.params);

  std::string log;
  for (const auto& c : result.history) {
    ojson rec;
    rec["cycle"] = c.cycle;
    rec["parent"] = c.parent ? ojson(c.parent->to_string()) : ojson(nullptr);
    rec["child"] = c.child.to_string();
    rec["child_score"] = c.child_score;
    rec["best_score"] = c.best_score;
    log += rec.dump() + "\n";
  }
  if (!opts.log.empty()) write_file(opts.log, log);

  out << fmt::format("best {} score {}\n", result.best.to_string(), format_real(result.best_score));
  if (opts.exhaustive) {
    const auto [enc, score] = exhaustive_argmax(space, proxy);
    out << fmt::format("exhaustive {} score {}\n", enc.to_string(), format_real(score));
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// report

struct ReportOptions {
  DatasetOptions data;
  std::vector<std::string> proxies{"all-baselines", std::string(kEq2Name)};
  std::vector<std::string> substitutions;
  std::string frequency_file;
  std::string format = "md";
};

int cmd_report(const ReportOptions& opts, std::ostream& out) {
  std::shared_ptr<const BenchmarkDataset> dataset;
  const auto problems = load_view(opts.data, dataset);
  const auto& names = dataset->feature_names();

  if (!opts.frequency_file.empty()) {
    std::vector<ExpressionTree> trees;
    for (auto& l : parse_expression_file(read_file(opts.frequency_file), names)) {
      trees.push_back(std::move(l.tree));
    }
    const auto freq = feature_frequency(trees, names);
    if (opts.format == "json") {
      ojson doc = ojson::object();
      for (const auto& name : names) doc[name] = freq.at(name);
      out << doc.dump(2) << "\n";
    } else if (opts.format == "csv") {
      out << "feature,count\n";
      for (const auto& name : names) out << name << "," << freq.at(name) << "\n";
    } else {
      out << "| feature | expressions |\n|---|---:|\n";
      for (const auto& name : names) out << "| " << name << " | " << freq.at(name) << " |\n";
    }
    return kOk;
  }

  auto proxies = resolve_proxies(opts.proxies, names);
  // Each "from:to" adds a substituted copy of every non-baseline proxy.
  const auto originals = proxies;
  for (const auto& sub : opts.substitutions) {
    const auto colon = sub.find(':');
    if (colon == std::string::npos) {
      throw UsageError(fmt::format("--substitute expects from:to, got '{}'", sub));
    }
    const auto from = sub.substr(0, colon);
    const auto to = sub.substr(colon + 1);
    for (const auto& p : originals) {
      if (p.passthrough) continue;
      proxies.push_back({fmt::format("{} [{}->{}]", p.name, from, to),
                         substitute_feature(p.tree, from, to, names), false});
    }
  }

  const auto groups = problem_groups(*dataset);
  const auto table = evaluate_report(proxies, problems, groups);
  if (opts.format == "csv") {
    out << render_csv(table);
  } else if (opts.format == "json") {
    out << render_json(table);
  } else {
    out << render_markdown(table);
  }
  return kOk;
}

void add_dataset_flags(CLI::App* cmd, DatasetOptions& d, bool with_view) {
  cmd->add_option("--dataset", d.manifest, "Manifest JSON")->required();
  cmd->add_option("--split", d.split, "Train fraction")->capture_default_str();
  cmd->add_option("--seed", d.seed, "Master seed")->capture_default_str();
  if (with_view) {
    cmd->add_option("--view", d.view, "Rows to score")
        ->check(CLI::IsMember({"train", "test", "full"}))
        ->capture_default_str();
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evolve and evaluate zero-cost proxy formulas", "zc-evolve"};
  app.require_subcommand(1);

  EvolveOptions evo;
  auto* evolve_cmd = app.add_subcommand("evolve", "Evolve a proxy expression on a dataset");
  add_dataset_flags(evolve_cmd, evo.data, false);
  evolve_cmd->add_option("--pop", evo.gp.pop_size, "Population size (even)")->capture_default_str();
  evolve_cmd->add_option("--gens", evo.gp.generations, "Generations")->capture_default_str();
  evolve_cmd->add_option("--p-crossover", evo.gp.p_crossover)->capture_default_str();
  evolve_cmd->add_option("--p-subtree", evo.gp.p_subtree_mut)->capture_default_str();
  evolve_cmd->add_option("--p-hoist", evo.gp.p_hoist_mut)->capture_default_str();
  evolve_cmd->add_option("--p-point", evo.gp.p_point_mut)->capture_default_str();
  evolve_cmd->add_option("--max-depth-init", evo.gp.tree_gen.max_depth_init)->capture_default_str();
  evolve_cmd->add_option("--survival", evo.survival)
      ->check(CLI::IsMember({"truncation", "tournament"}))
      ->capture_default_str();
  evolve_cmd->add_option("--out", evo.out, "Best expression file")->capture_default_str();
  evolve_cmd->add_option("--log", evo.log, "Run log (default: run.jsonl beside --out)");
  evolve_cmd->add_option("--jobs", evo.gp.jobs, "Worker threads")->capture_default_str();
  evolve_cmd->add_option("--runs", evo.runs, "Independent seeded runs")->capture_default_str();

  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "Kendall tau of expressions per problem");
  add_dataset_flags(eval_cmd, ev.data, true);
  eval_cmd->add_option("--expr", ev.expr_file, "Expression file");
  eval_cmd->add_option("--proxy", ev.proxies, "Registry proxy name(s)")->delimiter(',');
  eval_cmd->add_option("--format", ev.format)
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();

  SearchOptions se;
  auto* search_cmd = app.add_subcommand("search", "Aging evolution over a tabulated space");
  search_cmd->add_option("--space", se.space, "Space manifest JSON")->required();
  search_cmd->add_option("--proxy", se.proxy, "Registry name or expression file")
      ->capture_default_str();
  search_cmd->add_option("--pop", se.params.population_size)->capture_default_str();
  search_cmd->add_option("--sample", se.params.sample_size)->capture_default_str();
  search_cmd->add_option("--cycles", se.params.cycles)->capture_default_str();
  search_cmd->add_option("--seed", se.params.seed)->capture_default_str();
  search_cmd->add_option("--log", se.log, "Search log (empty to skip)")->capture_default_str();
  search_cmd->add_flag("--exhaustive", se.exhaustive, "Also print the enumerated optimum");

  ReportOptions re;
  auto* report_cmd = app.add_subcommand("report", "Leaderboard and metric studies");
  add_dataset_flags(report_cmd, re.data, true);
  report_cmd->add_option("--proxies", re.proxies, "Names, all-baselines, file:<path>")
      ->delimiter(',')
      ->capture_default_str();
  report_cmd->add_option("--substitute", re.substitutions, "from:to feature replacement")
      ->delimiter(',');
  report_cmd->add_option("--frequency", re.frequency_file,
                         "Count feature usage over an expression file");
  report_cmd->add_option("--format", re.format)
      ->check(CLI::IsMember({"csv", "md", "json"}))
      ->capture_default_str();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*evolve_cmd) return cmd_evolve(evo, out);
    if (*eval_cmd) return cmd_eval(ev, out);
    if (*search_cmd) return cmd_search(se, out);
    if (*report_cmd) return cmd_report(re, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace zcevo::cli
