/*
Copyright 2026 The slotalign Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include "slotalign/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "slotalign/aligner.hpp"
#include "slotalign/graph.hpp"
#include "slotalign/manifest.hpp"
#include "slotalign/matching.hpp"
#include "slotalign/perturb.hpp"
#include "slotalign/rng.hpp"

namespace slotalign::cli {
namespace fs = std::filesystem;

namespace {

#ifndef SLOTALIGN_VERSION
#define SLOTALIGN_VERSION "dev"
#endif

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string join(const std::vector<std::size_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::vector<std::size_t> parse_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &pos);
    } catch (const std::exception&) {
      throw ConfigError("bad list entry '" + item + "'");
    }
    if (pos != item.size()) throw ConfigError("bad list entry '" + item + "'");
    out.push_back(v);
  }
  return out;
}

double parse_double(const std::string& text, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw InputError("manifest entry '" + key + "' is not a number: " + text);
}

bool parse_bool(const std::string& text) { return text == "true" || text == "1"; }

Direction parse_direction(const std::string& name) {
  if (name == "t2s") return Direction::TargetToSource;
  if (name == "s2t") return Direction::SourceToTarget;
  throw ConfigError("unknown direction '" + name + "' (expected t2s or s2t)");
}

std::string direction_name(Direction d) { return d == Direction::TargetToSource ? "t2s" : "s2t"; }

Extraction parse_extraction(const std::string& name) {
  if (name == "greedy") return Extraction::Greedy;
  if (name == "exact") return Extraction::Exact;
  throw ConfigError("unknown extraction '" + name + "' (expected greedy or exact)");
}

// Flags shared by `align` and `bench` for the optimizer configuration. The
// preset is applied first and explicitly given flags override it.
struct ConfigFlags {
  std::string preset = "real-world";
  std::size_t bases = 0;
  double tau = 0.0;
  double eta = 0.0;
  int kmax = 0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  std::string init = "uniform";
  bool freeze_weights = false;
  int sinkhorn_iters = 0;
  double sinkhorn_tol = 0.0;
  bool log_domain = false;
  bool no_normalize = false;

  void add_to(CLI::App& app) {
    app.add_option("--preset", preset, "Default set: real-world (K=4, tau=1) or semi-synthetic (K=2, tau=0.1)")
        ->check(CLI::IsMember({"real-world", "semi-synthetic"}));
    app.add_option("-K,--bases", bases, "Number of structure bases");
    app.add_option("--tau", tau, "Structure-learning step size");
    app.add_option("--eta", eta, "KL-proximal weight of the transport step");
    app.add_option("--kmax", kmax, "Maximum outer iterations");
    app.add_option("--eps1", eps1, "Stopping threshold on the weight step (inf-norm)");
    app.add_option("--eps2", eps2, "Stopping threshold on the plan step (Frobenius)");
    app.add_option("--init", init, "Plan initialization: uniform or featsim");
    app.add_flag("--freeze-weights", freeze_weights, "Keep the basis weights fixed (GWD when K = 1)");
    app.add_option("--sinkhorn-iters", sinkhorn_iters, "Maximum Sinkhorn sweeps per step");
    app.add_option("--sinkhorn-tol", sinkhorn_tol, "Sinkhorn marginal tolerance");
    app.add_flag("--log-domain", log_domain, "Always run Sinkhorn on log potentials");
    app.add_flag("--no-normalize", no_normalize, "Skip nodewise feature normalization");
  }

  AlignConfig resolve(const CLI::App& app) const {
    AlignConfig cfg = preset == "semi-synthetic" ? AlignConfig::semi_synthetic() : AlignConfig::real_world();
    if (app.count("--bases")) cfg.bases = bases;
    if (app.count("--tau")) cfg.tau = tau;
    if (app.count("--eta")) cfg.eta = eta;
    if (app.count("--kmax")) cfg.max_iterations = kmax;
    if (app.count("--eps1")) cfg.alpha_tolerance = eps1;
    if (app.count("--eps2")) cfg.plan_tolerance = eps2;
    cfg.init = parse_init_mode(init);
    cfg.freeze_weights = freeze_weights;
    if (app.count("--sinkhorn-iters")) cfg.sinkhorn.max_iterations = sinkhorn_iters;
    if (app.count("--sinkhorn-tol")) cfg.sinkhorn.tolerance = sinkhorn_tol;
    cfg.sinkhorn.log_domain = log_domain;
    cfg.basis.normalize_features = !no_normalize;
    cfg.validate();
    return cfg;
  }
};

void record_config(Manifest& m, const AlignConfig& cfg) {
  m.set("mode", std::string(cfg.is_gwd() ? "gwd" : "slotalign"));
  m.set("K", static_cast<long long>(cfg.bases));
  m.set("tau", cfg.tau);
  m.set("eta", cfg.eta);
  m.set("kmax", static_cast<long long>(cfg.max_iterations));
  m.set("eps1", cfg.alpha_tolerance);
  m.set("eps2", cfg.plan_tolerance);
  m.set("init", to_string(cfg.init));
  m.set("freeze_weights", cfg.freeze_weights);
  m.set("sinkhorn_max_iterations", static_cast<long long>(cfg.sinkhorn.max_iterations));
  m.set("sinkhorn_tolerance", cfg.sinkhorn.tolerance);
  m.set("sinkhorn_log_domain", cfg.sinkhorn.log_domain);
  m.set("sinkhorn_floor", cfg.sinkhorn.floor);
  m.set("normalize_features", cfg.basis.normalize_features);
  m.set("dense_edge_threshold", static_cast<long long>(cfg.basis.dense_edge_threshold));
}

AlignConfig config_from(const Manifest& m) {
  AlignConfig cfg;
  cfg.bases = std::stoul(m.require("K"));
  cfg.tau = parse_double(m.require("tau"), "tau");
  cfg.eta = parse_double(m.require("eta"), "eta");
  cfg.max_iterations = std::stoi(m.require("kmax"));
  cfg.alpha_tolerance = parse_double(m.require("eps1"), "eps1");
  cfg.plan_tolerance = parse_double(m.require("eps2"), "eps2");
  cfg.init = parse_init_mode(m.require("init"));
  cfg.freeze_weights = parse_bool(m.require("freeze_weights"));
  cfg.sinkhorn.max_iterations = std::stoi(m.require("sinkhorn_max_iterations"));
  cfg.sinkhorn.tolerance = parse_double(m.require("sinkhorn_tolerance"), "sinkhorn_tolerance");
  cfg.sinkhorn.log_domain = parse_bool(m.require("sinkhorn_log_domain"));
  cfg.sinkhorn.floor = parse_double(m.require("sinkhorn_floor"), "sinkhorn_floor");
  cfg.basis.normalize_features = parse_bool(m.require("normalize_features"));
  cfg.basis.dense_edge_threshold = std::stoul(m.require("dense_edge_threshold"));
  cfg.validate();
  return cfg;
}

void record_input(Manifest& m, const std::string& key, const std::optional<std::string>& path) {
  m.set(key, path.value_or(""));
  m.set(key + "_sha256", path ? sha256_file(*path) : std::string());
}

std::optional<std::string> optional_path(const Manifest& m, const std::string& key) {
  auto v = m.get(key);
  if (!v || v->empty()) return std::nullopt;
  return v;
}

void verify_digest(const Manifest& m, const std::string& key) {
  const auto path = optional_path(m, key);
  if (!path) return;
  const auto expected = m.get(key + "_sha256");
  if (expected && !expected->empty() && sha256_file(*path) != *expected) {
    throw InputError(*path + " changed since the manifest was written (SHA-256 mismatch)");
  }
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw InputError("cannot create output directory " + dir + ": " + ec.message());
  return p;
}

// ---------------------------------------------------------------- align

struct AlignJob {
  std::string source_edges;
  std::string target_edges;
  std::optional<std::string> source_feats;
  std::optional<std::string> target_feats;
  std::optional<std::string> anchors;
  AlignConfig cfg;
  std::vector<std::size_t> ks{1, 5, 10, 30};
  Direction direction = Direction::TargetToSource;
  std::size_t topk = 10;
  Extraction extraction = Extraction::Greedy;
  bool dump_coupling = false;
  std::uint64_t seed = 0;
  std::string out_dir = "slotalign-out";
};

Manifest job_manifest(const AlignJob& job) {
  Manifest m;
  m.set("command", std::string("align"));
  m.set("version", std::string(SLOTALIGN_VERSION));
  record_input(m, "source_edges", job.source_edges);
  record_input(m, "source_feats", job.source_feats);
  record_input(m, "target_edges", job.target_edges);
  record_input(m, "target_feats", job.target_feats);
  record_input(m, "anchors", job.anchors);
  record_config(m, job.cfg);
  m.set("ks", join(job.ks));
  m.set("direction", direction_name(job.direction));
  m.set("topk", static_cast<long long>(job.topk));
  m.set("extraction", std::string(job.extraction == Extraction::Exact ? "exact" : "greedy"));
  m.set("dump_coupling", job.dump_coupling);
  m.set("seed", std::to_string(job.seed));
  return m;
}

AlignJob job_from_manifest(const Manifest& m) {
  if (m.require("command") != "align") throw InputError("manifest was not written by 'align'");
  for (const char* key : {"source_edges", "source_feats", "target_edges", "target_feats", "anchors"}) {
    verify_digest(m, key);
  }
  AlignJob job;
  job.source_edges = m.require("source_edges");
  job.target_edges = m.require("target_edges");
  job.source_feats = optional_path(m, "source_feats");
  job.target_feats = optional_path(m, "target_feats");
  job.anchors = optional_path(m, "anchors");
  job.cfg = config_from(m);
  job.ks = parse_list(m.require("ks"));
  job.direction = parse_direction(m.require("direction"));
  job.topk = std::stoul(m.require("topk"));
  job.extraction = parse_extraction(m.require("extraction"));
  job.dump_coupling = parse_bool(m.require("dump_coupling"));
  job.seed = std::stoull(m.require("seed"));
  return job;
}

int cmd_align(const AlignJob& job, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  if (job.ks.empty()) throw ConfigError("--ks needs at least one value");
  if (job.topk < 1) throw ConfigError("--topk must be at least 1");
  const Graph source = load_graph(job.source_edges, job.source_feats);
  const Graph target = load_graph(job.target_edges, job.target_feats);
  std::optional<AnchorSet> anchors;
  if (job.anchors) anchors = load_anchors(*job.anchors, source.num_nodes(), target.num_nodes());

  const fs::path dir = prepare_out_dir(job.out_dir);
  Manifest manifest = job_manifest(job);

  const AlignOutcome outcome = run(source, target, job.cfg);
  const Matrix& plan = outcome.state.coupling.plan;

  write_trace_csv(outcome.state, dir / "trace.csv");
  write_ranked_csv(rank_candidates(plan, job.topk, job.direction), job.direction, dir / "matches.csv");
  {
    const auto pairs = extract_one_to_one(plan, job.extraction);
    std::ofstream pairs_out(dir / "pairs.csv");
    pairs_out << "source_index,target_index,mass\n" << std::setprecision(17);
    for (auto [s, t] : pairs) pairs_out << s << ',' << t << ',' << plan(static_cast<Index>(s), static_cast<Index>(t)) << '\n';
  }
  if (job.dump_coupling) write_matrix(plan, dir / "coupling.txt");

  manifest.set("iterations", static_cast<long long>(outcome.state.iteration));
  manifest.set("converged", outcome.converged);
  manifest.set("final_alpha_step", outcome.final_alpha_step);
  manifest.set("final_plan_step", outcome.final_plan_step);
  manifest.set("final_objective", outcome.state.trace.empty() ? outcome.state.initial_objective : outcome.state.trace.back());
  {
    std::ostringstream w;
    for (Index q = 0; q < outcome.state.weights.source.size(); ++q) {
      w << (q ? "," : "") << format_double(outcome.state.weights.source(q));
    }
    manifest.set("beta_source", w.str());
    w.str("");
    for (Index q = 0; q < outcome.state.weights.target.size(); ++q) {
      w << (q ? "," : "") << format_double(outcome.state.weights.target(q));
    }
    manifest.set("beta_target", w.str());
  }
  if (anchors && !anchors->empty()) {
    const auto hits = hit_at_k(plan, *anchors, job.ks, job.direction);
    write_metrics(hits, dir / "metrics.txt");
    for (auto [k, v] : hits) {
      manifest.set("Hit@" + std::to_string(k), v);
      out << "Hit@" << k << ": " << std::fixed << std::setprecision(2) << v << '\n';
    }
    out.unsetf(std::ios::floatfield);
  } else if (anchors) {
    out << "no anchors: Hit@k undefined\n";
  }
  manifest.set("wall_seconds", seconds_since(start));
  manifest.write(dir / "manifest.txt");

  out << (outcome.converged ? "converged" : "stopped at kmax") << " after " << outcome.state.iteration
      << " iterations; results in " << dir.string() << '\n';
  return outcome.converged ? kOk : kNotConverged;
}

// ---------------------------------------------------------------- perturb

struct PerturbJob {
  std::string edges;
  std::optional<std::string> feats;
  PerturbSpec spec;
  std::string out_dir = "slotalign-target";
};

int cmd_perturb(const PerturbJob& job, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  job.spec.validate();
  const Graph source = load_graph(job.edges, job.feats);
  const Target target = generate_target(source, job.spec);

  const fs::path dir = prepare_out_dir(job.out_dir);
  const fs::path edges_out = dir / "target.edges";
  std::optional<fs::path> feats_out;
  if (target.graph.has_features()) feats_out = dir / "target.feats";
  save_graph(target.graph, edges_out, feats_out);
  save_anchors(target.anchors, dir / "anchors.txt");

  Manifest m;
  m.set("command", std::string("perturb"));
  m.set("version", std::string(SLOTALIGN_VERSION));
  record_input(m, "edges", job.edges);
  record_input(m, "feats", job.feats);
  m.set("seed", std::to_string(job.spec.seed));
  m.set("edge_ratio", job.spec.edge_ratio);
  m.set("feature_op", to_string(job.spec.feature_op));
  m.set("feature_ratio", job.spec.feature_ratio);
  m.set("target_nodes", static_cast<long long>(target.graph.num_nodes()));
  m.set("target_edges", static_cast<long long>(target.graph.num_edges()));
  m.set("target_feature_dim", static_cast<long long>(target.graph.feature_dim()));
  m.set("wall_seconds", seconds_since(start));
  m.write(dir / "manifest.txt");
  out << "wrote target graph (" << target.graph.num_nodes() << " nodes, " << target.graph.num_edges()
      << " edges) to " << dir.string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------- eval

struct EvalJob {
  std::optional<std::string> coupling;
  std::optional<std::string> source_feats;
  std::optional<std::string> target_feats;
  std::string anchors;
  std::vector<std::size_t> ks{1, 5, 10, 30};
  Direction direction = Direction::TargetToSource;
  std::optional<std::string> out_path;
};

int cmd_eval(const EvalJob& job, std::ostream& out) {
  Matrix scores;
  if (job.coupling) {
    if (job.source_feats || job.target_feats) throw ConfigError("give either --coupling or the two feature files");
    scores = read_matrix(*job.coupling);
  } else {
    if (!job.source_feats || !job.target_feats) {
      throw ConfigError("eval needs --coupling, or --source-feats and --target-feats for the KNN baseline");
    }
    const Matrix xs = read_matrix(*job.source_feats);
    const Matrix xt = read_matrix(*job.target_feats);
    const Graph gs(static_cast<std::size_t>(xs.rows()), {}, xs);
    const Graph gt(static_cast<std::size_t>(xt.rows()), {}, xt);
    scores = feature_similarity(gs, gt);
  }
  if (job.ks.empty()) throw ConfigError("--ks needs at least one value");
  const auto anchors =
      load_anchors(job.anchors, static_cast<std::size_t>(scores.rows()), static_cast<std::size_t>(scores.cols()));
  const auto hits = hit_at_k(scores, anchors, job.ks, job.direction);
  out << std::fixed << std::setprecision(2);
  for (auto [k, v] : hits) out << "Hit@" << k << ": " << v << '\n';
  out.unsetf(std::ios::floatfield);
  if (job.out_path) write_metrics(hits, *job.out_path);
  return kOk;
}

// ---------------------------------------------------------------- bench

struct BenchJob {
  std::string edges;
  std::optional<std::string> feats;
  std::string sweep = "edge";
  std::vector<std::size_t> levels{0, 10, 20, 30, 40, 50, 60, 70};
  double fixed_edge_ratio = 25.0;  // percent, feature sweeps only
  std::size_t seeds = 1;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  AlignConfig cfg;
  std::string out_dir = "slotalign-bench";
};

struct BenchCell {
  std::map<std::size_t, double> hits;
  double seconds = 0.0;
  bool converged = false;
};

PerturbSpec bench_spec(const BenchJob& job, std::size_t level, std::size_t seed_index) {
  PerturbSpec spec;
  spec.seed = derive_seed(job.seed, seed_index);
  const double ratio = static_cast<double>(level) / 100.0;
  if (job.sweep == "edge") {
    spec.edge_ratio = ratio;
  } else {
    spec.edge_ratio = job.fixed_edge_ratio / 100.0;
    spec.feature_op = parse_feature_op(job.sweep);
    spec.feature_ratio = ratio;
  }
  return spec;
}

int cmd_bench(const BenchJob& job, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  if (job.sweep != "edge" && job.sweep != "permute" && job.sweep != "truncate" && job.sweep != "compress") {
    throw ConfigError("unknown sweep '" + job.sweep + "' (expected edge, permute, truncate or compress)");
  }
  if (job.levels.empty()) throw ConfigError("--levels needs at least one value");
  for (auto l : job.levels) {
    if (l > 100) throw ConfigError("levels are percentages in [0, 100]");
  }
  if (!(job.fixed_edge_ratio >= 0.0 && job.fixed_edge_ratio <= 100.0)) {
    throw ConfigError("--fixed-edge-ratio is a percentage in [0, 100]");
  }
  if (job.seeds < 1) throw ConfigError("--seeds must be at least 1");
  job.cfg.validate();
  for (auto l : job.levels) bench_spec(job, l, 0).validate();

  const Graph source = load_graph(job.edges, job.feats);
  const std::vector<std::size_t> ks{1, 5, 10, 30};
  const std::size_t total = job.levels.size() * job.seeds;
  std::vector<BenchCell> cells(total);
  std::vector<std::string> errors(total);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t idx = next++; idx < total; idx = next++) {
      const std::size_t level = job.levels[idx / job.seeds];
      try {
        const Target target = generate_target(source, bench_spec(job, level, idx % job.seeds));
        const AlignOutcome outcome = run(source, target.graph, job.cfg);
        cells[idx] = BenchCell{hit_at_k(outcome.state.coupling.plan, target.anchors, ks), outcome.seconds,
                               outcome.converged};
      } catch (const std::exception& e) {
        errors[idx] = e.what();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(job.jobs, 1, total);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw Error("bench run failed: " + e);
  }

  const fs::path dir = prepare_out_dir(job.out_dir);
  std::ofstream csv(dir / "bench.csv");
  csv << "level,hit1,hit5,hit10,hit30,seconds\n";
  out << "level  Hit@1   Hit@5   Hit@10  Hit@30  seconds\n";
  std::size_t not_converged = 0;
  for (std::size_t li = 0; li < job.levels.size(); ++li) {
    std::map<std::size_t, double> mean;
    double secs = 0.0;
    for (std::size_t s = 0; s < job.seeds; ++s) {
      const auto& cell = cells[li * job.seeds + s];
      for (auto k : ks) mean[k] += cell.hits.at(k) / static_cast<double>(job.seeds);
      secs += cell.seconds / static_cast<double>(job.seeds);
      if (!cell.converged) ++not_converged;
    }
    csv << job.levels[li] << std::fixed << std::setprecision(2);
    for (auto k : ks) csv << ',' << mean[k];
    csv << ',' << std::setprecision(3) << secs << '\n';
    csv.unsetf(std::ios::floatfield);
    out << std::setw(5) << job.levels[li] << std::fixed << std::setprecision(2);
    for (auto k : ks) out << std::setw(8) << mean[k];
    out << std::setw(9) << std::setprecision(3) << secs << '\n';
    out.unsetf(std::ios::floatfield);
  }

  Manifest m;
  m.set("command", std::string("bench"));
  m.set("version", std::string(SLOTALIGN_VERSION));
  record_input(m, "edges", job.edges);
  record_input(m, "feats", job.feats);
  m.set("sweep", job.sweep);
  m.set("levels", join(job.levels));
  m.set("fixed_edge_ratio", job.fixed_edge_ratio);
  m.set("seeds", static_cast<long long>(job.seeds));
  m.set("seed", std::to_string(job.seed));
  m.set("jobs", static_cast<long long>(job.jobs));
  record_config(m, job.cfg);
  m.set("runs_not_converged", static_cast<long long>(not_converged));
  m.set("wall_seconds", seconds_since(start));
  m.write(dir / "manifest.txt");
  return not_converged == 0 ? kOk : kNotConverged;
}

// ---------------------------------------------------------------- generate

struct GenerateJob {
  std::size_t nodes = 100;
  double avg_degree = 4.0;
  std::size_t dim = 20;
  std::uint64_t seed = 0;
  std::string out_dir = "slotalign-graph";
};

int cmd_generate(const GenerateJob& job, std::ostream& out) {
  const Graph g = erdos_renyi(job.nodes, job.avg_degree, job.dim, job.seed);
  const fs::path dir = prepare_out_dir(job.out_dir);
  std::optional<fs::path> feats;
  if (g.has_features()) feats = dir / "graph.feats";
  save_graph(g, dir / "graph.edges", feats);
  out << "wrote " << g.num_nodes() << " nodes, " << g.num_edges() << " edges to " << dir.string() << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unsupervised attributed-graph alignment with learned multi-view structure"};
  app.set_version_flag("--version", std::string(SLOTALIGN_VERSION));
  app.require_subcommand(1);

  // align
  auto* align = app.add_subcommand("align", "Align two graphs");
  AlignJob align_job;
  ConfigFlags align_flags;
  std::string align_manifest, ks_text = "1,5,10,30", direction = "t2s", extraction = "greedy";
  std::string source_edges, target_edges, source_feats, target_feats, anchors_path;
  align->add_option("--manifest", align_manifest, "Re-run exactly what a previous manifest records");
  align->add_option("--source-edges", source_edges, "Source edge list");
  align->add_option("--target-edges", target_edges, "Target edge list");
  align->add_option("--source-feats", source_feats, "Source feature matrix");
  align->add_option("--target-feats", target_feats, "Target feature matrix");
  align->add_option("--anchors", anchors_path, "Ground-truth pairs for Hit@k");
  align->add_option("--ks", ks_text, "Comma-separated k values for Hit@k");
  align->add_option("--direction", direction, "Ranking direction: t2s or s2t");
  align->add_option("--topk", align_job.topk, "Candidates written per node");
  align->add_option("--extract", extraction, "One-to-one extraction: greedy or exact");
  align->add_flag("--dump-coupling", align_job.dump_coupling, "Also write the full coupling");
  align->add_option("--out-dir", align_job.out_dir, "Output directory");
  align->add_option("--seed", align_job.seed, "Recorded in the manifest; runs are deterministic");
  align_flags.add_to(*align);

  // perturb
  auto* perturb = app.add_subcommand("perturb", "Generate a permuted and perturbed target graph");
  PerturbJob perturb_job;
  std::string perturb_feats, feature_op = "none";
  perturb->add_option("--edges", perturb_job.edges, "Source edge list")->required();
  perturb->add_option("--feats", perturb_feats, "Source feature matrix");
  perturb->add_option("--edge-ratio", perturb_job.spec.edge_ratio, "Fraction of edges moved, in [0, 1]");
  perturb->add_option("--feature-op", feature_op, "none, permute, truncate or compress");
  perturb->add_option("--feature-ratio", perturb_job.spec.feature_ratio, "Feature operation ratio, in [0, 1]");
  perturb->add_option("--seed", perturb_job.spec.seed, "Random seed");
  perturb->add_option("--out-dir", perturb_job.out_dir, "Output directory");

  // eval
  auto* eval = app.add_subcommand("eval", "Hit@k of a saved coupling, or of the KNN feature baseline");
  EvalJob eval_job;
  std::string eval_coupling, eval_sf, eval_tf, eval_out, eval_ks = "1,5,10,30", eval_dir = "t2s";
  eval->add_option("--coupling", eval_coupling, "Score or coupling matrix file");
  eval->add_option("--source-feats", eval_sf, "Source features (KNN baseline)");
  eval->add_option("--target-feats", eval_tf, "Target features (KNN baseline)");
  eval->add_option("--anchors", eval_job.anchors, "Ground-truth pairs")->required();
  eval->add_option("--ks", eval_ks, "Comma-separated k values");
  eval->add_option("--direction", eval_dir, "t2s or s2t");
  eval->add_option("--out", eval_out, "Write metrics to this file too");

  // bench
  auto* bench = app.add_subcommand("bench", "Robustness sweep over inconsistency levels");
  BenchJob bench_job;
  ConfigFlags bench_flags;
  bench_flags.preset = "semi-synthetic";
  std::string bench_feats, levels_text = "0,10,20,30,40,50,60,70";
  bench->add_option("--edges", bench_job.edges, "Source edge list")->required();
  bench->add_option("--feats", bench_feats, "Source feature matrix");
  bench->add_option("--sweep", bench_job.sweep, "edge, permute, truncate or compress");
  bench->add_option("--levels", levels_text, "Comma-separated percentages");
  bench->add_option("--fixed-edge-ratio", bench_job.fixed_edge_ratio, "Edge perturbation (percent) during feature sweeps");
  bench->add_option("--seeds", bench_job.seeds, "Repetitions per level (results are averaged)");
  bench->add_option("--seed", bench_job.seed, "Base seed");
  bench->add_option("--jobs", bench_job.jobs, "Concurrent runs");
  bench->add_option("--out-dir", bench_job.out_dir, "Output directory");
  bench_flags.add_to(*bench);

  // generate
  auto* generate = app.add_subcommand("generate", "Write a random attributed graph");
  GenerateJob gen_job;
  generate->add_option("--nodes", gen_job.nodes, "Node count");
  generate->add_option("--avg-degree", gen_job.avg_degree, "Expected degree");
  generate->add_option("--dim", gen_job.dim, "Feature dimension");
  generate->add_option("--seed", gen_job.seed, "Random seed");
  generate->add_option("--out-dir", gen_job.out_dir, "Output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigError;
  }

  try {
    if (*align) {
      if (!align_manifest.empty()) {
        AlignJob job = job_from_manifest(Manifest::read(align_manifest));
        job.out_dir = align->count("--out-dir") ? align_job.out_dir : fs::path(align_manifest).parent_path().string();
        return cmd_align(job, out);
      }
      if (source_edges.empty() || target_edges.empty()) {
        err << "align: --source-edges and --target-edges are required\n" << align->help();
        return kConfigError;
      }
      align_job.source_edges = source_edges;
      align_job.target_edges = target_edges;
      if (!source_feats.empty()) align_job.source_feats = source_feats;
      if (!target_feats.empty()) align_job.target_feats = target_feats;
      if (!anchors_path.empty()) align_job.anchors = anchors_path;
      align_job.ks = parse_list(ks_text);
      align_job.direction = parse_direction(direction);
      align_job.extraction = parse_extraction(extraction);
      align_job.cfg = align_flags.resolve(*align);
      return cmd_align(align_job, out);
    }
    if (*perturb) {
      if (!perturb_feats.empty()) perturb_job.feats = perturb_feats;
      perturb_job.spec.feature_op = parse_feature_op(feature_op);
      return cmd_perturb(perturb_job, out);
    }
    if (*eval) {
      if (!eval_coupling.empty()) eval_job.coupling = eval_coupling;
      if (!eval_sf.empty()) eval_job.source_feats = eval_sf;
      if (!eval_tf.empty()) eval_job.target_feats = eval_tf;
      if (!eval_out.empty()) eval_job.out_path = eval_out;
      eval_job.ks = parse_list(eval_ks);
      eval_job.direction = parse_direction(eval_dir);
      return cmd_eval(eval_job, out);
    }
    if (*bench) {
      if (!bench_feats.empty()) bench_job.feats = bench_feats;
      bench_job.levels = parse_list(levels_text);
      bench_job.cfg = bench_flags.resolve(*bench);
      return cmd_bench(bench_job, out);
    }
    if (*generate) return cmd_generate(gen_job, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kConfigError;
}

}  // namespace slotalign::cli
