#include <sys/resource.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "relcomp/blocks.hpp"
#include "relcomp/error.hpp"
#include "relcomp/inference.hpp"
#include "relcomp/model_io.hpp"
#include "relcomp/oracle.hpp"
#include "relcomp/rule_library.hpp"

namespace {

using namespace relcomp;

struct Config {
  std::string model_path;
  std::string query;
  std::string evidence;
  std::optional<double> time;
  std::optional<double> t0;
  std::optional<double> dt;
  std::optional<std::size_t> steps;
  std::string mode = "multilevel";
  std::uint64_t seed = 20240601;
  std::uint64_t samples = 1'000'000;
  unsigned threads = 1;
  std::size_t chunk = 65536;
  std::string out;
  std::string node;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

InferenceOptions inference_options(const Config& cfg) {
  InferenceOptions o;
  if (cfg.mode == "flat") {
    o.mode = InferenceMode::kFlat;
  } else if (cfg.mode != "multilevel") {
    throw DomainError("unknown mode '" + cfg.mode + "' (expected multilevel or flat)");
  }
  o.reduce.chunk = cfg.chunk;
  o.reduce.threads = std::max(1u, cfg.threads);
  return o;
}

QuerySpec query_spec(const SystemModel& m, const Config& cfg) {
  return QuerySpec{cfg.query.empty() ? Assignment{} : parse_assignment(m, cfg.query),
                   cfg.evidence.empty() ? Assignment{} : parse_assignment(m, cfg.evidence)};
}

// Model at the requested time point: --time, else the grid start, else as loaded.
SystemModel model_at(const SystemModel& m, const Config& cfg) {
  if (cfg.time) return m.at_time(*cfg.time);
  if (cfg.t0) return m.at_time(*cfg.t0);
  if (m.time_grid()) return m.at_time(m.time_grid()->t0);
  return m;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw IoError("cannot write '" + path + "'");
    }
  }
  bool active() const { return file_.is_open(); }
  std::ostream& stream() { return file_; }
  void close() {
    if (!active()) return;
    file_.close();
    if (!file_) throw IoError("failed writing output file");
  }

 private:
  std::ofstream file_;
};

std::string situation_text(int s) {
  switch (s) {
    case 1: return "1 (empty query)";
    case 2: return "2 (query without block children)";
    default: return "3 (query with block children)";
  }
}

int cmd_blocks(const Config& cfg) {
  const SystemModel m = load_model(cfg.model_path);
  SystemModel local = m;
  if (m.leaves().size() == 1 && flat_frontier(m).size() != m.parents(m.leaf()).size()) {
    std::cout << "multilevel model; showing the blocks of the flattened leaf\n";
    local = flatten(m);
  }
  const Partition p = find_blocks(local);
  std::cout << "leaf: " << local.node(local.leaf()).name << "\n";
  std::cout << "block  roots                                children                       T        T_C\n";
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    const Block& blk = p.blocks[b];
    std::string roots, children;
    for (NodeId r : blk.roots) roots += (roots.empty() ? "" : ",") + local.node(r).name;
    for (NodeId c : blk.children) children += (children.empty() ? "" : ",") + local.node(c).name;
    const BlockCounts bc = block_state_counts(blk, local);
    char line[512];
    std::snprintf(line, sizeof line, "%-6zu %-36s %-30s %-8llu %llu\n", b + 1, roots.c_str(),
                  children.c_str(), static_cast<unsigned long long>(bc.total),
                  static_cast<unsigned long long>(bc.child_total));
    std::cout << line;
  }
  std::string indep;
  for (NodeId n : p.independent_nodes) indep += (indep.empty() ? "" : ",") + local.node(n).name;
  std::cout << "independent: " << (indep.empty() ? "(none)" : indep) << "\n";
  Output out(cfg.out);
  if (out.active()) {
    out.stream() << "kind,index,roots,children,T,T_C\n";
    for (std::size_t b = 0; b < p.blocks.size(); ++b) {
      const Block& blk = p.blocks[b];
      std::string roots, children;
      for (NodeId r : blk.roots) roots += (roots.empty() ? "" : " ") + local.node(r).name;
      for (NodeId c : blk.children) children += (children.empty() ? "" : " ") + local.node(c).name;
      const BlockCounts bc = block_state_counts(blk, local);
      out.stream() << "block," << b + 1 << "," << roots << "," << children << "," << bc.total << ","
                   << bc.child_total << "\n";
    }
    for (NodeId n : p.independent_nodes) out.stream() << "independent,,," << local.node(n).name << ",,\n";
    out.close();
  }
  return 0;
}

int cmd_infer(const Config& cfg) {
  const SystemModel m = model_at(load_model(cfg.model_path), cfg);
  const QuerySpec spec = query_spec(m, cfg);
  const InferenceResult r = infer(m, spec, inference_options(cfg));
  const std::string leaf = m.node(m.leaf()).name;
  std::cout << "situation: " << situation_text(r.situation) << "\n";
  std::cout << "mass before normalization: " << fmt(r.mass) << "\n";
  std::string line;
  for (std::size_t s = 0; s < r.distribution.values.size(); ++s) {
    std::cout << "Pr(" << leaf << "=" << s + 1 << " | Q, E) = " << fixed(r.distribution.values[s], 6)
              << "  (" << fmt(r.distribution.values[s]) << ")\n";
    line += (s ? ", " : "") + fixed(r.distribution.values[s], 4);
  }
  std::cout << line << "\n";
  Output out(cfg.out);
  if (out.active()) {
    out.stream() << "state,probability\n";
    for (std::size_t s = 0; s < r.distribution.values.size(); ++s) {
      out.stream() << s + 1 << "," << fmt(r.distribution.values[s]) << "\n";
    }
    out.close();
  }
  return 0;
}

int cmd_curve(const Config& cfg) {
  const SystemModel base = load_model(cfg.model_path);
  TimeGrid grid = base.time_grid().value_or(TimeGrid{0.0, 100.0, 1});
  if (cfg.t0) grid.t0 = *cfg.t0;
  if (cfg.dt) grid.dt = *cfg.dt;
  if (cfg.steps) grid.count = *cfg.steps;
  grid.validate();
  const SystemModel probe = base;
  const NodeId leaf = probe.leaf();
  const std::uint32_t states = probe.states(leaf);
  const State min_state = probe.reliability_min_state().value_or(states);
  const QuerySpec spec = query_spec(base, cfg);
  const InferenceOptions opts = inference_options(cfg);

  std::vector<std::vector<double>> rows(grid.count);
  std::vector<std::exception_ptr> errors(grid.count);
  const unsigned workers = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(grid.count)));
  auto work = [&](unsigned w) {
    for (std::size_t i = w; i < grid.count; i += workers) {
      try {
        rows[i] = infer(base.at_time(grid.at(i)), spec, opts).distribution.values;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::ostringstream csv;
  csv << "t";
  for (std::uint32_t s = 1; s <= states; ++s) csv << ",P" << s;
  csv << ",R\n";
  double prev_r = 2.0;
  std::size_t violations = 0;
  std::optional<double> crossing;
  for (std::size_t i = 0; i < grid.count; ++i) {
    double r = 0.0;
    for (State s = min_state; s <= states; ++s) r += rows[i][s - 1];
    if (r > prev_r + 1e-12) ++violations;
    if (!crossing && i > 0 && prev_r >= 0.5 && r < 0.5) {
      const double t_prev = grid.at(i - 1);
      crossing = t_prev + (prev_r - 0.5) / (prev_r - r) * grid.dt;
    }
    prev_r = r;
    csv << fmt(grid.at(i));
    for (double v : rows[i]) csv << "," << fmt(v);
    csv << "," << fmt(r) << "\n";
  }
  if (violations > 0) {
    std::cerr << "warning: R(t) increases at " << violations << " grid points\n";
  }
  Output out(cfg.out);
  if (out.active()) {
    out.stream() << csv.str();
    out.close();
    std::cout << "wrote " << grid.count << " rows to " << cfg.out << "\n";
  } else {
    std::cout << csv.str();
  }
  std::cerr << "R(t) = Pr(" << probe.node(leaf).name << " >= " << min_state << ")";
  if (crossing) {
    std::cerr << " crosses 0.5 at t = " << fixed(*crossing, 0) << " h\n";
  } else {
    std::cerr << " stays on one side of 0.5 over the grid\n";
  }
  return 0;
}

long peak_rss_kib() {
  rusage ru{};
  getrusage(RUSAGE_SELF, &ru);
  return ru.ru_maxrss;
}

int cmd_verify(const Config& cfg) {
  const SystemModel m = model_at(load_model(cfg.model_path), cfg);
  const QuerySpec spec = query_spec(m, cfg);
  const InferenceResult r = infer(m, spec, inference_options(cfg));
  const std::size_t k = r.distribution.values.size();
  bool ok = true;
  std::cout << "compressed path: situation " << r.situation << "\n";
  Output out(cfg.out);
  if (out.active()) out.stream() << "state,compressed,enumeration,monte_carlo,mc_std_error\n";
  std::vector<double> exact(k, std::nan(""));
  if (m.joint_size() <= kOracleLimit) {
    const Distribution e = oracle_infer(m, spec);
    double max_delta = 0.0;
    for (std::size_t s = 0; s < k; ++s) {
      exact[s] = e.values[s];
      max_delta = std::max(max_delta, std::abs(e.values[s] - r.distribution.values[s]));
    }
    const bool pass = max_delta < 1e-12;
    ok = ok && pass;
    std::cout << "enumeration: max |delta| = " << fmt(max_delta) << (pass ? "  (< 1e-12, ok)" : "  (FAIL)") << "\n";
  } else {
    double log2_joint = 0.0;
    for (NodeId n = 0; n < m.size(); ++n) log2_joint += std::log2(static_cast<double>(m.states(n)));
    std::cout << "enumeration: skipped (joint has about 2^" << fmt(std::round(log2_joint)) << " states)\n";
  }
  std::vector<double> mc(k, std::nan("")), se(k, std::nan(""));
  if (spec.query.empty() && spec.evidence.empty()) {
    const MonteCarloResult res = monte_carlo(m, cfg.samples, cfg.seed, cfg.threads);
    double worst = 0.0;
    for (std::size_t s = 0; s < k; ++s) {
      mc[s] = res.estimate[s];
      se[s] = res.std_error[s];
      const double z = se[s] > 0 ? std::abs(mc[s] - r.distribution.values[s]) / se[s]
                                 : (std::abs(mc[s] - r.distribution.values[s]) > 1e-12 ? INFINITY : 0.0);
      worst = std::max(worst, z);
    }
    const bool pass = worst <= 4.0;
    ok = ok && pass;
    std::cout << "monte carlo (" << cfg.samples << " samples, seed " << cfg.seed
              << "): max |delta| / SE = " << fixed(worst, 2) << (pass ? "  (<= 4, ok)" : "  (FAIL)") << "\n";
  } else {
    std::cout << "monte carlo: skipped (unconditional only)\n";
  }
  for (std::size_t s = 0; s < k; ++s) {
    std::cout << "  state " << s + 1 << ": " << fixed(r.distribution.values[s], 6);
    if (!std::isnan(exact[s])) std::cout << "  enum " << fixed(exact[s], 6);
    if (!std::isnan(mc[s])) std::cout << "  mc " << fixed(mc[s], 6) << " +- " << fixed(se[s], 6);
    std::cout << "\n";
    if (out.active()) {
      out.stream() << s + 1 << "," << fmt(r.distribution.values[s]) << ","
                   << (std::isnan(exact[s]) ? "" : fmt(exact[s])) << ","
                   << (std::isnan(mc[s]) ? "" : fmt(mc[s])) << "," << (std::isnan(se[s]) ? "" : fmt(se[s]))
                   << "\n";
    }
  }
  out.close();
  if (!ok) throw NumericError("verification failed");
  return 0;
}

int cmd_compress_stats(const Config& cfg) {
  const SystemModel m = model_at(load_model(cfg.model_path), cfg);
  const InferenceResult r = infer(m, query_spec(m, cfg), inference_options(cfg));
  const ReduceStats& st = r.largest;
  const double gib = 1024.0 * 1024.0 * 1024.0;
  const double dense_bytes = static_cast<double>(st.dense_entries) * sizeof(double);
  std::cout << "mode: " << cfg.mode << " (reduction " << to_string(st.mode_used) << ")\n";
  std::cout << "largest table: " << st.dense_entries << " entries\n";
  std::cout << "dense-equivalent: " << fixed(dense_bytes / gib, 1) << " GiB (" << fmt(dense_bytes) << " bytes)\n";
  std::cout << "compressed source table: " << st.stage0_rows << " rows, "
            << (st.stage0_dict_exact ? "" : ">= ") << st.stage0_dict_entries << " dictionary entries, "
            << fixed(static_cast<double>(st.stage0_bytes) / (1024.0 * 1024.0), 2) << " MiB\n";
  std::cout << "peak resident table data: " << st.peak_table_bytes << " bytes\n";
  std::cout << "largest dense chunk: " << st.max_chunk << " entries\n";
  std::cout << "process peak RSS: " << fixed(static_cast<double>(peak_rss_kib()) / 1024.0, 1) << " MiB\n";
  std::cout << "elapsed (largest reduction): " << fixed(st.elapsed_seconds, 2) << " s\n";
  std::string dist;
  for (std::size_t s = 0; s < r.distribution.values.size(); ++s) dist += (s ? ", " : "") + fixed(r.distribution.values[s], 4);
  std::cout << "Pr(" << m.node(m.leaf()).name << ") = " << dist << "\n";
  Output out(cfg.out);
  if (out.active()) {
    out.stream() << "metric,value\n"
                 << "dense_entries," << st.dense_entries << "\n"
                 << "dense_bytes," << fmt(dense_bytes) << "\n"
                 << "stage0_rows," << st.stage0_rows << "\n"
                 << "stage0_dict_entries," << st.stage0_dict_entries << "\n"
                 << "stage0_bytes," << st.stage0_bytes << "\n"
                 << "peak_table_bytes," << st.peak_table_bytes << "\n"
                 << "max_chunk," << st.max_chunk << "\n"
                 << "peak_rss_kib," << peak_rss_kib() << "\n"
                 << "elapsed_seconds," << fmt(st.elapsed_seconds) << "\n";
    out.close();
  }
  return 0;
}

int cmd_truth_table(const Config& cfg) {
  const SystemModel m = load_model(cfg.model_path);
  const NodeId n = m.id_of(cfg.node);
  const Rule& rule = m.rule(n);
  if (rule.kind() == Rule::Kind::kComposite) throw ModelError("composite rules have no truth table");
  const auto& ps = m.parents(n);
  std::ostringstream csv;
  for (NodeId p : ps) csv << m.node(p).name << ",";
  if (rule.is_deterministic()) {
    csv << m.node(n).name << "\n";
  } else {
    for (std::uint32_t s = 1; s <= rule.child_states(); ++s) csv << "P" << s << (s == rule.child_states() ? "\n" : ",");
  }
  for (std::uint64_t k = 1; k <= rule.parents().total(); ++k) {
    const auto states = row_to_states(k, rule.parents());
    for (State s : states) csv << s << ",";
    if (rule.is_deterministic()) {
      csv << rule.deterministic_state(states) << "\n";
    } else {
      const auto row = rule.evaluate(states);
      for (std::size_t s = 0; s < row.size(); ++s) csv << fmt(row[s]) << (s + 1 == row.size() ? "\n" : ",");
    }
  }
  Output out(cfg.out);
  if (out.active()) {
    out.stream() << csv.str();
    out.close();
  } else {
    std::cout << csv.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Config cfg;
  CLI::App app{"relcomp: exact inference on compressed multistate reliability networks"};
  app.require_subcommand(1);
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--model", cfg.model_path, "model file (JSON)")->required();
    sub->add_option("--out", cfg.out, "write CSV to this file");
  };
  auto add_query = [&](CLI::App* sub) {
    sub->add_option("--query", cfg.query, "query targets, e.g. SM=3,DF=2");
    sub->add_option("--evidence", cfg.evidence, "observed states, e.g. C=2");
    sub->add_option("--mode", cfg.mode, "multilevel or flat")->check(CLI::IsMember({"multilevel", "flat"}));
    sub->add_option("--threads", cfg.threads, "worker threads")->check(CLI::Range(1u, 256u));
    sub->add_option("--chunk", cfg.chunk, "dense entries generated per chunk")->check(CLI::Range(std::size_t{1}, std::size_t{1000000}));
  };
  auto add_time = [&](CLI::App* sub) {
    sub->add_option("--time", cfg.time, "evaluate lifetime laws at this time (hours)");
    sub->add_option("--t0", cfg.t0, "grid start (hours)");
  };

  auto* blocks = app.add_subcommand("blocks", "print the block partition");
  add_common(blocks);

  auto* infer_cmd = app.add_subcommand("infer", "Pr(leaf | Q, E)");
  add_common(infer_cmd);
  add_query(infer_cmd);
  add_time(infer_cmd);

  auto* curve = app.add_subcommand("curve", "leaf distribution and R(t) over a time grid");
  add_common(curve);
  add_query(curve);
  curve->add_option("--t0", cfg.t0, "grid start (hours)");
  curve->add_option("--dt", cfg.dt, "grid step (hours)")->check(CLI::PositiveNumber);
  curve->add_option("--steps", cfg.steps, "number of grid points")->check(CLI::Range(std::size_t{1}, std::size_t{10000000}));

  auto* verify = app.add_subcommand("verify", "compare against enumeration and Monte Carlo");
  add_common(verify);
  add_query(verify);
  add_time(verify);
  verify->add_option("--samples", cfg.samples, "Monte Carlo samples")->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 40));
  verify->add_option("--seed", cfg.seed, "Monte Carlo seed");

  auto* stats = app.add_subcommand("compress-stats", "dense vs compressed table sizes");
  add_common(stats);
  add_query(stats);
  add_time(stats);

  auto* truth = app.add_subcommand("truth-table", "enumerate a node's rule");
  add_common(truth);
  truth->add_option("--node", cfg.node, "node name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 64;
  }

  try {
    if (*blocks) return cmd_blocks(cfg);
    if (*infer_cmd) return cmd_infer(cfg);
    if (*curve) return cmd_curve(cfg);
    if (*verify) return cmd_verify(cfg);
    if (*stats) return cmd_compress_stats(cfg);
    if (*truth) return cmd_truth_table(cfg);
  } catch (const relcomp::Error& e) {
    std::cerr << "relcomp: " << relcomp::to_string(e.kind()) << ": " << e.what() << "\n";
    return relcomp::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "relcomp: unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 64;
}
