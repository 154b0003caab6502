#pragma once

// Subcommand bodies of the aebp tool, callable without a process boundary.
// Each returns the process exit code: 0 success, 2 cyclic model given to
// tree BP, 3 malformed input, 1 anything else.

#include <aebp/anytime_bp.hpp>
#include <aebp/anytime_exact_bp.hpp>
#include <aebp/bp.hpp>
#include <aebp/exact.hpp>
#include <aebp/generator.hpp>
#include <aebp/sbp.hpp>
#include <aebp/stream.hpp>
#include <aebp/uai.hpp>

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace aebp::cli {

struct SolveArgs {
  std::string model_path;
  VarId query = 0;
  std::string method = "ve";
  std::string evidence_path;
};

struct BoundsArgs {
  std::string model_path;
  VarId query = 0;
  std::string method = "aebp";
  std::optional<double> stop_width;
  std::optional<std::size_t> steps;
  bool json = false;
  std::string evidence_path;
  std::string policy = "round-robin";
};

struct TraceArgs {
  std::string model_path;
  VarId query = 0;
  std::size_t steps = 0;
  std::string out_path = "-";
  std::string policy = "round-robin";
};

struct GenArgs {
  GeneratorSpec spec;
  std::string out_path = "-";
};

struct BenchArgs {
  std::vector<std::size_t> sizes{1000, 10000, 100000};
  double width = 0.01;
  std::size_t base_vars = 10;
  std::uint64_t seed = 0;
  bool json = false;
};

class InputError : public Error {
 public:
  using Error::Error;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << text;
}

/// Applies AEBP_SEED when set.
inline std::uint64_t effective_seed(std::uint64_t seed) {
  if (const char* env = std::getenv("AEBP_SEED"); env && *env) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw SpecError("AEBP_SEED must be a non-negative integer");
    return v;
  }
  return seed;
}

inline ChildPolicy parse_policy(const std::string& s) {
  if (s == "round-robin") return ChildPolicy::RoundRobin;
  if (s == "widest") return ChildPolicy::WidestFirst;
  if (s == "depth-first") return ChildPolicy::DepthFirst;
  throw SpecError("unknown policy '" + s + "'");
}

template <class F>
int guarded(F&& body, std::ostream& err) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const CyclicModelError& e) {
    err << "cyclic model: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

inline Assignment load_evidence(const std::string& path, const Model& m) {
  if (path.empty()) return {};
  Assignment a = parse_evidence(read_file(path));
  check_evidence(m, a);
  return a;
}

inline Factor solve_marginal(const Model& m, VarId q, const std::string& method, const Assignment& ev) {
  (void)m.variable(q);
  if (method == "ve") return variable_elimination_marginal(m, {q}, ev);
  if (method == "enum") return enumerate_marginal(m, {q}, ev);
  if (method == "bp") return tree_bp_marginal(m, q, ev);
  if (method == "loopy") return loopy_bp_beliefs(m, {}, ev).beliefs.at(q);
  if (method == "cutset") return cutset_conditioning_marginal(m, q, ev);
  if (method == "sbp") return separator_conditioned_marginal(m, q, ev);
  if (method == "aebp") {
    if (auto it = ev.find(q); it != ev.end()) {
      std::vector<double> t(m.variable(q).cardinality, 0.0);
      t[it->second] = 1.0;
      return Factor({m.variable(q)}, std::move(t));
    }
    const Model cond = condition(m, ev);
    return *run_aebp(cond, q).marginal;
  }
  throw SpecError("unknown method '" + method + "'");
}

inline int cmd_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        const Model m = parse_uai(read_file(a.model_path));
        const Assignment ev = load_evidence(a.evidence_path, m);
        const Factor p = solve_marginal(m, a.query, a.method, ev);
        char buf[64];
        for (std::size_t i = 0; i < p.size(); ++i) {
          std::snprintf(buf, sizeof buf, "%.12g\n", p[i]);
          out << buf;
        }
        return 0;
      },
      err);
}

inline int cmd_bounds(const BoundsArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        const Model m = parse_uai(read_file(a.model_path));
        const Assignment ev = load_evidence(a.evidence_path, m);
        const Model cond = condition(m, ev);
        (void)cond.variable(a.query);
        if (!a.json) out << text_header() << "\n";
        auto sink = [&](const StreamRecord& r) {
          if (a.json)
            out << to_json(r).dump() << "\n";
          else
            out << to_text(r) << "\n";
          out.flush();
        };
        if (a.method == "aebp") {
          AebpOptions o;
          o.update.policy = parse_policy(a.policy);
          o.stop_width = a.stop_width;
          o.max_steps = a.steps;
          run_aebp(cond, a.query, o, sink);
        } else if (a.method == "anytime-bp") {
          AnytimeBPOptions o;
          o.stop_width = a.stop_width;
          o.max_steps = a.steps;
          if (a.policy == "widest") o.policy = ExpansionPolicy::WidestFirst;
          anytime_bp_run(cond, a.query, o, sink);
        } else {
          throw SpecError("unknown bounds method '" + a.method + "'");
        }
        return 0;
      },
      err);
}

inline int cmd_trace(const TraceArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        const Model m = parse_uai(read_file(a.model_path));
        UpdateOptions o;
        o.policy = parse_policy(a.policy);
        AnytimeExactBP engine(m, a.query, o);
        engine.step();
        for (std::size_t i = 0; i < a.steps && !engine.converged(); ++i) engine.step();
        write_output(a.out_path, engine.trace().dump(2) + "\n", out);
        return 0;
      },
      err);
}

inline int cmd_gen(const GenArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        GeneratorSpec spec = a.spec;
        spec.seed = effective_seed(spec.seed);
        write_output(a.out_path, write_uai(generate(spec)), out);
        return 0;
      },
      err);
}

struct LocalityRow {
  std::size_t extra_factors = 0;
  std::size_t total_factors = 0;
  double parse_seconds = 0.0;
  double run_seconds = 0.0;
  std::uint64_t lookup_count = 0;
  std::size_t steps = 0;
  double width = 1.0;
};

/// Embeds one fixed random model among each number of junk factors, reads
/// it back from text, and runs AEBP on variable 0 down to `width`.
inline std::vector<LocalityRow> bench_locality(const BenchArgs& a) {
  GeneratorSpec spec;
  spec.kind = ModelKind::Random;
  spec.num_vars = a.base_vars;
  spec.seed = effective_seed(a.seed);
  const Model base = generate(spec);
  std::vector<LocalityRow> rows;
  for (std::size_t n : a.sizes) {
    const std::string text = write_uai(embed(base, n, spec.seed));
    const auto t0 = std::chrono::steady_clock::now();
    const Model m = parse_uai(text);
    const auto t1 = std::chrono::steady_clock::now();
    AebpOptions o;
    o.stop_width = a.width;
    const AebpRun run = run_aebp(m, 0, o);
    const auto t2 = std::chrono::steady_clock::now();
    LocalityRow r;
    r.extra_factors = n;
    r.total_factors = m.num_factors();
    r.parse_seconds = std::chrono::duration<double>(t1 - t0).count();
    r.run_seconds = std::chrono::duration<double>(t2 - t1).count();
    r.lookup_count = run.records.back().lookup_count;
    r.steps = run.records.back().step;
    r.width = run.records.back().width;
    rows.push_back(r);
  }
  return rows;
}

inline int cmd_bench_locality(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        const auto rows = bench_locality(a);
        bool same = true;
        for (const auto& r : rows) same = same && r.lookup_count == rows.front().lookup_count;
        if (a.json) {
          for (const auto& r : rows) {
            nlohmann::ordered_json j;
            j["extra_factors"] = r.extra_factors;
            j["total_factors"] = r.total_factors;
            j["parse_seconds"] = r.parse_seconds;
            j["run_seconds"] = r.run_seconds;
            j["lookup_count"] = r.lookup_count;
            j["steps"] = r.steps;
            j["width"] = r.width;
            out << j.dump() << "\n";
          }
        } else {
          char buf[160];
          std::snprintf(buf, sizeof buf, "%10s %10s %12s %12s %10s %6s %10s\n", "extra", "factors",
                        "parse_s", "run_s", "lookups", "steps", "width");
          out << buf;
          for (const auto& r : rows) {
            std::snprintf(buf, sizeof buf, "%10zu %10zu %12.6f %12.6f %10llu %6zu %10.3g\n",
                          r.extra_factors, r.total_factors, r.parse_seconds, r.run_seconds,
                          static_cast<unsigned long long>(r.lookup_count), r.steps, r.width);
            out << buf;
          }
          out << "lookup_count identical across sizes: " << (same ? "yes" : "no") << "\n";
        }
        return same ? 0 : 1;
      },
      err);
}

}  // namespace aebp::cli
