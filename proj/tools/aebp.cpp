#include "commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace aebp;

namespace {

std::size_t parse_size(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size() || v < 0 || v != std::floor(v)) throw std::invalid_argument("bad size '" + s + "'");
  return static_cast<std::size_t>(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and anytime-bounded marginals on discrete factor graphs"};
  app.require_subcommand(1);

  cli::SolveArgs solve;
  auto* s = app.add_subcommand("solve", "print the marginal of one variable");
  s->add_option("model", solve.model_path, "UAI model file")->required();
  s->add_option("--query", solve.query, "query variable index")->required();
  s->add_option("--method", solve.method, "ve|enum|bp|loopy|cutset|sbp|aebp")
      ->check(CLI::IsMember({"ve", "enum", "bp", "loopy", "cutset", "sbp", "aebp"}));
  s->add_option("--evidence", solve.evidence_path, "evidence file");

  cli::BoundsArgs bounds;
  auto* b = app.add_subcommand("bounds", "stream anytime bounds on a marginal");
  b->add_option("model", bounds.model_path, "UAI model file")->required();
  b->add_option("--query", bounds.query, "query variable index")->required();
  b->add_option("--method", bounds.method, "anytime-bp|aebp")
      ->check(CLI::IsMember({"anytime-bp", "aebp"}));
  b->add_option("--stop-width", bounds.stop_width, "stop once the width is at most this");
  b->add_option("--steps", bounds.steps, "stop after this many updates");
  b->add_flag("--json", bounds.json, "one JSON object per line");
  b->add_option("--evidence", bounds.evidence_path, "evidence file");
  b->add_option("--policy", bounds.policy, "round-robin|widest|depth-first")
      ->check(CLI::IsMember({"round-robin", "widest", "depth-first"}));

  cli::TraceArgs trace;
  auto* t = app.add_subcommand("trace", "write the AEBP component tree as JSON");
  t->add_option("model", trace.model_path, "UAI model file")->required();
  t->add_option("--query", trace.query, "query variable index")->required();
  t->add_option("--steps", trace.steps, "updates after the first");
  t->add_option("--out", trace.out_path, "output path, - for stdout");
  t->add_option("--policy", trace.policy, "round-robin|widest|depth-first")
      ->check(CLI::IsMember({"round-robin", "widest", "depth-first"}));

  cli::GenArgs gen;
  std::string kind = "random";
  auto* g = app.add_subcommand("gen", "generate a random model in UAI format");
  g->add_option("--kind", kind, "tree|grid|loop|random|or-model|fig3|fig4|embedded");
  g->add_option("--vars", gen.spec.num_vars, "number of variables");
  g->add_option("--card", gen.spec.cardinality, "largest cardinality");
  g->add_option("--density", gen.spec.density, "extra edge probability (random)");
  g->add_option("--seed", gen.spec.seed, "random seed (AEBP_SEED overrides)");
  g->add_option("--extra-factors", gen.spec.embed_extra_factors, "junk factors (embedded)");
  g->add_flag("--c-rule", gen.spec.or_c_rule, "or-model: add C = E or F");
  g->add_option("--out", gen.out_path, "output path, - for stdout");

  cli::BenchArgs bench;
  std::vector<std::string> sizes{"1e3", "1e4", "1e5"};
  auto* l = app.add_subcommand("bench-locality", "lookup counts with growing disconnected junk");
  l->add_option("--sizes", sizes, "junk factor counts")->delimiter(',');
  l->add_option("--width", bench.width, "target width");
  l->add_option("--vars", bench.base_vars, "variables in the embedded model");
  l->add_option("--seed", bench.seed, "random seed (AEBP_SEED overrides)");
  l->add_flag("--json", bench.json, "one JSON object per line");

  CLI11_PARSE(app, argc, argv);

  if (*s) return cli::cmd_solve(solve, std::cout, std::cerr);
  if (*b) return cli::cmd_bounds(bounds, std::cout, std::cerr);
  if (*t) return cli::cmd_trace(trace, std::cout, std::cerr);
  if (*g) {
    return cli::guarded(
        [&] {
          gen.spec.kind = parse_model_kind(kind);
          return cli::cmd_gen(gen, std::cout, std::cerr);
        },
        std::cerr);
  }
  return cli::guarded(
      [&] {
        bench.sizes.clear();
        for (const auto& x : sizes) bench.sizes.push_back(parse_size(x));
        return cli::cmd_bench_locality(bench, std::cout, std::cerr);
      },
      std::cerr);
}
