#pragma once

// Test-side oracles and corpus helpers. The brute-force marginal here walks
// assignments as maps and reads factors through Factor::value, so it shares
// no indexing code with the library's enumerator.

#include <aebp/bp.hpp>
#include <aebp/factor.hpp>
#include <aebp/generator.hpp>
#include <aebp/model.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace aebp::oracle {

inline std::vector<double> brute_marginal(const Model& m, VarId q, const Assignment& evidence = {}) {
  std::vector<double> acc(m.variable(q).cardinality, 0.0);
  const auto& vars = m.variables();
  Assignment a;
  for (const auto& v : vars) a[v.id] = evidence.contains(v.id) ? evidence.at(v.id) : 0;
  for (;;) {
    double p = 1.0;
    for (const auto& f : m.factors()) p *= f.value(a);
    acc[a.at(q)] += p;
    std::size_t k = vars.size();
    while (k-- > 0) {
      const auto& v = vars[k];
      if (evidence.contains(v.id)) continue;
      if (++a[v.id] < v.cardinality) break;
      a[v.id] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
  double z = 0.0;
  for (double x : acc) z += x;
  for (double& x : acc) x /= z;
  return acc;
}

inline double max_diff(const Factor& f, const std::vector<double>& g) {
  double d = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) d = std::max(d, std::abs(f[i] - g[i]));
  return d;
}

inline double max_diff(const Factor& f, const Factor& g) { return max_diff(f, g.table()); }

inline Model random_tree(std::uint64_t seed, std::size_t max_vars = 12, std::size_t max_card = 3) {
  std::mt19937_64 rng(seed);
  GeneratorSpec s;
  s.kind = ModelKind::Tree;
  s.num_vars = std::uniform_int_distribution<std::size_t>(1, max_vars)(rng);
  s.cardinality = std::uniform_int_distribution<std::size_t>(2, max_card)(rng);
  s.seed = seed;
  return generate(s);
}

/// A random model guaranteed to contain a cycle.
inline Model random_cyclic(std::uint64_t seed, std::size_t max_vars = 10, std::size_t max_card = 3) {
  std::mt19937_64 rng(seed);
  for (std::uint64_t attempt = 0;; ++attempt) {
    GeneratorSpec s;
    s.kind = attempt % 3 == 2 ? ModelKind::Loop : ModelKind::Random;
    s.num_vars = std::uniform_int_distribution<std::size_t>(3, max_vars)(rng);
    s.cardinality = std::uniform_int_distribution<std::size_t>(2, max_card)(rng);
    s.density = 0.15 + 0.25 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    s.seed = seed * 1000 + attempt;
    Model m = generate(s);
    if (has_cycle(m)) return m;
  }
}

inline Factor random_factor(std::mt19937_64& rng, std::vector<Variable> scope) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> t(detail::table_size(scope));
  for (auto& x : t) x = u(rng);
  return Factor(std::move(scope), std::move(t));
}

}  // namespace aebp::oracle
