#pragma once

// Seeded random models: generic shapes for test corpora plus the small
// fixed topologies used to exercise cutset discovery.

#include <aebp/errors.hpp>
#include <aebp/factor.hpp>
#include <aebp/model.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace aebp {

enum class ModelKind { Tree, Grid, Loop, Random, OrModel, Fig3, Fig4, Embedded };

struct GeneratorSpec {
  ModelKind kind = ModelKind::Random;
  std::size_t num_vars = 10;
  /// Largest cardinality; each variable draws its own from [2, cardinality].
  std::size_t cardinality = 2;
  /// Random: chance of each extra edge. Grid/loop ignore it.
  double density = 0.2;
  std::uint64_t seed = 0;
  /// Embedded: number of junk factors planted next to the base model.
  std::size_t embed_extra_factors = 0;
  /// Or-model: add C = E or F with P(E=1) = 0.8, so P(C=1) >= 0.8.
  bool or_c_rule = false;
};

inline ModelKind parse_model_kind(const std::string& s) {
  if (s == "tree") return ModelKind::Tree;
  if (s == "grid") return ModelKind::Grid;
  if (s == "loop") return ModelKind::Loop;
  if (s == "random") return ModelKind::Random;
  if (s == "or-model") return ModelKind::OrModel;
  if (s == "fig3") return ModelKind::Fig3;
  if (s == "fig4") return ModelKind::Fig4;
  if (s == "embedded") return ModelKind::Embedded;
  throw SpecError("unknown model kind '" + s + "'");
}

namespace detail {

class ModelBuilder {
 public:
  explicit ModelBuilder(std::uint64_t seed) : rng_(seed) {}

  std::mt19937_64& rng() { return rng_; }

  std::size_t uniform(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }

  double chance() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }

  VarId add_variable(std::size_t max_card) {
    vars_.push_back({vars_.size(), uniform(2, max_card)});
    return vars_.back().id;
  }

  /// Entries in (0, 1].
  void add_random(std::vector<VarId> ids) {
    std::vector<Variable> scope;
    for (VarId v : ids) scope.push_back(vars_.at(v));
    std::vector<double> t(table_size(scope));
    for (auto& x : t) x = 1.0 - chance();
    factors_.emplace_back(std::move(scope), std::move(t));
  }

  void add_table(std::vector<VarId> ids, std::vector<double> table) {
    std::vector<Variable> scope;
    for (VarId v : ids) scope.push_back(vars_.at(v));
    factors_.emplace_back(std::move(scope), std::move(table));
  }

  std::size_t num_variables() const { return vars_.size(); }

  Model build() { return Model(vars_, factors_); }

 private:
  std::mt19937_64 rng_;
  std::vector<Variable> vars_;
  std::vector<Factor> factors_;
};

/// [out == (in_1 or ... or in_k)] over binary (out, in_1..in_k).
inline std::vector<double> or_table(std::size_t k) {
  std::vector<double> t(std::size_t{2} << k);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const std::size_t out = i >> k;
    const std::size_t ins = i & ((std::size_t{1} << k) - 1);
    t[i] = out == (ins != 0 ? 1u : 0u) ? 1.0 : 0.0;
  }
  return t;
}

inline void check_spec(const GeneratorSpec& s) {
  if (s.cardinality < 2) throw SpecError("cardinality must be at least 2");
  if (!(s.density >= 0.0 && s.density <= 1.0)) throw SpecError("density must lie in [0, 1]");
  switch (s.kind) {
    case ModelKind::Tree:
    case ModelKind::Grid:
    case ModelKind::Random:
    case ModelKind::Embedded:
      if (s.num_vars == 0) throw SpecError("num_vars must be positive");
      break;
    case ModelKind::Loop:
      if (s.num_vars < 3) throw SpecError("a loop needs at least 3 variables");
      break;
    default:
      break;
  }
  if (s.kind != ModelKind::Embedded && s.embed_extra_factors != 0)
    throw SpecError("embed_extra_factors only applies to embedded models");
  if (s.kind != ModelKind::OrModel && s.or_c_rule) throw SpecError("or_c_rule only applies to or-model");
}

}  // namespace detail

/// Copies `base` and adds a chain of `extra` random pairwise factors over
/// fresh binary variables, disconnected from everything in `base`.
inline Model embed(const Model& base, std::size_t extra, std::uint64_t seed) {
  std::vector<Variable> vars = base.variables();
  std::vector<Factor> factors = base.factors();
  VarId next = vars.empty() ? 0 : vars.back().id + 1;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (extra > 0) vars.push_back({next, 2});
  for (std::size_t i = 0; i < extra; ++i) {
    vars.push_back({next + i + 1, 2});
    std::vector<double> t(4);
    for (auto& x : t) x = 1.0 - u(rng);
    factors.emplace_back(std::vector<Variable>{vars[vars.size() - 2], vars.back()}, std::move(t));
  }
  return Model(std::move(vars), std::move(factors));
}

inline Model generate(const GeneratorSpec& spec) {
  detail::check_spec(spec);
  detail::ModelBuilder b(spec.seed);
  const std::size_t n = spec.num_vars;
  switch (spec.kind) {
    case ModelKind::Tree: {
      for (std::size_t i = 0; i < n; ++i) b.add_variable(spec.cardinality);
      for (std::size_t i = 1; i < n; ++i) b.add_random({b.uniform(0, i - 1), i});
      break;
    }
    case ModelKind::Grid: {
      const std::size_t cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
      for (std::size_t i = 0; i < n; ++i) b.add_variable(spec.cardinality);
      for (std::size_t i = 0; i < n; ++i) b.add_random({i});
      for (std::size_t i = 0; i < n; ++i) {
        if ((i + 1) % cols != 0 && i + 1 < n) b.add_random({i, i + 1});
        if (i + cols < n) b.add_random({i, i + cols});
      }
      break;
    }
    case ModelKind::Loop: {
      for (std::size_t i = 0; i < n; ++i) b.add_variable(spec.cardinality);
      for (std::size_t i = 0; i < n; ++i) b.add_random({i});
      for (std::size_t i = 0; i < n; ++i) b.add_random({i, (i + 1) % n});
      break;
    }
    case ModelKind::Random:
    case ModelKind::Embedded: {
      for (std::size_t i = 0; i < n; ++i) b.add_variable(spec.cardinality);
      std::set<std::pair<VarId, VarId>> edges;
      for (std::size_t i = 1; i < n; ++i) {
        const VarId j = b.uniform(0, i - 1);
        edges.insert({j, i});
        b.add_random({j, i});
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (b.chance() < 0.5) b.add_random({i});
      }
      for (VarId i = 0; i < n; ++i) {
        for (VarId j = i + 1; j < n; ++j) {
          if (edges.contains({i, j}) || b.chance() >= spec.density) continue;
          edges.insert({i, j});
          VarId k = b.uniform(0, n - 1);
          if (n > 2 && b.chance() < 0.25 && k != i && k != j)
            b.add_random({i, j, k});
          else
            b.add_random({i, j});
        }
      }
      if (spec.kind == ModelKind::Embedded) return embed(b.build(), spec.embed_extra_factors, spec.seed);
      break;
    }
    case ModelKind::OrModel: {
      // A=0 B=1 C=2 D=3; A = B or C or D.
      for (int i = 0; i < 4; ++i) b.add_variable(2);
      b.add_table({0, 1, 2, 3}, detail::or_table(3));
      b.add_table({1}, {0.1, 0.9});
      if (spec.or_c_rule) {
        // E=4 F=5; C = E or F.
        b.add_variable(2);
        b.add_variable(2);
        b.add_table({2, 4, 5}, detail::or_table(2));
        b.add_table({4}, {0.2, 0.8});
        b.add_table({5}, {0.5, 0.5});
      } else {
        b.add_table({2}, {0.5, 0.5});
      }
      b.add_table({3}, {0.5, 0.5});
      break;
    }
    case ModelKind::Fig3: {
      // Q=0 A=1 B=2 C=3.
      for (int i = 0; i < 4; ++i) b.add_variable(2);
      b.add_random({0, 1});
      b.add_random({0, 3});
      b.add_random({1, 2, 3});
      b.add_random({2, 3});
      break;
    }
    case ModelKind::Fig4: {
      // A=0 B=1 C=2 E=3 F=4 G=5 H=6 D=7: an outer diamond through A, B, C,
      // D, E, F with an inner cycle E-H-G.
      for (int i = 0; i < 8; ++i) b.add_variable(2);
      b.add_random({0, 1});
      b.add_random({0, 7});
      b.add_random({1, 3});
      b.add_random({1, 2});
      b.add_random({7, 2});
      b.add_random({3, 6});
      b.add_random({3, 5});
      b.add_random({6, 5});
      b.add_random({3, 4});
      b.add_random({7, 4});
      break;
    }
  }
  return b.build();
}

}  // namespace aebp
