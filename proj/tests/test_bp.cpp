#include <aebp/bp.hpp>
#include <aebp/exact.hpp>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace aebp;

TEST(Messages, ProductOfIncoming) {
  const Variable v{0, 2};
  const Model m({v}, {Factor({v}, {1, 1}), Factor({v}, {1, 1}), Factor({v}, {1, 1})});
  const Factor msg = message_variable_to_factor(
      m, 0, 0, {{1, Factor({v}, {0.3, 0.7})}, {2, Factor({v}, {0.5, 0.5})}});
  EXPECT_NEAR(msg[0], 0.15, 1e-15);
  EXPECT_NEAR(msg[1], 0.35, 1e-15);
}

TEST(Messages, NoIncomingIsOnes) {
  const Variable v{0, 3};
  const Model m({v}, {Factor({v}, {1, 2, 3})});
  EXPECT_EQ(message_variable_to_factor(m, 0, 0, {}).table(), (std::vector<double>{1, 1, 1}));
}

TEST(Messages, FactorToVariableSumsOthers) {
  const Variable a{0, 2}, b{1, 2};
  const Model m({a, b}, {Factor({a, b}, {1, 2, 3, 4})});
  const Factor msg = message_factor_to_variable(m, 0, 0, {{1, Factor({b}, {1, 0.5})}});
  EXPECT_DOUBLE_EQ(msg[0], 2.0);
  EXPECT_DOUBLE_EQ(msg[1], 5.0);
  EXPECT_THROW(message_factor_to_variable(Model({a, b, Variable{2, 2}}, {Factor({a, b}, {1, 2, 3, 4})}), 0, 2, {}),
               ScopeError);
}

TEST(TreeBP, MatchesBruteForceOnTrees) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Model m = oracle::random_tree(seed);
    for (const auto& v : m.variables()) {
      EXPECT_LT(oracle::max_diff(tree_bp_marginal(m, v.id), oracle::brute_marginal(m, v.id)), 1e-10);
    }
  }
}

TEST(TreeBP, EvidenceOnQueryIsIndicator) {
  const Model m = oracle::random_tree(4, 6);
  const Factor p = tree_bp_marginal(m, 0, {{0, 1}});
  EXPECT_EQ(p[1], 1.0);
  EXPECT_EQ(p[0], 0.0);
}

TEST(TreeBP, ThrowsOnCycle) {
  GeneratorSpec s{.kind = ModelKind::Loop, .num_vars = 4};
  EXPECT_THROW(tree_bp_marginal(generate(s), 0), CyclicModelError);
}

TEST(TreeBP, IgnoresOtherComponents) {
  const Model base = oracle::random_tree(8, 6);
  const Model m = embed(base, 30, 1);
  base.reset_lookup_count();
  EXPECT_LT(oracle::max_diff(tree_bp_marginal(m, 0), tree_bp_marginal(base, 0)), 1e-12);
}

TEST(Cutset, FourCycleNeedsOneVariable) {
  GeneratorSpec s{.kind = ModelKind::Loop, .num_vars = 4};
  const Model m = generate(s);
  const VarSet c = find_cycle_cutset(m);
  EXPECT_EQ(c.size(), 1u);
  EXPECT_FALSE(has_cycle(m, c));
}

TEST(Cutset, BreaksAllCycles) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Model m = oracle::random_cyclic(seed);
    EXPECT_TRUE(has_cycle(m));
    EXPECT_FALSE(has_cycle(m, find_cycle_cutset(m)));
  }
}

TEST(Cutset, ConditioningIsExact) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Model m = oracle::random_cyclic(seed);
    for (VarId q : {VarId{0}, m.num_variables() - 1}) {
      EXPECT_LT(oracle::max_diff(cutset_conditioning_marginal(m, q), oracle::brute_marginal(m, q)), 1e-9);
    }
  }
}

TEST(Cutset, ConditioningWithEvidenceAndQueryInCutset) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Model m = oracle::random_cyclic(seed, 8);
    const Assignment ev{{1, 1}};
    const VarSet cut = find_cycle_cutset(m);
    for (VarId q : cut) {
      if (ev.contains(q)) continue;
      EXPECT_LT(oracle::max_diff(cutset_conditioning_marginal(m, q, ev), oracle::brute_marginal(m, q, ev)), 1e-9);
    }
  }
}

TEST(Cutset, InsufficientCutsetThrows) {
  GeneratorSpec s{.kind = ModelKind::Loop, .num_vars = 5};
  EXPECT_THROW(cutset_conditioning_marginal(generate(s), 0, {}, VarSet{}), CyclicModelError);
}

TEST(LoopyBP, ExactOnTrees) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Model m = oracle::random_tree(seed);
    const LoopyResult r = loopy_bp_beliefs(m);
    EXPECT_TRUE(r.converged);
    for (const auto& v : m.variables()) {
      EXPECT_LT(oracle::max_diff(r.beliefs.at(v.id), oracle::brute_marginal(m, v.id)), 1e-9);
    }
  }
}

TEST(LoopyBP, BeliefsAreDistributions) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Model m = oracle::random_cyclic(seed);
    const LoopyResult r = loopy_bp_beliefs(m, {.max_iterations = 200, .damping = 0.3});
    for (const auto& [v, b] : r.beliefs) EXPECT_NEAR(b.total(), 1.0, 1e-12);
  }
  EXPECT_THROW(loopy_bp_beliefs(oracle::random_tree(1), {.damping = 1.0}), SpecError);
}
