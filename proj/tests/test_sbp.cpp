#include <aebp/sbp.hpp>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace aebp;

TEST(SeparatorBP, SameMessagesAsTreeBPOnTrees) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Model m = oracle::random_tree(seed);
    MessageLog tree, sep;
    const Factor a = tree_bp_message(m, 0, &tree);
    const Factor b = separator_conditioned_message(m, 0, &sep);
    EXPECT_EQ(a, b);
    EXPECT_EQ(tree, sep) << "seed " << seed;
  }
}

TEST(SeparatorBP, ExactOnCyclicModels) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const Model m = oracle::random_cyclic(seed);
    for (const auto& v : m.variables()) {
      EXPECT_LT(oracle::max_diff(separator_conditioned_marginal(m, v.id), oracle::brute_marginal(m, v.id)), 1e-9)
          << "seed " << seed << " var " << v.id;
    }
  }
}

TEST(SeparatorBP, Evidence) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Model m = oracle::random_cyclic(seed, 8);
    const Assignment ev{{2, 0}};
    EXPECT_LT(oracle::max_diff(separator_conditioned_marginal(m, 0, ev), oracle::brute_marginal(m, 0, ev)), 1e-9);
  }
}

TEST(SeparatorBP, GridAndNamedShapes) {
  for (ModelKind k : {ModelKind::Grid, ModelKind::Fig3, ModelKind::Fig4, ModelKind::OrModel}) {
    GeneratorSpec s{.kind = k, .num_vars = 9, .seed = 3};
    const Model m = generate(s);
    for (const auto& v : m.variables()) {
      EXPECT_LT(oracle::max_diff(separator_conditioned_marginal(m, v.id), oracle::brute_marginal(m, v.id)), 1e-9);
    }
  }
}
