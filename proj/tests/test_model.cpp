#include <aebp/model.hpp>

#include <gtest/gtest.h>

#include <thread>

#include "support.hpp"

using namespace aebp;

TEST(Model, ValidatesVariables) {
  EXPECT_THROW(Model({{0, 2}, {0, 3}}, {}), ScopeError);
  EXPECT_THROW(Model({{0, 1}}, {}), ScopeError);
  EXPECT_THROW(Model({{0, 2}}, {Factor({Variable{0, 3}}, {1, 1, 1})}), ScopeError);
  EXPECT_THROW(Model({{0, 2}}, {Factor({Variable{1, 2}}, {1, 1})}), UnknownVariableError);
}

TEST(Model, FactorsOf) {
  const Variable a{0, 2}, b{1, 2}, c{2, 2}, lone{3, 2};
  const Model m({a, b, c, lone}, {Factor({a, b}, {1, 1, 1, 1}), Factor({b, c}, {1, 1, 1, 1})});
  EXPECT_TRUE(m.factors_of(3).empty());
  EXPECT_EQ(m.factors_of(1), (std::vector<FactorId>{0, 1}));
  EXPECT_THROW(m.factors_of(9), UnknownVariableError);
  EXPECT_THROW(m.variable(9), UnknownVariableError);
}

TEST(Model, IndexMatchesLinearScan) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Model m = oracle::random_cyclic(seed);
    for (const auto& v : m.variables()) {
      std::vector<FactorId> scan;
      for (FactorId f = 0; f < m.num_factors(); ++f) {
        if (m.factor(f).has(v.id)) scan.push_back(f);
      }
      EXPECT_EQ(m.factors_of(v.id), scan);
    }
  }
}

TEST(Model, CountsLookups) {
  const Model m = oracle::random_tree(3);
  m.reset_lookup_count();
  (void)m.factors_of(0);
  (void)m.factors_of(0);
  (void)m.neighbors(0);
  EXPECT_EQ(m.lookup_count(), 2u);
  const Model copy = m;
  EXPECT_EQ(copy.lookup_count(), 0u);
}

TEST(Model, ConditionKeepsFactorIds) {
  const Variable a{0, 2}, b{1, 3};
  const Model m({a, b}, {Factor({a, b}, {1, 2, 3, 4, 5, 6}), Factor({a}, {1, 2})});
  const Model c = condition(m, {{1, 2}});
  ASSERT_EQ(c.num_factors(), 2u);
  EXPECT_EQ(c.factor(0).table(), (std::vector<double>{3, 6}));
  EXPECT_THROW(condition(m, {{1, 3}}), ScopeError);
}

TEST(Model, ComponentFactors) {
  const Model m = embed(oracle::random_tree(5, 6), 20, 5);
  const auto comp = component_factors(m, 0);
  const auto before = m.lookup_count();
  for (FactorId f : comp) EXPECT_LT(f, oracle::random_tree(5, 6).num_factors());
  EXPECT_EQ(m.lookup_count(), before);
}

TEST(Model, SharedAcrossThreads) {
  const Model m = oracle::random_cyclic(9);
  std::vector<std::thread> ts;
  for (int t = 0; t < 4; ++t) {
    ts.emplace_back([&m] {
      for (int i = 0; i < 1000; ++i) (void)m.factors_of(0);
    });
  }
  for (auto& t : ts) t.join();
  EXPECT_EQ(m.lookup_count(), 4000u);
}
