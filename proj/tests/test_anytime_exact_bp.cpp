#include <aebp/anytime_exact_bp.hpp>

#include <gtest/gtest.h>

#include "support.hpp"
#include "trace_checks.hpp"

using namespace aebp;

namespace {

Model unary_model() {
  const Variable a{0, 2};
  return Model({a}, {Factor({a}, {1, 3})});
}

Component leaf_with_width(const Variable& v, double w) {
  Component c;
  c.target = v.id;
  c.initialized = true;
  c.bound = Bound(v.id, {Factor({v}, {0.5, 0.5}), Factor({v}, {0.5 - w, 0.5 + w})});
  return c;
}

void check_disjoint(const Component& c) {
  for (std::size_t i = 0; i < c.children.size(); ++i) {
    for (FactorId f : c.children[i].factors) {
      EXPECT_FALSE(c.external.contains(f));
      EXPECT_FALSE(c.children[i].external.contains(f));
      for (std::size_t j = 0; j < c.children.size(); ++j) {
        if (j != i) {
          EXPECT_FALSE(c.children[j].factors.contains(f));
        }
      }
    }
    check_disjoint(c.children[i]);
  }
}

Model shape_model(ModelKind k) {
  GeneratorSpec s;
  s.kind = k;
  s.seed = 1;
  return generate(s);
}

}  // namespace

TEST(CreateRoot, Fresh) {
  const Model m = oracle::random_tree(1);
  const Component a = create_root(m, 0), b = create_root(m, 0);
  EXPECT_EQ(a.target, 0u);
  EXPECT_TRUE(a.factors.empty());
  EXPECT_TRUE(a.children.empty());
  EXPECT_FALSE(a.bound.has_value());
  EXPECT_THROW(create_root(m, 99), UnknownVariableError);
  Component c = a;
  update(c, m);
  EXPECT_FALSE(b.initialized);
}

TEST(Update, UnaryModelConvergesInTwoUpdates) {
  const Model m = unary_model();
  Component root = create_root(m, 0);
  update(root, m);
  EXPECT_FALSE(root.converged);
  EXPECT_EQ(width(*root.bound), 1.0);
  update(root, m);
  ASSERT_TRUE(root.converged);
  ASSERT_EQ(root.bound->size(), 1u);
  EXPECT_NEAR(root.bound->extremes().front()[1], 0.75, 1e-15);

  const auto t = export_trace(root, m);
  EXPECT_EQ(t["children"].size(), 1u);
  EXPECT_TRUE(t["children"][0]["children"].empty());
  EXPECT_EQ(t["children"][0]["label"], "phi0");
}

TEST(ChooseChild, Policies) {
  const Variable v{0, 2};
  Component c;
  for (int i = 0; i < 3; ++i) c.children.push_back(leaf_with_width(v, 0.1));
  std::vector<std::size_t> picks;
  for (int i = 0; i < 4; ++i) picks.push_back(choose_non_converged_child(c, ChildPolicy::RoundRobin));
  EXPECT_EQ(picks, (std::vector<std::size_t>{0, 1, 2, 0}));

  c.children[1].converged = true;
  EXPECT_EQ(choose_non_converged_child(c, ChildPolicy::RoundRobin), 2u);
  EXPECT_EQ(choose_non_converged_child(c, ChildPolicy::RoundRobin), 0u);
  EXPECT_EQ(choose_non_converged_child(c, ChildPolicy::DepthFirst), 0u);

  Component w;
  w.children = {leaf_with_width(v, 0.1), leaf_with_width(v, 0.45)};
  EXPECT_EQ(choose_non_converged_child(w, ChildPolicy::WidestFirst), 1u);

  Component single;
  single.children = {leaf_with_width(v, 0.1)};
  EXPECT_EQ(choose_non_converged_child(single, ChildPolicy::RoundRobin), 0u);
  single.children[0].converged = true;
  EXPECT_THROW(choose_non_converged_child(single, ChildPolicy::RoundRobin), AllConvergedError);
}

TEST(Run, TreesMatchTreeBP) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Model m = oracle::random_tree(seed);
    const AebpRun run = run_aebp(m, 0);
    ASSERT_TRUE(run.converged);
    EXPECT_LT(oracle::max_diff(*run.marginal, tree_bp_marginal(m, 0)), 1e-9);
  }
}

TEST(Run, CyclicModelsAreSoundAndExact) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Model m = oracle::random_cyclic(seed);
    const VarId q = seed % m.num_variables();
    const auto exact = oracle::brute_marginal(m, q);
    for (ChildPolicy pol : {ChildPolicy::RoundRobin, ChildPolicy::WidestFirst, ChildPolicy::DepthFirst}) {
      const AebpRun run = run_aebp(m, q, {.update = {.policy = pol}});
      ASSERT_TRUE(run.converged) << "seed " << seed;
      EXPECT_LT(oracle::max_diff(*run.marginal, exact), 1e-8);
      EXPECT_EQ(run.records.front().width, 1.0);
      double prev = 1.0;
      for (const auto& r : run.records) {
        EXPECT_LE(r.width, prev + 1e-12);
        prev = r.width;
        for (std::size_t i = 0; i < exact.size(); ++i) {
          EXPECT_GE(exact[i], r.lower[i] - 1e-9) << "seed " << seed << " step " << r.step;
          EXPECT_LE(exact[i], r.upper[i] + 1e-9) << "seed " << seed << " step " << r.step;
        }
      }
      EXPECT_LE(run.records.back().width, 1e-8);
    }
  }
}

TEST(Run, StepBudget) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Model m = oracle::random_cyclic(seed);
    const AebpRun run = run_aebp(m, 0);
    const std::size_t nodes = m.num_variables() + m.num_factors();
    const std::size_t cut = run.records.back().cutset.size();
    EXPECT_LE(run.records.size() - 1, 2 * nodes * (1 + cut)) << "seed " << seed;
  }
}

TEST(Update, SiblingFactorSetsStayDisjoint) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Model m = oracle::random_cyclic(seed);
    Component root = create_root(m, 0);
    while (!root.converged) {
      update(root, m);
      check_disjoint(root);
    }
    const auto comp = component_factors(m, 0);
    EXPECT_EQ(root.factors, FactorSet(comp.begin(), comp.end()));
  }
}

TEST(Update, StopCriteria) {
  const Model m = oracle::random_cyclic(4);
  EXPECT_EQ(run_aebp(m, 0, {.max_steps = 3}).records.size(), 4u);
  const AebpRun w = run_aebp(m, 0, {.stop_width = 0.3});
  EXPECT_LE(w.records.back().width, 0.3);
}

TEST(Update, EvidenceFreeDisconnectedPartsIgnored) {
  const Model base = oracle::random_cyclic(6, 6);
  const Model big = embed(base, 200, 6);
  const AebpRun a = run_aebp(base, 0), b = run_aebp(big, 0);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].lookup_count, b.records[i].lookup_count);
    EXPECT_EQ(a.records[i].lower, b.records[i].lower);
  }
}

TEST(Trace, RootMatchesLastRecord) {
  const Model m = oracle::random_tree(12);
  AnytimeExactBP engine(m, 0);
  StreamRecord r = engine.step();
  r = engine.step();
  r = engine.step();
  const auto t = engine.trace();
  if (!engine.root().opaque && r.width < 1.0) {
    for (std::size_t i = 0; i < r.lower.size(); ++i) {
      EXPECT_GE(t["intervals"][i][0].get<double>(), r.lower[i] - 1e-12);
    }
  }
  EXPECT_EQ(t.dump(), engine.trace().dump());
  EXPECT_EQ(t["id"], 0);
  EXPECT_EQ(t["kind"], "variable");
}

TEST(Trace, Fig3CutsetLifecycle) {
  const Model m = shape_model(ModelKind::Fig3);
  AnytimeExactBP engine(m, 0);
  bool detected = false;
  while (!engine.converged()) {
    engine.step();
    const auto t = engine.trace();
    EXPECT_TRUE(oracle::summed_only_at_root(t, 3));
    detected = detected || oracle::detected_anywhere(t, 3);
  }
  EXPECT_TRUE(detected);
  EXPECT_TRUE(oracle::has_id(engine.trace()["summed_out"], 3));
  EXPECT_LT(oracle::max_diff(engine.marginal(), oracle::brute_marginal(m, 0)), 1e-9);
}

TEST(Trace, Fig4EarlyElimination) {
  const Model m = shape_model(ModelKind::Fig4);
  AnytimeExactBP engine(m, 0);
  while (!engine.converged()) {
    engine.step();
    EXPECT_TRUE(oracle::scope_confined(engine.trace(), 5, 3));
  }
  const auto t = engine.trace();
  EXPECT_TRUE(oracle::has_id(t["summed_out"], 2));
  EXPECT_TRUE(oracle::has_id(t["summed_out"], 4));
  EXPECT_FALSE(oracle::has_id(t["summed_out"], 5));
  EXPECT_LT(oracle::max_diff(engine.marginal(), oracle::brute_marginal(m, 0)), 1e-9);
}
