#include <aebp/factor.hpp>

#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace aebp;

namespace {

const Variable A{0, 2}, B{1, 2}, C{2, 3};

void expect_table(const Factor& f, const std::vector<double>& t, double tol = 1e-12) {
  ASSERT_EQ(f.size(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(f[i], t[i], tol) << "entry " << i;
}

}  // namespace

TEST(Factor, RejectsBadTables) {
  EXPECT_THROW(Factor({A}, {1.0}), ScopeError);
  EXPECT_THROW(Factor({A}, {1.0, -1.0}), ScopeError);
  EXPECT_THROW(Factor({A}, {1.0, NAN}), ScopeError);
  EXPECT_THROW(Factor({A, A}, {1, 2, 3, 4}), ScopeError);
  EXPECT_THROW(Factor({Variable{5, 1}}, {1.0}), ScopeError);
}

TEST(Factor, SortsScopeAndPermutesTable) {
  // given over (B, A): rows B, columns A
  const Factor f({B, A}, {1, 2, 3, 4});
  ASSERT_EQ(f.scope().front().id, A.id);
  expect_table(f, {1, 3, 2, 4});
  EXPECT_EQ(f.value({{0, 1}, {1, 0}}), 2.0);
}

TEST(Multiply, Elementwise) { expect_table(multiply(Factor({A}, {2, 3}), Factor({A}, {5, 7})), {10, 21}); }

TEST(Multiply, ConstantIsIdentity) {
  const Factor f({A, B}, {1, 2, 3, 4});
  EXPECT_EQ(multiply(f, Factor()), f);
  EXPECT_EQ(multiply(f, Factor::constant(1.0)), f);
}

TEST(Multiply, MatchesPerAssignmentProduct) {
  const Factor phi({A}, {0.9, 0.1});
  const Factor psi({A, B}, {0.2, 0.8, 0.6, 0.4});
  const Factor r = multiply(phi, psi);
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) {
      const Assignment x{{0, a}, {1, b}};
      EXPECT_DOUBLE_EQ(r.value(x), phi.value(x) * psi.value(x));
    }
  }
}

TEST(SumOut, Examples) {
  const Factor f({A, B}, {1, 2, 3, 4});
  expect_table(sum_out(f, {1}), {3, 7});
  EXPECT_EQ(sum_out(f, {}), f);
  EXPECT_THROW(sum_out(f, {2}), ScopeError);
}

TEST(SumOut, MatchesEnumeration) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Factor f = oracle::random_factor(rng, {A, B, C});
    const Factor r = sum_out(f, {0, 2});
    for (std::size_t b = 0; b < 2; ++b) {
      double s = 0;
      for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t c = 0; c < 3; ++c) s += f.value({{0, a}, {1, b}, {2, c}});
      }
      EXPECT_NEAR(r[b], s, 1e-12);
    }
  }
}

TEST(Normalize, Examples) {
  expect_table(normalize(Factor({A}, {3, 7})), {0.3, 0.7});
  const Factor p({A}, {0.25, 0.75});
  EXPECT_EQ(normalize(p), p);
  EXPECT_THROW(normalize(Factor({A}, {0, 0})), ZeroMassError);
}

TEST(Absorb, Examples) {
  const Factor f({A, B}, {1, 2, 3, 4});
  expect_table(absorb(f, {{1, 1}}), {2, 4});
  EXPECT_EQ(absorb(f, {{7, 0}}), f);
  const Factor k = absorb(f, {{0, 1}, {1, 0}});
  EXPECT_TRUE(k.scope().empty());
  expect_table(k, {3});
}

TEST(FactorAlgebra, CommutativeAndAssociative) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Factor f = oracle::random_factor(rng, {A, B});
    const Factor g = oracle::random_factor(rng, {B, C});
    const Factor h = oracle::random_factor(rng, {A, C});
    const Factor fg = multiply(f, g), gf = multiply(g, f);
    for (std::size_t i = 0; i < fg.size(); ++i) EXPECT_NEAR(fg[i], gf[i], 1e-12 * fg[i]);
    const Factor l = multiply(multiply(f, g), h), r = multiply(f, multiply(g, h));
    for (std::size_t i = 0; i < l.size(); ++i) EXPECT_NEAR(l[i], r[i], 1e-12 * l[i]);
  }
}

TEST(FactorAlgebra, SumDistributesOverProduct) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const Factor f = oracle::random_factor(rng, {A, B});
    const Factor g = oracle::random_factor(rng, {B, C});
    const Factor l = sum_out(multiply(f, g), {2});
    const Factor r = multiply(f, sum_out(g, {2}));
    for (std::size_t i = 0; i < l.size(); ++i) EXPECT_NEAR(l[i], r[i], 1e-12 * l[i]);
  }
}

TEST(FactorAlgebra, AbsorbCommutesWithSumOut) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const Factor f = oracle::random_factor(rng, {A, B, C});
    const Assignment a{{1, static_cast<std::size_t>(trial % 2)}};
    const Factor l = absorb(sum_out(f, {2}), a);
    const Factor r = sum_out(absorb(f, a), {2});
    for (std::size_t i = 0; i < l.size(); ++i) EXPECT_NEAR(l[i], r[i], 1e-12 * l[i]);
  }
}
