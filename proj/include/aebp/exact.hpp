#pragma once

// Ground-truth marginals: brute-force joint enumeration and variable
// elimination. Everything else is checked against these.

#include <aebp/errors.hpp>
#include <aebp/factor.hpp>
#include <aebp/model.hpp>

#include <optional>
#include <vector>

namespace aebp {

inline constexpr std::size_t kDefaultEnumerationCap = 20;

namespace detail {

inline std::vector<Variable> scope_of(const Model& m, const VarSet& vars) {
  std::vector<Variable> out;
  out.reserve(vars.size());
  for (VarId v : vars) out.push_back(m.variable(v));
  return out;
}

inline Factor indicator(const Variable& v, std::size_t value) {
  std::vector<double> t(v.cardinality, 0.0);
  t[value] = 1.0;
  return Factor({v}, std::move(t));
}

/// Extends a table over the free query variables to the full query,
/// placing all mass on the observed values of evidence query variables.
inline Factor with_observed_queries(const Model& m, Factor f, const VarSet& query,
                                    const Assignment& evidence) {
  std::vector<Factor> parts{std::move(f)};
  for (VarId q : query) {
    if (auto it = evidence.find(q); it != evidence.end())
      parts.push_back(indicator(m.variable(q), it->second));
  }
  return multiply(parts);
}

inline void check_query(const Model& m, const VarSet& query) {
  if (query.empty()) throw ScopeError("query must name at least one variable");
  for (VarId q : query) (void)m.variable(q);
}

}  // namespace detail

/// P(query | evidence) by summing the full joint over every assignment.
/// Exponential; refuses models with more than `cap` unobserved variables.
inline Factor enumerate_marginal(const Model& model, const VarSet& query,
                                 const Assignment& evidence = {},
                                 std::size_t cap = kDefaultEnumerationCap) {
  detail::check_query(model, query);
  const Model cond = condition(model, evidence);
  std::vector<Variable> free;
  for (const auto& v : cond.variables()) {
    if (!evidence.contains(v.id)) free.push_back(v);
  }
  if (free.size() > cap)
    throw TooLargeError("enumeration over " + std::to_string(free.size()) +
                        " variables exceeds cap " + std::to_string(cap));

  VarSet free_query;
  for (VarId q : query) {
    if (!evidence.contains(q)) free_query.insert(q);
  }
  const auto qscope = detail::scope_of(cond, free_query);

  std::vector<std::vector<std::size_t>> strides;
  strides.push_back(detail::strides_in(qscope, free));
  for (const auto& f : cond.factors()) strides.push_back(detail::strides_in(f.scope(), free));

  std::vector<double> acc(detail::table_size(qscope), 0.0);
  detail::Odometer it(free, std::move(strides));
  do {
    double p = 1.0;
    for (std::size_t k = 0; k < cond.num_factors(); ++k) p *= cond.factor(k)[it.offset(k + 1)];
    acc[it.offset(0)] += p;
  } while (it.next());

  Factor joint(qscope, std::move(acc));
  return normalize(detail::with_observed_queries(cond, std::move(joint), query, evidence));
}

/// Elimination order by repeatedly picking the variable with the fewest
/// neighbors in the current interaction graph (ties: lowest id).
inline std::vector<VarId> min_degree_order(const std::vector<Factor>& factors,
                                           const VarSet& eliminate) {
  std::map<VarId, VarSet> adj;
  for (VarId v : eliminate) adj[v];
  for (const auto& f : factors) {
    for (const auto& a : f.scope()) {
      if (!eliminate.contains(a.id)) continue;
      for (const auto& b : f.scope()) {
        if (a.id != b.id) adj[a.id].insert(b.id);
      }
    }
  }
  std::vector<VarId> order;
  VarSet left = eliminate;
  while (!left.empty()) {
    VarId best = *left.begin();
    for (VarId v : left) {
      if (adj[v].size() < adj[best].size()) best = v;
    }
    order.push_back(best);
    left.erase(best);
    const VarSet nb = adj[best];
    for (VarId a : nb) {
      auto it = adj.find(a);
      if (it == adj.end()) continue;
      it->second.erase(best);
      for (VarId b : nb) {
        if (a != b) it->second.insert(b);
      }
    }
    adj.erase(best);
  }
  return order;
}

/// P(query | evidence) by variable elimination. `order`, when given, must be
/// a permutation of the unobserved non-query variables.
inline Factor variable_elimination_marginal(const Model& model, const VarSet& query,
                                            const Assignment& evidence = {},
                                            const std::optional<std::vector<VarId>>& order = {}) {
  detail::check_query(model, query);
  const Model cond = condition(model, evidence);
  VarSet eliminate;
  for (const auto& v : cond.variables()) {
    if (!evidence.contains(v.id) && !query.contains(v.id)) eliminate.insert(v.id);
  }
  std::vector<Factor> pool = cond.factors();
  std::vector<VarId> seq;
  if (order) {
    seq = *order;
    if (VarSet(seq.begin(), seq.end()) != eliminate || seq.size() != eliminate.size())
      throw ScopeError("elimination order must be a permutation of the non-query, non-evidence variables");
  } else {
    seq = min_degree_order(pool, eliminate);
  }
  for (VarId v : seq) {
    std::vector<Factor> touching, rest;
    for (auto& f : pool) (f.has(v) ? touching : rest).push_back(std::move(f));
    pool = std::move(rest);
    if (touching.empty()) continue;
    pool.push_back(sum_out(multiply(touching), {v}));
  }
  VarSet free_query;
  for (VarId q : query) {
    if (!evidence.contains(q)) free_query.insert(q);
  }
  pool.push_back(Factor::ones(detail::scope_of(cond, free_query)));
  Factor joint = multiply(pool);
  return normalize(detail::with_observed_queries(cond, std::move(joint), query, evidence));
}

}  // namespace aebp
