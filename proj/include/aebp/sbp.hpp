#pragma once

// Belief propagation with separator conditioning: exact message passing on
// any model. Each message splits its remaining factors into disjoint cells,
// one per incoming sub-message; variables shared between cells (the
// separator) are kept in the sub-messages and summed out once the cells
// are recombined.

#include <aebp/bp.hpp>
#include <aebp/factor.hpp>
#include <aebp/model.hpp>

#include <algorithm>
#include <deque>
#include <vector>

namespace aebp {

namespace detail {

class SeparatorMessages {
 public:
  SeparatorMessages(const Model& m, MessageLog* log) : m_(m), log_(log) {}

  /// Σ over Var(region) ∖ ({t} ∪ keep) of the product of `region`, where
  /// every factor of `region` containing t is a separate cell root.
  Factor variable_message(VarId t, const std::vector<FactorId>& region, const VarSet& keep) {
    std::vector<FactorId> roots;
    for (FactorId f : region) {
      if (m_.factor(f).has(t)) roots.push_back(f);
    }
    if (roots.empty()) return Factor::ones({m_.variable(t)});

    std::map<FactorId, std::size_t> label;
    std::deque<FactorId> queue;
    for (std::size_t j = 0; j < roots.size(); ++j) {
      label.emplace(roots[j], j);
      queue.push_back(roots[j]);
    }
    grow(queue, label, region, t);
    auto cells = collect(label, roots.size());

    std::vector<VarSet> cell_vars;
    for (const auto& c : cells) cell_vars.push_back(vars_of(c));
    VarSet sep;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      for (std::size_t j = i + 1; j < cells.size(); ++j) {
        for (VarId u : cell_vars[i]) {
          if (u != t && cell_vars[j].contains(u)) sep.insert(u);
        }
      }
    }

    std::vector<Factor> parts;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      VarSet keep_j;
      for (VarId u : cell_vars[j]) {
        if (u != t && (keep.contains(u) || sep.contains(u))) keep_j.insert(u);
      }
      parts.push_back(factor_message(roots[j], t, cells[j], keep_j));
      if (log_) log_->push_back({true, roots[j], t, parts.back()});
    }
    VarSet drop;
    for (VarId u : sep) {
      if (!keep.contains(u)) drop.insert(u);
    }
    return sum_out(multiply(parts), drop);
  }

  /// Message from `phi` to `t` over `region` (which contains phi and no
  /// other factor on t).
  Factor factor_message(FactorId phi, VarId t, const std::vector<FactorId>& region,
                        const VarSet& keep) {
    const Factor& f = m_.factor(phi);
    std::vector<VarId> args;
    for (const auto& v : f.scope()) {
      if (v.id != t) args.push_back(v.id);
    }
    std::vector<FactorId> rest;
    for (FactorId g : region) {
      if (g != phi) rest.push_back(g);
    }

    std::map<FactorId, std::size_t> label;
    std::deque<FactorId> queue;
    for (std::size_t j = 0; j < args.size(); ++j) {
      for (FactorId g : m_.neighbors(args[j])) {
        if (in(rest, g) && label.emplace(g, j).second) queue.push_back(g);
      }
    }
    grow(queue, label, rest, t);
    auto cells = collect(label, args.size());

    std::vector<VarSet> cell_vars;
    for (const auto& c : cells) cell_vars.push_back(vars_of(c));

    std::vector<Factor> parts{f};
    for (std::size_t j = 0; j < args.size(); ++j) {
      VarSet keep_j;
      for (VarId u : cell_vars[j]) {
        if (u == args[j]) continue;
        bool outside = f.has(u) || keep.contains(u);
        for (std::size_t i = 0; i < cells.size() && !outside; ++i) {
          outside = i != j && cell_vars[i].contains(u);
        }
        if (outside) keep_j.insert(u);
      }
      parts.push_back(variable_message(args[j], cells[j], keep_j));
      if (log_) log_->push_back({false, phi, args[j], parts.back()});
    }
    Factor prod = multiply(parts);
    VarSet drop;
    for (const auto& v : prod.scope()) {
      if (v.id != t && !keep.contains(v.id)) drop.insert(v.id);
    }
    return sum_out(prod, drop);
  }

 private:
  static bool in(const std::vector<FactorId>& sorted, FactorId f) {
    return std::binary_search(sorted.begin(), sorted.end(), f);
  }

  // Multi-source BFS over factors sharing a variable (never through `t`);
  // sources queued in label order, so ties go to the lower label.
  void grow(std::deque<FactorId>& queue, std::map<FactorId, std::size_t>& label,
            const std::vector<FactorId>& region, VarId t) const {
    while (!queue.empty()) {
      FactorId g = queue.front();
      queue.pop_front();
      const std::size_t j = label.at(g);
      for (const auto& u : m_.factor(g).scope()) {
        if (u.id == t) continue;
        for (FactorId h : m_.neighbors(u.id)) {
          if (in(region, h) && label.emplace(h, j).second) queue.push_back(h);
        }
      }
    }
  }

  static std::vector<std::vector<FactorId>> collect(const std::map<FactorId, std::size_t>& label,
                                                    std::size_t n) {
    std::vector<std::vector<FactorId>> cells(n);
    for (const auto& [g, j] : label) cells[j].push_back(g);
    return cells;
  }

  VarSet vars_of(const std::vector<FactorId>& fs) const {
    VarSet out;
    for (FactorId g : fs) {
      for (const auto& v : m_.factor(g).scope()) out.insert(v.id);
    }
    return out;
  }

  const Model& m_;
  MessageLog* log_;
};

}  // namespace detail

/// Unnormalized separator-conditioned message at `query` over its component.
inline Factor separator_conditioned_message(const Model& model, VarId query,
                                            MessageLog* log = nullptr) {
  (void)model.variable(query);
  detail::SeparatorMessages sm(model, log);
  return sm.variable_message(query, component_factors(model, query), {});
}

/// P(query | evidence) by separator-conditioned BP; exact on any model.
inline Factor separator_conditioned_marginal(const Model& model, VarId query,
                                             const Assignment& evidence = {}) {
  const Model cond = condition(model, evidence);
  if (auto it = evidence.find(query); it != evidence.end())
    return detail::indicator(cond.variable(query), it->second);
  return normalize(separator_conditioned_message(cond, query));
}

}  // namespace aebp
