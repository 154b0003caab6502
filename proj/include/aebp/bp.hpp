#pragma once

// Sum-product message passing: exact tree BP, loopy BP, and cycle-cutset
// conditioning on top of tree BP.

#include <aebp/errors.hpp>
#include <aebp/exact.hpp>
#include <aebp/factor.hpp>
#include <aebp/model.hpp>

#include <map>
#include <numeric>
#include <optional>
#include <vector>

namespace aebp {

/// A message recorded while passing; `to_variable` distinguishes
/// factor->variable from variable->factor messages.
struct LoggedMessage {
  bool to_variable = true;
  FactorId factor = 0;
  VarId variable = 0;
  Factor table;

  friend bool operator==(const LoggedMessage&, const LoggedMessage&) = default;
};
using MessageLog = std::vector<LoggedMessage>;

/// m_{V<-phi}: phi times the incoming messages of its other variables, with
/// those variables summed out. Extra (conditioning) variables carried by the
/// incoming messages stay in the result.
inline Factor message_factor_to_variable(const Model& model, FactorId phi, VarId target,
                                         const std::map<VarId, Factor>& incoming) {
  const Factor& f = model.factor(phi);
  if (!f.has(target)) throw ScopeError("variable " + std::to_string(target) + " not in factor scope");
  std::vector<Factor> parts{f};
  VarSet others;
  for (const auto& v : f.scope()) {
    if (v.id == target) continue;
    auto it = incoming.find(v.id);
    if (it == incoming.end())
      throw ScopeError("missing incoming message from variable " + std::to_string(v.id));
    parts.push_back(it->second);
    others.insert(v.id);
  }
  return sum_out(multiply(parts), others);
}

/// m_{phi<-V}: product of the messages from V's other factors; all-ones for a
/// leaf variable.
inline Factor message_variable_to_factor(const Model& model, VarId var, FactorId phi,
                                         const std::map<FactorId, Factor>& incoming) {
  std::vector<Factor> parts;
  for (FactorId g : model.neighbors(var)) {
    if (g == phi) continue;
    auto it = incoming.find(g);
    if (it == incoming.end())
      throw ScopeError("missing incoming message from factor " + std::to_string(g));
    parts.push_back(it->second);
  }
  if (parts.empty()) return Factor::ones({model.variable(var)});
  return multiply(parts);
}

namespace detail {

/// Recursive tree BP over one connected component; throws on cycles.
class TreeMessages {
 public:
  TreeMessages(const Model& m, MessageLog* log)
      : m_(m), log_(log), seen_f_(m.num_factors(), 0) {}

  /// Unnormalized product of all factors in `root`'s component, summed onto root.
  Factor at_root(VarId root) {
    if (!seen_v_.insert(root).second)
      throw CyclicModelError("variable " + std::to_string(root) + " reached twice");
    std::map<FactorId, Factor> in;
    for (FactorId g : m_.neighbors(root)) in.emplace(g, to_variable(g, root));
    std::vector<Factor> parts;
    for (auto& [g, msg] : in) parts.push_back(std::move(msg));
    if (parts.empty()) return Factor::ones({m_.variable(root)});
    return multiply(parts);
  }

  bool visited(VarId v) const { return seen_v_.contains(v); }

 private:
  Factor to_variable(FactorId phi, VarId target) {
    if (seen_f_[phi]) throw CyclicModelError("factor " + std::to_string(phi) + " reached twice");
    seen_f_[phi] = 1;
    std::map<VarId, Factor> in;
    for (const auto& v : m_.factor(phi).scope()) {
      if (v.id != target) in.emplace(v.id, to_factor(v.id, phi));
    }
    Factor msg = message_factor_to_variable(m_, phi, target, in);
    if (log_) log_->push_back({true, phi, target, msg});
    return msg;
  }

  Factor to_factor(VarId var, FactorId parent) {
    if (!seen_v_.insert(var).second)
      throw CyclicModelError("variable " + std::to_string(var) + " reached twice");
    std::map<FactorId, Factor> in;
    for (FactorId g : m_.neighbors(var)) {
      if (g != parent) in.emplace(g, to_variable(g, var));
    }
    Factor msg = message_variable_to_factor(m_, var, parent, in);
    if (log_) log_->push_back({false, parent, var, msg});
    return msg;
  }

  const Model& m_;
  MessageLog* log_;
  std::vector<char> seen_f_;
  VarSet seen_v_;
};

}  // namespace detail

/// Unnormalized tree-BP message at `query` (Σ over the rest of its component
/// of the factor product). Parts of the model not connected to `query` are
/// ignored.
inline Factor tree_bp_message(const Model& model, VarId query, MessageLog* log = nullptr) {
  (void)model.variable(query);
  detail::TreeMessages tm(model, log);
  return tm.at_root(query);
}

/// P(query | evidence) by tree BP. Throws CyclicModelError if a cycle is
/// reachable from the query once evidence is absorbed.
inline Factor tree_bp_marginal(const Model& model, VarId query, const Assignment& evidence = {}) {
  const Model cond = condition(model, evidence);
  if (auto it = evidence.find(query); it != evidence.end())
    return detail::indicator(cond.variable(query), it->second);
  return normalize(tree_bp_message(cond, query));
}

/// Unnormalized P(query, everything else summed) over the whole model:
/// the query's component message times every other component's partition
/// function and every 0-ary constant. The whole model must be acyclic.
inline Factor tree_bp_joint_weight(const Model& model, VarId query) {
  detail::TreeMessages tm(model, nullptr);
  Factor out = tm.at_root(query);
  double scale = 1.0;
  for (const auto& v : model.variables()) {
    if (tm.visited(v.id) || model.neighbors(v.id).empty()) continue;
    scale *= tm.at_root(v.id).total();
  }
  for (const auto& f : model.factors()) {
    if (f.scope().empty()) scale *= f[0];
  }
  if (scale == 1.0) return out;
  std::vector<double> t = out.table();
  for (double& x : t) x *= scale;
  return Factor(out.scope(), std::move(t));
}

/// True when the factor graph (ignoring `removed` variables) has a cycle.
inline bool has_cycle(const Model& model, const VarSet& removed = {}) {
  // Union-find over variable nodes followed by factor nodes.
  std::map<VarId, std::size_t> vnode;
  for (const auto& v : model.variables()) vnode.emplace(v.id, vnode.size());
  const std::size_t nv = vnode.size();
  std::vector<std::size_t> parent(nv + model.num_factors());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (FactorId f = 0; f < model.num_factors(); ++f) {
    for (const auto& v : model.factor(f).scope()) {
      if (removed.contains(v.id)) continue;
      std::size_t a = find(nv + f), b = find(vnode.at(v.id));
      if (a == b) return true;
      parent[a] = b;
    }
  }
  return false;
}

/// Greedy cycle cutset: peel the factor graph to its 2-core, then remove the
/// core variable of highest core degree (lowest id on ties); repeat until no
/// cycle remains.
inline VarSet find_cycle_cutset(const Model& model) {
  std::map<VarId, std::size_t> vdeg;
  std::vector<std::size_t> fdeg(model.num_factors(), 0);
  for (const auto& v : model.variables()) vdeg[v.id] = model.neighbors(v.id).size();
  for (FactorId f = 0; f < model.num_factors(); ++f) fdeg[f] = model.factor(f).scope().size();
  VarSet gone_v;
  std::vector<char> gone_f(model.num_factors(), 0);

  auto drop_var = [&](VarId v) {
    gone_v.insert(v);
    for (FactorId f : model.neighbors(v)) {
      if (!gone_f[f]) --fdeg[f];
    }
  };
  auto drop_factor = [&](FactorId f) {
    gone_f[f] = 1;
    for (const auto& v : model.factor(f).scope()) {
      if (!gone_v.contains(v.id)) --vdeg[v.id];
    }
  };

  VarSet cutset;
  for (;;) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [v, d] : vdeg) {
        if (!gone_v.contains(v) && d <= 1) {
          drop_var(v);
          changed = true;
        }
      }
      for (FactorId f = 0; f < model.num_factors(); ++f) {
        if (!gone_f[f] && fdeg[f] <= 1) {
          drop_factor(f);
          changed = true;
        }
      }
    }
    std::optional<VarId> best;
    for (const auto& [v, d] : vdeg) {
      if (gone_v.contains(v)) continue;
      if (!best || d > vdeg[*best]) best = v;
    }
    if (!best) break;
    cutset.insert(*best);
    drop_var(*best);
  }
  return cutset;
}

/// P(query | evidence) as Σ_c of tree-BP results on the model with the
/// cutset fixed to c. The cutset is discovered when not supplied.
inline Factor cutset_conditioning_marginal(const Model& model, VarId query,
                                           const Assignment& evidence = {},
                                           const std::optional<VarSet>& cutset = {}) {
  const Model cond = condition(model, evidence);
  const Variable& q = cond.variable(query);
  if (auto it = evidence.find(query); it != evidence.end()) return detail::indicator(q, it->second);

  VarSet cut = cutset ? *cutset : find_cycle_cutset(cond);
  for (auto it = cut.begin(); it != cut.end();) {
    (void)cond.variable(*it);
    it = evidence.contains(*it) ? cut.erase(it) : std::next(it);
  }
  if (has_cycle(cond, cut)) throw CyclicModelError("cutset does not break every cycle");

  const auto cscope = detail::scope_of(cond, cut);
  std::vector<double> acc(q.cardinality, 0.0);
  detail::Odometer it(cscope, {});
  do {
    Assignment c;
    for (std::size_t i = 0; i < cscope.size(); ++i) c[cscope[i].id] = it.digit(i);
    const Model mc = condition(cond, c);
    Factor w = tree_bp_joint_weight(mc, query);
    if (auto qc = c.find(query); qc != c.end()) {
      // The query itself is conditioned: all of w's mass sits on its value.
      acc[qc->second] += w.total() / static_cast<double>(q.cardinality);
    } else {
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w[i];
    }
  } while (it.next());
  return normalize(Factor({q}, std::move(acc)));
}

struct BPSchedule {
  std::size_t max_iterations = 1000;
  double convergence_tolerance = 1e-13;
  double damping = 0.0;
};

struct LoopyResult {
  std::map<VarId, Factor> beliefs;
  bool converged = false;
  std::size_t iterations = 0;
};

/// Synchronous flooding loopy BP from uniform messages. On trees the beliefs
/// are the exact marginals; otherwise nothing is guaranteed, including
/// convergence (reported through the flag).
inline LoopyResult loopy_bp_beliefs(const Model& model, const BPSchedule& schedule = {},
                                    const Assignment& evidence = {}) {
  if (schedule.max_iterations < 1) throw SpecError("max_iterations must be >= 1");
  if (!(schedule.convergence_tolerance > 0.0)) throw SpecError("convergence_tolerance must be > 0");
  if (!(schedule.damping >= 0.0 && schedule.damping < 1.0)) throw SpecError("damping must be in [0,1)");
  const Model cond = condition(model, evidence);

  auto uniform = [&](VarId v) {
    const std::size_t k = cond.variable(v).cardinality;
    return Factor({cond.variable(v)}, std::vector<double>(k, 1.0 / static_cast<double>(k)));
  };
  auto safe_normalize = [&](const Factor& f, VarId v) {
    return f.total() > 0.0 ? normalize(f) : uniform(v);
  };

  // Edge (factor, variable) -> message, both directions.
  std::map<std::pair<FactorId, VarId>, Factor> to_var, to_fac;
  for (FactorId f = 0; f < cond.num_factors(); ++f) {
    for (const auto& v : cond.factor(f).scope()) {
      to_var.emplace(std::pair{f, v.id}, uniform(v.id));
      to_fac.emplace(std::pair{f, v.id}, uniform(v.id));
    }
  }

  LoopyResult res;
  for (std::size_t iter = 0; iter < schedule.max_iterations; ++iter) {
    auto next_fac = to_fac;
    auto next_var = to_var;
    for (auto& [edge, msg] : next_fac) {
      const auto [f, v] = edge;
      std::map<FactorId, Factor> in;
      for (FactorId g : cond.neighbors(v)) {
        if (g != f) in.emplace(g, to_var.at({g, v}));
      }
      msg = safe_normalize(message_variable_to_factor(cond, v, f, in), v);
    }
    for (auto& [edge, msg] : next_var) {
      const auto [f, v] = edge;
      std::map<VarId, Factor> in;
      for (const auto& u : cond.factor(f).scope()) {
        if (u.id != v) in.emplace(u.id, to_fac.at({f, u.id}));
      }
      msg = safe_normalize(message_factor_to_variable(cond, f, v, in), v);
    }
    double change = 0.0;
    auto settle = [&](auto& next, const auto& prev) {
      for (auto& [edge, msg] : next) {
        const Factor& old = prev.at(edge);
        std::vector<double> t = msg.table();
        for (std::size_t i = 0; i < t.size(); ++i) {
          t[i] = (1.0 - schedule.damping) * t[i] + schedule.damping * old[i];
          change = std::max(change, std::abs(t[i] - old[i]));
        }
        msg = Factor(msg.scope(), std::move(t));
      }
    };
    settle(next_fac, to_fac);
    settle(next_var, to_var);
    to_fac = std::move(next_fac);
    to_var = std::move(next_var);
    res.iterations = iter + 1;
    if (change < schedule.convergence_tolerance) {
      res.converged = true;
      break;
    }
  }

  for (const auto& v : cond.variables()) {
    if (auto it = evidence.find(v.id); it != evidence.end()) {
      res.beliefs.emplace(v.id, detail::indicator(v, it->second));
      continue;
    }
    std::vector<Factor> parts;
    for (FactorId g : cond.neighbors(v.id)) parts.push_back(to_var.at({g, v.id}));
    res.beliefs.emplace(v.id, parts.empty() ? uniform(v.id) : safe_normalize(multiply(parts), v.id));
  }
  return res;
}

}  // namespace aebp
