#pragma once

// Anytime exact belief propagation. The query is the root of a tree of
// components; each component computes a bound on one message while being
// told which factors other components have already taken (its external
// factors). A variable of the component that also occurs in an external
// factor is a cutset variable: it stays in the bound's scope and is summed
// out at the first component up the tree where no external factor has it.
//
// Unexplored parts of the model are covered by frontier bounds: the simplex
// over the frontier's target together with every variable its unexplored
// region shares with factors already taken. This keeps every reported bound
// hard even before a loop has been closed.

#include <aebp/bound.hpp>
#include <aebp/errors.hpp>
#include <aebp/model.hpp>
#include <aebp/stream.hpp>

#include <json.hpp>

#include <chrono>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace aebp {

using FactorSet = std::set<FactorId>;

enum class NodeKind { Variable, Factor };

enum class ChildPolicy {
  RoundRobin,
  WidestFirst,
  /// Always the first non-converged child: finishes one branch before the next.
  DepthFirst,
};

struct Component {
  VarId target = 0;
  NodeKind kind = NodeKind::Variable;
  FactorId factor = 0;  // meaningful for factor nodes
  /// Unset before the first update, or when too large to represent.
  std::optional<Bound> bound;
  bool opaque = false;
  FactorSet factors;
  FactorSet external;
  std::vector<Component> children;
  bool initialized = false;
  bool converged = false;
  std::size_t cursor = 0;
  VarSet detected;    // cutset variables first kept at this node
  VarSet summed_out;  // cutset variables eliminated at this node
  VarSet eliminated;  // everything summed out by the last recomputation
  bool stale = true;
};

struct UpdateOptions {
  ChildPolicy policy = ChildPolicy::RoundRobin;
  /// Largest frontier simplex (in table entries) built before the frontier,
  /// and everything above it, is treated as vacuous.
  std::size_t frontier_limit = 256;
  /// Most extreme combinations one bound recomputation may enumerate before
  /// the component is treated as vacuous for the current step.
  std::uint64_t combination_limit = std::uint64_t{1} << 14;
  std::size_t cap = kDefaultExtremeCap;
};

/// A variable component for `query` with no external factors.
inline Component create_root(const Model& model, VarId query) {
  (void)model.variable(query);
  Component c;
  c.target = query;
  return c;
}

namespace detail {

inline double child_width(const Component& c) {
  if (c.opaque || !c.bound) return std::numeric_limits<double>::infinity();
  return width(*c.bound);
}

}  // namespace detail

/// Index of the next child to advance.
inline std::size_t choose_non_converged_child(Component& c, ChildPolicy policy) {
  const std::size_t n = c.children.size();
  std::size_t pick = n;
  switch (policy) {
    case ChildPolicy::RoundRobin:
      for (std::size_t k = 0; k < n && pick == n; ++k) {
        const std::size_t i = (c.cursor + k) % n;
        if (!c.children[i].converged) pick = i;
      }
      if (pick != n) c.cursor = pick + 1;
      break;
    case ChildPolicy::WidestFirst: {
      double best = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (c.children[i].converged) continue;
        const double w = detail::child_width(c.children[i]);
        if (w > best) {
          best = w;
          pick = i;
        }
      }
      break;
    }
    case ChildPolicy::DepthFirst:
      for (std::size_t i = 0; i < n && pick == n; ++i) {
        if (!c.children[i].converged) pick = i;
      }
      break;
  }
  if (pick == n) throw AllConvergedError("every child component has converged");
  return pick;
}

namespace detail {

class ComponentUpdater {
 public:
  ComponentUpdater(const Model& m, const UpdateOptions& opts) : m_(m), opts_(opts) {}

  void update(Component& root) {
    if (root.converged) throw AllConvergedError("component has already converged");
    advance(root);
    refresh(root);
  }

 private:
  void initialize(Component& c) {
    c.initialized = true;
    if (c.kind == NodeKind::Variable) {
      for (FactorId f : m_.factors_of(c.target)) {
        if (c.external.contains(f)) continue;
        c.factors.insert(f);
        Component& child = c.children.emplace_back();
        child.target = c.target;
        child.kind = NodeKind::Factor;
        child.factor = f;
        child.factors = {f};
      }
    } else {
      for (const auto& a : m_.factor(c.factor).scope()) {
        if (a.id == c.target) continue;
        c.children.emplace_back().target = a.id;
      }
    }
    if (c.children.empty()) {
      c.converged = true;
      const Factor exact = c.kind == NodeKind::Variable ? Factor::ones({m_.variable(c.target)})
                                                        : m_.factor(c.factor);
      c.bound = normalize_bound(point_bound(c.target, exact));
    } else {
      c.bound = simplex(m_.variable(c.target));
    }
  }

  // External set of child i: everything external to the parent, the
  // parent's own factor, and the factors of the siblings.
  static FactorSet external_of(const Component& c, std::size_t i) {
    FactorSet ext = c.external;
    if (c.kind == NodeKind::Factor) ext.insert(c.factor);
    for (std::size_t j = 0; j < c.children.size(); ++j) {
      if (j != i) ext.insert(c.children[j].factors.begin(), c.children[j].factors.end());
    }
    return ext;
  }

  void advance(Component& c) {
    if (!c.initialized) {
      initialize(c);
      return;
    }
    const std::size_t i = choose_non_converged_child(c, opts_.policy);
    Component& child = c.children[i];
    child.external = external_of(c, i);
    advance(child);
    c.factors.insert(child.factors.begin(), child.factors.end());
  }

  void refresh(Component& root) {
    claimed_ = root.factors;
    claimed_.insert(root.external.begin(), root.external.end());
    uses_.clear();
    for (FactorId f : claimed_) {
      for (const auto& v : m_.factor(f).scope()) ++uses_[v.id];
    }
    visited_vars_.clear();
    assigned_.clear();
    recompute(root);
  }

  // Bound for a component that has not been expanded yet.
  bool frontier_bound(Component& c) {
    std::vector<VarId> seeds;
    if (c.kind == NodeKind::Variable) {
      seeds.push_back(c.target);
    } else {
      for (const auto& v : m_.factor(c.factor).scope()) seeds.push_back(v.id);
    }
    VarSet reach(seeds.begin(), seeds.end());
    std::vector<VarId> stack;
    for (VarId s : seeds) {
      if (visited_vars_.insert(s).second) stack.push_back(s);
    }
    while (!stack.empty()) {
      const VarId x = stack.back();
      stack.pop_back();
      for (FactorId g : m_.factors_of(x)) {
        if (claimed_.contains(g) || !assigned_.insert(g).second) continue;
        for (const auto& y : m_.factor(g).scope()) {
          reach.insert(y.id);
          if (visited_vars_.insert(y.id).second) stack.push_back(y.id);
        }
      }
    }
    std::vector<Variable> scope;
    std::size_t entries = 1;
    for (VarId y : reach) {
      std::size_t uses = uses_.contains(y) ? uses_.at(y) : 0;
      if (c.kind == NodeKind::Factor && m_.factor(c.factor).has(y)) --uses;
      if (y != c.target && uses == 0) continue;
      scope.push_back(m_.variable(y));
      entries *= scope.back().cardinality;
      if (entries > opts_.frontier_limit) return set_opaque(c);
    }
    std::vector<Factor> ext;
    for (std::size_t k = entries; k-- > 0;) {
      std::vector<double> t(entries, 0.0);
      t[k] = 1.0;
      ext.emplace_back(scope, std::move(t));
    }
    Bound next(c.target, std::move(ext));
    const bool differs = c.opaque || !c.bound || *c.bound != next;
    c.opaque = false;
    c.bound = std::move(next);
    return differs;
  }

  static bool set_opaque(Component& c) {
    const bool changed = !c.opaque;
    c.opaque = true;
    c.bound.reset();
    c.converged = false;
    return changed;
  }

  // Brings c's bound up to date; true when it changed.
  bool recompute(Component& c) {
    if (c.converged) return std::exchange(c.stale, false);
    if (!c.initialized) return frontier_bound(c);
    bool changed = c.stale;
    bool opaque = false;
    bool converged = true;
    for (std::size_t i = 0; i < c.children.size(); ++i) {
      Component& child = c.children[i];
      if (child.initialized && !child.converged) child.external = external_of(c, i);
      changed = recompute(child) || changed;
      opaque = opaque || child.opaque;
      converged = converged && child.converged;
    }
    if (opaque) {
      c.stale = false;
      c.detected.clear();
      c.summed_out.clear();
      return set_opaque(c);
    }

    VarSet sum;
    if (c.kind == NodeKind::Factor) {
      const Factor& f = m_.factor(c.factor);
      VarSet ext_vars;
      for (FactorId g : c.external) {
        for (const auto& v : m_.factor(g).scope()) ext_vars.insert(v.id);
      }
      VarSet all = f.vars();
      for (const auto& child : c.children) {
        for (const auto& v : child.bound->scope()) all.insert(v.id);
      }
      for (VarId v : all) {
        if (v != c.target && !ext_vars.contains(v)) sum.insert(v);
      }
      c.detected.clear();
      for (const auto& v : f.scope()) {
        if (v.id != c.target && ext_vars.contains(v.id)) c.detected.insert(v.id);
      }
    }
    if (!changed && sum == c.eliminated) {
      c.converged = converged;
      return false;
    }
    c.stale = false;
    c.eliminated = sum;

    c.summed_out.clear();
    std::vector<Bound> in;
    std::uint64_t combos = 1;
    for (const auto& child : c.children) {
      in.push_back(*child.bound);
      for (VarId v : child.bound->cutset()) {
        if (sum.contains(v)) c.summed_out.insert(v);
      }
      combos = std::min<std::uint64_t>(combos * child.bound->size(), opts_.combination_limit + 1);
    }
    if (combos > opts_.combination_limit) return set_opaque(c);

    std::optional<Bound> next;
    try {
      next = c.kind == NodeKind::Variable
                 ? bound_product(in, opts_.cap, true)
                 : bound_sum_product(m_.factor(c.factor), in, sum, c.target, opts_.cap, true);
    } catch (const ExtremeCapError&) {
      return set_opaque(c);
    }
    const bool differs = c.opaque || !c.bound || *c.bound != *next;
    c.opaque = false;
    c.bound = std::move(next);
    c.converged = converged;
    return differs;
  }

  const Model& m_;
  UpdateOptions opts_;
  FactorSet claimed_;
  std::map<VarId, std::size_t> uses_;
  VarSet visited_vars_;
  FactorSet assigned_;
};

}  // namespace detail

/// Advances `c` once (initializing it, or one child chosen by the policy)
/// and recomputes every bound in its tree that may have changed.
inline void update(Component& c, const Model& model, const UpdateOptions& opts = {}) {
  detail::ComponentUpdater(model, opts).update(c);
}

/// Cutset variables anywhere in the tree.
inline VarSet detected_cutset(const Component& c) {
  VarSet out = c.detected;
  for (const auto& ch : c.children) {
    const VarSet sub = detected_cutset(ch);
    out.insert(sub.begin(), sub.end());
  }
  return out;
}

/// Factor components that have been expanded (their factor read).
inline std::size_t factors_processed(const Component& c) {
  std::size_t n = c.kind == NodeKind::Factor && c.initialized ? 1 : 0;
  for (const auto& ch : c.children) n += factors_processed(ch);
  return n;
}

inline void processed_factor_ids(const Component& c, FactorSet& out) {
  if (c.kind == NodeKind::Factor && c.initialized) out.insert(c.factor);
  for (const auto& ch : c.children) processed_factor_ids(ch, out);
}

/// Per-value intervals of the query: live cutset variables summed out;
/// vacuous while the bound is unset or too large to represent.
inline std::vector<Interval> reported_intervals(const Component& root, const Model& model) {
  if (root.opaque || !root.bound)
    return std::vector<Interval>(model.variable(root.target).cardinality, Interval{0.0, 1.0});
  return target_intervals(*root.bound);
}

inline nlohmann::ordered_json export_trace(const Component& root, const Model& model);

struct AebpOptions {
  UpdateOptions update;
  std::optional<double> stop_width;
  std::optional<std::size_t> max_steps;
};

struct AebpRun {
  std::vector<StreamRecord> records;
  /// Exact marginal when the run converged.
  std::optional<Factor> marginal;
  bool converged = false;
};

/// Owns a root component and the reporting state of one run.
class AnytimeExactBP {
 public:
  AnytimeExactBP(const Model& model, VarId query, UpdateOptions opts = {})
      : m_(model),
        opts_(opts),
        root_(create_root(model, query)),
        t0_(std::chrono::steady_clock::now()),
        lookups0_(model.lookup_count()) {
    const std::size_t card = model.variable(query).cardinality;
    lower_.assign(card, 0.0);
    upper_.assign(card, 1.0);
  }

  const Component& root() const noexcept { return root_; }
  bool converged() const noexcept { return root_.converged; }
  std::size_t steps() const noexcept { return steps_; }

  /// One update of the root followed by its record.
  StreamRecord step() {
    update(root_, m_, opts_);
    ++steps_;
    return record();
  }

  /// Record for the current state. The reported intervals are intersected
  /// with every earlier report, each of which is itself a hard bound.
  StreamRecord record() {
    const auto iv = reported_intervals(root_, m_);
    for (std::size_t i = 0; i < iv.size(); ++i) {
      lower_[i] = std::max(lower_[i], iv[i].lower);
      upper_[i] = std::min(upper_[i], iv[i].upper);
      if (root_.converged) lower_[i] = upper_[i] = 0.5 * (iv[i].lower + iv[i].upper);
    }
    StreamRecord r;
    r.step = steps_;
    r.method = "aebp";
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    r.lower = lower_;
    r.upper = upper_;
    r.width = interval_width(lower_, upper_);
    r.factors_processed = factors_processed(root_);
    r.lookup_count = m_.lookup_count() - lookups0_;
    const VarSet cut = detected_cutset(root_);
    r.cutset.assign(cut.begin(), cut.end());
    r.label = "marginal bound";
    return r;
  }

  /// The exact marginal; requires convergence.
  Factor marginal() const {
    if (!root_.converged) throw AllConvergedError("run has not converged");
    return normalize(sum_out(root_.bound->extremes().front(), root_.bound->cutset()));
  }

  nlohmann::ordered_json trace() const { return export_trace(root_, m_); }

 private:
  const Model& m_;
  UpdateOptions opts_;
  Component root_;
  std::chrono::steady_clock::time_point t0_;
  std::uint64_t lookups0_;
  std::size_t steps_ = 0;
  std::vector<double> lower_, upper_;
};

/// Updates the root until it converges or a stop criterion holds, emitting
/// a record before the first update and after each one.
inline AebpRun run_aebp(const Model& model, VarId query, const AebpOptions& opts = {},
                        const std::function<void(const StreamRecord&)>& sink = {}) {
  AnytimeExactBP engine(model, query, opts.update);
  AebpRun run;
  auto emit = [&](StreamRecord r) {
    if (sink) sink(r);
    run.records.push_back(std::move(r));
  };
  emit(engine.record());
  while (!engine.converged()) {
    if (opts.max_steps && engine.steps() >= *opts.max_steps) break;
    if (opts.stop_width && run.records.back().width <= *opts.stop_width) break;
    emit(engine.step());
  }
  run.converged = engine.converged();
  if (run.converged) run.marginal = engine.marginal();
  return run;
}

namespace detail {

inline std::string node_label(const Component& c) {
  return c.kind == NodeKind::Variable ? "x" + std::to_string(c.target)
                                      : "phi" + std::to_string(c.factor);
}

inline nlohmann::ordered_json trace_node(const Component& c, const Model& m, std::size_t& next_id,
                                         bool is_root) {
  nlohmann::ordered_json j;
  j["id"] = next_id++;
  j["kind"] = c.kind == NodeKind::Variable ? "variable" : "factor";
  j["label"] = node_label(c);
  j["target"] = c.target;
  if (c.bound && !c.opaque) {
    j["scope"] = c.bound->ordered_scope();
    nlohmann::ordered_json iv = nlohmann::ordered_json::array();
    for (const auto& i : target_intervals(*c.bound)) iv.push_back({i.lower, i.upper});
    j["intervals"] = iv;
  } else {
    j["scope"] = nullptr;
    j["intervals"] = nullptr;
  }
  VarSet summed = c.summed_out;
  if (is_root && c.bound && !c.opaque) {
    const VarSet live = c.bound->cutset();
    summed.insert(live.begin(), live.end());
  }
  j["cutset_detected"] = std::vector<VarId>(c.detected.begin(), c.detected.end());
  j["summed_out"] = std::vector<VarId>(summed.begin(), summed.end());
  j["factors"] = std::vector<FactorId>(c.factors.begin(), c.factors.end());
  j["external_factors"] = std::vector<FactorId>(c.external.begin(), c.external.end());
  j["initialized"] = c.initialized;
  j["converged"] = c.converged;
  nlohmann::ordered_json kids = nlohmann::ordered_json::array();
  for (const auto& ch : c.children) kids.push_back(trace_node(ch, m, next_id, false));
  j["children"] = std::move(kids);
  return j;
}

}  // namespace detail

/// The component tree as a JSON document (preorder ids).
inline nlohmann::ordered_json export_trace(const Component& root, const Model& model) {
  std::size_t next_id = 0;
  return detail::trace_node(root, model, next_id, true);
}

}  // namespace aebp
