#pragma once

// Anytime bound propagation over the computation tree unrolled from the
// query. Unexpanded variables contribute the simplex; each step expands one
// of them and recomputes bounds on the path to the root. Loops are not
// detected: on a cyclic model the tree is unrolled up to a depth limit and
// the bounds are on the loopy belief rather than the marginal.

#include <aebp/bound.hpp>
#include <aebp/model.hpp>
#include <aebp/stream.hpp>

#include <chrono>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <vector>

namespace aebp {

enum class ExpansionPolicy { BreadthFirst, WidestFirst };

struct AnytimeBPOptions {
  ExpansionPolicy policy = ExpansionPolicy::BreadthFirst;
  std::optional<std::size_t> max_steps;
  std::optional<double> stop_width;
  std::size_t depth_limit = 20;
  std::size_t cap = kDefaultExtremeCap;
};

struct AnytimeBPRun {
  std::vector<StreamRecord> records;
  Bound final_bound;
  /// No expandable node left (always reached on acyclic models).
  bool complete = false;
};

/// True when the factor graph component containing `v` has a cycle.
inline bool component_has_cycle(const Model& m, VarId v) {
  const auto fs = component_factors(m, v);
  std::set<VarId> vars{v};
  std::size_t edges = 0;
  for (FactorId f : fs) {
    edges += m.factor(f).scope().size();
    for (const auto& x : m.factor(f).scope()) vars.insert(x.id);
  }
  return edges + 1 != vars.size() + fs.size();
}

class ExpansionTree {
 public:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  struct Node {
    bool is_variable = true;
    VarId var = 0;  // the node itself, or the variable a factor node messages
    FactorId factor = 0;
    std::size_t parent = kNone;
    std::vector<std::size_t> children;
    std::size_t depth = 0;
    bool expanded = false;
    std::size_t open = 0;  // expandable frontier nodes in this subtree
    std::optional<Bound> bound;
  };

  ExpansionTree(const Model& m, VarId query, std::size_t depth_limit, std::size_t cap)
      : m_(m), depth_limit_(depth_limit), cap_(cap) {
    add_variable(query, kNone, 0);
  }

  const Node& node(std::size_t i) const { return nodes_.at(i); }
  std::size_t size() const noexcept { return nodes_.size(); }
  const Bound& root_bound() const { return *nodes_.front().bound; }
  bool complete() const noexcept { return nodes_.front().open == 0; }
  std::size_t factors_seen() const noexcept { return seen_.size(); }

  /// Expands the next frontier variable; false when none is left.
  bool expand(ExpansionPolicy policy) {
    if (complete()) return false;
    const std::size_t i = policy == ExpansionPolicy::BreadthFirst ? next_fifo() : next_widest();
    expand_at(i);
    return true;
  }

 private:
  std::size_t add_variable(VarId v, std::size_t parent, std::size_t depth) {
    Node n;
    n.var = v;
    n.parent = parent;
    n.depth = depth;
    n.bound = simplex(m_.variable(v));
    const bool expandable = depth < depth_limit_;
    n.open = expandable ? 1 : 0;
    nodes_.push_back(std::move(n));
    const std::size_t i = nodes_.size() - 1;
    if (parent != kNone) nodes_[parent].children.push_back(i);
    if (expandable) fifo_.push_back(i);
    return i;
  }

  std::size_t next_fifo() {
    while (nodes_[fifo_.front()].expanded) fifo_.pop_front();
    const std::size_t i = fifo_.front();
    fifo_.pop_front();
    return i;
  }

  std::size_t next_widest() const {
    std::size_t i = 0;
    while (nodes_[i].expanded) {
      std::size_t best = kNone;
      double best_w = -1.0;
      for (std::size_t c : nodes_[i].children) {
        if (nodes_[c].open == 0) continue;
        const double w = width(*nodes_[c].bound);
        if (w > best_w) {
          best = c;
          best_w = w;
        }
      }
      i = best;
    }
    return i;
  }

  void expand_at(std::size_t i) {
    nodes_[i].expanded = true;
    const std::size_t before = nodes_[i].open;
    const VarId v = nodes_[i].var;
    const std::size_t up = nodes_[i].parent;
    const FactorId from = up == kNone ? kNoFactor : nodes_[up].factor;
    for (FactorId f : m_.factors_of(v)) {
      if (f == from) continue;
      seen_.insert(f);
      Node fn;
      fn.is_variable = false;
      fn.var = v;
      fn.factor = f;
      fn.parent = i;
      fn.depth = nodes_[i].depth;
      fn.expanded = true;
      nodes_.push_back(std::move(fn));
      const std::size_t fi = nodes_.size() - 1;
      nodes_[i].children.push_back(fi);
      for (const auto& a : m_.factor(f).scope()) {
        if (a.id != v) add_variable(a.id, fi, nodes_[i].depth + 1);
      }
      for (std::size_t c : nodes_[fi].children) nodes_[fi].open += nodes_[c].open;
      recompute(fi);
    }
    std::size_t open = 0;
    for (std::size_t c : nodes_[i].children) open += nodes_[c].open;
    nodes_[i].open = open;
    recompute(i);
    for (std::size_t a = nodes_[i].parent; a != kNone; a = nodes_[a].parent) {
      nodes_[a].open = nodes_[a].open - before + open;
      recompute(a);
    }
  }

  void recompute(std::size_t i) {
    Node& n = nodes_[i];
    std::vector<Bound> in;
    for (std::size_t c : n.children) in.push_back(*nodes_[c].bound);
    if (n.is_variable) {
      if (in.empty()) {
        n.bound = point_bound(n.var, Factor::ones({m_.variable(n.var)}));
        return;
      }
      n.bound = bound_product(in, cap_, true);
      return;
    }
    const Factor& f = m_.factor(n.factor);
    VarSet args;
    for (const auto& a : f.scope()) {
      if (a.id != n.var) args.insert(a.id);
    }
    n.bound = bound_sum_product(f, in, args, n.var, cap_, true);
  }

  static constexpr FactorId kNoFactor = std::numeric_limits<FactorId>::max();

  const Model& m_;
  std::size_t depth_limit_;
  std::size_t cap_;
  std::vector<Node> nodes_;
  std::deque<std::size_t> fifo_;
  std::set<FactorId> seen_;
};

/// Streams the root bound after every expansion (step 0: the simplex).
/// `sink`, when given, sees each record as it is produced.
inline AnytimeBPRun anytime_bp_run(const Model& model, VarId query, const AnytimeBPOptions& opts = {},
                                   const std::function<void(const StreamRecord&)>& sink = {}) {
  (void)model.variable(query);
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t lookups0 = model.lookup_count();
  const std::string label = component_has_cycle(model, query) ? "belief bound" : "marginal bound";
  ExpansionTree tree(model, query, opts.depth_limit, opts.cap);
  AnytimeBPRun run{{}, tree.root_bound(), false};

  auto emit = [&](std::size_t step) {
    StreamRecord r;
    r.step = step;
    r.method = "anytime-bp";
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fill_intervals(r, target_intervals(tree.root_bound()));
    r.factors_processed = tree.factors_seen();
    r.lookup_count = model.lookup_count() - lookups0;
    r.label = label;
    if (sink) sink(r);
    run.records.push_back(std::move(r));
  };

  emit(0);
  for (std::size_t step = 1;; ++step) {
    if (opts.max_steps && step > *opts.max_steps) break;
    if (opts.stop_width && run.records.back().width <= *opts.stop_width) break;
    if (!tree.expand(opts.policy)) break;
    emit(step);
  }
  run.final_bound = tree.root_bound();
  run.complete = tree.complete();
  return run;
}

}  // namespace aebp
