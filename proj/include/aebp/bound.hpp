#pragma once

// Bounds on messages: convex sets of non-negative tables, stored as the
// tables at their extreme points. Scale is irrelevant (messages are only
// defined up to a constant), so two extremes that differ by a positive
// factor are the same point.

#include <aebp/errors.hpp>
#include <aebp/factor.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace aebp {

inline constexpr std::size_t kDefaultExtremeCap = 4096;
/// Upper limit on extreme combinations a single operation will enumerate.
inline constexpr std::uint64_t kMaxCombinations = std::uint64_t{1} << 24;
inline constexpr double kPruneTolerance = 1e-12;
inline constexpr double kContainsSlack = 1e-9;

class Bound {
 public:
  /// All extremes must share one scope containing `target`.
  Bound(VarId target, std::vector<Factor> extremes)
      : target_(target), extremes_(std::move(extremes)) {
    if (extremes_.empty()) throw ScopeError("a bound needs at least one extreme");
    for (const auto& e : extremes_) {
      if (e.scope() != extremes_.front().scope()) throw ScopeError("bound extremes disagree on scope");
    }
    if (!extremes_.front().has(target_))
      throw ScopeError("bound target " + std::to_string(target_) + " not in scope");
  }

  VarId target() const noexcept { return target_; }
  /// Canonical (ascending id) scope; tables are laid out over it.
  const std::vector<Variable>& scope() const noexcept { return extremes_.front().scope(); }
  const std::vector<Factor>& extremes() const noexcept { return extremes_; }
  std::size_t size() const noexcept { return extremes_.size(); }

  /// Target first, then the conditioning (cutset) variables.
  std::vector<VarId> ordered_scope() const {
    std::vector<VarId> out{target_};
    for (const auto& v : scope()) {
      if (v.id != target_) out.push_back(v.id);
    }
    return out;
  }

  /// Conditioning variables: the scope without the target.
  VarSet cutset() const {
    VarSet out;
    for (const auto& v : scope()) {
      if (v.id != target_) out.insert(v.id);
    }
    return out;
  }

  const Variable& target_variable() const {
    for (const auto& v : scope()) {
      if (v.id == target_) return v;
    }
    throw ScopeError("bound target missing");  // unreachable: checked on construction
  }

  friend bool operator==(const Bound&, const Bound&) = default;

 private:
  VarId target_ = 0;
  std::vector<Factor> extremes_;
};

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
};

namespace detail {

inline std::vector<double> normalized(const std::vector<double>& t, double total) {
  std::vector<double> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = t[i] / total;
  return out;
}

inline bool lex_less(const Factor& a, const Factor& b) {
  return std::lexicographical_compare(a.table().begin(), a.table().end(), b.table().begin(),
                                      b.table().end());
}

/// Vertices of the 2-D convex hull of `pts`, collinear points dropped.
inline std::vector<std::size_t> hull_2d(const std::vector<std::pair<double, double>>& pts) {
  std::vector<std::size_t> idx(pts.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return pts[a] < pts[b]; });
  if (idx.size() <= 2) {
    if (idx.size() == 2 && std::abs(pts[idx[0]].first - pts[idx[1]].first) <= kPruneTolerance &&
        std::abs(pts[idx[0]].second - pts[idx[1]].second) <= kPruneTolerance)
      idx.pop_back();
    return idx;
  }
  auto cross = [&](std::size_t o, std::size_t a, std::size_t b) {
    return (pts[a].first - pts[o].first) * (pts[b].second - pts[o].second) -
           (pts[a].second - pts[o].second) * (pts[b].first - pts[o].first);
  };
  std::vector<std::size_t> h(2 * idx.size());
  std::size_t k = 0;
  for (std::size_t i : idx) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], i) <= 0.0) --k;
    h[k++] = i;
  }
  for (std::size_t n = idx.size() - 1, lo = k + 1; n-- > 0;) {
    std::size_t i = idx[n];
    while (k >= lo && cross(h[k - 2], h[k - 1], i) <= 0.0) --k;
    h[k++] = i;
  }
  h.resize(k > 1 ? k - 1 : k);
  return h;
}

/// Streams candidate extremes and keeps only those that can be extreme
/// points of the normalized hull: exact for a single variable of
/// cardinality 2 (interval) or 3 (planar hull); duplicate removal otherwise.
class ExtremeCollector {
 public:
  /// With `normalize_output`, surviving extremes are emitted scaled to total 1.
  ExtremeCollector(std::vector<Variable> scope, std::size_t cap, bool normalize_output = false)
      : scope_(std::move(scope)), cap_(cap), normalize_output_(normalize_output) {
    if (scope_.size() == 1 && scope_[0].cardinality == 2) mode_ = Mode::Interval;
    if (scope_.size() == 1 && scope_[0].cardinality == 3) mode_ = Mode::Plane;
  }

  void add(std::vector<double> table) {
    double total = 0.0;
    for (double x : table) total += x;
    if (!(total > 0.0)) return;
    std::vector<double> n = normalized(table, total);
    if (mode_ == Mode::Interval) {
      if (normalize_output_) table = n;
      if (!lo_ || n[1] < lo_->second[1]) lo_.emplace(table, n);
      if (!hi_ || n[1] > hi_->second[1]) hi_.emplace(std::move(table), std::move(n));
      return;
    }
    std::vector<std::int64_t> key(n.size());
    for (std::size_t i = 0; i < n.size(); ++i)
      key[i] = std::llround(n[i] / kPruneTolerance);
    if (!seen_.emplace(std::move(key), tables_.size()).second) return;
    tables_.push_back(normalize_output_ ? n : std::move(table));
    normals_.push_back(std::move(n));
    if (mode_ == Mode::Plane && tables_.size() > 2 * cap_) compact();
    if (mode_ == Mode::General && tables_.size() > cap_)
      throw ExtremeCapError("bound exceeds " + std::to_string(cap_) + " extremes");
  }

  /// Surviving extremes, sorted lexicographically; throws ZeroMassError if
  /// every candidate was all-zero.
  std::vector<Factor> finish() {
    std::vector<Factor> out;
    if (mode_ == Mode::Interval) {
      if (lo_) {
        out.emplace_back(scope_, lo_->first);
        if (hi_->second[1] - lo_->second[1] > kPruneTolerance) out.emplace_back(scope_, hi_->first);
      }
    } else {
      if (mode_ == Mode::Plane) compact();
      for (auto& t : tables_) out.emplace_back(scope_, std::move(t));
    }
    if (out.empty()) throw ZeroMassError("every extreme of the bound is all-zero");
    if (out.size() > cap_) throw ExtremeCapError("bound exceeds " + std::to_string(cap_) + " extremes");
    std::sort(out.begin(), out.end(), lex_less);
    return out;
  }

 private:
  enum class Mode { Interval, Plane, General };

  void compact() {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(normals_.size());
    for (const auto& n : normals_) pts.emplace_back(n[1], n[2]);
    auto keep = hull_2d(pts);
    std::sort(keep.begin(), keep.end());
    std::vector<std::vector<double>> t2, n2;
    for (std::size_t i : keep) {
      t2.push_back(std::move(tables_[i]));
      n2.push_back(std::move(normals_[i]));
    }
    tables_ = std::move(t2);
    normals_ = std::move(n2);
    seen_.clear();
    for (std::size_t i = 0; i < normals_.size(); ++i) {
      std::vector<std::int64_t> key(normals_[i].size());
      for (std::size_t k = 0; k < key.size(); ++k)
        key[k] = std::llround(normals_[i][k] / kPruneTolerance);
      seen_.emplace(std::move(key), i);
    }
  }

  std::vector<Variable> scope_;
  std::size_t cap_;
  bool normalize_output_;
  Mode mode_ = Mode::General;
  std::optional<std::pair<std::vector<double>, std::vector<double>>> lo_, hi_;
  std::map<std::vector<std::int64_t>, std::size_t> seen_;
  std::vector<std::vector<double>> tables_;
  std::vector<std::vector<double>> normals_;
};

inline std::uint64_t combinations(std::span<const Bound> bs) {
  std::uint64_t n = 1;
  for (const auto& b : bs) {
    n *= b.size();
    if (n > kMaxCombinations)
      throw ExtremeCapError("bound operation would enumerate more than " +
                            std::to_string(kMaxCombinations) + " extreme combinations");
  }
  return n;
}

}  // namespace detail

inline Bound normalize_bound(const Bound& b);

/// The vacuous bound: every distribution over `v`.
inline Bound simplex(const Variable& v) {
  std::vector<Factor> ext;
  for (std::size_t i = v.cardinality; i-- > 0;) {
    std::vector<double> t(v.cardinality, 0.0);
    t[i] = 1.0;
    ext.emplace_back(std::vector<Variable>{v}, std::move(t));
  }
  return Bound(v.id, std::move(ext));
}

/// A bound holding exactly one message.
inline Bound point_bound(VarId target, Factor f) { return Bound(target, {std::move(f)}); }

/// Drops all-zero extremes and extremes that cannot be vertices of the
/// normalized hull (see ExtremeCollector).
inline Bound prune(const Bound& b, std::size_t cap = kDefaultExtremeCap) {
  detail::ExtremeCollector c(b.scope(), cap);
  for (const auto& e : b.extremes()) c.add(e.table());
  return Bound(b.target(), c.finish());
}

/// Products of one extreme from each input, over all combinations, pruned.
/// With `normalized`, the surviving extremes are scaled to total 1.
inline Bound bound_product(std::span<const Bound> bs, std::size_t cap = kDefaultExtremeCap,
                           bool normalized = false) {
  if (bs.empty()) throw ScopeError("bound_product needs at least one bound");
  if (bs.size() == 1) return normalized ? normalize_bound(prune(bs.front(), cap)) : prune(bs.front(), cap);
  Bound acc = bs.front();
  for (std::size_t i = 1; i < bs.size(); ++i) {
    const Bound& next = bs[i];
    const Bound pair[] = {acc, next};
    detail::combinations(pair);
    const auto scope = detail::scope_union(acc.scope(), next.scope());
    const std::size_t n = detail::table_size(scope);
    std::vector<std::size_t> plan(2 * n);
    {
      detail::Odometer it(scope, {detail::strides_in(acc.scope(), scope),
                                  detail::strides_in(next.scope(), scope)});
      std::size_t row = 0;
      do {
        plan[2 * row] = it.offset(0);
        plan[2 * row + 1] = it.offset(1);
        ++row;
      } while (it.next());
    }
    detail::ExtremeCollector c(scope, cap, normalized && i + 1 == bs.size());
    for (const auto& a : acc.extremes()) {
      for (const auto& e : next.extremes()) {
        std::vector<double> out(n);
        for (std::size_t r = 0; r < n; ++r) out[r] = a[plan[2 * r]] * e[plan[2 * r + 1]];
        c.add(std::move(out));
      }
    }
    acc = Bound(acc.target(), c.finish());
  }
  return acc;
}

/// For every combination of input extremes: multiply `phi` with them and
/// sum out `sum_vars`; the results are pruned. The target defaults to the
/// lowest remaining variable.
inline Bound bound_sum_product(const Factor& phi, std::span<const Bound> bs, const VarSet& sum_vars,
                               std::optional<VarId> target = {},
                               std::size_t cap = kDefaultExtremeCap, bool normalized = false) {
  std::vector<Variable> full = phi.scope();
  for (const auto& b : bs) full = detail::scope_union(full, b.scope());
  std::vector<Variable> kept;
  for (VarId v : sum_vars) {
    if (std::none_of(full.begin(), full.end(), [v](const Variable& x) { return x.id == v; }))
      throw ScopeError("cannot sum out variable " + std::to_string(v) + ": not in any scope");
  }
  for (const auto& v : full) {
    if (!sum_vars.contains(v.id)) kept.push_back(v);
  }
  if (kept.empty()) throw ScopeError("bound_sum_product would sum out every variable");
  const VarId tgt = target.value_or(kept.front().id);
  if (std::none_of(kept.begin(), kept.end(), [tgt](const Variable& x) { return x.id == tgt; }))
    throw ScopeError("target " + std::to_string(tgt) + " is summed out or absent");

  detail::combinations(bs);

  // Offsets of every full assignment into phi, each input, and the output.
  const std::size_t n_full = detail::table_size(full);
  const std::size_t k = bs.size();
  std::vector<std::vector<std::size_t>> strides;
  strides.push_back(detail::strides_in(phi.scope(), full));
  for (const auto& b : bs) strides.push_back(detail::strides_in(b.scope(), full));
  strides.push_back(detail::strides_in(kept, full));
  std::vector<std::size_t> plan(n_full * (k + 2));
  {
    detail::Odometer it(full, strides);
    std::size_t row = 0;
    do {
      for (std::size_t j = 0; j < k + 2; ++j) plan[row * (k + 2) + j] = it.offset(j);
      ++row;
    } while (it.next());
  }

  detail::ExtremeCollector c(kept, cap, normalized);
  const std::size_t n_out = detail::table_size(kept);
  std::vector<std::size_t> pick(k, 0);
  std::vector<const std::vector<double>*> tabs(k);
  for (;;) {
    for (std::size_t j = 0; j < k; ++j) tabs[j] = &bs[j].extremes()[pick[j]].table();
    std::vector<double> out(n_out, 0.0);
    for (std::size_t row = 0; row < n_full; ++row) {
      const std::size_t* o = &plan[row * (k + 2)];
      double p = 1.0;
      p *= phi[o[0]];
      for (std::size_t j = 0; j < k; ++j) p *= (*tabs[j])[o[j + 1]];
      out[o[k + 1]] += p;
    }
    c.add(std::move(out));
    std::size_t j = k;
    while (j-- > 0) {
      if (++pick[j] < bs[j].size()) break;
      pick[j] = 0;
    }
    if (j == static_cast<std::size_t>(-1)) break;
  }
  return Bound(tgt, c.finish());
}

/// Every extreme scaled to total 1, all-zero extremes dropped first.
inline Bound normalize_bound(const Bound& b) {
  std::vector<Factor> out;
  for (const auto& e : b.extremes()) {
    if (e.total() > 0.0) out.push_back(normalize(e));
  }
  if (out.empty()) throw ZeroMassError("every extreme of the bound is all-zero");
  std::sort(out.begin(), out.end(), detail::lex_less);
  return Bound(b.target(), std::move(out));
}

/// Largest per-entry spread of the normalized extremes; 0 for a point bound.
inline double width(const Bound& b) {
  const Bound n = normalize_bound(b);
  double w = 0.0;
  for (std::size_t i = 0; i < n.extremes().front().size(); ++i) {
    double lo = n.extremes().front()[i], hi = lo;
    for (const auto& e : n.extremes()) {
      lo = std::min(lo, e[i]);
      hi = std::max(hi, e[i]);
    }
    w = std::max(w, hi - lo);
  }
  return w;
}

/// Per-entry [min, max] over the normalized extremes.
inline std::vector<Interval> entry_intervals(const Bound& b) {
  const Bound n = normalize_bound(b);
  std::vector<Interval> out(n.extremes().front().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = {n.extremes().front()[i], n.extremes().front()[i]};
    for (const auto& e : n.extremes()) {
      out[i].lower = std::min(out[i].lower, e[i]);
      out[i].upper = std::max(out[i].upper, e[i]);
    }
  }
  return out;
}

/// True when normalized `m` lies in the per-entry box of the normalized
/// extremes (slack 1e-9). Exact for a single binary variable; otherwise a
/// FALSE is definitive and a TRUE only says the box contains m.
inline bool contains(const Bound& b, const Factor& m) {
  if (m.scope() != b.scope()) throw ScopeError("contains: scope mismatch");
  const Factor nm = normalize(m);
  const auto box = entry_intervals(b);
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (nm[i] < box[i].lower - kContainsSlack || nm[i] > box[i].upper + kContainsSlack) return false;
  }
  return true;
}

/// Sums the conditioning variables out of every extreme, leaving a bound on
/// the target alone.
inline Bound marginalize_cutset(const Bound& b, std::size_t cap = kDefaultExtremeCap) {
  const VarSet cut = b.cutset();
  if (cut.empty()) return b;
  std::vector<Factor> ext;
  ext.reserve(b.size());
  for (const auto& e : b.extremes()) ext.push_back(sum_out(e, cut));
  return prune(Bound(b.target(), std::move(ext)), cap);
}

/// Per-value probability intervals for the target (cutset summed out).
inline std::vector<Interval> target_intervals(const Bound& b) {
  return entry_intervals(marginalize_cutset(b));
}

}  // namespace aebp
