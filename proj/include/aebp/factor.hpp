#pragma once

// Discrete variables, dense factor tables and the table algebra every
// inference routine is built from.

#include <aebp/errors.hpp>

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace aebp {

using VarId = std::size_t;
using FactorId = std::size_t;
using VarSet = std::set<VarId>;

struct Variable {
  VarId id = 0;
  std::size_t cardinality = 2;

  friend auto operator<=>(const Variable&, const Variable&) = default;
};

/// Variable id -> value index.
using Assignment = std::map<VarId, std::size_t>;

namespace detail {

inline std::size_t table_size(const std::vector<Variable>& scope) {
  std::size_t n = 1;
  for (const auto& v : scope) n *= v.cardinality;
  return n;
}

/// For each variable of `full`, its row-major stride inside a table over
/// `sub` (0 when the variable is not in `sub`).
inline std::vector<std::size_t> strides_in(const std::vector<Variable>& sub,
                                           const std::vector<Variable>& full) {
  std::vector<std::size_t> own(sub.size());
  std::size_t s = 1;
  for (std::size_t i = sub.size(); i-- > 0;) {
    own[i] = s;
    s *= sub[i].cardinality;
  }
  std::vector<std::size_t> out(full.size(), 0);
  for (std::size_t i = 0; i < full.size(); ++i) {
    for (std::size_t j = 0; j < sub.size(); ++j) {
      if (sub[j].id == full[i].id) {
        out[i] = own[j];
        break;
      }
    }
  }
  return out;
}

/// Walks every assignment of a scope in row-major order while tracking the
/// matching offset into any number of tables laid out over sub-scopes.
class Odometer {
 public:
  Odometer(const std::vector<Variable>& scope,
           std::vector<std::vector<std::size_t>> strides)
      : cards_(scope.size()),
        digits_(scope.size(), 0),
        strides_(std::move(strides)),
        offsets_(strides_.size(), 0) {
    for (std::size_t i = 0; i < scope.size(); ++i) cards_[i] = scope[i].cardinality;
  }

  std::size_t offset(std::size_t k) const { return offsets_[k]; }
  std::size_t digit(std::size_t i) const { return digits_[i]; }

  /// Advances to the next assignment; false once every assignment was seen.
  bool next() {
    for (std::size_t i = cards_.size(); i-- > 0;) {
      ++digits_[i];
      for (std::size_t k = 0; k < strides_.size(); ++k) offsets_[k] += strides_[k][i];
      if (digits_[i] < cards_[i]) return true;
      for (std::size_t k = 0; k < strides_.size(); ++k)
        offsets_[k] -= strides_[k][i] * cards_[i];
      digits_[i] = 0;
    }
    return false;
  }

 private:
  std::vector<std::size_t> cards_;
  std::vector<std::size_t> digits_;
  std::vector<std::vector<std::size_t>> strides_;
  std::vector<std::size_t> offsets_;
};

inline std::vector<Variable> scope_union(const std::vector<Variable>& a,
                                         const std::vector<Variable>& b) {
  std::vector<Variable> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].id < b[j].id)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].id < a[i].id) {
      out.push_back(b[j++]);
    } else {
      if (a[i].cardinality != b[j].cardinality)
        throw ScopeError("variable " + std::to_string(a[i].id) +
                         " used with two cardinalities");
      out.push_back(a[i]);
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace detail

/// Non-negative dense table over a scope kept sorted by ascending variable id.
/// Tables are row-major: the last scope variable varies fastest.
class Factor {
 public:
  /// The 0-ary constant 1.
  Factor() : table_{1.0} {}

  /// `table` is row-major in the order `scope` is given; the scope is then
  /// sorted and the table permuted to match.
  Factor(std::vector<Variable> scope, std::vector<double> table) {
    for (const auto& v : scope) {
      if (v.cardinality < 2)
        throw ScopeError("variable " + std::to_string(v.id) + " has cardinality < 2");
    }
    if (table.size() != detail::table_size(scope))
      throw ScopeError("table has " + std::to_string(table.size()) + " entries, scope needs " +
                       std::to_string(detail::table_size(scope)));
    for (double x : table) {
      if (!(x >= 0.0) || !std::isfinite(x))
        throw ScopeError("factor entries must be finite and non-negative");
    }
    std::vector<Variable> sorted = scope;
    std::sort(sorted.begin(), sorted.end(),
              [](const Variable& a, const Variable& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      if (sorted[i].id == sorted[i - 1].id)
        throw ScopeError("duplicate variable " + std::to_string(sorted[i].id) + " in scope");
    }
    if (sorted == scope) {
      scope_ = std::move(scope);
      table_ = std::move(table);
      return;
    }
    std::vector<double> permuted(table.size());
    detail::Odometer it(sorted, {detail::strides_in(scope, sorted)});
    std::size_t i = 0;
    do {
      permuted[i++] = table[it.offset(0)];
    } while (it.next());
    scope_ = std::move(sorted);
    table_ = std::move(permuted);
  }

  static Factor constant(double value) { return Factor({}, {value}); }

  static Factor ones(std::vector<Variable> scope) {
    std::vector<double> t(detail::table_size(scope), 1.0);
    return Factor(std::move(scope), std::move(t));
  }

  const std::vector<Variable>& scope() const noexcept { return scope_; }
  const std::vector<double>& table() const noexcept { return table_; }
  std::size_t size() const noexcept { return table_.size(); }
  double operator[](std::size_t i) const { return table_[i]; }

  bool has(VarId v) const {
    return std::any_of(scope_.begin(), scope_.end(),
                       [v](const Variable& x) { return x.id == v; });
  }

  VarSet vars() const {
    VarSet out;
    for (const auto& v : scope_) out.insert(v.id);
    return out;
  }

  /// Entry at an assignment covering (at least) the whole scope.
  double value(const Assignment& a) const {
    std::size_t off = 0;
    for (const auto& v : scope_) {
      auto it = a.find(v.id);
      if (it == a.end())
        throw ScopeError("assignment misses variable " + std::to_string(v.id));
      if (it->second >= v.cardinality)
        throw ScopeError("value out of range for variable " + std::to_string(v.id));
      off = off * v.cardinality + it->second;
    }
    return table_[off];
  }

  double total() const { return std::accumulate(table_.begin(), table_.end(), 0.0); }

  friend bool operator==(const Factor&, const Factor&) = default;

 private:
  std::vector<Variable> scope_;
  std::vector<double> table_;
};

/// Pointwise product; scope is the union of input scopes.
inline Factor multiply(std::span<const Factor> fs) {
  if (fs.empty()) throw ScopeError("multiply needs at least one factor");
  if (fs.size() == 1) return fs.front();
  std::vector<Variable> scope = fs.front().scope();
  for (std::size_t i = 1; i < fs.size(); ++i) scope = detail::scope_union(scope, fs[i].scope());
  std::vector<std::vector<std::size_t>> strides;
  strides.reserve(fs.size());
  for (const auto& f : fs) strides.push_back(detail::strides_in(f.scope(), scope));
  std::vector<double> out(detail::table_size(scope));
  detail::Odometer it(scope, std::move(strides));
  std::size_t i = 0;
  do {
    double p = 1.0;
    for (std::size_t k = 0; k < fs.size(); ++k) p *= fs[k][it.offset(k)];
    out[i++] = p;
  } while (it.next());
  return Factor(std::move(scope), std::move(out));
}

inline Factor multiply(const Factor& a, const Factor& b) {
  const Factor both[] = {a, b};
  return multiply(both);
}

/// Sums `vars` out of `f`; every variable of `vars` must be in scope.
inline Factor sum_out(const Factor& f, const VarSet& vars) {
  if (vars.empty()) return f;
  for (VarId v : vars) {
    if (!f.has(v)) throw ScopeError("cannot sum out variable " + std::to_string(v) + ": not in scope");
  }
  std::vector<Variable> kept;
  for (const auto& v : f.scope()) {
    if (!vars.contains(v.id)) kept.push_back(v);
  }
  std::vector<double> out(detail::table_size(kept), 0.0);
  detail::Odometer it(f.scope(), {detail::strides_in(kept, f.scope())});
  std::size_t i = 0;
  do {
    out[it.offset(0)] += f[i++];
  } while (it.next());
  return Factor(std::move(kept), std::move(out));
}

/// Scales `f` to total mass 1.
inline Factor normalize(const Factor& f) {
  const double z = f.total();
  if (!(z > 0.0)) throw ZeroMassError("cannot normalize a table with zero total mass");
  std::vector<double> t = f.table();
  for (double& x : t) x /= z;
  return Factor(f.scope(), std::move(t));
}

/// Fixes the assigned variables of the scope to their values, dropping them.
inline Factor absorb(const Factor& f, const Assignment& a) {
  std::vector<Variable> kept;
  std::size_t base = 0;
  const auto own = detail::strides_in(f.scope(), f.scope());
  for (std::size_t i = 0; i < f.scope().size(); ++i) {
    const auto& v = f.scope()[i];
    auto it = a.find(v.id);
    if (it == a.end()) {
      kept.push_back(v);
      continue;
    }
    if (it->second >= v.cardinality)
      throw ScopeError("value " + std::to_string(it->second) + " out of range for variable " +
                       std::to_string(v.id));
    base += own[i] * it->second;
  }
  if (kept.size() == f.scope().size()) return f;
  std::vector<double> out(detail::table_size(kept));
  detail::Odometer it(kept, {detail::strides_in(f.scope(), kept)});
  std::size_t i = 0;
  do {
    out[i++] = f[base + it.offset(0)];
  } while (it.next());
  return Factor(std::move(kept), std::move(out));
}

}  // namespace aebp
