#pragma once

#include <aebp/errors.hpp>
#include <aebp/factor.hpp>

#include <atomic>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace aebp {

/// A set of factors over registered variables, with a variable -> factors
/// hash index so a variable's neighbors are found without scanning the
/// model. Immutable after construction except for the lookup counter.
class Model {
 public:
  Model() = default;

  Model(std::vector<Variable> variables, std::vector<Factor> factors)
      : variables_(std::move(variables)), factors_(std::move(factors)) {
    std::sort(variables_.begin(), variables_.end(),
              [](const Variable& a, const Variable& b) { return a.id < b.id; });
    position_.reserve(variables_.size());
    for (std::size_t i = 0; i < variables_.size(); ++i) {
      const auto& v = variables_[i];
      if (v.cardinality < 2)
        throw ScopeError("variable " + std::to_string(v.id) + " has cardinality < 2");
      if (!position_.emplace(v.id, i).second)
        throw ScopeError("duplicate variable id " + std::to_string(v.id));
    }
    index_.reserve(variables_.size());
    for (FactorId f = 0; f < factors_.size(); ++f) {
      for (const auto& v : factors_[f].scope()) {
        if (variable(v.id).cardinality != v.cardinality)
          throw ScopeError("factor " + std::to_string(f) + " disagrees on cardinality of variable " +
                           std::to_string(v.id));
        index_[v.id].push_back(f);  // factor ids ascend, so each list stays sorted
      }
    }
  }

  Model(const Model& other)
      : variables_(other.variables_),
        factors_(other.factors_),
        position_(other.position_),
        index_(other.index_) {}

  Model& operator=(const Model& other) {
    if (this != &other) {
      variables_ = other.variables_;
      factors_ = other.factors_;
      position_ = other.position_;
      index_ = other.index_;
      lookups_.store(0, std::memory_order_relaxed);
    }
    return *this;
  }

  Model(Model&& other) noexcept
      : variables_(std::move(other.variables_)),
        factors_(std::move(other.factors_)),
        position_(std::move(other.position_)),
        index_(std::move(other.index_)) {}

  Model& operator=(Model&& other) noexcept {
    variables_ = std::move(other.variables_);
    factors_ = std::move(other.factors_);
    position_ = std::move(other.position_);
    index_ = std::move(other.index_);
    lookups_.store(0, std::memory_order_relaxed);
    return *this;
  }

  /// Sorted by id.
  const std::vector<Variable>& variables() const noexcept { return variables_; }
  const std::vector<Factor>& factors() const noexcept { return factors_; }
  std::size_t num_variables() const noexcept { return variables_.size(); }
  std::size_t num_factors() const noexcept { return factors_.size(); }

  bool has_variable(VarId v) const { return position_.contains(v); }

  const Variable& variable(VarId v) const {
    auto it = position_.find(v);
    if (it == position_.end()) throw UnknownVariableError("unknown variable " + std::to_string(v));
    return variables_[it->second];
  }

  const Factor& factor(FactorId f) const { return factors_.at(f); }

  /// Factors whose scope contains `v`, ascending by id. One hash lookup;
  /// every call is counted.
  const std::vector<FactorId>& factors_of(VarId v) const {
    if (!position_.contains(v)) throw UnknownVariableError("unknown variable " + std::to_string(v));
    lookups_.fetch_add(1, std::memory_order_relaxed);
    auto it = index_.find(v);
    return it == index_.end() ? empty_ : it->second;
  }

  /// Same as factors_of but not counted; for baselines and oracles.
  const std::vector<FactorId>& neighbors(VarId v) const {
    auto it = index_.find(v);
    return it == index_.end() ? empty_ : it->second;
  }

  std::uint64_t lookup_count() const noexcept { return lookups_.load(std::memory_order_relaxed); }
  void reset_lookup_count() const noexcept { lookups_.store(0, std::memory_order_relaxed); }

 private:
  std::vector<Variable> variables_;
  std::vector<Factor> factors_;
  std::unordered_map<VarId, std::size_t> position_;
  std::unordered_map<VarId, std::vector<FactorId>> index_;
  inline static const std::vector<FactorId> empty_{};
  mutable std::atomic<std::uint64_t> lookups_{0};
};

/// Absorbs `evidence` into every factor. Factor ids are preserved; factors
/// fully covered by the evidence become 0-ary constants.
inline Model condition(const Model& m, const Assignment& evidence) {
  for (const auto& [v, value] : evidence) {
    if (value >= m.variable(v).cardinality)
      throw ScopeError("evidence value " + std::to_string(value) + " out of range for variable " +
                       std::to_string(v));
  }
  if (evidence.empty()) return m;
  std::vector<Factor> fs;
  fs.reserve(m.num_factors());
  for (const auto& f : m.factors()) fs.push_back(absorb(f, evidence));
  return Model(m.variables(), std::move(fs));
}

/// Factor ids of the connected component (in the factor graph) containing
/// `v`. Uses direct index access so the lookup counter is untouched.
inline std::vector<FactorId> component_factors(const Model& m, VarId v,
                                               const VarSet& blocked = {}) {
  std::vector<char> seen_f(m.num_factors(), 0);
  std::set<VarId> seen_v{v};
  std::vector<VarId> stack{v};
  std::vector<FactorId> out;
  while (!stack.empty()) {
    VarId x = stack.back();
    stack.pop_back();
    for (FactorId f : m.neighbors(x)) {
      if (seen_f[f]) continue;
      seen_f[f] = 1;
      out.push_back(f);
      for (const auto& y : m.factor(f).scope()) {
        if (!blocked.contains(y.id) && seen_v.insert(y.id).second) stack.push_back(y.id);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace aebp
