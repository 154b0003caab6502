#pragma once

// UAI MARKOV/BAYES model files and evidence files.

#include <aebp/errors.hpp>
#include <aebp/factor.hpp>
#include <aebp/model.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace aebp {

namespace detail {

class Tokens {
 public:
  explicit Tokens(std::string_view text) : text_(text) {}

  bool done() {
    skip();
    return pos_ >= text_.size();
  }

  std::size_t line() const noexcept { return line_; }

  std::string_view next(const char* what) {
    skip();
    if (pos_ >= text_.size()) throw ParseError(line_, std::string("unexpected end of input, expected ") + what);
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  std::size_t count(const char* what) {
    const auto tok = next(what);
    const std::size_t at = line_;
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
      throw ParseError(at, std::string("expected ") + what + ", got '" + std::string(tok) + "'");
    return v;
  }

  double real(const char* what) {
    const auto tok = next(what);
    const std::size_t at = line_;
    const std::string s(tok);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v))
      throw ParseError(at, std::string("expected ") + what + ", got '" + s + "'");
    return v;
  }

 private:
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

}  // namespace detail

/// Parses a UAI model. Variable ids are the file's indices; tables are read
/// in the file's scope order and reordered to ascending variable id.
inline Model parse_uai(std::string_view text) {
  detail::Tokens tk(text);
  const auto header = tk.next("header");
  if (header != "MARKOV" && header != "BAYES")
    throw ParseError(tk.line(), "bad header '" + std::string(header) + "', expected MARKOV or BAYES");

  const std::size_t nvars = tk.count("variable count");
  std::vector<Variable> vars;
  for (std::size_t i = 0; i < nvars; ++i) {
    const std::size_t card = tk.count("cardinality");
    if (card < 2) throw ParseError(tk.line(), "variable " + std::to_string(i) + " has cardinality < 2");
    vars.push_back({i, card});
  }

  const std::size_t nfactors = tk.count("factor count");
  std::vector<std::vector<Variable>> scopes(nfactors);
  for (auto& scope : scopes) {
    const std::size_t arity = tk.count("scope size");
    for (std::size_t k = 0; k < arity; ++k) {
      const std::size_t v = tk.count("variable index");
      if (v >= nvars)
        throw ParseError(tk.line(), "variable index " + std::to_string(v) + " out of range");
      for (const auto& prev : scope) {
        if (prev.id == v) throw ParseError(tk.line(), "variable " + std::to_string(v) + " repeated in scope");
      }
      scope.push_back(vars[v]);
    }
  }

  std::vector<Factor> factors;
  factors.reserve(nfactors);
  for (std::size_t f = 0; f < nfactors; ++f) {
    const std::size_t n = tk.count("table size");
    const std::size_t expected = detail::table_size(scopes[f]);
    if (n != expected)
      throw ParseError(tk.line(), "factor " + std::to_string(f) + " declares " + std::to_string(n) +
                                      " entries, scope needs " + std::to_string(expected));
    std::vector<double> table(n);
    for (auto& x : table) {
      x = tk.real("table entry");
      if (x < 0.0) throw ParseError(tk.line(), "negative table entry in factor " + std::to_string(f));
    }
    factors.emplace_back(scopes[f], std::move(table));
  }
  if (!tk.done()) throw ParseError(tk.line(), "trailing content after last table");
  return Model(std::move(vars), std::move(factors));
}

namespace detail {

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

/// Canonical text: one scope per line, one table per block, 17 significant
/// digits. Variable ids must be 0..n-1.
inline std::string write_uai(const Model& m) {
  for (std::size_t i = 0; i < m.num_variables(); ++i) {
    if (m.variables()[i].id != i)
      throw ScopeError("UAI output needs variable ids 0..n-1; found " + std::to_string(m.variables()[i].id));
  }
  std::string out = "MARKOV\n" + std::to_string(m.num_variables()) + "\n";
  for (std::size_t i = 0; i < m.num_variables(); ++i) {
    out += (i ? " " : "") + std::to_string(m.variables()[i].cardinality);
  }
  out += "\n" + std::to_string(m.num_factors()) + "\n";
  for (const auto& f : m.factors()) {
    out += std::to_string(f.scope().size());
    for (const auto& v : f.scope()) out += " " + std::to_string(v.id);
    out += "\n";
  }
  for (const auto& f : m.factors()) {
    out += "\n" + std::to_string(f.size()) + "\n";
    for (std::size_t i = 0; i < f.size(); ++i) out += (i ? " " : "") + detail::fmt17(f[i]);
    out += "\n";
  }
  return out;
}

/// Evidence file: a count, then that many variable/value pairs.
inline Assignment parse_evidence(std::string_view text) {
  detail::Tokens tk(text);
  const std::size_t n = tk.count("evidence count");
  Assignment a;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t v = tk.count("evidence variable");
    const std::size_t x = tk.count("evidence value");
    if (!a.emplace(v, x).second)
      throw ParseError(tk.line(), "variable " + std::to_string(v) + " observed twice");
  }
  if (!tk.done()) throw ParseError(tk.line(), "trailing content after evidence");
  return a;
}

/// Checks evidence against a model; the error names the offending pair.
inline void check_evidence(const Model& m, const Assignment& a) {
  for (const auto& [v, x] : a) {
    if (!m.has_variable(v))
      throw ParseError(0, "evidence names unknown variable " + std::to_string(v));
    if (x >= m.variable(v).cardinality)
      throw ParseError(0, "evidence value " + std::to_string(x) + " out of range for variable " +
                              std::to_string(v));
  }
}

}  // namespace aebp
