#pragma once

// Abstract syntax of constrained Horn clauses over linear integer arithmetic
// with optional read/write array constraints.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "chc/error.hpp"

namespace chc {

enum class Sort : std::uint8_t { Int, IntArray };

inline const char* sort_name(Sort s) { return s == Sort::Int ? "int" : "array"; }

struct Var {
  std::string name;
  Sort sort = Sort::Int;

  friend bool operator==(const Var&, const Var&) = default;
  friend auto operator<=>(const Var&, const Var&) = default;
};

using VarSet = std::set<Var>;
using Subst = std::map<Var, Var>;

namespace detail {

inline long long checked_add(long long a, long long b) {
  long long r;
  if (__builtin_add_overflow(a, b, &r)) throw Error("integer overflow in linear expression");
  return r;
}

inline long long checked_mul(long long a, long long b) {
  long long r;
  if (__builtin_mul_overflow(a, b, &r)) throw Error("integer overflow in linear expression");
  return r;
}

inline void push_unique(std::vector<Var>& out, const Var& v) {
  if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
}

inline Var subst_var(const Subst& s, const Var& v) {
  auto it = s.find(v);
  return it == s.end() ? v : it->second;
}

}  // namespace detail

struct LinTerm {
  Var var;
  long long coeff = 0;

  friend bool operator==(const LinTerm&, const LinTerm&) = default;
};

/// Integer linear expression. Terms keep their insertion order so printing
/// reproduces the source text; zero coefficients are never stored.
class LinExpr {
 public:
  LinExpr() = default;

  static LinExpr constant(long long c) {
    LinExpr e;
    e.constant_ = c;
    return e;
  }

  static LinExpr variable(const Var& v, long long coeff = 1) {
    LinExpr e;
    e.add(v, coeff);
    return e;
  }

  void add(const Var& v, long long coeff) {
    if (v.sort != Sort::Int) throw SortError("array variable '" + v.name + "' in arithmetic expression");
    if (coeff == 0) return;
    for (auto it = terms_.begin(); it != terms_.end(); ++it) {
      if (it->var == v) {
        it->coeff = detail::checked_add(it->coeff, coeff);
        if (it->coeff == 0) terms_.erase(it);
        return;
      }
    }
    terms_.push_back({v, coeff});
  }

  void add_constant(long long c) { constant_ = detail::checked_add(constant_, c); }

  LinExpr& operator+=(const LinExpr& o) {
    for (const auto& t : o.terms_) add(t.var, t.coeff);
    add_constant(o.constant_);
    return *this;
  }

  LinExpr& operator-=(const LinExpr& o) {
    LinExpr neg = o.scaled(-1);
    return *this += neg;
  }

  LinExpr scaled(long long k) const {
    LinExpr r;
    if (k == 0) return r;
    for (const auto& t : terms_) r.terms_.push_back({t.var, detail::checked_mul(t.coeff, k)});
    r.constant_ = detail::checked_mul(constant_, k);
    return r;
  }

  const std::vector<LinTerm>& terms() const { return terms_; }
  long long constant_term() const { return constant_; }
  bool is_constant() const { return terms_.empty(); }

  long long coeff_of(const Var& v) const {
    for (const auto& t : terms_)
      if (t.var == v) return t.coeff;
    return 0;
  }

  std::optional<Var> as_variable() const {
    if (terms_.size() == 1 && terms_[0].coeff == 1 && constant_ == 0) return terms_[0].var;
    return std::nullopt;
  }

  LinExpr substituted(const Subst& s) const {
    LinExpr r;
    for (const auto& t : terms_) r.add(detail::subst_var(s, t.var), t.coeff);
    r.constant_ = constant_;
    return r;
  }

  friend bool operator==(const LinExpr&, const LinExpr&) = default;

 private:
  std::vector<LinTerm> terms_;
  long long constant_ = 0;
};

enum class Rel : std::uint8_t { Eq, Le, Lt, Ge, Gt, Ne };

struct LinAtom {
  LinExpr lhs;
  Rel rel = Rel::Eq;
  LinExpr rhs;

  friend bool operator==(const LinAtom&, const LinAtom&) = default;
};

/// read(arr, idx, val): arr[idx] = val.
struct ArrRead {
  Var arr, idx, val;
  friend bool operator==(const ArrRead&, const ArrRead&) = default;
};

/// write(arr, idx, val, out): out is arr with position idx set to val.
struct ArrWrite {
  Var arr, idx, val, out;
  friend bool operator==(const ArrWrite&, const ArrWrite&) = default;
};

/// Equality of two array variables; produced when a repeated array argument
/// is normalized away.
struct ArrEq {
  Var lhs, rhs;
  friend bool operator==(const ArrEq&, const ArrEq&) = default;
};

using ConstraintAtom = std::variant<LinAtom, ArrRead, ArrWrite, ArrEq>;

inline bool is_array_atom(const ConstraintAtom& a) { return !std::holds_alternative<LinAtom>(a); }

inline LinAtom make_lin(LinExpr lhs, Rel rel, LinExpr rhs) { return LinAtom{std::move(lhs), rel, std::move(rhs)}; }

inline LinAtom make_lin(const Var& x, Rel rel, const Var& y) {
  return LinAtom{LinExpr::variable(x), rel, LinExpr::variable(y)};
}

inline LinAtom make_lin(const Var& x, Rel rel, long long k) {
  return LinAtom{LinExpr::variable(x), rel, LinExpr::constant(k)};
}

/// Conjunction of constraint atoms; the empty conjunction is `true`.
struct ConstraintConj {
  std::vector<ConstraintAtom> atoms;

  bool empty() const { return atoms.empty(); }
  std::size_t size() const { return atoms.size(); }
  void add(ConstraintAtom a) { atoms.push_back(std::move(a)); }
  void append(const ConstraintConj& o) { atoms.insert(atoms.end(), o.atoms.begin(), o.atoms.end()); }

  friend bool operator==(const ConstraintConj&, const ConstraintConj&) = default;
};

struct Atom {
  std::string pred;
  std::vector<Var> args;

  friend bool operator==(const Atom&, const Atom&) = default;
};

struct ClauseId {
  std::uint64_t value = 0;

  friend bool operator==(const ClauseId&, const ClauseId&) = default;
  friend auto operator<=>(const ClauseId&, const ClauseId&) = default;
};

inline std::string to_string(ClauseId id) { return std::to_string(id.value); }

/// H <- c, B1, ..., Bn. A missing head denotes `false` (a goal).
struct Clause {
  ClauseId id;
  std::optional<Atom> head;
  ConstraintConj constraint;
  std::vector<Atom> body;

  bool is_goal() const { return !head.has_value(); }
  bool is_linear() const { return body.size() <= 1; }
  std::string head_pred() const { return head ? head->pred : std::string("false"); }

  friend bool operator==(const Clause&, const Clause&) = default;
};

struct Program {
  std::vector<Clause> clauses;
  std::map<std::string, std::vector<Sort>> signatures;

  const Clause* find(ClauseId id) const {
    for (const auto& c : clauses)
      if (c.id == id) return &c;
    return nullptr;
  }

  bool contains(ClauseId id) const { return find(id) != nullptr; }

  ClauseId max_id() const {
    ClauseId m{0};
    for (const auto& c : clauses) m = std::max(m, c.id);
    return m;
  }

  /// Clauses whose head predicate is `pred`, in program order.
  std::vector<const Clause*> defining(const std::string& pred) const {
    std::vector<const Clause*> out;
    for (const auto& c : clauses)
      if (c.head && c.head->pred == pred) out.push_back(&c);
    return out;
  }

  std::set<std::string> predicates() const {
    std::set<std::string> out;
    for (const auto& c : clauses) {
      if (c.head) out.insert(c.head->pred);
      for (const auto& a : c.body) out.insert(a.pred);
    }
    return out;
  }

  friend bool operator==(const Program&, const Program&) = default;
};

// ---------------------------------------------------------------------------
// Variable collection. The `ordered` variants list variables by first
// occurrence, which is the order used for quantifier prefixes and new
// predicate parameters.

inline void collect_vars(const LinExpr& e, std::vector<Var>& out) {
  for (const auto& t : e.terms()) detail::push_unique(out, t.var);
}

inline void collect_vars(const ConstraintAtom& a, std::vector<Var>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LinAtom>) {
          collect_vars(n.lhs, out);
          collect_vars(n.rhs, out);
        } else if constexpr (std::is_same_v<T, ArrRead>) {
          for (const Var* v : {&n.arr, &n.idx, &n.val}) detail::push_unique(out, *v);
        } else if constexpr (std::is_same_v<T, ArrWrite>) {
          for (const Var* v : {&n.arr, &n.idx, &n.val, &n.out}) detail::push_unique(out, *v);
        } else {
          detail::push_unique(out, n.lhs);
          detail::push_unique(out, n.rhs);
        }
      },
      a);
}

inline void collect_vars(const ConstraintConj& c, std::vector<Var>& out) {
  for (const auto& a : c.atoms) collect_vars(a, out);
}

inline void collect_vars(const Atom& a, std::vector<Var>& out) {
  for (const auto& v : a.args) detail::push_unique(out, v);
}

/// Head, then constraint, then body atoms.
inline void collect_vars(const Clause& c, std::vector<Var>& out) {
  if (c.head) collect_vars(*c.head, out);
  collect_vars(c.constraint, out);
  for (const auto& a : c.body) collect_vars(a, out);
}

template <typename T>
std::vector<Var> ordered_vars(const T& x) {
  std::vector<Var> out;
  collect_vars(x, out);
  return out;
}

template <typename T>
VarSet vars(const T& x) {
  auto v = ordered_vars(x);
  return VarSet(v.begin(), v.end());
}

// ---------------------------------------------------------------------------
// Simultaneous substitution of variables by variables.

inline void check_subst_sorts(const Subst& s) {
  for (const auto& [from, to] : s)
    if (from.sort != to.sort)
      throw SortError("substitution maps " + std::string(sort_name(from.sort)) + " variable '" + from.name + "' to " +
                      sort_name(to.sort) + " variable '" + to.name + "'");
}

inline ConstraintAtom substitute(const ConstraintAtom& a, const Subst& s) {
  using detail::subst_var;
  return std::visit(
      [&](const auto& n) -> ConstraintAtom {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LinAtom>) {
          return LinAtom{n.lhs.substituted(s), n.rel, n.rhs.substituted(s)};
        } else if constexpr (std::is_same_v<T, ArrRead>) {
          return ArrRead{subst_var(s, n.arr), subst_var(s, n.idx), subst_var(s, n.val)};
        } else if constexpr (std::is_same_v<T, ArrWrite>) {
          return ArrWrite{subst_var(s, n.arr), subst_var(s, n.idx), subst_var(s, n.val), subst_var(s, n.out)};
        } else {
          return ArrEq{subst_var(s, n.lhs), subst_var(s, n.rhs)};
        }
      },
      a);
}

inline ConstraintConj substitute(const ConstraintConj& c, const Subst& s) {
  ConstraintConj r;
  r.atoms.reserve(c.atoms.size());
  for (const auto& a : c.atoms) r.atoms.push_back(substitute(a, s));
  return r;
}

inline Atom substitute(const Atom& a, const Subst& s) {
  Atom r{a.pred, {}};
  r.args.reserve(a.args.size());
  for (const auto& v : a.args) r.args.push_back(detail::subst_var(s, v));
  return r;
}

inline std::vector<Atom> substitute(const std::vector<Atom>& atoms, const Subst& s) {
  std::vector<Atom> r;
  r.reserve(atoms.size());
  for (const auto& a : atoms) r.push_back(substitute(a, s));
  return r;
}

inline Clause substitute(const Clause& c, const Subst& s) {
  Clause r;
  r.id = c.id;
  if (c.head) r.head = substitute(*c.head, s);
  r.constraint = substitute(c.constraint, s);
  r.body = substitute(c.body, s);
  return r;
}

/// Simultaneous substitution with a sort check on θ.
template <typename T>
T apply_subst(const T& target, const Subst& theta) {
  check_subst_sorts(theta);
  return substitute(target, theta);
}

}  // namespace chc
