#pragma once

// Decision services for conjunctions of linear integer atoms. Array atoms
// are dropped before any query; the verdicts stay sound because only the
// antecedent is weakened.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "chc/detail/linear_system.hpp"
#include "chc/printer.hpp"
#include "chc/syntax.hpp"

namespace chc {

enum class Verdict { Proved, Disproved, Unknown };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Proved: return "Proved";
    case Verdict::Disproved: return "Disproved";
    case Verdict::Unknown: return "Unknown";
  }
  return "?";
}

/// exists X1..Xm. (phi1 or ... or phin). No disjuncts means false.
struct QuantDisj {
  std::vector<Var> exists;
  std::vector<ConstraintConj> disjuncts;

  static QuantDisj truth() { return QuantDisj{{}, {ConstraintConj{}}}; }
  static QuantDisj falsity() { return QuantDisj{}; }
  static QuantDisj of(ConstraintConj c) { return QuantDisj{{}, {std::move(c)}}; }

  bool is_false() const { return disjuncts.empty(); }

  friend bool operator==(const QuantDisj&, const QuantDisj&) = default;
};

inline std::string to_string(const QuantDisj& q) {
  std::string body;
  if (q.disjuncts.empty()) body = "false";
  for (std::size_t i = 0; i < q.disjuncts.size(); ++i) {
    if (i) body += " ; ";
    body += q.disjuncts.size() > 1 ? "(" + to_string(q.disjuncts[i]) + ")" : to_string(q.disjuncts[i]);
  }
  if (q.exists.empty()) return body;
  std::string pre = "exists";
  for (const auto& v : q.exists) pre += " " + v.name;
  return pre + ". " + body;
}

inline VarSet free_vars(const QuantDisj& q) {
  VarSet out;
  for (const auto& d : q.disjuncts)
    for (const auto& v : vars(d)) out.insert(v);
  for (const auto& v : q.exists) out.erase(v);
  return out;
}

using Witness = std::map<Var, long long>;

struct LiaLimits {
  std::size_t ne_split_cap = 6;     // at most 2^6 branches for =\= atoms
  std::size_t dnf_leaf_cap = 1024;  // disjuncts explored when negating
};

namespace detail {

/// Dense encoding of the integer variables of a set of linear atoms.
class VarIndex {
 public:
  std::size_t id(const Var& v) {
    auto [it, inserted] = ids_.emplace(v, vars_.size());
    if (inserted) vars_.push_back(v);
    return it->second;
  }
  std::size_t size() const { return vars_.size(); }
  const std::vector<Var>& vars() const { return vars_; }
  std::optional<std::size_t> find(const Var& v) const {
    auto it = ids_.find(v);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::map<Var, std::size_t> ids_;
  std::vector<Var> vars_;
};

/// lhs - rhs as a row; `rel` decides the orientation.
inline Row lin_row(const LinAtom& a, VarIndex& ix) {
  Row r;
  auto put = [&](const LinExpr& e, long long sign) {
    for (const auto& t : e.terms()) {
      std::size_t i = ix.id(t.var);
      if (r.a.size() <= i) r.a.resize(i + 1);
      r.a[i] += Big(t.coeff) * sign;
    }
    r.c += Big(e.constant_term()) * sign;
  };
  // Le: l - r <= 0; Lt: l - r + 1 <= 0; Ge: r - l <= 0; Gt: r - l + 1 <= 0
  switch (a.rel) {
    case Rel::Eq:
      put(a.lhs, 1), put(a.rhs, -1);
      r.eq = true;
      break;
    case Rel::Le:
      put(a.lhs, 1), put(a.rhs, -1);
      break;
    case Rel::Lt:
      put(a.lhs, 1), put(a.rhs, -1);
      r.c += 1;
      break;
    case Rel::Ge:
      put(a.rhs, 1), put(a.lhs, -1);
      break;
    case Rel::Gt:
      put(a.rhs, 1), put(a.lhs, -1);
      r.c += 1;
      break;
    case Rel::Ne:
      break;
  }
  return r;
}

inline long long to_ll(const Big& b) {
  if (b > Big(std::numeric_limits<long long>::max()) || b < Big(std::numeric_limits<long long>::min()))
    throw Error("integer value out of range");
  return static_cast<long long>(b);
}

/// Row (over `ix`) back to an atom: positive terms left, the rest right.
inline LinAtom row_atom(const Row& r, const std::vector<Var>& vs) {
  LinExpr pos, neg;
  for (std::size_t i = 0; i < r.a.size(); ++i) {
    if (r.a[i] > 0) pos.add(vs[i], to_ll(r.a[i]));
    if (r.a[i] < 0) neg.add(vs[i], to_ll(-r.a[i]));
  }
  Rel rel = r.eq ? Rel::Eq : Rel::Le;
  long long c = to_ll(r.c);
  if (pos.is_constant()) {
    // -neg + c rel 0  ->  neg (rel flipped) c
    return LinAtom{neg, r.eq ? Rel::Eq : Rel::Ge, LinExpr::constant(c)};
  }
  neg.add_constant(-c);
  return LinAtom{pos, rel, neg};
}

struct Split {
  std::vector<LinAtom> lin;     // =, <=, <, >=, >
  std::vector<LinAtom> ne;      // =\= atoms
  std::vector<ConstraintAtom> arrays;
};

inline Split split_atoms(const ConstraintConj& c) {
  Split s;
  for (const auto& a : c.atoms) {
    if (auto l = std::get_if<LinAtom>(&a)) {
      (l->rel == Rel::Ne ? s.ne : s.lin).push_back(*l);
    } else {
      s.arrays.push_back(a);
    }
  }
  return s;
}

inline bool eval_lin(const LinAtom& a, const Witness& w) {
  auto ev = [&](const LinExpr& e) {
    Big s = e.constant_term();
    for (const auto& t : e.terms()) {
      auto it = w.find(t.var);
      s += Big(t.coeff) * (it == w.end() ? 0 : it->second);
    }
    return s;
  };
  Big l = ev(a.lhs), r = ev(a.rhs);
  switch (a.rel) {
    case Rel::Eq: return l == r;
    case Rel::Le: return l <= r;
    case Rel::Lt: return l < r;
    case Rel::Ge: return l >= r;
    case Rel::Gt: return l > r;
    case Rel::Ne: return l != r;
  }
  return false;
}

struct ConjResult {
  Verdict verdict = Verdict::Unknown;  // Proved = integer witness found
  Witness witness;
};

/// Satisfiability of equalities/inequalities only (no =\=, no arrays).
inline ConjResult solve_lin(const std::vector<LinAtom>& atoms, const std::vector<Var>& extra = {}) {
  VarIndex ix;
  for (const auto& v : extra) ix.id(v);
  std::vector<Row> rows;
  for (const auto& a : atoms) rows.push_back(lin_row(a, ix));
  LinearSystem sys(ix.size());
  for (auto& r : rows) sys.add(std::move(r));
  auto out = sys.solve();
  ConjResult res;
  if (out.result == SysResult::Unsat) {
    res.verdict = Verdict::Disproved;
  } else if (out.result == SysResult::Sat) {
    res.verdict = Verdict::Proved;
    for (std::size_t i = 0; i < ix.size(); ++i) {
      if (out.witness[i] > Big(std::numeric_limits<long long>::max()) ||
          out.witness[i] < Big(std::numeric_limits<long long>::min())) {
        res.verdict = Verdict::Unknown;
        res.witness.clear();
        return res;
      }
      res.witness[ix.vars()[i]] = static_cast<long long>(out.witness[i]);
    }
  }
  return res;
}

inline LinAtom strict_side(const LinAtom& ne, bool less) { return LinAtom{ne.lhs, less ? Rel::Lt : Rel::Gt, ne.rhs}; }

/// Linear part of a conjunction, with =\= atoms split into < / > branches.
inline ConjResult solve_conj(const ConstraintConj& c, const LiaLimits& lim = {}) {
  Split s = split_atoms(c);
  if (s.ne.size() > lim.ne_split_cap) {
    // Without the =\= atoms the system is weaker: unsat still transfers.
    auto r = solve_lin(s.lin);
    if (r.verdict == Verdict::Proved) {
      for (const auto& a : s.ne)
        if (!eval_lin(a, r.witness)) return ConjResult{};
      if (!s.arrays.empty()) return ConjResult{};
    }
    return r;
  }
  bool unknown = false;
  std::size_t n = s.ne.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<LinAtom> atoms = s.lin;
    for (std::size_t i = 0; i < n; ++i) atoms.push_back(strict_side(s.ne[i], (mask >> i) & 1));
    auto r = solve_lin(atoms);
    if (r.verdict == Verdict::Proved) {
      if (!s.arrays.empty()) return ConjResult{};
      return r;
    }
    if (r.verdict == Verdict::Unknown) unknown = true;
  }
  return ConjResult{unknown ? Verdict::Unknown : Verdict::Disproved, {}};
}

}  // namespace detail

inline Verdict is_satisfiable(const ConstraintConj& c, const LiaLimits& lim = {}) {
  return detail::solve_conj(c, lim).verdict;
}

/// An integer solution of the linear part, when one is found. Variables of
/// `c` absent from every row are reported as 0.
inline std::optional<Witness> find_witness(const ConstraintConj& c, const LiaLimits& lim = {}) {
  auto r = detail::solve_conj(c, lim);
  if (r.verdict != Verdict::Proved) return std::nullopt;
  for (const auto& v : vars(c))
    if (v.sort == Sort::Int) r.witness.emplace(v, 0);
  return r.witness;
}

inline Verdict entails_equality(const ConstraintConj& d, const Var& x, const Var& y, const LiaLimits& lim = {}) {
  if (x == y) return Verdict::Proved;
  ConstraintConj lo = d, hi = d;
  lo.add(make_lin(LinExpr::variable(x), Rel::Le, [&] {
    LinExpr e = LinExpr::variable(y);
    e.add_constant(-1);
    return e;
  }()));
  hi.add(make_lin(LinExpr::variable(y), Rel::Le, [&] {
    LinExpr e = LinExpr::variable(x);
    e.add_constant(-1);
    return e;
  }()));
  Verdict a = is_satisfiable(lo, lim);
  if (a == Verdict::Proved) return Verdict::Disproved;
  Verdict b = is_satisfiable(hi, lim);
  if (b == Verdict::Proved) return Verdict::Disproved;
  if (a == Verdict::Disproved && b == Verdict::Disproved) return Verdict::Proved;
  return Verdict::Unknown;
}

using EqPair = std::pair<Var, Var>;

/// Pairs (X,Y), X in vars(a), Y in vars(b), with d entailing X = Y. Ordered
/// lexicographically on variable names.
inline std::set<EqPair> eq_set(const ConstraintConj& d, const Atom& a, const Atom& b, const LiaLimits& lim = {}) {
  std::set<EqPair> out;
  auto w = find_witness(d, lim);
  for (const auto& x : a.args) {
    if (x.sort != Sort::Int) continue;
    for (const auto& y : b.args) {
      if (y.sort != Sort::Int) continue;
      if (x == y) {
        out.emplace(x, y);
        continue;
      }
      if (w) {
        auto vx = w->find(x), vy = w->find(y);
        long long a0 = vx == w->end() ? 0 : vx->second;
        long long b0 = vy == w->end() ? 0 : vy->second;
        if (a0 != b0) continue;
      }
      if (entails_equality(d, x, y, lim) == Verdict::Proved) out.emplace(x, y);
    }
  }
  return out;
}

struct ProjectResult {
  QuantDisj formula;
  bool exact = true;
};

/// Eliminates the variables of `c` outside `keep`. Over the rationals the
/// result is equivalent to the existential closure; over the integers it is
/// implied by `c`, and `exact` reports whether it is also equivalent.
inline ProjectResult project_ex(const ConstraintConj& c, const VarSet& keep, const LiaLimits& lim = {}) {
  ProjectResult res;
  VarSet elim;
  for (const auto& v : vars(c))
    if (!keep.count(v)) elim.insert(v);
  if (elim.empty()) {
    res.formula = QuantDisj::of(c);
    return res;
  }
  detail::Split s = detail::split_atoms(c);
  ConstraintConj kept_arrays;
  for (const auto& a : s.arrays) {
    bool inside = true;
    for (const auto& v : vars(ConstraintConj{{a}})) inside = inside && keep.count(v);
    if (inside) {
      kept_arrays.add(a);
    } else {
      res.exact = false;
    }
  }
  // =\= atoms over kept variables pass through; the rest are case-split.
  std::vector<LinAtom> ne_keep, ne_split;
  for (const auto& a : s.ne) {
    bool inside = true;
    for (const auto& v : vars(ConstraintConj{{a}})) inside = inside && keep.count(v);
    (inside ? ne_keep : ne_split).push_back(a);
  }
  if (ne_split.size() > lim.ne_split_cap) {
    ne_split.clear();
    res.exact = false;
  }
  std::size_t n = ne_split.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    detail::VarIndex ix;
    std::vector<detail::Row> rows;
    for (const auto& a : s.lin) rows.push_back(detail::lin_row(a, ix));
    for (std::size_t i = 0; i < n; ++i) rows.push_back(detail::lin_row(detail::strict_side(ne_split[i], (mask >> i) & 1), ix));
    detail::LinearSystem sys(ix.size());
    for (auto& r : rows) sys.add(std::move(r));
    std::vector<bool> e(ix.size());
    for (std::size_t i = 0; i < ix.size(); ++i) e[i] = !keep.count(ix.vars()[i]);
    auto p = sys.project(e);
    if (p.unsat) continue;
    res.exact = res.exact && p.exact;
    ConstraintConj d;
    for (const auto& r : p.rows) d.add(detail::row_atom(r, ix.vars()));
    for (const auto& a : ne_keep) d.add(a);
    d.append(kept_arrays);
    res.formula.disjuncts.push_back(std::move(d));
  }
  return res;
}

inline QuantDisj project(const ConstraintConj& c, const VarSet& keep, const LiaLimits& lim = {}) {
  return project_ex(c, keep, lim).formula;
}

/// Integer complement of a linear atom, as a disjunction.
inline std::vector<LinAtom> negate_linatom(const LinAtom& a) {
  auto plus = [](LinExpr e, long long k) {
    e.add_constant(k);
    return e;
  };
  switch (a.rel) {
    case Rel::Eq: return {LinAtom{a.lhs, Rel::Le, plus(a.rhs, -1)}, LinAtom{a.lhs, Rel::Ge, plus(a.rhs, 1)}};
    case Rel::Le: return {LinAtom{a.lhs, Rel::Ge, plus(a.rhs, 1)}};
    case Rel::Lt: return {LinAtom{a.lhs, Rel::Ge, a.rhs}};
    case Rel::Ge: return {LinAtom{a.lhs, Rel::Le, plus(a.rhs, -1)}};
    case Rel::Gt: return {LinAtom{a.lhs, Rel::Le, a.rhs}};
    case Rel::Ne: return {LinAtom{a.lhs, Rel::Eq, a.rhs}};
  }
  return {};
}

namespace detail {

inline std::set<std::string> names_of(const QuantDisj& q) {
  std::set<std::string> out;
  for (const auto& d : q.disjuncts)
    for (const auto& v : vars(d)) out.insert(v.name);
  for (const auto& v : q.exists) out.insert(v.name);
  return out;
}

/// Renames the existential prefix away from `taken`.
inline QuantDisj rename_exists(const QuantDisj& q, std::set<std::string>& taken, std::size_t& counter) {
  Subst s;
  QuantDisj out;
  for (const auto& v : q.exists) {
    Var f;
    do {
      f = Var{v.name + "_q" + std::to_string(++counter), v.sort};
    } while (taken.count(f.name));
    taken.insert(f.name);
    s[v] = f;
    out.exists.push_back(f);
  }
  for (const auto& d : q.disjuncts) out.disjuncts.push_back(substitute(d, s));
  return out;
}

/// Searches for a satisfiable branch of  base /\ not(r1) /\ ... /\ not(rn).
/// Each not(rj) is a disjunction of negated atoms; branches are pruned as
/// soon as their prefix is unsatisfiable.
class NegationSearch {
 public:
  NegationSearch(const std::vector<ConstraintConj>& rhs, const LiaLimits& lim) : rhs_(rhs), lim_(lim) {}

  /// Proved: some branch has an integer witness. Disproved: all branches
  /// unsatisfiable. Unknown otherwise.
  Verdict run(const ConstraintConj& base) {
    leaves_ = 0;
    unknown_ = false;
    bool found = dfs(base, 0);
    if (found) return Verdict::Proved;
    return unknown_ ? Verdict::Unknown : Verdict::Disproved;
  }

 private:
  bool dfs(const ConstraintConj& cur, std::size_t j) {
    Verdict v = is_satisfiable(cur, lim_);
    if (v == Verdict::Disproved) return false;
    if (j == rhs_.size()) {
      if (v == Verdict::Proved) return true;
      unknown_ = true;
      return false;
    }
    if (++leaves_ > lim_.dnf_leaf_cap) {
      unknown_ = true;
      return false;
    }
    for (const auto& atom : rhs_[j].atoms) {
      const auto* l = std::get_if<LinAtom>(&atom);
      if (!l) continue;
      for (const auto& n : negate_linatom(*l)) {
        ConstraintConj next = cur;
        next.add(n);
        if (dfs(next, j + 1)) return true;
        if (leaves_ > lim_.dnf_leaf_cap) return false;
      }
    }
    return false;
  }

  const std::vector<ConstraintConj>& rhs_;
  LiaLimits lim_;
  std::size_t leaves_ = 0;
  bool unknown_ = false;
};

}  // namespace detail

/// Validity of  forall free. (lhs -> rhs)  over the integers.
inline Verdict implies(const QuantDisj& lhs, const QuantDisj& rhs, const LiaLimits& lim = {}) {
  std::set<std::string> taken = detail::names_of(lhs);
  for (const auto& n : detail::names_of(rhs)) taken.insert(n);
  std::size_t counter = 0;
  QuantDisj l = detail::rename_exists(lhs, taken, counter);
  QuantDisj r = detail::rename_exists(rhs, taken, counter);

  // Existentials of the right side are projected away.
  bool exact = true;
  std::vector<ConstraintConj> rhs_conj;
  VarSet rex(r.exists.begin(), r.exists.end());
  for (const auto& d : r.disjuncts) {
    bool has_array = false;
    for (const auto& a : d.atoms) has_array = has_array || is_array_atom(a);
    if (has_array) {
      // Dropping a disjunct strengthens the right side.
      exact = false;
      continue;
    }
    VarSet keep;
    for (const auto& v : vars(d))
      if (!rex.count(v)) keep.insert(v);
    auto p = project_ex(d, keep, lim);
    exact = exact && p.exact;
    for (auto& c : p.formula.disjuncts) {
      if (c.empty()) return Verdict::Proved;
      rhs_conj.push_back(std::move(c));
    }
  }

  Verdict overall = Verdict::Proved;
  detail::NegationSearch search(rhs_conj, lim);
  for (const auto& li : l.disjuncts) {
    bool li_arrays = false;
    for (const auto& a : li.atoms) li_arrays = li_arrays || is_array_atom(a);
    Verdict v = search.run(li);
    if (v == Verdict::Disproved) continue;
    if (v == Verdict::Proved && exact && !li_arrays) return Verdict::Disproved;
    overall = Verdict::Unknown;
  }
  return overall;
}

inline bool same_formula(const QuantDisj& a, const QuantDisj& b) { return a == b; }

inline Verdict equiv_quant_disj(const QuantDisj& lhs, const QuantDisj& rhs, const LiaLimits& lim = {}) {
  if (same_formula(lhs, rhs)) return Verdict::Proved;
  Verdict a = implies(lhs, rhs, lim);
  if (a == Verdict::Disproved) return a;
  Verdict b = implies(rhs, lhs, lim);
  if (b == Verdict::Disproved) return b;
  return (a == Verdict::Proved && b == Verdict::Proved) ? Verdict::Proved : Verdict::Unknown;
}

/// Constraint classes for the A parameter of definition introduction.
enum class AClass { Lia, TwoVar };

inline bool two_var_atom(const LinAtom& a) {
  LinExpr e = a.lhs;
  e -= a.rhs;
  if (e.constant_term() != 0 || e.terms().size() > 2) return false;
  for (const auto& t : e.terms())
    if (t.coeff != 1 && t.coeff != -1) return false;
  if (e.terms().size() == 2 && e.terms()[0].coeff == e.terms()[1].coeff) return false;
  return true;
}

inline bool in_class(const ConstraintConj& c, AClass cls) {
  for (const auto& a : c.atoms) {
    const auto* l = std::get_if<LinAtom>(&a);
    if (!l) return cls == AClass::Lia;
    if (cls == AClass::TwoVar && !two_var_atom(*l)) return false;
  }
  return true;
}

}  // namespace chc
