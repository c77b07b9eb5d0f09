#pragma once

// Symbolic interpretations: checking that they are models, checking
// tightness on definitions, and carrying them across rule applications.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "chc/lia.hpp"
#include "chc/syntax.hpp"

namespace chc {

struct PredInterp {
  std::vector<Var> params;
  QuantDisj formula;
};

class SymbolicInterpretation {
 public:
  /// Stores Σ(pred). Free variables must be among the parameters.
  void set(const std::string& pred, std::vector<Var> params, QuantDisj formula) {
    std::set<Var> ps;
    for (const auto& v : params)
      if (!ps.insert(v).second) throw Error("parameter " + v.name + " of '" + pred + "' repeated");
    for (const auto& v : free_vars(formula))
      if (!ps.count(v)) throw Error("variable " + v.name + " of the formula for '" + pred + "' is not a parameter");
    entries_[pred] = PredInterp{std::move(params), std::move(formula)};
  }

  bool has(const std::string& pred) const { return entries_.count(pred) > 0; }
  const PredInterp& at(const std::string& pred) const { return entries_.at(pred); }
  const std::map<std::string, PredInterp>& entries() const { return entries_; }
  void erase(const std::string& pred) { entries_.erase(pred); }

  /// Σ(a) with the parameters replaced by the atom's arguments and the
  /// existentials renamed away from `taken`. Undefined predicates are true.
  QuantDisj instantiate(const Atom& a, std::set<std::string>& taken, std::size_t& counter) const {
    auto it = entries_.find(a.pred);
    if (it == entries_.end()) return QuantDisj::truth();
    const PredInterp& pi = it->second;
    if (pi.params.size() != a.args.size())
      throw ArityError("interpretation of '" + a.pred + "' has " + std::to_string(pi.params.size()) +
                       " parameters, atom has " + std::to_string(a.args.size()));
    Subst s;
    QuantDisj out;
    for (std::size_t i = 0; i < pi.params.size(); ++i) {
      if (pi.params[i].sort != a.args[i].sort)
        throw SortError("argument " + std::to_string(i + 1) + " of '" + a.pred + "' has the wrong sort");
      s[pi.params[i]] = a.args[i];
    }
    for (const auto& v : pi.formula.exists) {
      Var f;
      do {
        f = Var{v.name + "_s" + std::to_string(++counter), v.sort};
      } while (taken.count(f.name));
      taken.insert(f.name);
      s[v] = f;
      out.exists.push_back(f);
    }
    for (const auto& d : pi.formula.disjuncts) out.disjuncts.push_back(substitute(d, s));
    return out;
  }

  friend bool operator==(const SymbolicInterpretation& a, const SymbolicInterpretation& b) {
    if (a.entries_.size() != b.entries_.size()) return false;
    for (const auto& [k, v] : a.entries_) {
      auto it = b.entries_.find(k);
      if (it == b.entries_.end() || it->second.params != v.params || !(it->second.formula == v.formula)) return false;
    }
    return true;
  }

 private:
  std::map<std::string, PredInterp> entries_;
};

struct ClauseVerdict {
  ClauseId id;
  Verdict verdict;
};

struct ModelReport {
  Verdict overall = Verdict::Proved;
  std::vector<ClauseVerdict> clauses;
  std::vector<std::string> defaulted;  // predicates taken as true

  const ClauseVerdict* find(ClauseId id) const {
    for (const auto& c : clauses)
      if (c.id == id) return &c;
    return nullptr;
  }
};

namespace detail {

inline Verdict combine(Verdict acc, Verdict v) {
  if (acc == Verdict::Disproved || v == Verdict::Disproved) return Verdict::Disproved;
  if (acc == Verdict::Unknown || v == Verdict::Unknown) return Verdict::Unknown;
  return Verdict::Proved;
}

/// c /\ Σ(A1) /\ ... /\ Σ(An) as one quantified disjunction, or nullopt when
/// the product exceeds `cap` disjuncts.
inline std::optional<QuantDisj> body_formula(const ConstraintConj& c, const std::vector<Atom>& body,
                                             const SymbolicInterpretation& sigma, std::set<std::string>& taken,
                                             std::size_t& counter, std::size_t cap = 1024) {
  QuantDisj out;
  out.disjuncts.push_back(c);
  for (const auto& a : body) {
    QuantDisj f = sigma.instantiate(a, taken, counter);
    out.exists.insert(out.exists.end(), f.exists.begin(), f.exists.end());
    std::vector<ConstraintConj> next;
    for (const auto& x : out.disjuncts) {
      for (const auto& y : f.disjuncts) {
        ConstraintConj z = x;
        z.append(y);
        next.push_back(std::move(z));
        if (next.size() > cap) return std::nullopt;
      }
    }
    out.disjuncts = std::move(next);
  }
  return out;
}

inline std::set<std::string> names_in(const Clause& c) {
  std::set<std::string> out;
  for (const auto& v : ordered_vars(c)) out.insert(v.name);
  return out;
}

inline void check_arity(const Program& p, const SymbolicInterpretation& sigma) {
  for (const auto& [pred, pi] : sigma.entries()) {
    auto it = p.signatures.find(pred);
    if (it == p.signatures.end()) continue;
    if (it->second.size() != pi.params.size())
      throw ArityError("interpretation of '" + pred + "' has " + std::to_string(pi.params.size()) +
                       " parameters, signature has " + std::to_string(it->second.size()));
  }
}

}  // namespace detail

/// Validity of c /\ Σ(body) -> Σ(head) for every clause.
inline ModelReport check_model(const Program& p, const SymbolicInterpretation& sigma, const LiaLimits& lim = {}) {
  detail::check_arity(p, sigma);
  ModelReport r;
  for (const auto& pred : p.predicates())
    if (!sigma.has(pred)) r.defaulted.push_back(pred);
  for (const auto& c : p.clauses) {
    std::set<std::string> taken = detail::names_in(c);
    std::size_t counter = 0;
    auto lhs = detail::body_formula(c.constraint, c.body, sigma, taken, counter);
    Verdict v = Verdict::Unknown;
    if (lhs) {
      QuantDisj rhs = c.head ? sigma.instantiate(*c.head, taken, counter) : QuantDisj::falsity();
      v = implies(*lhs, rhs, lim);
    }
    r.clauses.push_back({c.id, v});
    r.overall = detail::combine(r.overall, v);
  }
  return r;
}

/// For every definition A <- c, G: Σ(A) <-> exists (c /\ Σ(G)), quantifying
/// the variables that do not occur in A.
inline ModelReport check_tight(const Program& defs, const SymbolicInterpretation& sigma, const LiaLimits& lim = {}) {
  detail::check_arity(defs, sigma);
  ModelReport r;
  for (const auto& d : defs.clauses) {
    if (!d.head) throw Error("clause " + to_string(d.id) + " is not a definition");
    std::set<std::string> taken = detail::names_in(d);
    std::size_t counter = 0;
    QuantDisj head = sigma.instantiate(*d.head, taken, counter);
    auto body = detail::body_formula(d.constraint, d.body, sigma, taken, counter);
    Verdict v = Verdict::Unknown;
    if (body) {
      VarSet hv = vars(*d.head);
      VarSet ex(body->exists.begin(), body->exists.end());
      for (const auto& x : body->disjuncts)
        for (const auto& y : vars(x))
          if (!hv.count(y)) ex.insert(y);
      body->exists.assign(ex.begin(), ex.end());
      v = equiv_quant_disj(head, *body, lim);
    }
    r.clauses.push_back({d.id, v});
    r.overall = detail::combine(r.overall, v);
  }
  return r;
}

namespace detail {

/// exists Y. (c /\ Σ(G)) over `params`; disjuncts whose projection is exact
/// lose their quantifiers.
inline QuantDisj close_over(const std::vector<Var>& params, const QuantDisj& body, const LiaLimits& lim) {
  VarSet keep(params.begin(), params.end());
  QuantDisj out;
  VarSet ex;
  for (const auto& d : body.disjuncts) {
    auto p = project_ex(d, keep, lim);
    if (p.exact) {
      for (auto& x : p.formula.disjuncts) out.disjuncts.push_back(std::move(x));
      continue;
    }
    for (const auto& v : vars(d))
      if (!keep.count(v)) ex.insert(v);
    out.disjuncts.push_back(d);
  }
  out.exists.assign(ex.begin(), ex.end());
  return out;
}

}  // namespace detail

/// Extends σ at the new predicate of definition `d` with the existential
/// closure of its body.
inline SymbolicInterpretation transport_definition(const SymbolicInterpretation& sigma, const Clause& d,
                                                   const LiaLimits& lim = {}) {
  if (!d.head) throw Error("a definition needs a head atom");
  if (sigma.has(d.head->pred)) throw Error("predicate '" + d.head->pred + "' is already interpreted");
  std::set<std::string> taken = detail::names_in(d);
  std::size_t counter = 0;
  auto body = detail::body_formula(d.constraint, d.body, sigma, taken, counter);
  if (!body) throw Error("body formula of clause " + to_string(d.id) + " is too large");
  SymbolicInterpretation out = sigma;
  out.set(d.head->pred, d.head->args, detail::close_over(d.head->args, *body, lim));
  return out;
}

/// Redefines `pred` as the disjunction, over its clauses `matching`, of
/// c_j /\ Σ'(B_j). `unfolded_in` is the head predicate of the clause that was
/// unfolded; a self-unfolding step is rejected.
inline SymbolicInterpretation transport_unfold_inverse(const SymbolicInterpretation& sigma_after, const std::string& pred,
                                                       const std::vector<Clause>& matching,
                                                       const std::string& unfolded_in, const LiaLimits& lim = {}) {
  if (unfolded_in == pred) throw Error("self-unfolding step: '" + pred + "' is the head predicate of the unfolded clause");
  std::vector<Var> params;
  if (sigma_after.has(pred)) {
    params = sigma_after.at(pred).params;
  } else if (!matching.empty()) {
    for (std::size_t i = 0; i < matching[0].head->args.size(); ++i)
      params.push_back(Var{"V" + std::to_string(i + 1), matching[0].head->args[i].sort});
  }
  std::set<std::string> taken;
  for (const auto& v : params) taken.insert(v.name);
  for (const auto& c : matching)
    for (const auto& n : detail::names_in(c)) taken.insert(n);
  std::size_t counter = 0;
  QuantDisj total;
  VarSet ex;
  for (const auto& c : matching) {
    if (!c.head || c.head->pred != pred) throw Error("clause " + to_string(c.id) + " does not define '" + pred + "'");
    if (c.head->args.size() != params.size()) throw ArityError("clause " + to_string(c.id) + " has the wrong arity");
    // Rename the clause so that its head reads pred(params).
    Subst ren;
    ConstraintConj extra;
    for (const auto& v : ordered_vars(c)) {
      Var f;
      do {
        f = Var{v.name + "_u" + std::to_string(++counter), v.sort};
      } while (taken.count(f.name));
      taken.insert(f.name);
      ren[v] = f;
    }
    std::set<Var> bound;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const Var& h = c.head->args[i];
      if (bound.insert(h).second) {
        ren[h] = params[i];
      } else {
        extra.add(make_lin(ren[h], Rel::Eq, params[i]));
      }
    }
    Clause rc = substitute(c, ren);
    rc.constraint.append(extra);
    auto body = detail::body_formula(rc.constraint, rc.body, sigma_after, taken, counter);
    if (!body) throw Error("body formula of clause " + to_string(c.id) + " is too large");
    VarSet keep(params.begin(), params.end());
    for (const auto& d : body->disjuncts) {
      for (const auto& v : vars(d))
        if (!keep.count(v)) ex.insert(v);
      total.disjuncts.push_back(d);
    }
  }
  total.exists.assign(ex.begin(), ex.end());
  QuantDisj closed = detail::close_over(params, total, lim);
  SymbolicInterpretation out = sigma_after;
  out.erase(pred);
  out.set(pred, params, closed);
  return out;
}

/// Folding and constraint replacement leave interpretations unchanged.
inline SymbolicInterpretation transport_fold(const SymbolicInterpretation& sigma) { return sigma; }
inline SymbolicInterpretation transport_replace(const SymbolicInterpretation& sigma) { return sigma; }

}  // namespace chc
