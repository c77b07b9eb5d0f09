#pragma once

// Definition, unfolding, folding and constraint replacement as checked
// transitions on a transformation state, with a textual step log.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "chc/lia.hpp"
#include "chc/printer.hpp"
#include "chc/program_ops.hpp"
#include "chc/syntax.hpp"

namespace chc {

class KernelError : public Error {
 public:
  KernelError(std::string kind, const std::string& msg) : Error(kind + ": " + msg), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define CHC_KERNEL_ERROR(Name)                                                      \
  class Name : public KernelError {                                                 \
   public:                                                                          \
    explicit Name(const std::string& msg) : KernelError(#Name, msg) {}              \
  };

CHC_KERNEL_ERROR(FreshnessViolation)
CHC_KERNEL_ERROR(ConstraintClassViolation)
CHC_KERNEL_ERROR(NonP0Predicate)
CHC_KERNEL_ERROR(HeadVarViolation)
CHC_KERNEL_ERROR(NoSuchClause)
CHC_KERNEL_ERROR(BadPosition)
CHC_KERNEL_ERROR(NotADefinition)
CHC_KERNEL_ERROR(MatchFailure)
CHC_KERNEL_ERROR(VarConditionViolation)
CHC_KERNEL_ERROR(ShapeMismatch)

#undef CHC_KERNEL_ERROR

class EntailmentFailure : public KernelError {
 public:
  EntailmentFailure(const std::string& atom, Verdict v)
      : KernelError("EntailmentFailure", "constraint does not entail " + atom + " (" + verdict_name(v) + ")"),
        atom_(atom),
        verdict_(v) {}
  const std::string& atom() const noexcept { return atom_; }
  Verdict verdict() const noexcept { return verdict_; }

 private:
  std::string atom_;
  Verdict verdict_;
};

class EquivalenceNotProved : public KernelError {
 public:
  explicit EquivalenceNotProved(Verdict v)
      : KernelError("EquivalenceNotProved", std::string("constraint equivalence is ") + verdict_name(v)), verdict_(v) {}
  Verdict verdict() const noexcept { return verdict_; }

 private:
  Verdict verdict_;
};

enum class RuleKind { Definition, Unfolding, Folding, ConstraintReplacement };

inline const char* rule_tag(RuleKind r) {
  switch (r) {
    case RuleKind::Definition: return "DEFINE";
    case RuleKind::Unfolding: return "UNFOLD";
    case RuleKind::Folding: return "FOLD";
    case RuleKind::ConstraintReplacement: return "REPLACE";
  }
  return "?";
}

struct TraceStep {
  RuleKind rule = RuleKind::Definition;
  std::vector<ClauseId> inputs;
  std::vector<std::size_t> positions;
  std::optional<ClauseId> def;
  Subst theta;
  std::vector<ClauseId> outputs;
  bool self_unfolding = false;
  bool reversible_folding = false;
};

struct KernelConfig {
  AClass a_class = AClass::Lia;
  bool simplify_fold = false;  // drop conjuncts of e implied by the rest
  LiaLimits limits;
};

struct TransformationState {
  Program current;
  Program defs;
  std::vector<TraceStep> trace;
  std::set<std::string> p0_preds;
  std::set<std::string> seen_preds;  // every predicate of P_0..P_i
  std::uint64_t next_id = 1;
  FreshNames names;
  KernelConfig cfg;

  static TransformationState start(const Program& p0, KernelConfig cfg = {}) {
    TransformationState s;
    s.current = p0;
    s.p0_preds = all_predicates(p0);
    s.seen_preds = s.p0_preds;
    s.next_id = p0.max_id().value + 1;
    s.cfg = cfg;
    return s;
  }

  ClauseId mint() { return ClauseId{next_id++}; }

  std::size_t index_of(ClauseId id) const {
    for (std::size_t i = 0; i < current.clauses.size(); ++i)
      if (current.clauses[i].id == id) return i;
    throw NoSuchClause("clause " + to_string(id) + " is not in the current program");
  }

  bool is_def(ClauseId id) const { return defs.contains(id); }
};

namespace detail {

inline std::set<std::string> clause_names(const Clause& c) {
  std::set<std::string> out;
  for (const auto& v : ordered_vars(c)) out.insert(v.name);
  return out;
}

inline Verdict entails_atom(const ConstraintConj& c, const ConstraintAtom& a, const LiaLimits& lim) {
  if (std::find(c.atoms.begin(), c.atoms.end(), a) != c.atoms.end()) return Verdict::Proved;
  if (is_array_atom(a)) return Verdict::Unknown;
  return implies(QuantDisj::of(c), QuantDisj::of(ConstraintConj{{a}}), lim);
}

/// Replaces repeated argument variables of `a` by fresh ones, recording the
/// equalities in `eqs`.
inline void distinct_args(Atom& a, ConstraintConj& eqs, std::set<std::string>& taken, FreshNames& names) {
  std::set<Var> seen;
  for (auto& v : a.args) {
    if (seen.insert(v).second) continue;
    Var f = names.fresh(v, taken);
    taken.insert(f.name);
    if (v.sort == Sort::Int) {
      eqs.add(make_lin(f, Rel::Eq, v));
    } else {
      eqs.add(ArrEq{f, v});
    }
    v = f;
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// R1

inline TransformationState apply_definition(TransformationState s, Clause d) {
  if (!d.head) throw HeadVarViolation("a definition needs a head atom");
  const std::string& np = d.head->pred;
  if (s.seen_preds.count(np)) throw FreshnessViolation("predicate '" + np + "' already occurs in the sequence");
  if (!in_class(d.constraint, s.cfg.a_class)) throw ConstraintClassViolation("constraint " + to_string(d.constraint) + " is outside the class");
  if (d.body.empty()) throw NonP0Predicate("definition body is empty");
  for (const auto& a : d.body)
    if (!s.p0_preds.count(a.pred)) throw NonP0Predicate("predicate '" + a.pred + "' does not occur in P0");
  VarSet body_vars = vars(d.constraint);
  for (const auto& a : d.body)
    for (const auto& v : a.args) body_vars.insert(v);
  std::set<Var> seen;
  for (const auto& v : d.head->args) {
    if (!seen.insert(v).second) throw HeadVarViolation("head variable " + v.name + " repeated");
    if (!body_vars.count(v)) throw HeadVarViolation("head variable " + v.name + " does not occur in the body");
  }
  if (d.id.value == 0 || s.current.contains(d.id) || s.defs.contains(d.id) || d.id.value < s.next_id) d.id = s.mint();
  s.next_id = std::max(s.next_id, d.id.value + 1);
  std::vector<Sort> sig;
  for (const auto& v : d.head->args) sig.push_back(v.sort);
  s.current.signatures[np] = sig;
  s.defs.signatures[np] = sig;
  for (const auto& a : d.body) {
    auto it = s.current.signatures.find(a.pred);
    if (it != s.current.signatures.end()) s.defs.signatures[a.pred] = it->second;
  }
  s.seen_preds.insert(np);
  s.current.clauses.push_back(d);
  s.defs.clauses.push_back(d);
  TraceStep st;
  st.rule = RuleKind::Definition;
  st.outputs = {d.id};
  s.trace.push_back(std::move(st));
  return s;
}

// ---------------------------------------------------------------------------
// R2

/// Clauses produced by unfolding atom `pos` of `c` with the clauses of `p`
/// (ids left unset).
inline std::vector<Clause> unfold_clause(const Clause& c, std::size_t pos, const Program& p, FreshNames& names) {
  if (pos >= c.body.size()) throw BadPosition("clause " + to_string(c.id) + " has no body atom " + std::to_string(pos));
  const Atom& target = c.body[pos];
  std::vector<Clause> out;
  std::set<std::string> avoid = detail::clause_names(c);
  for (const Clause* dj : p.defining(target.pred)) {
    // Rename the matching clause apart, then bind its head to the atom.
    std::set<std::string> taken = avoid;
    for (const auto& v : ordered_vars(*dj)) taken.insert(v.name);
    Subst ren;
    for (const auto& v : ordered_vars(*dj)) {
      if (!avoid.count(v.name)) continue;
      Var f = names.fresh(v, taken);
      taken.insert(f.name);
      ren[v] = f;
    }
    Clause d = substitute(*dj, ren);
    Subst bind;
    ConstraintConj extra;
    for (std::size_t i = 0; i < d.head->args.size(); ++i) {
      const Var& y = d.head->args[i];
      const Var& x = target.args[i];
      auto it = bind.find(y);
      if (it == bind.end()) {
        bind[y] = x;
      } else if (it->second != x) {
        if (x.sort == Sort::Int) {
          extra.add(make_lin(it->second, Rel::Eq, x));
        } else {
          extra.add(ArrEq{it->second, x});
        }
      }
    }
    d = substitute(d, bind);
    Clause r;
    r.head = c.head;
    r.constraint = c.constraint;
    r.constraint.append(extra);
    r.constraint.append(d.constraint);
    r.body.insert(r.body.end(), c.body.begin(), c.body.begin() + static_cast<long>(pos));
    r.body.insert(r.body.end(), d.body.begin(), d.body.end());
    r.body.insert(r.body.end(), c.body.begin() + static_cast<long>(pos) + 1, c.body.end());
    out.push_back(std::move(r));
  }
  return out;
}

inline TransformationState apply_unfold(TransformationState s, ClauseId id, std::size_t pos) {
  std::size_t idx = s.index_of(id);
  const Clause c = s.current.clauses[idx];
  auto produced = unfold_clause(c, pos, s.current, s.names);
  TraceStep st;
  st.rule = RuleKind::Unfolding;
  st.inputs = {id};
  st.positions = {pos};
  st.self_unfolding = c.head && c.head->pred == c.body[pos].pred;
  for (auto& r : produced) {
    r.id = s.mint();
    st.outputs.push_back(r.id);
  }
  auto& cl = s.current.clauses;
  cl.erase(cl.begin() + static_cast<long>(idx));
  cl.insert(cl.begin() + static_cast<long>(idx), produced.begin(), produced.end());
  s.trace.push_back(std::move(st));
  return s;
}

// ---------------------------------------------------------------------------
// R3

struct FoldPlan {
  Clause result;  // id unset
  bool reversible = false;
};

/// Checks the folding conditions and builds the folded clause without
/// changing the state. θ maps variables of the definition to variables of
/// the clause; unmapped definition variables receive fresh names.
inline FoldPlan plan_fold(const TransformationState& s, ClauseId id, const std::vector<std::size_t>& positions,
                          ClauseId def_id, Subst theta, FreshNames& names) {
  const Clause& c = s.current.clauses[s.index_of(id)];
  const Clause* d = s.defs.find(def_id);
  if (!d) throw NotADefinition("clause " + to_string(def_id) + " is not a definition");
  if (positions.size() != d->body.size())
    throw MatchFailure("definition body has " + std::to_string(d->body.size()) + " atoms, " +
                       std::to_string(positions.size()) + " positions given");
  std::set<std::size_t> posset;
  for (auto p : positions) {
    if (p >= c.body.size()) throw BadPosition("clause " + to_string(id) + " has no body atom " + std::to_string(p));
    if (!posset.insert(p).second) throw BadPosition("position " + std::to_string(p) + " repeated");
  }
  check_subst_sorts(theta);
  std::set<std::string> taken = detail::clause_names(c);
  for (const auto& v : ordered_vars(*d)) {
    if (theta.count(v)) continue;
    Var f = names.fresh(v, taken);
    taken.insert(f.name);
    theta[v] = f;
  }
  // (i) Q = Bθ
  for (std::size_t i = 0; i < positions.size(); ++i) {
    Atom img = substitute(d->body[i], theta);
    if (!(img == c.body[positions[i]]))
      throw MatchFailure(to_string(c.body[positions[i]]) + " is not an instance " + to_string(img));
  }
  VarSet head_vars = vars(*d->head);
  std::vector<Var> existentials;
  for (const auto& v : ordered_vars(d->constraint))
    if (!head_vars.count(v)) detail::push_unique(existentials, v);
  for (const auto& a : d->body)
    for (const auto& v : a.args)
      if (!head_vars.count(v)) detail::push_unique(existentials, v);
  VarSet ex_images;
  // (iii.2) images of existentials are distinct from every other image
  for (const auto& x : existentials) {
    Var xi = theta.at(x);
    for (const auto& [y, yi] : theta)
      if (!(y == x) && yi == xi && vars(*d).count(y))
        throw VarConditionViolation("image " + xi.name + " of " + x.name + " is shared with " + y.name);
    ex_images.insert(xi);
  }
  // e: the conjuncts of c not mentioning existential images
  ConstraintConj e, dropped;
  for (const auto& a : c.constraint.atoms) {
    bool touches = false;
    for (const auto& v : vars(ConstraintConj{{a}})) touches = touches || ex_images.count(v);
    (touches ? dropped : e).add(a);
  }
  // (iii.1) against H, e, G1, G2
  VarSet outside;
  if (c.head)
    for (const auto& v : c.head->args) outside.insert(v);
  for (std::size_t i = 0; i < c.body.size(); ++i)
    if (!posset.count(i))
      for (const auto& v : c.body[i].args) outside.insert(v);
  for (const auto& v : ex_images)
    if (outside.count(v)) throw VarConditionViolation("existential image " + v.name + " occurs outside the folded atoms");
  // (ii) c <-> e /\ dθ
  ConstraintConj dth = substitute(d->constraint, theta);
  for (const auto& a : dth.atoms) {
    Verdict v = detail::entails_atom(c.constraint, a, s.cfg.limits);
    if (v != Verdict::Proved) throw EntailmentFailure(to_string(a), v);
  }
  if (!dropped.empty()) {
    ConstraintConj ed = e;
    ed.append(dth);
    for (const auto& a : dropped.atoms) {
      Verdict v = detail::entails_atom(ed, a, s.cfg.limits);
      if (v != Verdict::Proved) throw EntailmentFailure(to_string(a), v);
    }
  }
  if (s.cfg.simplify_fold) {
    for (std::size_t i = e.atoms.size(); i-- > 0;) {
      if (is_array_atom(e.atoms[i])) continue;
      ConstraintConj rest = e;
      rest.atoms.erase(rest.atoms.begin() + static_cast<long>(i));
      ConstraintConj rd = rest;
      rd.append(dth);
      if (detail::entails_atom(rd, e.atoms[i], s.cfg.limits) == Verdict::Proved) e = rest;
    }
  }
  Atom k = substitute(*d->head, theta);
  FoldPlan plan;
  detail::distinct_args(k, e, taken, names);
  plan.result.head = c.head;
  plan.result.constraint = e;
  std::size_t first = *posset.begin();
  for (std::size_t i = 0; i < c.body.size(); ++i) {
    if (i == first) plan.result.body.push_back(k);
    if (!posset.count(i)) plan.result.body.push_back(c.body[i]);
  }
  plan.reversible = s.current.contains(def_id) && def_id != id;
  return plan;
}

/// Dry run: the state, including its name counter, is left untouched.
inline FoldPlan plan_fold(const TransformationState& s, ClauseId id, const std::vector<std::size_t>& positions,
                          ClauseId def_id, const Subst& theta) {
  FreshNames names = s.names;
  return plan_fold(s, id, positions, def_id, theta, names);
}

inline TransformationState apply_fold(TransformationState s, ClauseId id, const std::vector<std::size_t>& positions,
                                      ClauseId def_id, const Subst& theta) {
  FreshNames names = s.names;
  FoldPlan plan = plan_fold(s, id, positions, def_id, theta, names);
  s.names = names;
  std::size_t idx = s.index_of(id);
  plan.result.id = s.mint();
  s.current.clauses[idx] = plan.result;
  TraceStep st;
  st.rule = RuleKind::Folding;
  st.inputs = {id};
  st.positions = positions;
  st.def = def_id;
  st.theta = theta;
  st.outputs = {plan.result.id};
  st.reversible_folding = plan.reversible;
  s.trace.push_back(std::move(st));
  return s;
}

/// θ with Bθ equal to the selected atoms, when one exists.
inline std::optional<Subst> match_atoms(const std::vector<Atom>& pattern, const std::vector<Atom>& target) {
  if (pattern.size() != target.size()) return std::nullopt;
  Subst th;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i].pred != target[i].pred || pattern[i].args.size() != target[i].args.size()) return std::nullopt;
    for (std::size_t j = 0; j < pattern[i].args.size(); ++j) {
      const Var& x = pattern[i].args[j];
      const Var& y = target[i].args[j];
      if (x.sort != y.sort) return std::nullopt;
      auto [it, ins] = th.emplace(x, y);
      if (!ins && !(it->second == y)) return std::nullopt;
    }
  }
  return th;
}

// ---------------------------------------------------------------------------
// R4

namespace detail {

/// Renaming of `c`'s head and body onto `ref`'s, if they coincide up to an
/// injective variable renaming.
inline std::optional<Subst> shape_renaming(const Clause& ref, const Clause& c) {
  if (ref.head.has_value() != c.head.has_value() || ref.body.size() != c.body.size()) return std::nullopt;
  std::vector<Atom> a, b;
  if (ref.head) a.push_back(*ref.head), b.push_back(*c.head);
  a.insert(a.end(), ref.body.begin(), ref.body.end());
  b.insert(b.end(), c.body.begin(), c.body.end());
  auto th = match_atoms(b, a);
  if (!th) return std::nullopt;
  std::set<Var> img;
  for (const auto& [k, v] : *th)
    if (!img.insert(v).second) return std::nullopt;
  return th;
}

inline VarSet shape_vars(const Clause& c) {
  VarSet out;
  if (c.head) out = vars(*c.head);
  for (const auto& a : c.body)
    for (const auto& v : a.args) out.insert(v);
  return out;
}

}  // namespace detail

inline TransformationState apply_replace(TransformationState s, const std::vector<ClauseId>& group,
                                         const std::vector<ConstraintConj>& new_constraints) {
  if (group.empty()) throw ShapeMismatch("empty clause group");
  std::vector<std::size_t> idx;
  for (auto id : group) idx.push_back(s.index_of(id));
  const Clause ref = s.current.clauses[idx[0]];
  VarSet hg = detail::shape_vars(ref);
  std::set<std::string> taken;
  for (auto i : idx)
    for (const auto& n : detail::clause_names(s.current.clauses[i])) taken.insert(n);
  for (const auto& d : new_constraints)
    for (const auto& v : vars(d)) taken.insert(v.name);
  taken.insert("");

  QuantDisj lhs;
  VarSet lex;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Clause& c = s.current.clauses[idx[k]];
    auto th = detail::shape_renaming(ref, c);
    if (!th) throw ShapeMismatch("clause " + to_string(c.id) + " differs in head or body from clause " + to_string(ref.id));
    // Local variables of each member are renamed apart from everything else.
    for (const auto& v : vars(c.constraint)) {
      if (th->count(v)) continue;
      Var f = s.names.fresh(v, taken);
      taken.insert(f.name);
      (*th)[v] = f;
      lex.insert(f);
    }
    lhs.disjuncts.push_back(substitute(c.constraint, *th));
  }
  lhs.exists.assign(lex.begin(), lex.end());
  QuantDisj rhs;
  VarSet rex;
  for (const auto& d : new_constraints) {
    for (const auto& v : vars(d))
      if (!hg.count(v)) rex.insert(v);
    rhs.disjuncts.push_back(d);
  }
  rhs.exists.assign(rex.begin(), rex.end());
  Verdict v = equiv_quant_disj(lhs, rhs, s.cfg.limits);
  if (v != Verdict::Proved) throw EquivalenceNotProved(v);

  TraceStep st;
  st.rule = RuleKind::ConstraintReplacement;
  st.inputs = group;
  std::vector<Clause> produced;
  for (const auto& d : new_constraints) {
    Clause r;
    r.id = s.mint();
    r.head = ref.head;
    r.constraint = d;
    r.body = ref.body;
    st.outputs.push_back(r.id);
    produced.push_back(std::move(r));
  }
  std::size_t at = *std::min_element(idx.begin(), idx.end());
  auto& cl = s.current.clauses;
  std::vector<Clause> kept;
  std::set<ClauseId> gone(group.begin(), group.end());
  for (std::size_t i = 0; i < cl.size(); ++i) {
    if (i == at) kept.insert(kept.end(), produced.begin(), produced.end());
    if (!gone.count(cl[i].id)) kept.push_back(cl[i]);
  }
  cl = std::move(kept);
  s.trace.push_back(std::move(st));
  return s;
}

// ---------------------------------------------------------------------------
// Trace validators

struct UnfoldedReport {
  bool ok = true;
  std::vector<ClauseId> offending;
};

inline UnfoldedReport check_all_defs_unfolded(const std::vector<TraceStep>& trace) {
  UnfoldedReport r;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i].rule != RuleKind::Definition) continue;
    for (auto d : trace[i].outputs) {
      bool done = false;
      for (std::size_t j = i + 1; j < trace.size() && !done; ++j)
        done = trace[j].rule == RuleKind::Unfolding && !trace[j].inputs.empty() && trace[j].inputs[0] == d;
      if (!done) {
        r.ok = false;
        r.offending.push_back(d);
      }
    }
  }
  return r;
}

struct SequenceClass {
  bool a_sound = true;
  bool no_self_unfolding = true;
  bool all_foldings_reversible = true;
};

inline SequenceClass classify_sequence(const std::vector<TraceStep>& trace) {
  SequenceClass c;
  for (const auto& st : trace) {
    if (st.rule == RuleKind::Unfolding && st.self_unfolding) c.no_self_unfolding = false;
    if (st.rule == RuleKind::Folding && !st.reversible_folding) c.all_foldings_reversible = false;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Trace text:  STEP <n> <RULE> in=<ids> out=<ids> [at=<pos>] [def=<id>] flags=<f>

namespace detail {

inline std::string id_list(const std::vector<ClauseId>& ids) {
  if (ids.empty()) return "-";
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) s += (i ? "," : "") + to_string(ids[i]);
  return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::uint64_t parse_uint(const std::string& t, std::size_t line) {
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
    throw ParseError("expected a number, found '" + t + "'", line, 0);
  return std::stoull(t);
}

inline std::vector<ClauseId> parse_ids(const std::string& t, std::size_t line) {
  std::vector<ClauseId> out;
  if (t == "-") return out;
  for (const auto& p : split(t, ',')) out.push_back(ClauseId{parse_uint(p, line)});
  return out;
}

}  // namespace detail

inline std::string format_step(std::size_t n, const TraceStep& st) {
  std::ostringstream os;
  os << "STEP " << n << " " << rule_tag(st.rule) << " in=" << detail::id_list(st.inputs)
     << " out=" << detail::id_list(st.outputs);
  if (!st.positions.empty()) {
    os << " at=";
    for (std::size_t i = 0; i < st.positions.size(); ++i) os << (i ? "," : "") << st.positions[i];
  }
  if (st.def) os << " def=" << to_string(*st.def);
  std::string flags;
  if (st.rule == RuleKind::Unfolding) flags = st.self_unfolding ? "self_unfolding" : "-";
  if (st.rule == RuleKind::Folding) flags = st.reversible_folding ? "reversible_folding" : "-";
  if (flags.empty()) flags = "-";
  os << " flags=" << flags;
  return os.str();
}

inline std::string export_trace(const std::vector<TraceStep>& trace) {
  std::string out;
  for (std::size_t i = 0; i < trace.size(); ++i) out += format_step(i + 1, trace[i]) + "\n";
  return out;
}

/// Reads STEP lines; other lines (PAIR annotations, comments) are skipped.
inline std::vector<TraceStep> parse_trace(const std::string& text) {
  std::vector<TraceStep> out;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word) || word != "STEP") continue;
    std::string num, rule;
    if (!(ls >> num >> rule)) throw ParseError("truncated STEP line", lineno, 0);
    if (detail::parse_uint(num, lineno) != out.size() + 1)
      throw ParseError("step number " + num + " out of sequence", lineno, 0);
    TraceStep st;
    if (rule == "DEFINE") {
      st.rule = RuleKind::Definition;
    } else if (rule == "UNFOLD") {
      st.rule = RuleKind::Unfolding;
    } else if (rule == "FOLD") {
      st.rule = RuleKind::Folding;
    } else if (rule == "REPLACE") {
      st.rule = RuleKind::ConstraintReplacement;
    } else {
      throw ParseError("unknown rule '" + rule + "'", lineno, 0);
    }
    bool saw_in = false, saw_out = false, saw_flags = false;
    while (ls >> word) {
      auto eq = word.find('=');
      if (eq == std::string::npos) throw ParseError("expected key=value, found '" + word + "'", lineno, 0);
      std::string key = word.substr(0, eq), val = word.substr(eq + 1);
      if (key == "in") {
        st.inputs = detail::parse_ids(val, lineno);
        saw_in = true;
      } else if (key == "out") {
        st.outputs = detail::parse_ids(val, lineno);
        saw_out = true;
      } else if (key == "at") {
        for (const auto& p : detail::split(val, ',')) st.positions.push_back(detail::parse_uint(p, lineno));
      } else if (key == "def") {
        st.def = ClauseId{detail::parse_uint(val, lineno)};
      } else if (key == "flags") {
        saw_flags = true;
        for (const auto& f : detail::split(val, ',')) {
          if (f == "self_unfolding") {
            st.self_unfolding = true;
          } else if (f == "reversible_folding") {
            st.reversible_folding = true;
          } else if (f != "-") {
            throw ParseError("unknown flag '" + f + "'", lineno, 0);
          }
        }
      } else {
        throw ParseError("unknown field '" + key + "'", lineno, 0);
      }
    }
    if (!saw_in || !saw_out || !saw_flags) throw ParseError("STEP line needs in=, out= and flags=", lineno, 0);
    if (st.rule == RuleKind::Folding && !st.def) throw ParseError("FOLD step without def=", lineno, 0);
    out.push_back(std::move(st));
  }
  return out;
}

struct TraceCheck {
  bool well_formed = true;
  std::vector<std::string> problems;
};

/// Id discipline of a step log: outputs are never recycled, consumed clauses
/// are not used again, folding names a definition introduced earlier.
inline TraceCheck check_trace_ids(const std::vector<TraceStep>& trace) {
  TraceCheck r;
  std::set<ClauseId> produced, consumed, defs;
  auto bad = [&](std::size_t n, const std::string& m) {
    r.well_formed = false;
    r.problems.push_back("step " + std::to_string(n) + ": " + m);
  };
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& st = trace[i];
    for (auto id : st.inputs)
      if (consumed.count(id)) bad(i + 1, "clause " + to_string(id) + " was already removed");
    if (st.rule == RuleKind::Definition && !st.inputs.empty()) bad(i + 1, "DEFINE takes no inputs");
    if (st.rule == RuleKind::Definition && st.outputs.size() != 1) bad(i + 1, "DEFINE produces one clause");
    if ((st.rule == RuleKind::Unfolding || st.rule == RuleKind::Folding) && st.inputs.size() != 1)
      bad(i + 1, "expected exactly one input clause");
    if (st.rule == RuleKind::Folding) {
      if (st.outputs.size() != 1) bad(i + 1, "FOLD produces one clause");
      if (st.def && !defs.count(*st.def)) bad(i + 1, "clause " + to_string(*st.def) + " is not a definition");
    }
    if (st.rule == RuleKind::ConstraintReplacement && st.inputs.empty()) bad(i + 1, "REPLACE needs input clauses");
    for (auto id : st.inputs) consumed.insert(id);
    for (auto id : st.outputs) {
      if (produced.count(id) || consumed.count(id)) bad(i + 1, "clause id " + to_string(id) + " reused");
      produced.insert(id);
    }
    if (st.rule == RuleKind::Definition)
      for (auto id : st.outputs) defs.insert(id);
  }
  return r;
}

}  // namespace chc
