#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "chc/chc.hpp"

namespace testing_support {

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::string corpus(const std::string& name) { return std::string(CHC_CORPUS) + "/" + name; }
inline std::string testdata(const std::string& name) { return std::string(CHC_TESTDATA) + "/" + name; }

inline chc::Program load(const std::string& name) { return chc::parse_program(slurp(corpus(name))); }

/// Constraint of `false :- text.`
inline chc::ConstraintConj conj(const std::string& text) {
  if (text.empty()) return {};
  return chc::parse_clause("false :- " + text + ".").constraint;
}

inline chc::Var iv(const std::string& n) { return chc::Var{n, chc::Sort::Int}; }

inline chc::QuantDisj qd(const std::string& text, std::vector<std::string> ex = {}) {
  chc::QuantDisj q = chc::QuantDisj::of(conj(text));
  for (const auto& n : ex) q.exists.push_back(iv(n));
  return q;
}

using Point = std::map<std::string, long long>;

/// Truth of a linear conjunction at an integer point, independent of the
/// engine. Array atoms are not supported.
inline bool holds(const chc::ConstraintConj& c, const Point& val) {
  using namespace chc;
  auto ev = [&](const LinExpr& e) {
    long long s = e.constant_term();
    for (const auto& t : e.terms()) s += t.coeff * val.at(t.var.name);
    return s;
  };
  for (const auto& a : c.atoms) {
    const auto& l = std::get<LinAtom>(a);
    long long x = ev(l.lhs), y = ev(l.rhs);
    bool ok = l.rel == Rel::Eq ? x == y : l.rel == Rel::Le ? x <= y : l.rel == Rel::Lt ? x < y
            : l.rel == Rel::Ge ? x >= y : l.rel == Rel::Gt ? x > y : x != y;
    if (!ok) return false;
  }
  return true;
}

/// Calls f on every point of [lo,hi]^names.
template <typename F>
void each_point(const std::vector<std::string>& names, long long lo, long long hi, F&& f) {
  Point val;
  for (const auto& n : names) val[n] = lo;
  for (;;) {
    f(val);
    std::size_t i = 0;
    while (i < names.size() && val[names[i]] == hi) val[names[i++]] = lo;
    if (i == names.size()) return;
    ++val[names[i]];
  }
}

/// Σ(a) at a point; existentials range over [lo,hi].
inline bool sigma_holds(const chc::SymbolicInterpretation& sigma, const chc::Atom& a, const Point& val, long long lo = -8,
                        long long hi = 8) {
  if (!sigma.has(a.pred)) return true;
  const auto& pi = sigma.at(a.pred);
  Point inner;
  for (std::size_t i = 0; i < pi.params.size(); ++i) inner[pi.params[i].name] = val.at(a.args[i].name);
  std::vector<std::string> ex;
  for (const auto& v : pi.formula.exists) ex.push_back(v.name);
  bool any = false;
  for (const auto& d : pi.formula.disjuncts) {
    if (ex.empty()) {
      any = any || holds(d, inner);
      continue;
    }
    each_point(ex, lo, hi, [&](const Point& e) {
      if (any) return;
      Point all = inner;
      for (const auto& [k, v] : e) all[k] = v;
      any = holds(d, all);
    });
  }
  return any;
}

/// A point of [lo,hi]^vars(c) where c and Σ(body) hold and Σ(head) fails.
inline std::optional<Point> clause_counterexample(const chc::Clause& c, const chc::SymbolicInterpretation& sigma,
                                                  long long lo, long long hi) {
  std::vector<std::string> names;
  for (const auto& v : chc::vars(c)) names.push_back(v.name);
  std::optional<Point> bad;
  each_point(names, lo, hi, [&](const Point& p) {
    if (bad || !holds(c.constraint, p)) return;
    for (const auto& a : c.body)
      if (!sigma_holds(sigma, a, p)) return;
    if (c.head && sigma_holds(sigma, *c.head, p)) return;
    bad = p;
  });
  return bad;
}

/// Whether `a` and `b` are the same clause up to variable renaming, body
/// order and constraint equivalence. Variables outside the atoms count as
/// existential.
inline bool same_clause(const chc::Clause& a, const chc::Clause& b, const chc::LiaLimits& lim = {}) {
  using namespace chc;
  if (a.head.has_value() != b.head.has_value() || a.body.size() != b.body.size()) return false;
  if (a.head && a.head->pred != b.head->pred) return false;
  auto atoms_of = [](const Clause& c) {
    std::vector<Atom> out;
    if (c.head) out.push_back(*c.head);
    out.insert(out.end(), c.body.begin(), c.body.end());
    return out;
  };
  auto atom_vars = [](const std::vector<Atom>& as) {
    VarSet out;
    for (const auto& x : as)
      for (const auto& v : x.args) out.insert(v);
    return out;
  };
  std::vector<Atom> pa = atoms_of(a);
  VarSet a_atoms = atom_vars(pa);
  // Existentials of `a` get names that cannot clash with `b`.
  Subst ex_ren;
  std::vector<Var> ex_a;
  for (const auto& v : vars(a.constraint)) {
    if (a_atoms.count(v)) continue;
    Var f{"_ex_" + v.name, v.sort};
    ex_ren[v] = f;
    ex_a.push_back(f);
  }
  std::vector<std::size_t> perm(b.body.size());
  std::iota(perm.begin(), perm.end(), 0);
  do {
    Clause bp = b;
    for (std::size_t i = 0; i < perm.size(); ++i) bp.body[i] = b.body[perm[i]];
    std::vector<Atom> tb = atoms_of(bp);
    auto th = match_atoms(pa, tb);
    if (!th) continue;
    std::set<Var> img;
    bool injective = true;
    for (const auto& [k, v] : *th) injective = injective && img.insert(v).second;
    if (!injective) continue;
    Subst full = *th;
    for (const auto& [k, v] : ex_ren) full[k] = v;
    QuantDisj lhs = QuantDisj::of(substitute(a.constraint, full));
    lhs.exists = ex_a;
    VarSet b_atoms = atom_vars(tb);
    QuantDisj rhs = QuantDisj::of(b.constraint);
    for (const auto& v : vars(b.constraint))
      if (!b_atoms.count(v)) rhs.exists.push_back(v);
    if (equiv_quant_disj(lhs, rhs, lim) == Verdict::Proved) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

/// Clauses of `expected` with no counterpart in `actual`, and vice versa,
/// matching one-to-one.
struct ProgramDiff {
  std::vector<std::string> missing, extra;
  bool empty() const { return missing.empty() && extra.empty(); }
};

inline ProgramDiff compare_programs(const chc::Program& expected, const chc::Program& actual) {
  ProgramDiff d;
  std::vector<bool> used(actual.clauses.size(), false);
  for (const auto& e : expected.clauses) {
    bool found = false;
    for (std::size_t i = 0; i < actual.clauses.size() && !found; ++i) {
      if (used[i] || !same_clause(e, actual.clauses[i])) continue;
      used[i] = found = true;
    }
    if (!found) d.missing.push_back(chc::to_string(e));
  }
  for (std::size_t i = 0; i < actual.clauses.size(); ++i)
    if (!used[i]) d.extra.push_back(chc::to_string(actual.clauses[i]));
  return d;
}

/// Clauses produced by the last trace step.
inline std::vector<chc::ClauseId> last_outputs(const chc::TransformationState& s) { return s.trace.back().outputs; }

/// The hand derivation of the su/sq example: define su_sq, unfold su and
/// then sq, drop the two unsatisfiable clauses, simplify the other two and
/// fold the goal and the recursive clause.
struct Example3 {
  chc::TransformationState s;
  chc::ClauseId def{0}, goal{3}, base{0}, rec{0};
};

inline Example3 replay_example3() {
  using namespace chc;
  Example3 x;
  x.s = TransformationState::start(load("sum_square.chc"));
  auto& s = x.s;
  s = apply_definition(s, parse_clause("su_sq(M,R0,Sum,N,S0,Sqr) :- M = Y, su(M,R0,Sum), sq(N,Y,S0,Sqr).", ClauseId{0}));
  x.def = last_outputs(s)[0];
  s = apply_unfold(s, x.def, 0);
  auto after_su = last_outputs(s);  // su base, su recursive
  s = apply_unfold(s, after_su[0], 0);
  auto from_base = last_outputs(s);
  s = apply_unfold(s, after_su[1], 1);
  auto from_rec = last_outputs(s);
  // from_base = {8, 9}, from_rec = {10, 11} in the hand numbering.
  s = apply_replace(s, {from_base[1]}, {});
  s = apply_replace(s, {from_rec[0]}, {});
  const Clause& c8 = s.current.clauses[s.index_of(from_base[0])];
  s = apply_replace(s, {c8.id}, {conj("M =< 0, Sum = R0, Sqr = S0")});
  x.base = last_outputs(s)[0];
  const Clause& c11 = s.current.clauses[s.index_of(from_rec[1])];
  const Atom &su = c11.body[0], &sq = c11.body[1];
  std::string m1 = su.args[0].name, r1 = su.args[1].name, y1 = sq.args[1].name, s1 = sq.args[2].name;
  s = apply_replace(s, {c11.id},
                    {conj("M > 0, " + m1 + " = M - 1, " + r1 + " = R0 + M, " + s1 + " = S0 + N, " + m1 + " = " + y1)});
  auto c13 = last_outputs(s)[0];
  const Clause& d = *s.defs.find(x.def);
  const Clause& g = s.current.clauses[s.index_of(x.goal)];
  s = apply_fold(s, x.goal, {0, 1}, x.def, *match_atoms(d.body, g.body));
  x.goal = last_outputs(s)[0];
  const Clause& d2 = *s.defs.find(x.def);
  const Clause& r = s.current.clauses[s.index_of(c13)];
  s = apply_fold(s, c13, {0, 1}, x.def, *match_atoms(d2.body, r.body));
  x.rec = last_outputs(s)[0];
  return x;
}

}  // namespace testing_support
