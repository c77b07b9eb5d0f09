#pragma once

// Ground bottom-up evaluation inside a finite value box. Everything it
// derives is a real derivation; it misses whatever needs values outside the
// box or trees deeper than the budget.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "chc/error.hpp"
#include "chc/printer.hpp"
#include "chc/syntax.hpp"

namespace chc {

struct OracleBudget {
  int depth = 4;
  long long lo = 0, hi = 3;
};

class ArrayUnsupported : public Error {
 public:
  explicit ArrayUnsupported(const std::string& m) : Error(m) {}
};

struct GroundAtom {
  std::string pred;
  std::vector<long long> args;
  friend auto operator<=>(const GroundAtom&, const GroundAtom&) = default;
  friend bool operator==(const GroundAtom&, const GroundAtom&) = default;
};

inline std::string to_string(const GroundAtom& g) {
  std::string s = g.pred;
  if (g.args.empty()) return s;
  s += "(";
  for (std::size_t i = 0; i < g.args.size(); ++i) s += (i ? "," : "") + std::to_string(g.args[i]);
  return s + ")";
}

using GroundSet = std::set<GroundAtom>;

namespace detail {

struct CRow {
  std::vector<std::pair<int, long long>> terms;  // sum terms + k REL 0
  long long k = 0;
  Rel rel = Rel::Eq;
  int last = -1;  // highest variable index, in binding order
};

/// A clause compiled against a fixed variable numbering.
struct Compiled {
  const Clause* src = nullptr;
  std::vector<Var> vars;
  std::vector<int> head;
  std::vector<std::pair<std::string, std::vector<int>>> body;
  std::vector<CRow> rows;
};

inline Compiled compile(const Clause& c) {
  Compiled k;
  k.src = &c;
  std::map<Var, int> ix;
  auto id = [&](const Var& v) {
    auto [it, fresh] = ix.emplace(v, static_cast<int>(k.vars.size()));
    if (fresh) k.vars.push_back(v);
    return it->second;
  };
  for (const auto& a : c.body) {
    std::vector<int> args;
    for (const auto& v : a.args) args.push_back(id(v));
    k.body.push_back({a.pred, args});
  }
  for (const auto& a : c.constraint.atoms) {
    const auto* la = std::get_if<LinAtom>(&a);
    if (!la) throw ArrayUnsupported("clause " + to_string(c.id) + " has array constraints");
    CRow r;
    r.rel = la->rel;
    for (const auto& t : la->lhs.terms()) r.terms.push_back({id(t.var), t.coeff});
    for (const auto& t : la->rhs.terms()) r.terms.push_back({id(t.var), -t.coeff});
    r.k = la->lhs.constant_term() - la->rhs.constant_term();
    k.rows.push_back(r);
  }
  if (c.head)
    for (const auto& v : c.head->args) k.head.push_back(id(v));
  for (const auto& v : k.vars)
    if (v.sort != Sort::Int) throw ArrayUnsupported("clause " + to_string(c.id) + " has array variables");
  for (auto& r : k.rows)
    for (const auto& [v, a] : r.terms) r.last = std::max(r.last, v);
  return k;
}

inline bool row_holds(const CRow& r, const std::vector<long long>& val) {
  __int128 s = r.k;
  for (const auto& [v, a] : r.terms) s += static_cast<__int128>(a) * val[v];
  switch (r.rel) {
    case Rel::Eq: return s == 0;
    case Rel::Le: return s <= 0;
    case Rel::Lt: return s < 0;
    case Rel::Ge: return s >= 0;
    case Rel::Gt: return s > 0;
    case Rel::Ne: return s != 0;
  }
  return false;
}

/// Enumerates valuations of one clause with body atoms drawn from the given
/// sets, calling `emit` on each valuation that satisfies the constraint.
class ClauseSolver {
 public:
  ClauseSolver(const Compiled& k, const OracleBudget& b) : k_(k), b_(b) {}

  template <typename Sources, typename Emit>
  void run(const Sources& sources, Emit&& emit) {
    val_.assign(k_.vars.size(), 0);
    bound_.assign(k_.vars.size(), false);
    atoms(0, sources, emit);
  }

 private:
  const Compiled& k_;
  const OracleBudget& b_;
  std::vector<long long> val_;
  std::vector<bool> bound_;
  bool stop_ = false;

  bool fully_bound(const CRow& r) const {
    for (const auto& [v, a] : r.terms)
      if (!bound_[v]) return false;
    return true;
  }

  bool consistent() const {
    for (const auto& r : k_.rows)
      if (fully_bound(r) && !row_holds(r, val_)) return false;
    return true;
  }

  template <typename Sources, typename Emit>
  void atoms(std::size_t i, const Sources& sources, Emit& emit) {
    if (stop_) return;
    if (i == k_.body.size()) {
      rest(emit);
      return;
    }
    const auto& [pred, args] = k_.body[i];
    for (const GroundAtom* g : sources(i, pred)) {
      std::vector<int> newly;
      bool ok = true;
      for (std::size_t j = 0; j < args.size() && ok; ++j) {
        int v = args[j];
        if (bound_[v]) {
          ok = val_[v] == g->args[j];
        } else {
          bound_[v] = true;
          val_[v] = g->args[j];
          newly.push_back(v);
        }
      }
      if (ok && consistent()) atoms(i + 1, sources, emit);
      for (int v : newly) bound_[v] = false;
      if (stop_) return;
    }
  }

  /// Solves unit equalities, then enumerates the box for what is left.
  template <typename Emit>
  void rest(Emit& emit) {
    std::vector<int> newly;
    bool progress = true;
    bool ok = true;
    while (progress && ok) {
      progress = false;
      for (const auto& r : k_.rows) {
        if (r.rel != Rel::Eq) continue;
        int free = -1, nfree = 0;
        for (const auto& [v, a] : r.terms)
          if (!bound_[v]) {
            free = v;
            ++nfree;
          }
        if (nfree != 1) continue;
        long long a = 0;
        __int128 s = r.k;
        for (const auto& [v, c] : r.terms) {
          if (v == free)
            a += c;
          else
            s += static_cast<__int128>(c) * val_[v];
        }
        if (a == 0) continue;
        if (s % a != 0) {
          ok = false;
          break;
        }
        __int128 x = -s / a;
        if (x < b_.lo || x > b_.hi) {
          ok = false;
          break;
        }
        bound_[free] = true;
        val_[free] = static_cast<long long>(x);
        newly.push_back(free);
        progress = true;
        if (!consistent()) {
          ok = false;
          break;
        }
      }
    }
    if (ok) {
      std::vector<int> open;
      for (std::size_t v = 0; v < k_.vars.size(); ++v)
        if (!bound_[v]) open.push_back(static_cast<int>(v));
      enumerate(open, 0, emit);
    }
    for (int v : newly) bound_[v] = false;
  }

  template <typename Emit>
  void enumerate(const std::vector<int>& open, std::size_t i, Emit& emit) {
    if (stop_) return;
    if (i == open.size()) {
      if (!consistent()) return;
      for (std::size_t v = 0; v < val_.size(); ++v)
        if (val_[v] < b_.lo || val_[v] > b_.hi) return;
      if (!emit(val_)) stop_ = true;
      return;
    }
    int v = open[i];
    bound_[v] = true;
    for (long long x = b_.lo; x <= b_.hi && !stop_; ++x) {
      val_[v] = x;
      if (consistent()) enumerate(open, i + 1, emit);
    }
    bound_[v] = false;
  }
};

inline void check_budget(const OracleBudget& b) {
  if (b.depth < 1) throw Error("oracle depth must be at least 1");
  if (b.lo > b.hi) throw Error("oracle box is empty");
}

using ByPred = std::map<std::string, std::vector<const GroundAtom*>>;

inline ByPred index(const GroundSet& s) {
  ByPred out;
  for (const auto& g : s) out[g.pred].push_back(&g);
  return out;
}

}  // namespace detail

/// Ground atoms with a derivation tree of height <= depth whose values all
/// lie in [lo, hi]. Goal clauses are ignored.
inline GroundSet bounded_lm(const Program& p, const OracleBudget& b) {
  detail::check_budget(b);
  std::vector<detail::Compiled> ks;
  for (const auto& c : p.clauses)
    if (c.head) ks.push_back(detail::compile(c));
  GroundSet all;
  GroundSet delta;  // atoms first derived at the previous height
  static const std::vector<const GroundAtom*> none;
  for (int h = 1; h <= b.depth; ++h) {
    GroundSet older;  // atoms of height < h - 1
    for (const auto& g : all)
      if (!delta.count(g)) older.insert(g);
    auto ix_all = detail::index(all), ix_old = detail::index(older), ix_delta = detail::index(delta);
    auto get = [&](const detail::ByPred& m, const std::string& pred) -> const std::vector<const GroundAtom*>& {
      auto it = m.find(pred);
      return it == m.end() ? none : it->second;
    };
    GroundSet fresh;
    for (const auto& k : ks) {
      auto emit = [&](const std::vector<long long>& val) {
        GroundAtom g{k.src->head->pred, {}};
        for (int v : k.head) g.args.push_back(val[v]);
        if (!all.count(g)) fresh.insert(std::move(g));
        return true;
      };
      detail::ClauseSolver solver(k, b);
      if (k.body.empty()) {
        if (h == 1) solver.run([&](std::size_t, const std::string&) -> const auto& { return none; }, emit);
        continue;
      }
      // Semi-naive: atom d comes from the previous layer, earlier atoms from
      // strictly older layers, later ones from anything known.
      for (std::size_t d = 0; d < k.body.size(); ++d) {
        solver.run(
            [&](std::size_t i, const std::string& pred) -> const std::vector<const GroundAtom*>& {
              if (i < d) return get(ix_old, pred);
              if (i == d) return get(ix_delta, pred);
              return get(ix_all, pred);
            },
            emit);
      }
    }
    if (fresh.empty()) break;
    all.insert(fresh.begin(), fresh.end());
    delta = std::move(fresh);
  }
  return all;
}

struct FalseDerivation {
  bool found = false;
  ClauseId goal{0};
  std::map<std::string, long long> witness;
};

/// Searches for a goal clause satisfied by atoms of bounded_lm.
inline FalseDerivation false_derivable(const Program& p, const OracleBudget& b) {
  detail::check_budget(b);
  std::vector<detail::Compiled> goals;
  for (const auto& c : p.clauses)
    if (!c.head) goals.push_back(detail::compile(c));
  GroundSet lm = bounded_lm(p, b);
  auto ix = detail::index(lm);
  static const std::vector<const GroundAtom*> none;
  FalseDerivation r;
  for (const auto& k : goals) {
    detail::ClauseSolver solver(k, b);
    solver.run(
        [&](std::size_t, const std::string& pred) -> const std::vector<const GroundAtom*>& {
          auto it = ix.find(pred);
          return it == ix.end() ? none : it->second;
        },
        [&](const std::vector<long long>& val) {
          r.found = true;
          r.goal = k.src->id;
          for (std::size_t v = 0; v < k.vars.size(); ++v) r.witness[k.vars[v].name] = val[v];
          return false;
        });
    if (r.found) return r;
  }
  return r;
}

struct EquisatReport {
  bool p0 = false, pn = false;        // found at the given depth
  bool p0_2k = false, pn_2k = false;  // found at twice the depth
  bool agree = false;                 // same answer at the given depth
  bool consistent = false;            // each side's finding is confirmed at 2k
};

inline EquisatReport equisat_probe(const Program& p0, const Program& pn, const OracleBudget& b) {
  OracleBudget b2 = b;
  b2.depth = 2 * b.depth;
  EquisatReport r;
  r.p0 = false_derivable(p0, b).found;
  r.pn = false_derivable(pn, b).found;
  r.p0_2k = false_derivable(p0, b2).found;
  r.pn_2k = false_derivable(pn, b2).found;
  r.agree = r.p0 == r.pn;
  r.consistent = (!r.p0 || r.pn_2k) && (!r.pn || r.p0_2k);
  return r;
}

}  // namespace chc
