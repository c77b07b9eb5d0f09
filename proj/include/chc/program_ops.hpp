#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "chc/syntax.hpp"

namespace chc {

/// Produces variable names not in a given set, using `<base>_<k>` with a
/// counter shared across calls.
class FreshNames {
 public:
  explicit FreshNames(std::size_t start = 0) : counter_(start) {}

  Var fresh(const Var& like, const std::set<std::string>& taken) {
    std::string base = like.name;
    for (;;) {
      std::string n = base + "_" + std::to_string(++counter_);
      if (!taken.count(n)) return Var{n, like.sort};
    }
  }

  std::size_t counter() const { return counter_; }

 private:
  std::size_t counter_;
};

inline std::set<std::string> var_names(const VarSet& vs) {
  std::set<std::string> out;
  for (const auto& v : vs) out.insert(v.name);
  return out;
}

/// Renames every variable of `c` that occurs in `avoid`.
inline Clause rename_apart(const Clause& c, const VarSet& avoid, FreshNames& names) {
  if (avoid.empty()) return c;
  auto own = ordered_vars(c);
  std::set<std::string> taken = var_names(avoid);
  for (const auto& v : own) taken.insert(v.name);
  Subst s;
  for (const auto& v : own) {
    if (!avoid.count(v)) continue;
    Var f = names.fresh(v, taken);
    taken.insert(f.name);
    s[v] = f;
  }
  if (s.empty()) return c;
  return substitute(c, s);
}

inline Clause rename_apart(const Clause& c, const VarSet& avoid) {
  FreshNames names;
  return rename_apart(c, avoid, names);
}

/// Renames all variables of `c` to fresh names (a variant sharing nothing
/// with `avoid` nor with its own previous names).
inline Clause rename_all(const Clause& c, const VarSet& avoid, FreshNames& names) {
  auto own = ordered_vars(c);
  std::set<std::string> taken = var_names(avoid);
  for (const auto& v : own) taken.insert(v.name);
  Subst s;
  for (const auto& v : own) {
    Var f = names.fresh(v, taken);
    taken.insert(f.name);
    s[v] = f;
  }
  return substitute(c, s);
}

/// Predicates reachable from `root` through head-to-body edges, root included.
inline std::set<std::string> dependency_cone(const Program& p, const std::string& root) {
  std::set<std::string> seen{root};
  std::vector<std::string> work{root};
  while (!work.empty()) {
    std::string q = work.back();
    work.pop_back();
    for (const Clause* c : p.defining(q))
      for (const auto& a : c->body)
        if (seen.insert(a.pred).second) work.push_back(a.pred);
  }
  return seen;
}

inline Program restrict_to(const Program& p, const std::set<std::string>& preds) {
  Program out;
  for (const auto& c : p.clauses)
    if (c.head && preds.count(c.head->pred)) out.clauses.push_back(c);
  for (const auto& pr : preds) {
    auto it = p.signatures.find(pr);
    if (it != p.signatures.end()) out.signatures.insert(*it);
  }
  return out;
}

/// Splits `p` into the clauses defining the cones of `q` and `r`.
inline std::pair<Program, Program> predicate_partition(const Program& p, const std::string& q, const std::string& r) {
  auto cq = dependency_cone(p, q);
  auto cr = dependency_cone(p, r);
  for (const auto& x : cq)
    if (cr.count(x)) throw OverlapError(x);
  return {restrict_to(p, cq), restrict_to(p, cr)};
}

/// Every predicate symbol mentioned anywhere, including signatures.
inline std::set<std::string> all_predicates(const Program& p) {
  auto out = p.predicates();
  for (const auto& [k, v] : p.signatures) out.insert(k);
  return out;
}

inline std::string fresh_predicate(const std::string& base, const std::set<std::string>& taken, std::size_t& counter) {
  for (;;) {
    std::string n = base + std::to_string(++counter);
    if (!taken.count(n)) return n;
  }
}

/// Copy of `p` with predicate symbols renamed by `ren` (others unchanged).
inline Program rename_predicates(const Program& p, const std::map<std::string, std::string>& ren) {
  auto map = [&](const std::string& s) {
    auto it = ren.find(s);
    return it == ren.end() ? s : it->second;
  };
  Program out;
  for (auto c : p.clauses) {
    if (c.head) c.head->pred = map(c.head->pred);
    for (auto& a : c.body) a.pred = map(a.pred);
    out.clauses.push_back(std::move(c));
  }
  for (const auto& [k, v] : p.signatures) out.signatures[map(k)] = v;
  return out;
}

}  // namespace chc
