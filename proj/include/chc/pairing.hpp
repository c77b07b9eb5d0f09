#pragma once

// The Predicate Pairing strategy: unfold a Q-atom and an R-atom once, then
// fold every mixed pair of body atoms into a paired predicate, reusing a
// definition when one folds and introducing a new one otherwise.

#include <deque>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "chc/kernel.hpp"
#include "chc/lia.hpp"
#include "chc/program_ops.hpp"

namespace chc {

class InputShapeError : public Error {
 public:
  using Error::Error;
};

class CapExceeded : public Error {
 public:
  explicit CapExceeded(std::size_t cap)
      : Error("definition cap of " + std::to_string(cap) + " exceeded"), cap_(cap) {}
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t cap_;
};

class NoMixedPair : public Error {
 public:
  using Error::Error;
};

enum class TieBreak { Leftmost, Lexicographic };
enum class DefScan { NewestFirst, OldestFirst };

struct PairingConfig {
  std::size_t max_defs = 64;
  TieBreak tie_break = TieBreak::Leftmost;
  DefScan def_scan = DefScan::NewestFirst;
  bool iterate = false;
  AClass a_classifier = AClass::Lia;
  bool duplicate_overlapping = true;  // copy a cone when both atoms share predicates
  std::size_t max_rounds = 32;
  LiaLimits limits;
};

struct PairEvent {
  std::size_t after_step = 0;  // number of trace steps preceding the choice
  std::string a, b;
  std::size_t eq = 0;
};

struct PairingResult {
  Program transf;
  Program defs;
  TransformationState state;
  SequenceClass report;
  std::vector<PairEvent> pairs;
  std::vector<std::string> overlaps;  // goals left untransformed

  /// Step log with PAIR lines interleaved.
  std::string log() const {
    std::string out;
    std::size_t k = 0;
    for (std::size_t i = 0; i <= state.trace.size(); ++i) {
      while (k < pairs.size() && pairs[k].after_step == i) {
        out += "PAIR chosen=(" + pairs[k].a + "," + pairs[k].b + ") eq=" + std::to_string(pairs[k].eq) + "\n";
        ++k;
      }
      if (i < state.trace.size()) out += format_step(i + 1, state.trace[i]) + "\n";
    }
    return out;
  }
};

struct PairChoice {
  std::size_t pos_a = 0, pos_b = 0;
  std::set<EqPair> eq;
};

/// The (Q-atom, R-atom) pair of the body with the most entailed equalities.
inline PairChoice select_pair(const Clause& e, const std::set<std::string>& q_preds, const std::set<std::string>& r_preds,
                              TieBreak tie = TieBreak::Leftmost, const LiaLimits& lim = {}) {
  std::optional<PairChoice> best;
  std::string best_key;
  for (std::size_t i = 0; i < e.body.size(); ++i) {
    if (!q_preds.count(e.body[i].pred)) continue;
    for (std::size_t j = 0; j < e.body.size(); ++j) {
      if (!r_preds.count(e.body[j].pred)) continue;
      PairChoice c{i, j, eq_set(e.constraint, e.body[i], e.body[j], lim)};
      std::string key = to_string(e.body[i]) + "," + to_string(e.body[j]);
      bool better = !best || c.eq.size() > best->eq.size();
      if (best && tie == TieBreak::Lexicographic && c.eq.size() == best->eq.size() && key < best_key) better = true;
      if (better) {
        best = c;
        best_key = key;
      }
    }
  }
  if (!best) throw NoMixedPair("clause " + to_string(e.id) + " has no Q/R atom pair");
  return *best;
}

struct DefMatch {
  ClauseId def;
  Subst theta;
};

/// First definition (in scan order) that folds the atoms at `pos_a`,
/// `pos_b` of clause `id`.
inline std::optional<DefMatch> find_matching_def(const TransformationState& s, ClauseId id, std::size_t pos_a,
                                                 std::size_t pos_b, DefScan scan = DefScan::NewestFirst) {
  const Clause& e = s.current.clauses[s.index_of(id)];
  std::vector<const Clause*> order;
  for (const auto& d : s.defs.clauses) order.push_back(&d);
  if (scan == DefScan::NewestFirst) std::reverse(order.begin(), order.end());
  for (const Clause* d : order) {
    auto th = match_atoms(d->body, {e.body[pos_a], e.body[pos_b]});
    if (!th) continue;
    try {
      plan_fold(s, id, {pos_a, pos_b}, d->id, *th);
      return DefMatch{d->id, *th};
    } catch (const KernelError&) {
    }
  }
  return std::nullopt;
}

/// Standalone form over a definition set: the clause is checked against
/// each definition by a dry-run fold.
inline std::optional<DefMatch> find_matching_def(const Program& defs, const Clause& e, std::size_t pos_a,
                                                 std::size_t pos_b, DefScan scan = DefScan::NewestFirst) {
  TransformationState s;
  s.current.clauses = {e};
  s.defs = defs;
  return find_matching_def(s, e.id, pos_a, pos_b, scan);
}

namespace detail {

inline bool has_mixed(const Clause& c, const std::set<std::string>& q, const std::set<std::string>& r) {
  bool hq = false, hr = false;
  for (const auto& a : c.body) {
    hq = hq || q.count(a.pred);
    hr = hr || r.count(a.pred);
  }
  return hq && hr;
}

/// One run of the strategy on clause `goal` of `s.current`.
inline void pairing_round(TransformationState& s, ClauseId goal, const std::set<std::string>& q_preds,
                          const std::set<std::string>& r_preds, const PairingConfig& cfg, std::vector<PairEvent>& events,
                          std::size_t& defs_made, std::size_t& pred_counter) {
  std::deque<ClauseId> in_cls{goal};
  while (!in_cls.empty()) {
    ClauseId cid = in_cls.front();
    in_cls.pop_front();
    const Clause& c = s.current.clauses[s.index_of(cid)];
    if (!has_mixed(c, q_preds, r_preds)) continue;
    PairChoice first = select_pair(c, q_preds, r_preds, cfg.tie_break, cfg.limits);

    // UNFOLDING: the Q-atom, then the R-atom in each result.
    std::size_t before = s.current.clauses[s.index_of(cid)].body.size();
    s = apply_unfold(std::move(s), cid, first.pos_a);
    std::vector<ClauseId> step1 = s.trace.back().outputs;
    std::vector<ClauseId> unfolded;
    for (auto id : step1) {
      std::size_t after = s.current.clauses[s.index_of(id)].body.size();
      std::size_t pb = first.pos_b;
      if (pb > first.pos_a) pb = pb + after - before;
      s = apply_unfold(std::move(s), id, pb);
      for (auto o : s.trace.back().outputs) unfolded.push_back(o);
    }
    // Clauses with unsatisfiable constraints are removed.
    std::vector<ClauseId> folded_cls;
    for (auto id : unfolded) {
      const Clause& u = s.current.clauses[s.index_of(id)];
      if (is_satisfiable(u.constraint, cfg.limits) == Verdict::Disproved) {
        s = apply_replace(std::move(s), {id}, {});
      } else {
        folded_cls.push_back(id);
      }
    }

    // DEFINITION & FOLDING
    for (auto id : folded_cls) {
      ClauseId cur = id;
      for (;;) {
        const Clause& e = s.current.clauses[s.index_of(cur)];
        if (!has_mixed(e, q_preds, r_preds)) break;
        PairChoice pc = select_pair(e, q_preds, r_preds, cfg.tie_break, cfg.limits);
        events.push_back(PairEvent{s.trace.size(), to_string(e.body[pc.pos_a]), to_string(e.body[pc.pos_b]), pc.eq.size()});
        auto m = find_matching_def(s, cur, pc.pos_a, pc.pos_b, cfg.def_scan);
        if (m) {
          s = apply_fold(std::move(s), cur, {pc.pos_a, pc.pos_b}, m->def, m->theta);
        } else {
          if (defs_made >= cfg.max_defs) throw CapExceeded(cfg.max_defs);
          const Atom a = e.body[pc.pos_a];
          const Atom b = e.body[pc.pos_b];
          Clause d;
          std::vector<Var> z;
          for (const auto& v : a.args) push_unique(z, v);
          for (const auto& v : b.args) push_unique(z, v);
          d.head = Atom{fresh_predicate("new", s.seen_preds, pred_counter), z};
          for (const auto& [x, y] : pc.eq)
            if (!(x == y)) d.constraint.add(make_lin(x, Rel::Eq, y));
          d.body = {a, b};
          s = apply_definition(std::move(s), d);
          ++defs_made;
          ClauseId did = s.trace.back().outputs[0];
          in_cls.push_back(did);
          Subst id_theta;
          for (const auto& v : ordered_vars(*s.defs.find(did))) id_theta[v] = v;
          s = apply_fold(std::move(s), cur, {pc.pos_a, pc.pos_b}, did, id_theta);
        }
        cur = s.trace.back().outputs[0];
      }
    }
  }
}

}  // namespace detail

inline PairingResult predicate_pairing(const Clause& c_init, const Program& q_prog, const Program& r_prog,
                                       const PairingConfig& cfg = {}) {
  if (cfg.max_defs < 1) throw InputShapeError("max_defs must be positive");
  if (!c_init.is_goal()) throw InputShapeError("the initial clause must be a goal");
  std::set<std::string> qp = all_predicates(q_prog), rp = all_predicates(r_prog);
  for (const auto& x : qp)
    if (rp.count(x)) throw InputShapeError("Q and R share predicate '" + x + "'");
  if (!detail::has_mixed(c_init, qp, rp)) throw InputShapeError("the initial clause needs a Q-atom and an R-atom");
  Program p0;
  std::set<ClauseId> ids;
  auto add = [&](const Clause& c) {
    if (!ids.insert(c.id).second) throw InputShapeError("clause id " + to_string(c.id) + " used twice");
    p0.clauses.push_back(c);
  };
  add(c_init);
  for (const auto& c : q_prog.clauses) add(c);
  for (const auto& c : r_prog.clauses) add(c);
  for (const auto* sig : {&q_prog.signatures, &r_prog.signatures})
    for (const auto& [k, v] : *sig) p0.signatures[k] = v;
  KernelConfig kc;
  kc.a_class = cfg.a_classifier;
  kc.limits = cfg.limits;
  TransformationState s = TransformationState::start(p0, kc);
  PairingResult res;
  std::size_t made = 0, counter = 0;
  detail::pairing_round(s, c_init.id, qp, rp, cfg, res.pairs, made, counter);
  res.transf = s.current;
  res.defs = s.defs;
  res.report = classify_sequence(s.trace);
  res.state = std::move(s);
  return res;
}

namespace detail {

inline bool cones_disjoint(const Program& p, const std::string& a, const std::string& b) {
  auto ca = dependency_cone(p, a), cb = dependency_cone(p, b);
  for (const auto& x : ca)
    if (cb.count(x)) return false;
  return true;
}

/// Goal clause with two body atoms whose cones are disjoint, and the
/// Eq-maximal such pair.
struct GoalPair {
  ClauseId goal;
  std::size_t pos_a, pos_b;
};

inline std::optional<GoalPair> next_goal_pair(const Program& p, const std::set<ClauseId>& skip, const PairingConfig& cfg) {
  for (const auto& c : p.clauses) {
    if (!c.is_goal() || c.body.size() < 2 || skip.count(c.id)) continue;
    std::optional<GoalPair> best;
    std::size_t best_eq = 0;
    for (std::size_t i = 0; i < c.body.size(); ++i) {
      for (std::size_t j = i + 1; j < c.body.size(); ++j) {
        if (!cones_disjoint(p, c.body[i].pred, c.body[j].pred)) continue;
        std::size_t n = eq_set(c.constraint, c.body[i], c.body[j], cfg.limits).size();
        if (!best || n > best_eq) {
          best = GoalPair{c.id, i, j};
          best_eq = n;
        }
      }
    }
    if (best) return best;
  }
  return std::nullopt;
}

/// Goal clause with two atoms of overlapping cones (and no disjoint pair).
inline std::optional<GoalPair> overlapping_goal_pair(const Program& p, const std::set<ClauseId>& skip,
                                                     const PairingConfig& cfg) {
  for (const auto& c : p.clauses) {
    if (!c.is_goal() || c.body.size() < 2 || skip.count(c.id)) continue;
    std::optional<GoalPair> best;
    std::size_t best_eq = 0;
    for (std::size_t i = 0; i < c.body.size(); ++i) {
      for (std::size_t j = i + 1; j < c.body.size(); ++j) {
        std::size_t n = eq_set(c.constraint, c.body[i], c.body[j], cfg.limits).size();
        if (!best || n > best_eq) {
          best = GoalPair{c.id, i, j};
          best_eq = n;
        }
      }
    }
    if (best) return best;
  }
  return std::nullopt;
}

}  // namespace detail

/// Repeats the strategy on goal clauses while some goal body has two atoms
/// from disjoint predicate cones. Overlapping cones are separated by copying
/// the second atom's cone under fresh predicate names, unless disabled.
/// Without `cfg.iterate` only one pairing round runs. A nonempty `goals`
/// restricts the rounds to those goal clauses and the goals derived from them.
inline PairingResult iterate_pairing(const Program& p, const PairingConfig& cfg = {},
                                    const std::vector<ClauseId>& goals = {}) {
  PairingResult res;
  Program cur = p;
  std::vector<TraceStep> trace;
  Program all_defs;
  std::set<std::string> seen = all_predicates(p);
  std::set<ClauseId> skip;
  std::uint64_t next_id = p.max_id().value + 1;
  std::size_t made = 0, counter = 0, dup_counter = 0;
  FreshNames names;
  KernelConfig kc;
  kc.a_class = cfg.a_classifier;
  kc.limits = cfg.limits;
  TransformationState s = TransformationState::start(cur, kc);

  if (!goals.empty()) {
    std::set<ClauseId> wanted(goals.begin(), goals.end());
    for (auto id : wanted)
      if (!cur.contains(id) || !cur.find(id)->is_goal()) throw InputShapeError("clause " + to_string(id) + " is not a goal");
    for (const auto& c : cur.clauses)
      if (c.is_goal() && !wanted.count(c.id)) skip.insert(c.id);
  }
  std::size_t rounds = 0, copies = 0;
  while (rounds < (cfg.iterate ? cfg.max_rounds : 1) && copies < cfg.max_rounds) {
    auto gp = detail::next_goal_pair(cur, skip, cfg);
    if (!gp) {
      auto ov = detail::overlapping_goal_pair(cur, skip, cfg);
      if (!ov) break;
      const Clause& g = *cur.find(ov->goal);
      // Only atoms of the input program are copied; predicates introduced
      // by earlier rounds are not paired with themselves.
      bool introduced = false;
      for (const auto& d : all_defs.clauses)
        introduced = introduced || d.head->pred == g.body[ov->pos_a].pred || d.head->pred == g.body[ov->pos_b].pred;
      if (!cfg.duplicate_overlapping || introduced) {
        res.overlaps.push_back("goal " + to_string(g.id) + ": predicates of " + to_string(g.body[ov->pos_a]) + " and " +
                               to_string(g.body[ov->pos_b]) + " overlap");
        skip.insert(g.id);
        continue;
      }
      // Copy the cone of the second atom under fresh names.
      auto cone = dependency_cone(cur, g.body[ov->pos_b].pred);
      std::map<std::string, std::string> ren;
      for (const auto& x : cone) {
        std::string n = fresh_predicate(x + "_", seen, dup_counter);
        seen.insert(n);
        ren[x] = n;
      }
      Program copy = rename_predicates(restrict_to(cur, cone), ren);
      for (auto& c : copy.clauses) c.id = ClauseId{next_id++};
      for (auto& c : cur.clauses)
        if (c.id == g.id) c.body[ov->pos_b].pred = ren[c.body[ov->pos_b].pred];
      cur.clauses.insert(cur.clauses.end(), copy.clauses.begin(), copy.clauses.end());
      for (const auto& [k, v] : copy.signatures) cur.signatures[k] = v;
      ++copies;
      continue;
    }
    const Clause& g = *cur.find(gp->goal);
    auto qp = dependency_cone(cur, g.body[gp->pos_a].pred);
    auto rp = dependency_cone(cur, g.body[gp->pos_b].pred);
    // Each round starts a fresh sequence whose P0 is the current program.
    s = TransformationState::start(cur, kc);
    s.seen_preds.insert(seen.begin(), seen.end());
    s.next_id = std::max(s.next_id, next_id);
    s.names = names;
    std::vector<PairEvent> events;
    detail::pairing_round(s, g.id, qp, rp, cfg, events, made, counter);
    for (auto& ev : events) {
      ev.after_step += trace.size();
      res.pairs.push_back(ev);
    }
    trace.insert(trace.end(), s.trace.begin(), s.trace.end());
    for (const auto& d : s.defs.clauses) all_defs.clauses.push_back(d);
    for (const auto& [k, v] : s.defs.signatures) all_defs.signatures[k] = v;
    seen.insert(s.seen_preds.begin(), s.seen_preds.end());
    next_id = s.next_id;
    names = s.names;
    cur = s.current;
    ++rounds;
  }
  s.current = cur;
  s.trace = trace;
  s.defs = all_defs;
  s.p0_preds = all_predicates(p);
  res.transf = cur;
  res.defs = all_defs;
  res.report = classify_sequence(trace);
  res.state = std::move(s);
  return res;
}

}  // namespace chc
