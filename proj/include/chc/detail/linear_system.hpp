#pragma once

// Fourier-Motzkin elimination over integer-coefficient rows. Rows are
// tightened with gcd rounding, so every derived row is implied over the
// integers; an empty rational shadow therefore proves integer
// unsatisfiability. Integer witnesses are reconstructed by back-substitution.

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace chc::detail {

using Big = boost::multiprecision::cpp_int;

/// sum(a[i] * x[i]) + c  (== 0 if eq, <= 0 otherwise)
struct Row {
  std::vector<Big> a;
  Big c;
  bool eq = false;
};

inline Big floor_div(const Big& n, const Big& d) {
  Big q = n / d, r = n % d;
  if (r != 0 && ((r < 0) != (d < 0))) --q;
  return q;
}

inline Big ceil_div(const Big& n, const Big& d) { return -floor_div(-n, d); }

inline Big big_gcd(Big a, Big b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    Big t = a % b;
    a = b;
    b = t;
  }
  return a;
}

enum class SysResult { Sat, Unsat, Unknown };

struct SysOutcome {
  SysResult result = SysResult::Unknown;
  std::vector<Big> witness;  // valid when result == Sat
  bool exact = true;         // eliminations preserved integer points
};

class LinearSystem {
 public:
  explicit LinearSystem(std::size_t nvars) : n_(nvars) {}

  std::size_t size() const { return n_; }

  void add(Row r) {
    r.a.resize(n_);
    rows_.push_back(std::move(r));
  }

  /// Decides satisfiability; on Sat returns an integer witness.
  SysOutcome solve(std::size_t row_cap = 4000, std::size_t node_budget = 20000) const {
    SysOutcome out;
    std::vector<Row> rows;
    std::vector<std::pair<std::size_t, Row>> defs;  // x := solved from eq row
    if (!presolve(rows_, rows, defs, nullptr)) {
      out.result = SysResult::Unsat;
      return out;
    }
    std::vector<Row> le = to_inequalities(rows);
    std::vector<std::vector<Row>> stages;
    std::vector<std::size_t> order;
    bool exact = true;
    std::vector<bool> gone(n_, false);
    for (auto& d : defs) gone[d.first] = true;
    for (;;) {
      if (!normalize_all(le)) {
        out.result = SysResult::Unsat;
        return out;
      }
      auto pick = choose_var(le, gone);
      if (!pick) break;
      std::size_t x = *pick;
      stages.push_back(le);
      order.push_back(x);
      bool ex = true;
      le = eliminate(le, x, ex);
      exact = exact && ex;
      gone[x] = true;
      if (le.size() > row_cap) return out;
    }
    // Rational shadow is feasible; search for an integer point.
    std::vector<Big> val(n_, Big(0));
    std::size_t budget = node_budget;
    if (!extend(stages, order, static_cast<long>(order.size()) - 1, val, budget, exact)) {
      out.exact = exact;
      return out;
    }
    for (auto it = defs.rbegin(); it != defs.rend(); ++it) {
      const Row& r = it->second;
      std::size_t x = it->first;
      Big s = r.c;
      for (std::size_t i = 0; i < n_; ++i)
        if (i != x && r.a[i] != 0) s += r.a[i] * val[i];
      // a_x * x + s == 0 with |a_x| == 1
      val[x] = -s * r.a[x];
    }
    for (const auto& r : rows_)
      if (!holds(r, val)) return out;
    out.result = SysResult::Sat;
    out.witness = std::move(val);
    out.exact = exact;
    return out;
  }

  struct Projection {
    bool unsat = false;
    bool exact = true;
    std::vector<Row> rows;
  };

  /// Eliminates every variable with drop[i] == true.
  Projection project(const std::vector<bool>& drop, std::size_t row_cap = 4000) const {
    Projection out;
    std::vector<Row> rows;
    std::vector<std::pair<std::size_t, Row>> defs;
    if (!presolve(rows_, rows, defs, &drop)) {
      out.unsat = true;
      return out;
    }
    std::vector<bool> gone(n_, false);
    for (std::size_t i = 0; i < n_; ++i) gone[i] = !drop[i];
    for (auto& d : defs) gone[d.first] = true;
    // Keep equalities over kept variables as equalities.
    std::vector<Row> eqs, le;
    for (auto& r : rows) {
      bool touches = false;
      for (std::size_t i = 0; i < n_; ++i)
        if (r.a[i] != 0 && !gone[i]) touches = true;
      if (r.eq && !touches) {
        eqs.push_back(r);
      } else if (r.eq) {
        Row neg = r;
        neg.eq = false;
        for (auto& x : neg.a) x = -x;
        neg.c = -neg.c;
        Row pos = r;
        pos.eq = false;
        le.push_back(std::move(pos));
        le.push_back(std::move(neg));
      } else {
        le.push_back(r);
      }
    }
    for (;;) {
      if (!normalize_all(le)) {
        out.unsat = true;
        return out;
      }
      auto pick = choose_var(le, gone);
      if (!pick) break;
      bool ex = true;
      le = eliminate(le, *pick, ex);
      out.exact = out.exact && ex;
      gone[*pick] = true;
      if (le.size() > row_cap) {
        out.exact = false;
        le.clear();
        break;
      }
    }
    for (auto& r : eqs)
      if (!normalize(r)) {
        out.unsat = true;
        return out;
      }
    // Pair up opposite inequalities into equalities.
    std::vector<bool> used(le.size(), false);
    for (std::size_t i = 0; i < le.size(); ++i) {
      if (used[i]) continue;
      for (std::size_t j = i + 1; j < le.size(); ++j) {
        if (used[j] || le[j].c != -le[i].c) continue;
        bool opp = true;
        for (std::size_t k = 0; k < n_ && opp; ++k) opp = le[j].a[k] == -le[i].a[k];
        if (opp) {
          used[i] = used[j] = true;
          Row e = le[i];
          e.eq = true;
          eqs.push_back(std::move(e));
          break;
        }
      }
    }
    out.rows = std::move(eqs);
    for (std::size_t i = 0; i < le.size(); ++i)
      if (!used[i]) out.rows.push_back(le[i]);
    return out;
  }

  static bool holds(const Row& r, const std::vector<Big>& v) {
    Big s = r.c;
    for (std::size_t i = 0; i < r.a.size(); ++i)
      if (r.a[i] != 0) s += r.a[i] * v[i];
    return r.eq ? s == 0 : s <= 0;
  }

 private:
  /// Divides by the gcd of the coefficients, rounding the constant so the
  /// row stays integer-equivalent. Returns false on a trivially false row.
  static bool normalize(Row& r) {
    Big g = 0;
    for (const auto& x : r.a)
      if (x != 0) g = big_gcd(g, x);
    if (g == 0) return r.eq ? r.c == 0 : r.c <= 0;
    if (g != 1) {
      if (r.eq) {
        if (r.c % g != 0) return false;
        r.c /= g;
      } else {
        r.c = ceil_div(r.c, g);
      }
      for (auto& x : r.a) x /= g;
    }
    return true;
  }

  static bool is_trivial(const Row& r) {
    for (const auto& x : r.a)
      if (x != 0) return false;
    return true;
  }

  /// Normalizes, drops trivial rows, keeps the tightest of parallel rows.
  static bool normalize_all(std::vector<Row>& le) {
    std::map<std::vector<Big>, Big> best;
    std::vector<std::vector<Big>> order;
    for (auto& r : le) {
      if (!normalize(r)) return false;
      if (is_trivial(r)) continue;
      auto it = best.find(r.a);
      if (it == best.end()) {
        best.emplace(r.a, r.c);
        order.push_back(r.a);
      } else if (r.c > it->second) {
        it->second = r.c;
      }
    }
    le.clear();
    for (auto& a : order) {
      Row r{a, best[a], false};
      // Opposite pair with incompatible bounds: a.x + c1 <= 0 and -a.x + c2 <= 0
      std::vector<Big> neg = a;
      for (auto& x : neg) x = -x;
      auto it = best.find(neg);
      if (it != best.end() && r.c + it->second > 0) return false;
      le.push_back(std::move(r));
    }
    return true;
  }

  /// Solves unit-coefficient equalities by substitution. When `only` is
  /// given, only variables marked there may be solved.
  bool presolve(const std::vector<Row>& in, std::vector<Row>& rows, std::vector<std::pair<std::size_t, Row>>& defs,
                const std::vector<bool>* only) const {
    rows = in;
    for (auto& r : rows)
      if (!normalize(r)) return false;
    for (;;) {
      bool progress = false;
      for (std::size_t k = 0; k < rows.size() && !progress; ++k) {
        if (!rows[k].eq) continue;
        for (std::size_t x = 0; x < n_; ++x) {
          if (only && !(*only)[x]) continue;
          if (rows[k].a[x] != 1 && rows[k].a[x] != -1) continue;
          Row def = rows[k];
          rows.erase(rows.begin() + static_cast<long>(k));
          for (auto& r : rows) {
            if (r.a[x] == 0) continue;
            // r := r - (r.a[x] / def.a[x]) * def
            Big f = r.a[x] * def.a[x];
            for (std::size_t i = 0; i < n_; ++i) r.a[i] -= f * def.a[i];
            r.c -= f * def.c;
            if (!normalize(r)) return false;
          }
          for (auto& d : defs) {
            Row& r = d.second;
            if (r.a[x] == 0) continue;
            Big f = r.a[x] * def.a[x];
            for (std::size_t i = 0; i < n_; ++i)
              if (i != d.first) r.a[i] -= f * def.a[i];
            r.c -= f * def.c;
          }
          defs.emplace_back(x, std::move(def));
          progress = true;
          break;
        }
      }
      if (!progress) break;
    }
    return true;
  }

  static std::vector<Row> to_inequalities(const std::vector<Row>& rows) {
    std::vector<Row> le;
    for (const auto& r : rows) {
      if (!r.eq) {
        le.push_back(r);
        continue;
      }
      Row p = r, q = r;
      p.eq = q.eq = false;
      for (auto& x : q.a) x = -x;
      q.c = -q.c;
      le.push_back(std::move(p));
      le.push_back(std::move(q));
    }
    return le;
  }

  std::optional<std::size_t> choose_var(const std::vector<Row>& le, const std::vector<bool>& gone) const {
    std::optional<std::size_t> best;
    long best_score = 0;
    bool best_exact = false;
    for (std::size_t x = 0; x < n_; ++x) {
      if (gone[x]) continue;
      long lo = 0, up = 0;
      bool unit_lo = true, unit_up = true;
      for (const auto& r : le) {
        if (r.a[x] > 0) {
          ++up;
          unit_up = unit_up && r.a[x] == 1;
        } else if (r.a[x] < 0) {
          ++lo;
          unit_lo = unit_lo && r.a[x] == -1;
        }
      }
      if (lo + up == 0) continue;
      bool ex = unit_lo || unit_up;
      long score = lo * up - lo - up;
      if (!best || (ex && !best_exact) || (ex == best_exact && score < best_score)) {
        best = x;
        best_score = score;
        best_exact = ex;
      }
    }
    return best;
  }

  std::vector<Row> eliminate(const std::vector<Row>& le, std::size_t x, bool& exact) const {
    std::vector<const Row*> lower, upper;
    std::vector<Row> out;
    bool unit_lo = true, unit_up = true;
    for (const auto& r : le) {
      if (r.a[x] > 0) {
        upper.push_back(&r);
        unit_up = unit_up && r.a[x] == 1;
      } else if (r.a[x] < 0) {
        lower.push_back(&r);
        unit_lo = unit_lo && r.a[x] == -1;
      } else {
        out.push_back(r);
      }
    }
    exact = lower.empty() || upper.empty() || unit_lo || unit_up;
    for (const Row* u : upper) {
      for (const Row* l : lower) {
        Big fu = -l->a[x], fl = u->a[x];
        Row r;
        r.a.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) r.a[i] = fu * u->a[i] + fl * l->a[i];
        r.c = fu * u->c + fl * l->c;
        out.push_back(std::move(r));
      }
    }
    return out;
  }

  /// Assigns stage variables from last eliminated to first, backtracking over
  /// a few candidate values per level when bounds are not integral.
  bool extend(const std::vector<std::vector<Row>>& stages, const std::vector<std::size_t>& order, long k,
              std::vector<Big>& val, std::size_t& budget, bool exact) const {
    if (k < 0) return true;
    if (budget == 0) return false;
    --budget;
    std::size_t x = order[static_cast<std::size_t>(k)];
    std::optional<Big> lo, hi;
    for (const auto& r : stages[static_cast<std::size_t>(k)]) {
      if (r.a[x] == 0) continue;
      Big s = r.c;
      for (std::size_t i = 0; i < n_; ++i)
        if (i != x && r.a[i] != 0) s += r.a[i] * val[i];
      // a x + s <= 0
      if (r.a[x] > 0) {
        Big b = floor_div(-s, r.a[x]);
        if (!hi || b < *hi) hi = b;
      } else {
        Big b = ceil_div(s, -r.a[x]);
        if (!lo || b > *lo) lo = b;
      }
    }
    if (lo && hi && *lo > *hi) return false;
    std::vector<Big> cand;
    Big start = 0;
    if (lo && start < *lo) start = *lo;
    if (hi && start > *hi) start = *hi;
    cand.push_back(start);
    std::size_t width = exact ? 1 : 6;
    for (std::size_t d = 1; cand.size() < width && d <= 2 * width; ++d) {
      for (Big v : {start + Big(d), start - Big(d)}) {
        if ((lo && v < *lo) || (hi && v > *hi)) continue;
        cand.push_back(v);
      }
    }
    for (const auto& v : cand) {
      val[x] = v;
      if (extend(stages, order, k - 1, val, budget, exact)) return true;
      if (budget == 0) break;
    }
    val[x] = 0;
    return false;
  }

  std::size_t n_;
  std::vector<Row> rows_;
};

}  // namespace chc::detail
