#pragma once

// SMT-LIB text: HORN emission of programs, and reading and writing of
// define-fun model files.

#include <cctype>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "chc/error.hpp"
#include "chc/lia.hpp"
#include "chc/model.hpp"
#include "chc/syntax.hpp"

namespace chc {

// ---------------------------------------------------------------------------
// Emission

namespace smt {

inline std::string sort_text(Sort s) { return s == Sort::Int ? "Int" : "(Array Int Int)"; }

inline std::string num(long long k) {
  std::string s = std::to_string(k);
  return k < 0 ? "(- " + s.substr(1) + ")" : s;
}

inline std::string term(const LinTerm& t) {
  if (t.coeff == 1) return t.var.name;
  if (t.coeff == -1) return "(- " + t.var.name + ")";
  return "(* " + num(t.coeff) + " " + t.var.name + ")";
}

inline std::string expr(const LinExpr& e) {
  std::vector<std::string> parts;
  for (const auto& t : e.terms()) parts.push_back(term(t));
  if (e.constant_term() != 0 || parts.empty()) parts.push_back(num(e.constant_term()));
  if (parts.size() == 1) return parts[0];
  std::string out = "(+";
  for (const auto& p : parts) out += " " + p;
  return out + ")";
}

inline const char* rel_op(Rel r) {
  switch (r) {
    case Rel::Eq: return "=";
    case Rel::Le: return "<=";
    case Rel::Lt: return "<";
    case Rel::Ge: return ">=";
    case Rel::Gt: return ">";
    case Rel::Ne: return "=";
  }
  return "?";
}

inline std::string atom(const ConstraintAtom& a) {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LinAtom>) {
          std::string s = std::string("(") + rel_op(n.rel) + " " + expr(n.lhs) + " " + expr(n.rhs) + ")";
          return n.rel == Rel::Ne ? "(not " + s + ")" : s;
        } else if constexpr (std::is_same_v<T, ArrRead>) {
          return "(= (select " + n.arr.name + " " + n.idx.name + ") " + n.val.name + ")";
        } else if constexpr (std::is_same_v<T, ArrWrite>) {
          return "(= (store " + n.arr.name + " " + n.idx.name + " " + n.val.name + ") " + n.out.name + ")";
        } else {
          return "(= " + n.lhs.name + " " + n.rhs.name + ")";
        }
      },
      a);
}

inline std::string atom(const Atom& a) {
  if (a.args.empty()) return a.pred;
  std::string s = "(" + a.pred;
  for (const auto& v : a.args) s += " " + v.name;
  return s + ")";
}

inline std::string conj(const std::vector<std::string>& items) {
  if (items.empty()) return "true";
  if (items.size() == 1) return items[0];
  std::string s = "(and";
  for (const auto& i : items) s += " " + i;
  return s + ")";
}

inline std::string conj(const ConstraintConj& c) {
  std::vector<std::string> items;
  for (const auto& a : c.atoms) items.push_back(atom(a));
  return conj(items);
}

inline std::string binders(const std::vector<Var>& vs) {
  std::string s = "(";
  for (const auto& v : vs) s += "(" + v.name + " " + sort_text(v.sort) + ")";
  return s + ")";
}

inline std::string formula(const QuantDisj& q) {
  std::string body;
  if (q.disjuncts.empty()) {
    body = "false";
  } else if (q.disjuncts.size() == 1) {
    body = conj(q.disjuncts[0]);
  } else {
    body = "(or";
    for (const auto& d : q.disjuncts) body += " " + conj(d);
    body += ")";
  }
  if (q.exists.empty()) return body;
  return "(exists " + binders(q.exists) + " " + body + ")";
}

}  // namespace smt

/// HORN-logic script for `p`: predicate declarations in order of first
/// appearance, then one assertion per clause.
inline std::string emit_smtlib(const Program& p) {
  std::ostringstream out;
  out << "(set-logic HORN)\n";
  std::vector<std::string> order;
  std::set<std::string> seen;
  auto note = [&](const Atom& a) {
    if (seen.insert(a.pred).second) order.push_back(a.pred);
  };
  for (const auto& c : p.clauses) {
    if (c.head) note(*c.head);
    for (const auto& a : c.body) note(a);
  }
  for (const auto& [pred, sorts] : p.signatures)
    if (seen.insert(pred).second) order.push_back(pred);
  auto sorts_of = [&](const std::string& pred) {
    std::vector<Sort> s;
    if (auto it = p.signatures.find(pred); it != p.signatures.end()) return it->second;
    for (const auto& c : p.clauses) {
      if (c.head && c.head->pred == pred) {
        for (const auto& v : c.head->args) s.push_back(v.sort);
        return s;
      }
      for (const auto& a : c.body)
        if (a.pred == pred) {
          for (const auto& v : a.args) s.push_back(v.sort);
          return s;
        }
    }
    return s;
  };
  for (const auto& pred : order) {
    out << "(declare-fun " << pred << " (";
    auto s = sorts_of(pred);
    for (std::size_t i = 0; i < s.size(); ++i) out << (i ? " " : "") << smt::sort_text(s[i]);
    out << ") Bool)\n";
  }
  for (const auto& c : p.clauses) {
    std::vector<std::string> items;
    for (const auto& a : c.constraint.atoms) items.push_back(smt::atom(a));
    for (const auto& a : c.body) items.push_back(smt::atom(a));
    std::string imp = "(=> " + smt::conj(items) + " " + (c.head ? smt::atom(*c.head) : "false") + ")";
    auto vs = ordered_vars(c);
    if (vs.empty())
      out << "(assert " << imp << ")\n";
    else
      out << "(assert (forall " << smt::binders(vs) << " " << imp << "))\n";
  }
  return out.str();
}

/// One define-fun per interpreted predicate, in name order.
inline std::string print_model(const SymbolicInterpretation& sigma) {
  std::string out;
  for (const auto& [pred, pi] : sigma.entries())
    out += "(define-fun " + pred + " " + smt::binders(pi.params) + " Bool " + smt::formula(pi.formula) + ")\n";
  return out;
}

// ---------------------------------------------------------------------------
// S-expressions

struct Sexpr {
  bool is_list = false;
  std::string atom;
  std::vector<Sexpr> items;
  int line = 1, col = 1;

  bool is(std::string_view s) const { return !is_list && atom == s; }
};

namespace detail {

class SexprReader {
 public:
  explicit SexprReader(std::string_view text) : s_(text) {}

  std::vector<Sexpr> read_all() {
    std::vector<Sexpr> out;
    for (;;) {
      skip();
      if (i_ >= s_.size()) return out;
      out.push_back(read());
    }
  }

 private:
  std::string_view s_;
  std::size_t i_ = 0;
  int line_ = 1, col_ = 1;

  void advance() {
    if (s_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  void skip() {
    while (i_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[i_]))) {
        advance();
      } else if (s_[i_] == ';') {
        while (i_ < s_.size() && s_[i_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  Sexpr read() {
    Sexpr e;
    e.line = line_;
    e.col = col_;
    char ch = s_[i_];
    if (ch == ')') throw ParseError("unexpected ')'", line_, col_);
    if (ch == '(') {
      advance();
      e.is_list = true;
      for (;;) {
        skip();
        if (i_ >= s_.size()) throw ParseError("unterminated list", e.line, e.col);
        if (s_[i_] == ')') {
          advance();
          return e;
        }
        e.items.push_back(read());
      }
    }
    if (ch == '|') {
      advance();
      while (i_ < s_.size() && s_[i_] != '|') {
        e.atom += s_[i_];
        advance();
      }
      if (i_ >= s_.size()) throw ParseError("unterminated quoted symbol", e.line, e.col);
      advance();
      return e;
    }
    while (i_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[i_])) && s_[i_] != '(' && s_[i_] != ')' &&
           s_[i_] != ';') {
      e.atom += s_[i_];
      advance();
    }
    return e;
  }
};

inline ParseError unsupported(const Sexpr& e, const std::string& what) {
  return ParseError("unsupported construct '" + what + "'", e.line, e.col);
}

inline std::string head_name(const Sexpr& e) {
  if (!e.is_list) return e.atom;
  if (e.items.empty() || e.items[0].is_list) return "()";
  return e.items[0].atom;
}

inline bool is_numeral(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

/// Converts a define-fun body into disjunctive normal form.
class ModelReader {
 public:
  struct Binding;
  using Env = std::shared_ptr<const Binding>;
  struct Binding {
    std::string name;
    const Sexpr* value;
    Env defined_in;
    Env next;
  };

  ModelReader(std::map<std::string, Var> scope, std::set<std::string> taken)
      : scope_(std::move(scope)), taken_(std::move(taken)) {}

  QuantDisj run(const Sexpr& body) {
    QuantDisj out;
    out.disjuncts = dnf(body, false, nullptr, scope_);
    out.exists = exists_;
    return out;
  }

 private:
  std::map<std::string, Var> scope_;
  std::set<std::string> taken_;
  std::vector<Var> exists_;
  std::size_t counter_ = 0;
  static constexpr std::size_t cap = 4096;

  using Dnf = std::vector<ConstraintConj>;

  static const Binding* lookup(const Env& env, const std::string& n) {
    for (const Binding* b = env.get(); b; b = b->next.get())
      if (b->name == n) return b;
    return nullptr;
  }

  static Dnf product(const Dnf& a, const Dnf& b, const Sexpr& at) {
    Dnf out;
    for (const auto& x : a)
      for (const auto& y : b) {
        ConstraintConj z = x;
        z.append(y);
        out.push_back(std::move(z));
        if (out.size() > cap) throw ParseError("formula too large for disjunctive normal form", at.line, at.col);
      }
    return out;
  }

  static Dnf single(ConstraintAtom a) {
    ConstraintConj c;
    c.add(std::move(a));
    return {c};
  }

  Dnf dnf(const Sexpr& e, bool neg, const Env& env, const std::map<std::string, Var>& scope) {
    if (!e.is_list) {
      if (e.atom == "true" || e.atom == "false") {
        bool t = (e.atom == "true") != neg;
        return t ? Dnf{ConstraintConj{}} : Dnf{};
      }
      if (const Binding* b = lookup(env, e.atom)) return dnf(*b->value, neg, b->defined_in, scope);
      throw unsupported(e, e.atom);
    }
    std::string h = head_name(e);
    const auto& it = e.items;
    if (h == "not") {
      if (it.size() != 2) throw unsupported(e, "not");
      return dnf(it[1], !neg, env, scope);
    }
    if (h == "and" || h == "or") {
      bool conj = (h == "and") != neg;
      Dnf acc = conj ? Dnf{ConstraintConj{}} : Dnf{};
      for (std::size_t i = 1; i < it.size(); ++i) {
        Dnf d = dnf(it[i], neg, env, scope);
        if (conj) {
          acc = product(acc, d, e);
        } else {
          for (auto& x : d) acc.push_back(std::move(x));
          if (acc.size() > cap) throw ParseError("formula too large for disjunctive normal form", e.line, e.col);
        }
      }
      return acc;
    }
    if (h == "=>") {
      if (it.size() != 3) throw unsupported(e, "=>");
      // a => b  is  (not a) or b
      Sexpr o;
      o.is_list = true;
      o.line = e.line;
      o.col = e.col;
      Sexpr op;
      op.atom = "or";
      Sexpr na;
      na.is_list = true;
      Sexpr nt;
      nt.atom = "not";
      na.items = {nt, it[1]};
      o.items = {op, na, it[2]};
      return dnf(o, neg, env, scope);
    }
    if (h == "exists") {
      if (neg) throw unsupported(e, "exists under negation");
      if (it.size() != 3 || !it[1].is_list) throw unsupported(e, "exists");
      auto inner = scope;
      for (const auto& b : it[1].items) {
        if (!b.is_list || b.items.size() != 2 || b.items[0].is_list) throw unsupported(b, "binder");
        Var v{b.items[0].atom, read_sort(b.items[1])};
        if (taken_.count(v.name)) {
          Var f;
          do {
            f = Var{v.name + "_e" + std::to_string(++counter_), v.sort};
          } while (taken_.count(f.name));
          v = f;
        }
        taken_.insert(v.name);
        exists_.push_back(v);
        inner[b.items[0].atom] = v;
      }
      return dnf(it[2], neg, env, inner);
    }
    if (h == "forall") throw unsupported(e, "forall");
    if (h == "let") {
      if (it.size() != 3 || !it[1].is_list) throw unsupported(e, "let");
      Env ext = env;
      for (const auto& b : it[1].items) {
        if (!b.is_list || b.items.size() != 2 || b.items[0].is_list) throw unsupported(b, "let binding");
        ext = std::make_shared<const Binding>(Binding{b.items[0].atom, &b.items[1], env, ext});
      }
      return dnf(it[2], neg, ext, scope);
    }
    if (h == "ite") {
      if (it.size() != 4) throw unsupported(e, "ite");
      // (c and a) or (not c and b), negated branchwise
      Dnf c = dnf(it[1], false, env, scope);
      Dnf nc = dnf(it[1], true, env, scope);
      Dnf a = dnf(it[2], neg, env, scope);
      Dnf b = dnf(it[3], neg, env, scope);
      Dnf out = product(c, a, e);
      for (auto& x : product(nc, b, e)) out.push_back(std::move(x));
      return out;
    }
    if (h == "=" || h == "<=" || h == "<" || h == ">=" || h == ">" || h == "distinct") {
      if (it.size() != 3) throw unsupported(e, h + " with " + std::to_string(it.size() - 1) + " arguments");
      if (h == "=" || h == "distinct") {
        auto l = array_var(it[1], env, scope), r = array_var(it[2], env, scope);
        if (l || r) {
          if (!l || !r) throw SortError("sort mismatch at " + std::to_string(e.line) + ":" + std::to_string(e.col));
          bool eq = (h == "=") != neg;
          if (!eq) throw unsupported(e, "array disequality");
          return single(ArrEq{*l, *r});
        }
      }
      LinExpr l = term(it[1], env, scope), r = term(it[2], env, scope);
      Rel rel = h == "=" ? Rel::Eq
                : h == "distinct" ? Rel::Ne
                : h == "<=" ? Rel::Le
                : h == "<" ? Rel::Lt
                : h == ">=" ? Rel::Ge
                            : Rel::Gt;
      LinAtom a{l, rel, r};
      if (!neg) return single(a);
      if (rel == Rel::Eq) return single(LinAtom{l, Rel::Ne, r});
      if (rel == Rel::Ne) return single(LinAtom{l, Rel::Eq, r});
      Dnf out;
      for (auto& x : negate_linatom(a)) out.push_back(single(x)[0]);
      return out;
    }
    throw unsupported(e, h);
  }

  std::optional<Var> array_var(const Sexpr& e, const Env& env, const std::map<std::string, Var>& scope) {
    if (e.is_list) {
      std::string h = head_name(e);
      if (h == "select" || h == "store") throw unsupported(e, h);
      return std::nullopt;
    }
    if (auto s = scope.find(e.atom); s != scope.end()) {
      if (s->second.sort == Sort::IntArray) return s->second;
      return std::nullopt;
    }
    if (const Binding* b = lookup(env, e.atom)) return array_var(*b->value, b->defined_in, scope);
    return std::nullopt;
  }

  LinExpr term(const Sexpr& e, const Env& env, const std::map<std::string, Var>& scope) {
    if (!e.is_list) {
      if (is_numeral(e.atom)) {
        try {
          return LinExpr::constant(std::stoll(e.atom));
        } catch (const std::out_of_range&) {
          throw ParseError("numeral out of range", e.line, e.col);
        }
      }
      if (auto s = scope.find(e.atom); s != scope.end()) {
        if (s->second.sort != Sort::Int)
          throw SortError("sort mismatch: array '" + e.atom + "' used as an integer at " + std::to_string(e.line) +
                          ":" + std::to_string(e.col));
        return LinExpr::variable(s->second);
      }
      if (const Binding* b = lookup(env, e.atom)) return term(*b->value, b->defined_in, scope);
      throw unsupported(e, e.atom);
    }
    std::string h = head_name(e);
    const auto& it = e.items;
    if (h == "+") {
      LinExpr r;
      for (std::size_t i = 1; i < it.size(); ++i) r += term(it[i], env, scope);
      return r;
    }
    if (h == "-") {
      if (it.size() == 2) return term(it[1], env, scope).scaled(-1);
      if (it.size() < 2) throw unsupported(e, "-");
      LinExpr r = term(it[1], env, scope);
      for (std::size_t i = 2; i < it.size(); ++i) r -= term(it[i], env, scope);
      return r;
    }
    if (h == "*") {
      LinExpr r = LinExpr::constant(1);
      for (std::size_t i = 1; i < it.size(); ++i) {
        LinExpr f = term(it[i], env, scope);
        if (f.is_constant()) {
          r = r.scaled(f.constant_term());
        } else if (r.is_constant()) {
          r = f.scaled(r.constant_term());
        } else {
          throw unsupported(e, "non-linear product");
        }
      }
      return r;
    }
    throw unsupported(e, h);
  }

  static Sort read_sort(const Sexpr& s) {
    if (s.is("Int")) return Sort::Int;
    if (s.is_list && s.items.size() == 3 && s.items[0].is("Array") && s.items[1].is("Int") && s.items[2].is("Int"))
      return Sort::IntArray;
    throw unsupported(s, s.is_list ? "sort" : s.atom);
  }

 public:
  static Sort sort_of(const Sexpr& s) { return read_sort(s); }
};

inline void collect_define_funs(const Sexpr& e, std::vector<const Sexpr*>& out) {
  if (!e.is_list) return;
  if (!e.items.empty() && e.items[0].is("define-fun")) {
    out.push_back(&e);
    return;
  }
  for (const auto& x : e.items) collect_define_funs(x, out);
}

}  // namespace detail

inline std::vector<Sexpr> parse_sexprs(std::string_view text) { return detail::SexprReader(text).read_all(); }

/// Reads every define-fun form in `text`, at any nesting depth, so that raw
/// solver output (`sat` followed by a model list) is accepted as is.
inline SymbolicInterpretation parse_model(std::string_view text) {
  auto forms = parse_sexprs(text);
  std::vector<const Sexpr*> defs;
  for (const auto& f : forms) {
    if (!f.is_list && (f.atom == "sat" || f.atom == "unsat" || f.atom == "unknown")) continue;
    if (!f.is_list) throw detail::unsupported(f, f.atom);
    detail::collect_define_funs(f, defs);
  }
  SymbolicInterpretation sigma;
  for (const Sexpr* d : defs) {
    const auto& it = d->items;
    if (it.size() != 5 || it[1].is_list || !it[2].is_list) throw detail::unsupported(*d, "define-fun shape");
    if (!it[3].is("Bool")) throw SortError("sort mismatch: '" + it[1].atom + "' does not return Bool");
    std::vector<Var> params;
    std::map<std::string, Var> scope;
    std::set<std::string> taken;
    for (const auto& b : it[2].items) {
      if (!b.is_list || b.items.size() != 2 || b.items[0].is_list) throw detail::unsupported(b, "parameter");
      Var v{b.items[0].atom, detail::ModelReader::sort_of(b.items[1])};
      params.push_back(v);
      scope[v.name] = v;
      taken.insert(v.name);
    }
    if (sigma.has(it[1].atom)) throw ParseError("predicate '" + it[1].atom + "' defined twice", d->line, d->col);
    detail::ModelReader r(scope, taken);
    sigma.set(it[1].atom, params, r.run(it[4]));
  }
  return sigma;
}

}  // namespace chc
