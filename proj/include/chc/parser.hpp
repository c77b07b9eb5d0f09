#pragma once

// Reader for the Prolog-like CHC surface syntax:
//
//   clause := head ( ":-" item ("," item)* )? "."
//   head   := atom | "false"
//   item   := atom | linexpr rel linexpr | "true"
//           | "read(" V "," V "," V ")" | "write(" V "," V "," V "," V ")"
//   rel    := "=" | "=<" | "<" | ">=" | ">" | "=\="
//
// plus optional `:- sorts p(int, array, ...).` declarations. Non-variable
// atom arguments and repeated argument variables are replaced by fresh
// variables constrained by an equality placed in front of the constraint.

#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "chc/syntax.hpp"

namespace chc {

namespace detail {

enum class Tok { Ident, Var, Int, LParen, RParen, Comma, Dot, Neck, Rel, Plus, Minus, Star, End };

struct Token {
  Tok kind;
  std::string text;
  long long value = 0;
  Rel rel = Rel::Eq;
  std::size_t line = 0, col = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t{Tok::End, "", 0, Rel::Eq, line_, col_};
      if (pos_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) advance();
        t.text = std::string(src_.substr(start, pos_ - start));
        t.kind = (std::isupper(static_cast<unsigned char>(c)) || c == '_') ? Tok::Var : Tok::Ident;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
        t.text = std::string(src_.substr(start, pos_ - start));
        t.kind = Tok::Int;
        try {
          t.value = std::stoll(t.text);
        } catch (const std::exception&) {
          throw ParseError("integer literal out of range", t.line, t.col);
        }
      } else {
        t.kind = punct(t);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  Tok punct(Token& t) {
    auto starts = [&](std::string_view s) { return src_.substr(pos_, s.size()) == s; };
    auto take = [&](std::string_view s) {
      for (std::size_t i = 0; i < s.size(); ++i) advance();
      t.text = std::string(s);
    };
    if (starts(":-")) return take(":-"), Tok::Neck;
    if (starts("=\\=")) return take("=\\="), t.rel = Rel::Ne, Tok::Rel;
    if (starts("=<")) return take("=<"), t.rel = Rel::Le, Tok::Rel;
    if (starts(">=")) return take(">="), t.rel = Rel::Ge, Tok::Rel;
    if (starts("<=")) throw ParseError("use '=<' for less-or-equal", line_, col_);
    switch (src_[pos_]) {
      case '(': return take("("), Tok::LParen;
      case ')': return take(")"), Tok::RParen;
      case ',': return take(","), Tok::Comma;
      case '.': return take("."), Tok::Dot;
      case '+': return take("+"), Tok::Plus;
      case '-': return take("-"), Tok::Minus;
      case '*': return take("*"), Tok::Star;
      case '=': return take("="), t.rel = Rel::Eq, Tok::Rel;
      case '<': return take("<"), t.rel = Rel::Lt, Tok::Rel;
      case '>': return take(">"), t.rel = Rel::Gt, Tok::Rel;
      default: break;
    }
    throw ParseError(std::string("unexpected character '") + src_[pos_] + "'", line_, col_);
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '%') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view src_;
  std::size_t pos_ = 0, line_ = 1, col_ = 1;
};

struct RawExpr {
  std::vector<std::pair<std::string, long long>> terms;
  long long constant = 0;

  const std::string* plain_var() const {
    if (terms.size() == 1 && terms[0].second == 1 && constant == 0) return &terms[0].first;
    return nullptr;
  }
};

struct RawAtom {
  std::string pred;
  std::vector<RawExpr> args;
  std::size_t line = 0, col = 0;
};

struct RawLin {
  RawExpr lhs;
  Rel rel;
  RawExpr rhs;
};

struct RawRead {
  std::string arr, idx, val;
};

struct RawWrite {
  std::string arr, idx, val, out;
};

using RawItem = std::variant<RawAtom, RawLin, RawRead, RawWrite>;

struct RawClause {
  std::optional<RawAtom> head;
  std::vector<RawItem> items;
  std::size_t line = 0, col = 0;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  void run(std::vector<RawClause>& clauses, std::map<std::string, std::vector<Sort>>& declared) {
    while (peek().kind != Tok::End) {
      if (peek().kind == Tok::Neck) {
        parse_sort_decl(declared);
      } else {
        clauses.push_back(parse_clause());
      }
    }
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(const std::string& msg, const Token& t) const {
    std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(msg + " (found " + found + ")", t.line, t.col);
  }

  const Token& expect(Tok k, const char* what) {
    if (peek().kind != k) fail(std::string("expected ") + what, peek());
    return next();
  }

  void parse_sort_decl(std::map<std::string, std::vector<Sort>>& declared) {
    next();
    const Token& kw = expect(Tok::Ident, "'sorts'");
    if (kw.text != "sorts") fail("expected 'sorts' directive", kw);
    const Token& name = expect(Tok::Ident, "predicate name");
    std::vector<Sort> sorts;
    if (peek().kind == Tok::LParen) {
      next();
      for (;;) {
        const Token& s = expect(Tok::Ident, "sort name");
        if (s.text == "int") {
          sorts.push_back(Sort::Int);
        } else if (s.text == "array") {
          sorts.push_back(Sort::IntArray);
        } else {
          fail("unknown sort", s);
        }
        if (peek().kind == Tok::Comma) {
          next();
          continue;
        }
        expect(Tok::RParen, "')'");
        break;
      }
    }
    expect(Tok::Dot, "'.'");
    if (declared.count(name.text)) throw ParseError("duplicate sort declaration for '" + name.text + "'", name.line, name.col);
    declared[name.text] = std::move(sorts);
  }

  RawClause parse_clause() {
    RawClause c;
    c.line = peek().line;
    c.col = peek().col;
    if (peek().kind == Tok::Ident && peek().text == "false" && peek(1).kind != Tok::LParen) {
      next();
    } else {
      if (peek().kind != Tok::Ident) fail("expected clause head", peek());
      c.head = parse_atom();
    }
    if (peek().kind == Tok::Neck) {
      next();
      for (;;) {
        parse_item(c.items);
        if (peek().kind == Tok::Comma) {
          next();
          continue;
        }
        break;
      }
    }
    expect(Tok::Dot, "',' or '.'");
    return c;
  }

  RawAtom parse_atom() {
    const Token& name = expect(Tok::Ident, "predicate name");
    RawAtom a{name.text, {}, name.line, name.col};
    if (peek().kind == Tok::LParen) {
      next();
      for (;;) {
        a.args.push_back(parse_expr());
        if (peek().kind == Tok::Comma) {
          next();
          continue;
        }
        expect(Tok::RParen, "',' or ')'");
        break;
      }
    }
    return a;
  }

  std::string parse_var_arg() { return expect(Tok::Var, "variable").text; }

  void parse_item(std::vector<RawItem>& items) {
    const Token& t = peek();
    if (t.kind == Tok::Ident && peek(1).kind != Tok::Star) {
      if (t.text == "true" && peek(1).kind != Tok::LParen) {
        next();
        return;
      }
      if (t.text == "read" && peek(1).kind == Tok::LParen) {
        next();
        next();
        RawRead r;
        r.arr = parse_var_arg();
        expect(Tok::Comma, "','");
        r.idx = parse_var_arg();
        expect(Tok::Comma, "','");
        r.val = parse_var_arg();
        expect(Tok::RParen, "')'");
        items.emplace_back(std::move(r));
        return;
      }
      if (t.text == "write" && peek(1).kind == Tok::LParen) {
        next();
        next();
        RawWrite w;
        w.arr = parse_var_arg();
        expect(Tok::Comma, "','");
        w.idx = parse_var_arg();
        expect(Tok::Comma, "','");
        w.val = parse_var_arg();
        expect(Tok::Comma, "','");
        w.out = parse_var_arg();
        expect(Tok::RParen, "')'");
        items.emplace_back(std::move(w));
        return;
      }
      items.emplace_back(parse_atom());
      return;
    }
    RawLin l;
    l.lhs = parse_expr();
    const Token& r = expect(Tok::Rel, "relation");
    l.rel = r.rel;
    l.rhs = parse_expr();
    items.emplace_back(std::move(l));
  }

  RawExpr parse_expr() {
    RawExpr e;
    long long sign = 1;
    if (peek().kind == Tok::Minus) {
      next();
      sign = -1;
    } else if (peek().kind == Tok::Plus) {
      next();
    }
    parse_term(e, sign);
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      sign = next().kind == Tok::Plus ? 1 : -1;
      parse_term(e, sign);
    }
    return e;
  }

  void parse_term(RawExpr& e, long long sign) {
    const Token& t = peek();
    if (t.kind == Tok::Int) {
      next();
      long long k = checked_mul(sign, t.value);
      if (peek().kind == Tok::Star) {
        next();
        add_term(e, expect(Tok::Var, "variable after '*'").text, k);
      } else {
        e.constant = checked_add(e.constant, k);
      }
    } else if (t.kind == Tok::Var) {
      next();
      long long k = sign;
      if (peek().kind == Tok::Star) {
        next();
        k = checked_mul(k, expect(Tok::Int, "integer after '*'").value);
      }
      add_term(e, t.text, k);
    } else {
      fail("expected variable or integer", t);
    }
  }

  static void add_term(RawExpr& e, const std::string& v, long long k) {
    for (auto& [name, c] : e.terms) {
      if (name == v) {
        c = checked_add(c, k);
        return;
      }
    }
    e.terms.emplace_back(v, k);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

/// Turns raw clauses into typed, normalized clauses.
class Typer {
 public:
  Typer(std::map<std::string, std::vector<Sort>> declared) : sigs_(std::move(declared)) {}

  Program run(const std::vector<RawClause>& raw) {
    for (const auto& rc : raw) {
      if (rc.head) register_atom(*rc.head);
      for (const auto& it : rc.items)
        if (auto a = std::get_if<RawAtom>(&it)) register_atom(*a);
    }
    Program p;
    std::uint64_t next_id = 1;
    for (const auto& rc : raw) {
      Clause c = build(rc);
      c.id = ClauseId{next_id++};
      p.clauses.push_back(std::move(c));
    }
    p.signatures = sigs_;
    return p;
  }

 private:
  void register_atom(const RawAtom& a) {
    auto it = sigs_.find(a.pred);
    if (it == sigs_.end()) {
      sigs_[a.pred] = std::vector<Sort>(a.args.size(), Sort::Int);
    } else if (it->second.size() != a.args.size()) {
      throw ArityError(std::to_string(a.line) + ":" + std::to_string(a.col) + ": predicate '" + a.pred + "' used with arity " +
                       std::to_string(a.args.size()) + " but has arity " + std::to_string(it->second.size()));
    }
  }

  struct Ctx {
    std::map<std::string, Sort> sorts;
    std::set<std::string> names;
    std::size_t line = 0, col = 0;
    int fresh = 0;
  };

  [[noreturn]] static void sort_fail(const Ctx& cx, const std::string& msg) {
    throw SortError(std::to_string(cx.line) + ":" + std::to_string(cx.col) + ": " + msg);
  }

  static void require(Ctx& cx, const std::string& v, Sort s) {
    auto [it, inserted] = cx.sorts.emplace(v, s);
    if (!inserted && it->second != s)
      sort_fail(cx, "variable '" + v + "' used both as " + sort_name(it->second) + " and " + sort_name(s));
  }

  static void require(Ctx& cx, const RawExpr& e, Sort s) {
    if (s == Sort::IntArray) {
      const std::string* v = e.plain_var();
      if (!v) sort_fail(cx, "arithmetic expression in an array position");
      require(cx, *v, s);
      return;
    }
    for (const auto& [v, k] : e.terms) require(cx, v, Sort::Int);
  }

  void type_atom(Ctx& cx, const RawAtom& a) {
    const auto& sig = sigs_.at(a.pred);
    for (std::size_t i = 0; i < a.args.size(); ++i) require(cx, a.args[i], sig[i]);
  }

  static bool var_equation(const RawLin& l) { return l.rel == Rel::Eq && l.lhs.plain_var() && l.rhs.plain_var(); }

  static bool is_array(const Ctx& cx, const std::string& v) {
    auto it = cx.sorts.find(v);
    return it != cx.sorts.end() && it->second == Sort::IntArray;
  }

  static Var fresh_var(Ctx& cx, Sort s) {
    for (;;) {
      std::string n = "_V" + std::to_string(++cx.fresh);
      if (cx.names.insert(n).second) return Var{n, s};
    }
  }

  static LinExpr to_lin(const Ctx& cx, const RawExpr& e) {
    LinExpr r;
    for (const auto& [v, k] : e.terms) r.add(Var{v, cx.sorts.at(v)}, k);
    r.add_constant(e.constant);
    return r;
  }

  Atom normalize_atom(Ctx& cx, const RawAtom& a, std::vector<ConstraintAtom>& eqs) {
    const auto& sig = sigs_.at(a.pred);
    Atom out{a.pred, {}};
    std::set<std::string> seen;
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      const RawExpr& e = a.args[i];
      const std::string* v = e.plain_var();
      if (v && seen.insert(*v).second) {
        out.args.push_back(Var{*v, sig[i]});
        continue;
      }
      Var f = fresh_var(cx, sig[i]);
      if (sig[i] == Sort::IntArray) {
        eqs.push_back(ArrEq{f, Var{*v, Sort::IntArray}});
      } else {
        eqs.push_back(LinAtom{LinExpr::variable(f), Rel::Eq, to_lin(cx, e)});
      }
      out.args.push_back(f);
    }
    return out;
  }

  Clause build(const RawClause& rc) {
    Ctx cx;
    cx.line = rc.line;
    cx.col = rc.col;
    auto note = [&](const RawExpr& e) {
      for (const auto& [v, k] : e.terms) cx.names.insert(v);
    };
    if (rc.head) {
      for (const auto& e : rc.head->args) note(e);
      type_atom(cx, *rc.head);
    }
    for (const auto& it : rc.items) {
      if (auto a = std::get_if<RawAtom>(&it)) {
        for (const auto& e : a->args) note(e);
        type_atom(cx, *a);
      } else if (auto l = std::get_if<RawLin>(&it)) {
        note(l->lhs);
        note(l->rhs);
        if (var_equation(*l)) continue;
        require(cx, l->lhs, Sort::Int);
        require(cx, l->rhs, Sort::Int);
      } else if (auto r = std::get_if<RawRead>(&it)) {
        for (const auto* n : {&r->arr, &r->idx, &r->val}) cx.names.insert(*n);
        require(cx, r->arr, Sort::IntArray);
        require(cx, r->idx, Sort::Int);
        require(cx, r->val, Sort::Int);
      } else if (auto w = std::get_if<RawWrite>(&it)) {
        for (const auto* n : {&w->arr, &w->idx, &w->val, &w->out}) cx.names.insert(*n);
        require(cx, w->arr, Sort::IntArray);
        require(cx, w->idx, Sort::Int);
        require(cx, w->val, Sort::Int);
        require(cx, w->out, Sort::IntArray);
      }
    }

    // X = Y between variables is an array equation when either side is
    // known to be an array.
    std::vector<const RawLin*> var_eqs;
    for (const auto& it : rc.items)
      if (auto l = std::get_if<RawLin>(&it); l && var_equation(*l)) var_eqs.push_back(l);
    for (bool grew = true; grew;) {
      grew = false;
      for (const RawLin* l : var_eqs) {
        const std::string &x = *l->lhs.plain_var(), &y = *l->rhs.plain_var();
        if (is_array(cx, x) != is_array(cx, y) && !(cx.sorts.count(x) && cx.sorts.count(y))) {
          require(cx, x, Sort::IntArray);
          require(cx, y, Sort::IntArray);
          grew = true;
        }
      }
    }
    for (const RawLin* l : var_eqs) {
      const std::string &x = *l->lhs.plain_var(), &y = *l->rhs.plain_var();
      Sort s = is_array(cx, x) || is_array(cx, y) ? Sort::IntArray : Sort::Int;
      require(cx, x, s);
      require(cx, y, s);
    }

    Clause c;
    std::vector<ConstraintAtom> eqs;
    if (rc.head) c.head = normalize_atom(cx, *rc.head, eqs);
    std::vector<ConstraintAtom> user;
    for (const auto& it : rc.items) {
      if (auto a = std::get_if<RawAtom>(&it)) {
        c.body.push_back(normalize_atom(cx, *a, eqs));
      } else if (auto l = std::get_if<RawLin>(&it)) {
        if (var_equation(*l) && is_array(cx, *l->lhs.plain_var())) {
          user.push_back(ArrEq{Var{*l->lhs.plain_var(), Sort::IntArray}, Var{*l->rhs.plain_var(), Sort::IntArray}});
          continue;
        }
        user.push_back(LinAtom{to_lin(cx, l->lhs), l->rel, to_lin(cx, l->rhs)});
      } else if (auto r = std::get_if<RawRead>(&it)) {
        user.push_back(ArrRead{Var{r->arr, Sort::IntArray}, Var{r->idx}, Var{r->val}});
      } else if (auto w = std::get_if<RawWrite>(&it)) {
        user.push_back(ArrWrite{Var{w->arr, Sort::IntArray}, Var{w->idx}, Var{w->val}, Var{w->out, Sort::IntArray}});
      }
    }
    c.constraint.atoms = std::move(eqs);
    c.constraint.atoms.insert(c.constraint.atoms.end(), user.begin(), user.end());
    return c;
  }

  std::map<std::string, std::vector<Sort>> sigs_;
};

}  // namespace detail

/// Parses CHC text. Throws ParseError, SortError or ArityError.
inline Program parse_program(std::string_view text) {
  detail::Lexer lex(text);
  detail::Parser parser(lex.run());
  std::vector<detail::RawClause> raw;
  std::map<std::string, std::vector<Sort>> declared;
  parser.run(raw, declared);
  detail::Typer typer(std::move(declared));
  return typer.run(raw);
}

/// Parses a single clause; the id is set to `id`.
inline Clause parse_clause(std::string_view text, ClauseId id = ClauseId{1},
                           const std::map<std::string, std::vector<Sort>>& sigs = {}) {
  std::string src;
  for (const auto& [pred, sorts] : sigs) {
    bool arr = false;
    for (Sort s : sorts) arr |= s == Sort::IntArray;
    if (!arr) continue;
    src += ":- sorts " + pred + "(";
    for (std::size_t i = 0; i < sorts.size(); ++i) src += std::string(i ? "," : "") + sort_name(sorts[i]);
    src += ").\n";
  }
  src += text;
  Program p = parse_program(src);
  if (p.clauses.size() != 1) throw ParseError("expected exactly one clause", 0, 0);
  Clause c = p.clauses.front();
  c.id = id;
  return c;
}

}  // namespace chc
