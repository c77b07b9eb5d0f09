#pragma once

#include <sstream>
#include <string>

#include "chc/syntax.hpp"

namespace chc {

inline const char* rel_text(Rel r) {
  switch (r) {
    case Rel::Eq: return "=";
    case Rel::Le: return "=<";
    case Rel::Lt: return "<";
    case Rel::Ge: return ">=";
    case Rel::Gt: return ">";
    case Rel::Ne: return "=\\=";
  }
  return "?";
}

inline std::string to_string(const LinExpr& e) {
  std::string out;
  bool first = true;
  for (const auto& t : e.terms()) {
    long long c = t.coeff;
    if (first) {
      if (c < 0) out += "-";
    } else {
      out += c < 0 ? " - " : " + ";
    }
    unsigned long long mag = c < 0 ? 0ULL - static_cast<unsigned long long>(c) : static_cast<unsigned long long>(c);
    if (mag != 1) out += std::to_string(mag) + "*";
    out += t.var.name;
    first = false;
  }
  long long k = e.constant_term();
  if (first) {
    out += std::to_string(k);
  } else if (k != 0) {
    unsigned long long mag = k < 0 ? 0ULL - static_cast<unsigned long long>(k) : static_cast<unsigned long long>(k);
    out += (k < 0 ? " - " : " + ") + std::to_string(mag);
  }
  return out;
}

inline std::string to_string(const ConstraintAtom& a) {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LinAtom>) {
          return to_string(n.lhs) + " " + rel_text(n.rel) + " " + to_string(n.rhs);
        } else if constexpr (std::is_same_v<T, ArrRead>) {
          return "read(" + n.arr.name + "," + n.idx.name + "," + n.val.name + ")";
        } else if constexpr (std::is_same_v<T, ArrWrite>) {
          return "write(" + n.arr.name + "," + n.idx.name + "," + n.val.name + "," + n.out.name + ")";
        } else {
          return n.lhs.name + " = " + n.rhs.name;
        }
      },
      a);
}

inline std::string to_string(const ConstraintConj& c) {
  if (c.empty()) return "true";
  std::string out;
  for (std::size_t i = 0; i < c.atoms.size(); ++i) {
    if (i) out += ", ";
    out += to_string(c.atoms[i]);
  }
  return out;
}

inline std::string to_string(const Atom& a) {
  std::string out = a.pred;
  if (a.args.empty()) return out;
  out += "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) out += ",";
    out += a.args[i].name;
  }
  return out + ")";
}

/// Prolog-style rendering: `head :- constraints, atoms.`
inline std::string to_string(const Clause& c) {
  std::string out = c.head ? to_string(*c.head) : "false";
  if (c.constraint.empty() && c.body.empty()) return out + ".";
  out += " :- ";
  bool first = true;
  for (const auto& a : c.constraint.atoms) {
    if (!first) out += ", ";
    out += to_string(a);
    first = false;
  }
  for (const auto& a : c.body) {
    if (!first) out += ", ";
    out += to_string(a);
    first = false;
  }
  return out + ".";
}

inline std::string print_program(const Program& p) {
  std::ostringstream os;
  for (const auto& [pred, sorts] : p.signatures) {
    bool has_array = false;
    for (Sort s : sorts) has_array |= s == Sort::IntArray;
    if (!has_array) continue;
    os << ":- sorts " << pred << "(";
    for (std::size_t i = 0; i < sorts.size(); ++i) os << (i ? "," : "") << sort_name(sorts[i]);
    os << ").\n";
  }
  for (const auto& c : p.clauses) os << to_string(c) << "\n";
  return os.str();
}

}  // namespace chc
