#include <gtest/gtest.h>

#include "support.hpp"

using namespace chc;
using namespace testing_support;

namespace {

std::vector<std::string> names_of(const ConstraintConj& c) {
  std::vector<std::string> out;
  for (const auto& v : vars(c)) out.push_back(v.name);
  return out;
}

bool brute_sat(const ConstraintConj& c, long long lo, long long hi) {
  bool found = false;
  each_point(names_of(c), lo, hi, [&](const auto& val) { found = found || holds(c, val); });
  return found;
}

}  // namespace

TEST(Satisfiable, UnsatisfiableAfterUnfolding) { EXPECT_EQ(is_satisfiable(conj("M = Y, M =< 0, Y > 0")), Verdict::Disproved); }

TEST(Satisfiable, EmptyIsTrue) { EXPECT_EQ(is_satisfiable(ConstraintConj{}), Verdict::Proved); }

TEST(Satisfiable, IntegerTightening) {
  ConstraintConj c = conj("X > 0, X < 1");
  EXPECT_FALSE(brute_sat(c, -3, 3));
  EXPECT_EQ(is_satisfiable(c), Verdict::Disproved);
}

TEST(Satisfiable, WitnessSatisfiesConstraint) {
  ConstraintConj c = conj("X >= 2, Y = X + 3, Z =\\= Y, Z >= Y");
  auto w = find_witness(c);
  ASSERT_TRUE(w);
  std::map<std::string, long long> val;
  for (const auto& [v, x] : *w) val[v.name] = x;
  for (const auto& v : vars(c)) val.try_emplace(v.name, 0);
  EXPECT_TRUE(holds(c, val));
}

TEST(Satisfiable, ParityGapIsNotRational) {
  // 2X = 2Y + 1 has rational but no integer solutions.
  ConstraintConj c = conj("2 * X = 2 * Y + 1");
  EXPECT_FALSE(brute_sat(c, -6, 6));
  EXPECT_NE(is_satisfiable(c), Verdict::Proved);
}

TEST(Satisfiable, ArrayAtomsAreIgnored) {
  Program p = parse_program(":- sorts p(array).\nfalse :- read(A,I,V), V > 0, p(A).\nfalse :- read(A,I,V), V > 0, V < 1, p(A).");
  // A satisfiable linear part gives no model of the array atoms.
  EXPECT_EQ(is_satisfiable(p.clauses[0].constraint), Verdict::Unknown);
  EXPECT_EQ(is_satisfiable(p.clauses[1].constraint), Verdict::Disproved);
}

TEST(EntailsEquality, PairedDefinition) {
  EXPECT_EQ(entails_equality(conj("M1 = M2, N1 = N2"), iv("M1"), iv("M2")), Verdict::Proved);
}

TEST(EntailsEquality, BothZero) {
  ConstraintConj d = conj("R0 = 0, S0 = 0");
  bool all_equal = true;
  each_point({"R0", "S0"}, -3, 3, [&](const auto& v) {
    if (holds(d, v)) all_equal = all_equal && v.at("R0") == v.at("S0");
  });
  EXPECT_TRUE(all_equal);
  EXPECT_EQ(entails_equality(d, iv("R0"), iv("S0")), Verdict::Proved);
}

TEST(EntailsEquality, Unconstrained) { EXPECT_EQ(entails_equality(conj("M1 > 0"), iv("M1"), iv("M2")), Verdict::Disproved); }

TEST(EqSet, AckermannRecursiveClause) {
  Clause c = parse_clause(
      "new1(M1,N1,A1,M2,N2,A2) :- M1 > 0, M1 = M2, N1 > 0, N1 = N2, N2 =\\= 0, Y1 = N1 - 1, X1 = M1 - 1, "
      "Y2 = N2 - 1, X2 = M2 - 1, Z3 = Z2 + 1, ack1(M1,Y1,Z1), ack1(X1,Z1,A1), ack2(M2,Y2,Z2), ack2(X2,Z3,A2).");
  auto eq = eq_set(c.constraint, c.body[0], c.body[2]);
  EXPECT_EQ(eq, (std::set<EqPair>{{iv("M1"), iv("M2")}, {iv("Y1"), iv("Y2")}}));
  EXPECT_TRUE(eq_set(c.constraint, c.body[0], c.body[3]).empty());
  EXPECT_EQ(eq_set(c.constraint, c.body[1], c.body[3]), (std::set<EqPair>{{iv("X1"), iv("X2")}}));
}

TEST(EqSet, TrueAndDisjoint) {
  Clause c = parse_clause("false :- p(X,Y), q(U,V).");
  EXPECT_TRUE(eq_set(c.constraint, c.body[0], c.body[1]).empty());
}

TEST(EqSet, SharedVariableIsIncluded) {
  Clause c = parse_clause("false :- p(X,Y), q(X,V).");
  EXPECT_EQ(eq_set(c.constraint, c.body[0], c.body[1]), (std::set<EqPair>{{iv("X"), iv("X")}}));
}

TEST(Project, EliminatesShift) {
  ConstraintConj c = conj("X = Y + 1, Y >= 0");
  QuantDisj p = project(c, VarSet{iv("X")});
  EXPECT_EQ(free_vars(p), VarSet{iv("X")});
  // X has a Y in [0,5] exactly when X in [1,6].
  for (long long x = -3; x <= 6; ++x) {
    bool has_y = false;
    for (long long y = 0; y <= 5; ++y) has_y = has_y || x == y + 1;
    ConstraintConj probe = p.disjuncts.at(0);
    probe.add(make_lin(iv("X"), Rel::Eq, x));
    EXPECT_EQ(is_satisfiable(probe) == Verdict::Proved, has_y) << x;
  }
  EXPECT_EQ(equiv_quant_disj(p, qd("X >= 1")), Verdict::Proved);
}

TEST(Project, KeepAllIsIdentity) {
  ConstraintConj c = conj("X = Y + 1, Y >= 0");
  QuantDisj p = project(c, vars(c));
  ASSERT_EQ(p.disjuncts.size(), 1u);
  EXPECT_EQ(p.disjuncts[0], c);
}

TEST(Project, DropsChainedVariable) {
  QuantDisj p = project(conj("M = N, N = Y"), VarSet{iv("M"), iv("N")});
  EXPECT_EQ(equiv_quant_disj(p, qd("M = N")), Verdict::Proved);
}

TEST(Project, FlagsInexactInteger) {
  auto r = project_ex(conj("X = 2 * Y"), VarSet{iv("X")});
  EXPECT_FALSE(r.exact);
  // Still implied by the input.
  EXPECT_EQ(implies(qd("X = 2 * Y"), r.formula), Verdict::Proved);
}

TEST(Equiv, ExampleThreeClauseEight) {
  QuantDisj lhs = qd("M = Y, M =< 0, Sum = R0, Sqr = S0", {"Y"});
  QuantDisj rhs = qd("M =< 0, Sum = R0, Sqr = S0");
  EXPECT_EQ(equiv_quant_disj(lhs, rhs), Verdict::Proved);
}

TEST(Equiv, Reflexive) {
  QuantDisj q = qd("A1 =\\= A2, M1 >= 0, M1 = M2, N1 >= 0");
  EXPECT_EQ(equiv_quant_disj(q, q), Verdict::Proved);
}

TEST(Equiv, StrictAndNonStrict) {
  for (long long x = -3; x <= 3; ++x) EXPECT_EQ(x > 0, x >= 1);
  EXPECT_EQ(equiv_quant_disj(qd("X > 0"), qd("X >= 1")), Verdict::Proved);
}

TEST(Equiv, DifferentFormulas) { EXPECT_EQ(equiv_quant_disj(qd("X > 0"), qd("X >= 0")), Verdict::Disproved); }

TEST(Equiv, Disjunctions) {
  QuantDisj a{{}, {conj("X =< 0"), conj("X > 0")}};
  EXPECT_EQ(equiv_quant_disj(a, QuantDisj::truth()), Verdict::Proved);
  EXPECT_EQ(equiv_quant_disj(QuantDisj::falsity(), qd("X > 0, X < 0")), Verdict::Proved);
}

TEST(Negate, LessOrEqual) {
  auto n = negate_linatom(std::get<LinAtom>(conj("X =< Y").atoms[0]));
  ASSERT_EQ(n.size(), 1u);
  EXPECT_EQ(equiv_quant_disj(QuantDisj::of(ConstraintConj{{n[0]}}), qd("X >= Y + 1")), Verdict::Proved);
}

TEST(Negate, Equality) {
  auto n = negate_linatom(std::get<LinAtom>(conj("X = Y").atoms[0]));
  ASSERT_EQ(n.size(), 2u);
  QuantDisj got{{}, {ConstraintConj{{n[0]}}, ConstraintConj{{n[1]}}}};
  QuantDisj want{{}, {conj("X =< Y - 1"), conj("X >= Y + 1")}};
  EXPECT_EQ(equiv_quant_disj(got, want), Verdict::Proved);
}

TEST(Negate, Greater) {
  auto n = negate_linatom(std::get<LinAtom>(conj("X > 0").atoms[0]));
  ASSERT_EQ(n.size(), 1u);
  EXPECT_EQ(equiv_quant_disj(QuantDisj::of(ConstraintConj{{n[0]}}), qd("X =< 0")), Verdict::Proved);
}

TEST(Negate, EveryRelationAgreesWithEnumeration) {
  for (const char* t : {"X = Y", "X =< Y", "X < Y", "X >= Y", "X > Y", "X =\\= Y", "2 * X + 1 =< Y"}) {
    LinAtom a = std::get<LinAtom>(conj(t).atoms[0]);
    auto n = negate_linatom(a);
    each_point({"X", "Y"}, -4, 4, [&](const auto& v) {
      bool any = false;
      for (const auto& b : n) any = any || holds(ConstraintConj{{b}}, v);
      EXPECT_NE(holds(ConstraintConj{{a}}, v), any) << t;
    });
  }
}

TEST(Implies, Basic) {
  EXPECT_EQ(implies(qd("X > 2"), qd("X > 0")), Verdict::Proved);
  EXPECT_EQ(implies(qd("X > 0"), qd("X > 2")), Verdict::Disproved);
  EXPECT_EQ(implies(qd("X = Y + 1, Y > 0", {"Y"}), qd("X >= 2")), Verdict::Proved);
}

TEST(Classes, TwoVar) {
  EXPECT_TRUE(in_class(conj("X > 0, X = 0, X > Y"), AClass::TwoVar));
  EXPECT_FALSE(in_class(conj("X = Y + 1"), AClass::TwoVar));
  EXPECT_FALSE(in_class(conj("X + Y > 0"), AClass::TwoVar));
  EXPECT_TRUE(in_class(conj("X = Y + 1"), AClass::Lia));
}
