#include <gtest/gtest.h>

#include "property_suites.hpp"

using namespace chc;
using namespace testing_support;

TEST(LiaProperties, VerdictsAgreeWithEnumeration) {
  SuiteResult r = lia_vs_enumeration(20261017, 600);
  EXPECT_GE(r.cases, 500);
  EXPECT_EQ(r.failures, 0) << r.first;
  EXPECT_LT(r.unknown, r.cases / 10);
}

TEST(LiaProperties, EntailedEqualitiesHold) {
  std::mt19937 rng(7);
  int proved = 0;
  for (int i = 0; i < 300; ++i) {
    std::size_t n = 2 + rng() % 2;
    ConstraintConj c = conj(random_conj(rng, n, 1 + rng() % 3) + box(n, -8, 8));
    if (entails_equality(c, iv("X"), iv("Y")) != Verdict::Proved) continue;
    ++proved;
    each_point(first_vars(n), -8, 8, [&](const Point& p) {
      if (holds(c, p)) EXPECT_EQ(p.at("X"), p.at("Y")) << to_string(c);
    });
  }
  EXPECT_GT(proved, 0);
}

TEST(LiaProperties, ImplicationIsSound) {
  std::mt19937 rng(11);
  for (int i = 0; i < 200; ++i) {
    QuantDisj a = QuantDisj::of(conj(random_conj(rng, 2, 2) + box(2, -8, 8)));
    QuantDisj b = QuantDisj::of(conj(random_conj(rng, 2, 1)));
    if (implies(a, b) != Verdict::Proved) continue;
    each_point({"X", "Y"}, -8, 8, [&](const Point& p) {
      if (holds(a.disjuncts[0], p)) EXPECT_TRUE(holds(b.disjuncts[0], p));
    });
  }
}

TEST(LiaProperties, ProjectionOverApproximates) {
  std::mt19937 rng(3);
  for (int i = 0; i < 150; ++i) {
    ConstraintConj c = conj(random_conj(rng, 3, 1 + rng() % 3) + box(3, -5, 5));
    auto r = project_ex(c, VarSet{iv("X"), iv("Y")});
    // Every projected point of c satisfies the projection; exact
    // projections admit nothing else.
    for (long long x = -5; x <= 5; ++x)
      for (long long y = -5; y <= 5; ++y) {
        bool has_z = false;
        for (long long z = -5; z <= 5 && !has_z; ++z) has_z = holds(c, {{"X", x}, {"Y", y}, {"Z", z}});
        bool in = qd_holds(r.formula, {{"X", x}, {"Y", y}}, -5, 5);
        if (has_z) EXPECT_TRUE(in) << to_string(c);
        if (r.exact && !has_z) EXPECT_FALSE(in) << to_string(c);
      }
  }
}

TEST(TransformProperties, PairingPreservesBoundedAnswers) {
  SuiteResult r = pairing_vs_oracle(99, 120);
  EXPECT_GE(r.cases, 100);
  EXPECT_EQ(r.failures, 0) << r.first;
  // Both outcomes occur.
  EXPECT_GT(r.found, 10);
  EXPECT_LT(r.found, r.cases - 10);
}

TEST(TransformProperties, UnfoldPreservesBoundedAnswers) {
  std::mt19937 rng(5);
  int found = 0;
  for (int i = 0; i < 100; ++i) {
    Program p = parse_program(random_toy(rng));
    auto s = TransformationState::start(p);
    s = apply_unfold(s, p.clauses[0].id, rng() % 2);
    std::vector<ClauseId> out = s.trace.back().outputs;
    for (auto id : out)
      if (s.current.contains(id) && s.current.find(id)->body.size() == 2) s = apply_unfold(s, id, 1);
    auto rep = equisat_probe(p, s.current, budget(3, 0, 4));
    EXPECT_TRUE(rep.consistent) << print_program(p);
    found += rep.p0;
  }
  EXPECT_GT(found, 10);
}

TEST(TransformProperties, FoldWithFreshDefinition) {
  std::mt19937 rng(17);
  for (int i = 0; i < 100; ++i) {
    Program p = parse_program(random_toy(rng));
    auto s = TransformationState::start(p);
    s = apply_definition(s, parse_clause("qr(N,A,M,B) :- N = M, q(N,A), r(M,B).", ClauseId{0}));
    ClauseId d = s.trace.back().outputs[0];
    const Clause& g = s.current.clauses[s.index_of(p.clauses[0].id)];
    s = apply_fold(s, g.id, {0, 1}, d, *match_atoms(s.defs.find(d)->body, g.body));
    // P0 lacks qr, so compare against P0 plus the definition.
    Program p0 = p;
    p0.clauses.push_back(*s.defs.find(d));
    auto rep = equisat_probe(p0, s.current, budget(3, 0, 4));
    EXPECT_TRUE(rep.consistent) << print_program(p);
  }
}

TEST(ModelProperties, DefinitionTransportOnCorpusTraces) {
  SuiteResult r = transport_on_corpus();
  EXPECT_GT(r.cases, 10);
  EXPECT_EQ(r.failures, 0) << r.first;
}

TEST(SmtlibProperties, EmissionIsByteStable) {
  SuiteResult r = emission_stable();
  EXPECT_EQ(r.failures, 0) << r.first;
}
