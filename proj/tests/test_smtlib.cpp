#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>

#include "support.hpp"

using namespace chc;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

/// Writes an executable shell script and returns its path.
std::string fake_solver(const std::string& name, const std::string& body) {
  fs::path dir = fs::temp_directory_path() / "chc_fake_solvers";
  fs::create_directories(dir);
  fs::path p = dir / name;
  std::ofstream(p) << "#!/bin/sh\n" << body << "\n";
  fs::permissions(p, fs::perms::owner_all);
  return p.string();
}

SolverConfig config(const std::string& cmd, double timeout = 10) {
  SolverConfig c;
  c.command = split_command(cmd);
  c.timeout_seconds = timeout;
  return c;
}

}  // namespace

TEST(EmitSmtlib, GoldenFiles) {
  for (const char* name : {"sum_upto", "array_loop", "ackermann", "hl"}) {
    std::string got = emit_smtlib(load(std::string(name) + ".chc"));
    EXPECT_EQ(got, slurp(testdata(std::string(name) + ".smt2"))) << name;
    EXPECT_EQ(got, emit_smtlib(load(std::string(name) + ".chc"))) << name;
  }
}

TEST(EmitSmtlib, SumUptoBaseClause) {
  Program p = parse_program("su(X,R,Sum) :- X =< 0, Sum = R.");
  std::string out = emit_smtlib(p);
  EXPECT_NE(out.find("(assert (forall ((X Int)(R Int)(Sum Int)) (=> (and (<= X 0) (= Sum R)) (su X R Sum))))"),
            std::string::npos)
      << out;
  EXPECT_NE(out.find("(declare-fun su (Int Int Int) Bool)"), std::string::npos);
}

TEST(EmitSmtlib, EmptyProgram) { EXPECT_EQ(emit_smtlib(Program{}), "(set-logic HORN)\n"); }

TEST(EmitSmtlib, ArrayAtoms) {
  std::string out = emit_smtlib(load("array_loop.chc"));
  EXPECT_NE(out.find("(= (select A1 J) U)"), std::string::npos);
  EXPECT_NE(out.find("(= (store A1 I V) A2)"), std::string::npos);
  EXPECT_NE(out.find("(declare-fun loop (Int (Array Int Int) Int (Array Int Int)) Bool)"), std::string::npos);
}

TEST(EmitSmtlib, GoalsImplyFalse) {
  std::string out = emit_smtlib(parse_program("false :- true."));
  EXPECT_NE(out.find("(=> true false)"), std::string::npos) << out;
}

TEST(ParseModel, ExampleOne) {
  auto sigma = parse_model("(define-fun su ((M Int)(R Int)(S Int)) Bool (or (and (>= S M)(>= S R)) (< R 0)))");
  ASSERT_TRUE(sigma.has("su"));
  const auto& pi = sigma.at("su");
  EXPECT_EQ(pi.params, (std::vector<Var>{iv("M"), iv("R"), iv("S")}));
  QuantDisj want{{}, {conj("S >= M, S >= R"), conj("R < 0")}};
  EXPECT_EQ(equiv_quant_disj(pi.formula, want), Verdict::Proved);
}

TEST(ParseModel, True) {
  auto sigma = parse_model("(define-fun p ((X Int)) Bool true)");
  EXPECT_EQ(equiv_quant_disj(sigma.at("p").formula, QuantDisj::truth()), Verdict::Proved);
}

TEST(ParseModel, NestedExists) {
  auto sigma = parse_model(
      "(define-fun p ((X Int)) Bool (or (exists ((Y Int)) (and (= X (* 2 Y)) (>= Y 0))) (and (< X 0) (exists ((Z Int)) (= X (- Z 1))))))");
  const auto& f = sigma.at("p").formula;
  EXPECT_EQ(f.disjuncts.size(), 2u);
  EXPECT_EQ(f.exists.size(), 2u);
  // Evens >= 0 or negatives.
  Program fixture = parse_program("p(X) :- X = 4.\np(X) :- X = -3.\nfalse :- p(X), X = 3.");
  EXPECT_EQ(check_model(fixture, sigma).overall, Verdict::Proved);
  Atom px = fixture.clauses[0].head.value();
  for (long long x = -4; x <= 6; ++x) EXPECT_EQ(sigma_holds(sigma, px, {{"X", x}}), x < 0 || x % 2 == 0) << x;
}

TEST(ParseModel, SolverOutputWrapper) {
  auto sigma = parse_model("sat\n(model\n  (define-fun p ((x!0 Int)) Bool (>= x!0 1))\n)\n");
  ASSERT_TRUE(sigma.has("p"));
}

TEST(ParseModel, Errors) {
  EXPECT_THROW(parse_model("(define-fun p ((X Int)) Bool (>= (* X X) 1))"), ParseError);
  EXPECT_THROW(parse_model("(define-fun p ((X Int)) Bool (forall ((Y Int)) (> X Y)))"), ParseError);
  EXPECT_THROW(parse_model("(define-fun p ((X Int)) Bool (>= X 1)"), ParseError);
  try {
    parse_model("(define-fun p ((X Int)) Bool\n  (frobnicate X))");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(ParseModel, RoundTrip) {
  for (const char* f : {"sum_upto.model", "example3_p4.model"}) {
    auto a = parse_model(slurp(corpus(f)));
    auto b = parse_model(print_model(a));
    for (const auto& [pred, pi] : a.entries()) {
      ASSERT_TRUE(b.has(pred));
      EXPECT_EQ(b.at(pred).params, pi.params);
      EXPECT_EQ(equiv_quant_disj(b.at(pred).formula, pi.formula), Verdict::Proved) << pred;
    }
    EXPECT_EQ(print_model(a), print_model(b));
  }
}

TEST(Solver, SplitCommand) {
  EXPECT_EQ(split_command("z3  -in\t-T:5 "), (std::vector<std::string>{"z3", "-in", "-T:5"}));
  EXPECT_TRUE(split_command("").empty());
}

TEST(Solver, Sat) {
  std::string s = fake_solver("sat.sh", "cat > /dev/null\necho sat\necho '(define-fun p ((X Int)) Bool true)'");
  SolveResult r = external_solve(load("sum_upto.chc"), config(s));
  EXPECT_EQ(r.status, SolveStatus::Sat);
  EXPECT_NE(r.model.find("define-fun"), std::string::npos);
  EXPECT_STREQ(status_name(r.status), "sat");
}

TEST(Solver, ReceivesScript) {
  std::string s = fake_solver("echo.sh", "if grep -q '(check-sat)' && true; then echo unsat; else echo unknown; fi");
  EXPECT_EQ(external_solve(load("hl.chc"), config(s)).status, SolveStatus::Unsat);
}

TEST(Solver, UnknownAndGarbage) {
  std::string u = fake_solver("unknown.sh", "cat > /dev/null\necho unknown");
  EXPECT_EQ(external_solve(Program{}, config(u)).status, SolveStatus::Unknown);
  std::string g = fake_solver("garbage.sh", "cat > /dev/null\necho hello");
  EXPECT_EQ(external_solve(Program{}, config(g)).status, SolveStatus::ProcessError);
}

TEST(Solver, Timeout) {
  std::string s = fake_solver("sleep.sh", "sleep 30\necho sat");
  auto t0 = std::chrono::steady_clock::now();
  SolveResult r = external_solve(Program{}, config(s, 1));
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_EQ(r.status, SolveStatus::Timeout);
  EXPECT_LT(secs, 10.0);
}

TEST(Solver, MissingExecutable) {
  SolveResult r = external_solve(Program{}, config("/nonexistent/solver-binary"));
  EXPECT_EQ(r.status, SolveStatus::ProcessError);
  EXPECT_FALSE(r.message.empty());
}

TEST(Solver, Disabled) {
  SolverConfig c = config("z3 -in");
  c.enabled = false;
  EXPECT_THROW(external_solve(Program{}, c), Error);
  EXPECT_THROW(external_solve(Program{}, SolverConfig{}), Error);
}
