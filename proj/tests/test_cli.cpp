#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>

#include "support.hpp"

using namespace chc;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  fs::path d = fs::temp_directory_path() / "chc_cli_test";
  fs::create_directories(d);
  return d;
}

std::string tmp(const std::string& name) { return (scratch() / name).string(); }

std::string write_tmp(const std::string& name, const std::string& text) {
  std::string p = tmp(name);
  std::ofstream(p) << text;
  return p;
}

struct Outcome {
  int code = -1;
  std::string out, err;
};

Outcome run(const std::string& args, const std::string& env = "") {
  std::string o = tmp("stdout.txt"), e = tmp("stderr.txt");
  std::string cmd = env + " " + std::string(CHC_TOOL) + " " + args + " > " + o + " 2> " + e;
  int st = std::system(cmd.c_str());
  Outcome r;
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  r.out = slurp(o);
  r.err = slurp(e);
  return r;
}

std::string fake_solver(const std::string& name, const std::string& body) {
  std::string p = write_tmp(name, "#!/bin/sh\n" + body + "\n");
  fs::permissions(p, fs::perms::owner_all);
  return p;
}

}  // namespace

TEST(Cli, TransformAckermann) {
  std::string out = tmp("ack_out.chc"), trace = tmp("ack.trace");
  Outcome r = run("transform " + corpus("ackermann.chc") + " --query auto -o " + out + " --trace " + trace);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("definitions: 2"), std::string::npos);
  EXPECT_TRUE(compare_programs(load("ackermann_transf.chc"), parse_program(slurp(out))).empty());
  std::string log = slurp(trace);
  EXPECT_NE(log.find("PAIR chosen=(ack1(M1,Y1,Z1),ack2(M2,Y2,Z2)) eq=2"), std::string::npos);
  Outcome v = run("validate-trace " + trace);
  EXPECT_EQ(v.code, 0) << v.out << v.err;
  EXPECT_NE(v.out.find("all definitions unfolded: yes"), std::string::npos);
}

TEST(Cli, TransformQueryById) {
  std::string out = tmp("ack_q.chc");
  EXPECT_EQ(run("transform " + corpus("ackermann.chc") + " --query 9 -o " + out).code, 0);
  EXPECT_EQ(run("transform " + corpus("ackermann.chc") + " --query 2 -o " + out).code, 3);
}

TEST(Cli, AmbiguousGoal) {
  std::string in = write_tmp("two_goals.chc", "false :- p(X), q(X).\nfalse :- p(X), X > 0, q(X).\np(X) :- X = 0.\nq(X) :- X = 1.\n");
  Outcome r = run("transform " + in + " --query auto -o " + tmp("x.chc"));
  EXPECT_EQ(r.code, 3);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, DefinitionCap) {
  Outcome r = run("transform " + corpus("ackermann.chc") + " --max-defs 1 -o " + tmp("cap.chc"));
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, CheckModel) {
  Outcome ok = run("check-model " + corpus("sum_upto.chc") + " " + corpus("sum_upto.model"));
  EXPECT_EQ(ok.code, 0) << ok.out << ok.err;
  std::string weak = write_tmp("true.model", "(define-fun su ((X Int)(R Int)(S Int)) Bool true)\n");
  EXPECT_EQ(run("check-model " + corpus("sum_upto.chc") + " " + weak).code, 1);
  EXPECT_EQ(run("check-model " + corpus("example3_p4.chc") + " " + corpus("example3_p4.model")).code, 0);
}

TEST(Cli, CheckTight) {
  std::string defs = write_tmp("s.chc", "p(X) :- q(X).\n");
  std::string s1 = write_tmp("s1.model", "(define-fun p ((X Int)) Bool (= X 0))\n(define-fun q ((X Int)) Bool (= X 0))\n");
  std::string s2 = write_tmp("s2.model", "(define-fun p ((X Int)) Bool true)\n(define-fun q ((X Int)) Bool (= X 0))\n");
  EXPECT_EQ(run("check-tight " + defs + " " + s1).code, 0);
  EXPECT_EQ(run("check-tight " + defs + " " + s2).code, 1);
}

TEST(Cli, Oracle) {
  Outcome hl = run("oracle " + corpus("hl.chc") + " --depth 6 --box 0..3");
  EXPECT_EQ(hl.code, 1);
  EXPECT_NE(hl.out.find("false: derivable"), std::string::npos);
  Outcome su = run("oracle " + corpus("sum_upto.chc") + " --depth 4 --box 0..3");
  EXPECT_EQ(su.code, 0);
  EXPECT_NE(su.out.find("su(2,0,3)"), std::string::npos);
  EXPECT_EQ(run("oracle " + corpus("hl.chc") + " --box 3..0").code, 3);
}

TEST(Cli, Emit) {
  Outcome r = run("emit " + corpus("sum_upto.chc") + " --format smtlib");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, slurp(testdata("sum_upto.smt2")));
  Outcome c = run("emit " + corpus("sum_upto.chc") + " --format chc");
  EXPECT_EQ(c.code, 0);
  EXPECT_TRUE(compare_programs(load("sum_upto.chc"), parse_program(c.out)).empty());
  EXPECT_EQ(run("emit " + corpus("sum_upto.chc") + " --format xml").code, 3);
}

TEST(Cli, Solve) {
  std::string sat = fake_solver("cli_sat.sh", "cat > /dev/null\necho sat");
  std::string unsat = fake_solver("cli_unsat.sh", "cat > /dev/null\necho unsat");
  std::string slow = fake_solver("cli_slow.sh", "sleep 30");
  EXPECT_EQ(run("solve " + corpus("sum_upto.chc") + " --solver " + sat).code, 0);
  EXPECT_EQ(run("solve " + corpus("hl.chc") + " --solver " + unsat).code, 1);
  EXPECT_EQ(run("solve " + corpus("hl.chc") + " --solver " + slow + " --timeout 1").code, 2);
  EXPECT_EQ(run("solve " + corpus("hl.chc"), "CHC_SOLVER=" + unsat).code, 1);
  EXPECT_EQ(run("solve " + corpus("hl.chc"), "CHC_SOLVER=").code, 3);
  EXPECT_EQ(run("solve " + corpus("hl.chc") + " --solver /nonexistent/solver").code, 3);
}

TEST(Cli, ValidateBrokenTrace) {
  std::string t = write_tmp("bad.trace", "STEP 1 UNFOLD in=9 out=5 at=0 flags=-\nSTEP 2 FOLD in=5 out=6 at=0,1 def=77 flags=-\n");
  Outcome r = run("validate-trace " + t);
  EXPECT_NE(r.code, 0) << r.out << r.err;
}

TEST(Cli, InputErrors) {
  EXPECT_EQ(run("emit /nonexistent/file.chc").code, 3);
  std::string bad = write_tmp("bad.chc", "p(X) :- X >\n");
  Outcome r = run("emit " + bad);
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("1:"), std::string::npos) << r.err;
  EXPECT_EQ(run("frobnicate").code, 3);
  EXPECT_EQ(run("transform").code, 3);
}
