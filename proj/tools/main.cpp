// Command-line front end. Exit codes: 0 success / proved / sat,
// 1 disproved / unsat, 2 unknown / timeout, 3 usage or input error.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "chc/chc.hpp"

namespace {

constexpr int kOk = 0, kNo = 1, kUnknown = 2, kInput = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

chc::Program load(const std::string& path) { return chc::parse_program(slurp(path)); }

int verdict_code(chc::Verdict v) {
  switch (v) {
    case chc::Verdict::Proved: return kOk;
    case chc::Verdict::Disproved: return kNo;
    case chc::Verdict::Unknown: return kUnknown;
  }
  return kUnknown;
}

chc::ClauseId pick_goal(const chc::Program& p, const std::string& query) {
  if (query != "auto") {
    std::uint64_t v = 0;
    try {
      std::size_t used = 0;
      v = std::stoull(query, &used);
      if (used != query.size()) throw std::invalid_argument(query);
    } catch (const std::exception&) {
      throw InputError("--query expects a clause id or 'auto', got '" + query + "'");
    }
    const chc::Clause* c = p.find(chc::ClauseId{v});
    if (!c) throw InputError("no clause " + query);
    if (!c->is_goal()) throw InputError("clause " + query + " is not a goal");
    return c->id;
  }
  std::vector<chc::ClauseId> goals;
  for (const auto& c : p.clauses)
    if (c.is_goal()) goals.push_back(c.id);
  if (goals.empty()) throw InputError("the program has no goal clause");
  if (goals.size() > 1) throw InputError("--query auto is ambiguous: " + std::to_string(goals.size()) + " goal clauses");
  return goals[0];
}

void print_report(const chc::ModelReport& r) {
  for (const auto& c : r.clauses) std::cout << "clause " << chc::to_string(c.id) << ": " << chc::verdict_name(c.verdict) << "\n";
  if (!r.defaulted.empty()) {
    std::cout << "taken as true:";
    for (const auto& p : r.defaulted) std::cout << " " << p;
    std::cout << "\n";
  }
  std::cout << "overall: " << chc::verdict_name(r.overall) << "\n";
}

std::pair<long long, long long> parse_box(const std::string& s) {
  auto dots = s.find("..");
  if (dots == std::string::npos) throw InputError("--box expects LO..HI, got '" + s + "'");
  try {
    std::size_t a = 0, b = 0;
    std::string lo = s.substr(0, dots), hi = s.substr(dots + 2);
    long long l = std::stoll(lo, &a), h = std::stoll(hi, &b);
    if (a != lo.size() || b != hi.size()) throw std::invalid_argument(s);
    if (l > h) throw InputError("--box is empty: " + s);
    return {l, h};
  } catch (const InputError&) {
    throw;
  } catch (const std::exception&) {
    throw InputError("--box expects LO..HI, got '" + s + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained Horn clause transformation toolkit"};
  app.require_subcommand(1);

  std::string in, out = "-", query = "auto", trace_file, model_file, format = "chc", box = "0..3", solver;
  bool iterate = false;
  std::size_t max_defs = 64;
  int depth = 4;
  double timeout = 60;

  auto* transform = app.add_subcommand("transform", "run the predicate pairing strategy");
  transform->add_option("input", in, "program file")->required();
  transform->add_option("--query", query, "goal clause id, or auto");
  transform->add_flag("--iterate", iterate, "repeat pairing on the goals it produces");
  transform->add_option("--max-defs", max_defs, "cap on introduced definitions")->check(CLI::PositiveNumber);
  transform->add_option("--trace", trace_file, "write the step log here");
  transform->add_option("-o,--output", out, "output program file");

  auto* check_model = app.add_subcommand("check-model", "check a model against a program");
  check_model->add_option("program", in, "program file")->required();
  check_model->add_option("model", model_file, "define-fun model file")->required();

  auto* check_tight = app.add_subcommand("check-tight", "check tightness of a model on definitions");
  check_tight->add_option("defs", in, "definitions file")->required();
  check_tight->add_option("model", model_file, "define-fun model file")->required();

  auto* oracle = app.add_subcommand("oracle", "bounded bottom-up evaluation");
  oracle->add_option("program", in, "program file")->required();
  oracle->add_option("--depth", depth, "maximum derivation height")->check(CLI::PositiveNumber);
  oracle->add_option("--box", box, "value range LO..HI");

  auto* emit = app.add_subcommand("emit", "print a program");
  emit->add_option("program", in, "program file")->required();
  emit->add_option("--format", format, "smtlib or chc")->check(CLI::IsMember({"smtlib", "chc"}));
  emit->add_option("-o,--output", out, "output file");

  auto* solve = app.add_subcommand("solve", "run an external Horn solver");
  solve->add_option("program", in, "program file")->required();
  solve->add_option("--solver", solver, "solver command (default: $CHC_SOLVER)");
  solve->add_option("--timeout", timeout, "seconds")->check(CLI::Range(1.0, 1e6));

  auto* validate = app.add_subcommand("validate-trace", "check a step log");
  validate->add_option("trace", in, "trace file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kInput;
  }

  try {
    if (*transform) {
      chc::Program p = load(in);
      chc::ClauseId goal = pick_goal(p, query);
      chc::PairingConfig cfg;
      cfg.iterate = iterate;
      cfg.max_defs = max_defs;
      chc::PairingResult r;
      try {
        r = chc::iterate_pairing(p, cfg, {goal});
      } catch (const chc::CapExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUnknown;
      }
      spit(out, chc::print_program(r.transf));
      if (!trace_file.empty()) spit(trace_file, r.log());
      for (const auto& o : r.overlaps) std::cerr << "warning: " << o << "\n";
      std::cerr << "definitions: " << r.defs.clauses.size() << "\n"
                << "clauses: " << r.transf.clauses.size() << "\n";
      return kOk;
    }
    if (*check_model) {
      chc::Program p = load(in);
      auto sigma = chc::parse_model(slurp(model_file));
      auto r = chc::check_model(p, sigma);
      print_report(r);
      return verdict_code(r.overall);
    }
    if (*check_tight) {
      chc::Program p = load(in);
      auto sigma = chc::parse_model(slurp(model_file));
      auto r = chc::check_tight(p, sigma);
      print_report(r);
      return verdict_code(r.overall);
    }
    if (*oracle) {
      chc::Program p = load(in);
      auto [lo, hi] = parse_box(box);
      chc::OracleBudget b{depth, lo, hi};
      for (const auto& g : chc::bounded_lm(p, b)) std::cout << chc::to_string(g) << "\n";
      auto f = chc::false_derivable(p, b);
      if (!f.found) {
        std::cout << "false: not derivable within the budget\n";
        return kOk;
      }
      std::cout << "false: derivable by goal " << chc::to_string(f.goal) << " with";
      for (const auto& [v, x] : f.witness) std::cout << " " << v << "=" << x;
      std::cout << "\n";
      return kNo;
    }
    if (*emit) {
      chc::Program p = load(in);
      spit(out, format == "smtlib" ? chc::emit_smtlib(p) : chc::print_program(p));
      return kOk;
    }
    if (*solve) {
      chc::Program p = load(in);
      if (solver.empty()) {
        if (const char* env = std::getenv("CHC_SOLVER")) solver = env;
      }
      if (solver.empty()) throw InputError("no solver: pass --solver or set CHC_SOLVER");
      chc::SolverConfig cfg{chc::split_command(solver), timeout, true};
      auto r = chc::external_solve(p, cfg);
      std::cout << chc::status_name(r.status) << "\n";
      if (r.status == chc::SolveStatus::Sat) std::cout << r.model;
      if (r.status == chc::SolveStatus::ProcessError) {
        std::cerr << "error: " << r.message << "\n";
        return kInput;
      }
      return r.status == chc::SolveStatus::Sat     ? kOk
             : r.status == chc::SolveStatus::Unsat ? kNo
                                                   : kUnknown;
    }
    if (*validate) {
      auto trace = chc::parse_trace(slurp(in));
      auto ids = chc::check_trace_ids(trace);
      auto unf = chc::check_all_defs_unfolded(trace);
      auto cls = chc::classify_sequence(trace);
      std::cout << "steps: " << trace.size() << "\n";
      std::cout << "well-formed: " << (ids.well_formed ? "yes" : "no") << "\n";
      for (const auto& m : ids.problems) std::cout << "  " << m << "\n";
      std::cout << "all definitions unfolded: " << (unf.ok ? "yes" : "no") << "\n";
      std::cout << "no self-unfolding: " << (cls.no_self_unfolding ? "yes" : "no") << "\n";
      std::cout << "all foldings reversible: " << (cls.all_foldings_reversible ? "yes" : "no") << "\n";
      return ids.well_formed ? kOk : kNo;
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  }
  return kInput;
}
