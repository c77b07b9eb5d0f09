#pragma once

// Runs an external Horn solver on a program: the SMT-LIB script goes to its
// standard input, the verdict and model are read from its standard output.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <sstream>
#include <string>
#include <vector>

#include "chc/error.hpp"
#include "chc/smtlib.hpp"
#include "chc/syntax.hpp"

namespace chc {

struct SolverConfig {
  std::vector<std::string> command;  // executable and arguments
  double timeout_seconds = 60;
  bool enabled = true;
};

enum class SolveStatus { Sat, Unsat, Unknown, Timeout, ProcessError };

inline const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Sat: return "sat";
    case SolveStatus::Unsat: return "unsat";
    case SolveStatus::Unknown: return "unknown";
    case SolveStatus::Timeout: return "timeout";
    case SolveStatus::ProcessError: return "process-error";
  }
  return "?";
}

struct SolveResult {
  SolveStatus status = SolveStatus::Unknown;
  std::string model;    // text after the verdict line, when sat
  std::string message;  // diagnostics for ProcessError
};

/// Splits a command line on whitespace. No quoting.
inline std::vector<std::string> split_command(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

namespace detail {

inline SolveResult process_error(const std::string& what) {
  return SolveResult{SolveStatus::ProcessError, "", what + ": " + std::strerror(errno)};
}

inline SolveResult read_verdict(const std::string& out, const std::string& err) {
  std::istringstream in(out);
  std::string first;
  in >> first;
  SolveResult r;
  if (first == "sat") {
    r.status = SolveStatus::Sat;
    std::string rest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    r.model = rest;
  } else if (first == "unsat") {
    r.status = SolveStatus::Unsat;
  } else if (first == "unknown") {
    r.status = SolveStatus::Unknown;
  } else {
    r.status = SolveStatus::ProcessError;
    r.message = "unexpected solver output: " + (out.empty() ? err : out.substr(0, 200));
  }
  return r;
}

}  // namespace detail

/// Feeds `script` to the configured process and waits at most the timeout.
/// The child is always killed if still running and always reaped.
inline SolveResult run_solver(const std::string& script, const SolverConfig& cfg) {
  if (!cfg.enabled) throw Error("external solver is disabled");
  if (cfg.command.empty()) throw Error("no solver command configured");
  if (cfg.timeout_seconds < 1) throw Error("solver timeout must be at least 1 second");

  int in_p[2], out_p[2], err_p[2];
  if (pipe(in_p) != 0) return detail::process_error("pipe");
  if (pipe(out_p) != 0) {
    close(in_p[0]);
    close(in_p[1]);
    return detail::process_error("pipe");
  }
  if (pipe(err_p) != 0) {
    for (int fd : {in_p[0], in_p[1], out_p[0], out_p[1]}) close(fd);
    return detail::process_error("pipe");
  }
  // Reports exec failure to the parent.
  int exec_p[2];
  if (pipe2(exec_p, O_CLOEXEC) != 0) {
    for (int fd : {in_p[0], in_p[1], out_p[0], out_p[1], err_p[0], err_p[1]}) close(fd);
    return detail::process_error("pipe");
  }

  std::vector<char*> argv;
  for (const auto& a : cfg.command) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  pid_t pid = fork();
  if (pid < 0) {
    for (int fd : {in_p[0], in_p[1], out_p[0], out_p[1], err_p[0], err_p[1], exec_p[0], exec_p[1]}) close(fd);
    return detail::process_error("fork");
  }
  if (pid == 0) {
    dup2(in_p[0], 0);
    dup2(out_p[1], 1);
    dup2(err_p[1], 2);
    for (int fd : {in_p[0], in_p[1], out_p[0], out_p[1], err_p[0], err_p[1], exec_p[0]}) close(fd);
    execvp(argv[0], argv.data());
    int e = errno;
    ssize_t n = write(exec_p[1], &e, sizeof e);
    (void)n;
    _exit(127);
  }
  close(in_p[0]);
  close(out_p[1]);
  close(err_p[1]);
  close(exec_p[1]);

  int child_errno = 0;
  ssize_t got = read(exec_p[0], &child_errno, sizeof child_errno);
  close(exec_p[0]);
  if (got == static_cast<ssize_t>(sizeof child_errno)) {
    close(in_p[1]);
    close(out_p[0]);
    close(err_p[0]);
    waitpid(pid, nullptr, 0);
    return SolveResult{SolveStatus::ProcessError, "",
                       "cannot execute '" + cfg.command[0] + "': " + std::strerror(child_errno)};
  }

  for (int fd : {in_p[1], out_p[0], err_p[0]}) fcntl(fd, F_SETFL, fcntl(fd, F_GETFL) | O_NONBLOCK);
  signal(SIGPIPE, SIG_IGN);

  auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(cfg.timeout_seconds);
  std::string out, err;
  std::size_t written = 0;
  int wfd = in_p[1], ofd = out_p[0], efd = err_p[0];
  if (script.empty()) {
    close(wfd);
    wfd = -1;
  }
  bool timed_out = false;
  char buf[4096];
  while (ofd >= 0 || efd >= 0) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      timed_out = true;
      break;
    }
    std::vector<pollfd> fds;
    if (wfd >= 0) fds.push_back({wfd, POLLOUT, 0});
    if (ofd >= 0) fds.push_back({ofd, POLLIN, 0});
    if (efd >= 0) fds.push_back({efd, POLLIN, 0});
    int rc = poll(fds.data(), fds.size(), static_cast<int>(std::min<long long>(left.count(), 100)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (const auto& p : fds) {
      if (!p.revents) continue;
      if (p.fd == wfd) {
        ssize_t n = write(wfd, script.data() + written, script.size() - written);
        if (n > 0) written += static_cast<std::size_t>(n);
        if (n < 0 && errno != EAGAIN) written = script.size();
        if (written >= script.size()) {
          close(wfd);
          wfd = -1;
        }
      } else {
        ssize_t n = read(p.fd, buf, sizeof buf);
        if (n > 0) {
          (p.fd == ofd ? out : err).append(buf, static_cast<std::size_t>(n));
        } else if (n == 0 || errno != EAGAIN) {
          close(p.fd);
          (p.fd == ofd ? ofd : efd) = -1;
        }
      }
    }
  }
  for (int fd : {wfd, ofd, efd})
    if (fd >= 0) close(fd);

  int status = 0;
  if (timed_out) {
    kill(pid, SIGKILL);
    waitpid(pid, &status, 0);
    return SolveResult{SolveStatus::Timeout, "", ""};
  }
  // Output closed; give the process a moment to exit before killing it.
  for (int i = 0; i < 20; ++i) {
    if (waitpid(pid, &status, WNOHANG) == pid) return detail::read_verdict(out, err);
    usleep(50000);
  }
  kill(pid, SIGKILL);
  waitpid(pid, &status, 0);
  return detail::read_verdict(out, err);
}

/// emit_smtlib(p) followed by check-sat and get-model.
inline SolveResult external_solve(const Program& p, const SolverConfig& cfg) {
  return run_solver(emit_smtlib(p) + "(check-sat)\n(get-model)\n", cfg);
}

}  // namespace chc
