#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <stdexcept>

#include "rmued/serialization.hpp"
#include "rmued/students.hpp"

namespace rmued {

ExternalStudent::ExternalStudent(std::string command) : command_(std::move(command)) {
  int in_pipe[2];   // parent -> child
  int out_pipe[2];  // child -> parent
  if (pipe(in_pipe) != 0) throw std::runtime_error("pipe failed");
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw std::runtime_error("pipe failed");
  }
  pid_ = fork();
  if (pid_ < 0) throw std::runtime_error("fork failed");
  if (pid_ == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  fcntl(to_child_, F_SETFD, FD_CLOEXEC);
  fcntl(from_child_, F_SETFD, FD_CLOEXEC);
}

ExternalStudent::~ExternalStudent() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    waitpid(pid_, &status, 0);
  }
}

std::string ExternalStudent::request(const std::string& line) {
  std::string out = line + "\n";
  // A child that exited early must surface as an error, not a signal.
  struct sigaction ignore {};
  struct sigaction previous {};
  ignore.sa_handler = SIG_IGN;
  sigaction(SIGPIPE, &ignore, &previous);
  std::size_t written = 0;
  while (written < out.size()) {
    ssize_t n = write(to_child_, out.data() + written, out.size() - written);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      sigaction(SIGPIPE, &previous, nullptr);
      throw std::runtime_error("external student closed its input");
    }
    written += static_cast<std::size_t>(n);
  }
  sigaction(SIGPIPE, &previous, nullptr);

  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string reply = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return reply;
    }
    char chunk[4096];
    ssize_t n = read(from_child_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw std::runtime_error("external student exited without replying");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void ExternalStudent::reset(const Problem& problem, std::uint64_t seed) {
  Json msg;
  msg["type"] = "reset";
  msg["seed"] = seed;
  msg["problem"] = to_json(problem);
  request(msg.dump());
}

Decision ExternalStudent::decide(const StudentView& view) {
  Json msg;
  msg["type"] = "step";
  msg["observation"] = to_json(view.observation);
  msg["rm_graph"] = to_json(export_policy_graph(view.rm, view.rm_state));
  msg["rm_state"] = view.rm_state;
  Json reply;
  try {
    reply = Json::parse(request(msg.dump()));
  } catch (const Json::parse_error& e) {
    throw DataError(std::string("external student reply is not JSON: ") + e.what());
  }
  if (!reply.is_object() || !reply.contains("action"))
    throw DataError("external student reply lacks an action");
  Decision d;
  const Json& a = reply["action"];
  if (a.is_number_integer()) {
    int id = a.get<int>();
    if (id < 0 || id >= kNumActions) throw DataError("external student action out of range");
    d.action = static_cast<Action>(id);
  } else if (a.is_string()) {
    auto parsed = parse_action(a.get<std::string>());
    if (!parsed) throw DataError("external student action name is unknown");
    d.action = *parsed;
  } else {
    throw DataError("external student action has the wrong type");
  }
  if (reply.contains("value") && reply["value"].is_number())
    d.value = std::clamp(reply["value"].get<double>(), 0.0, 1.0);
  return d;
}

}  // namespace rmued
