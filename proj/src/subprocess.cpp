#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <sstream>
#include <vector>

#include "dr/backend.hpp"
#include "dr/error.hpp"

namespace dr::backend {

namespace {

std::vector<std::string> split_command(const std::string& line) {
  std::vector<std::string> parts;
  std::istringstream in(line);
  std::string word;
  while (in >> word) parts.push_back(word);
  return parts;
}

void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] { signal(SIGPIPE, SIG_IGN); });
}

struct Pipe {
  int fds[2] = {-1, -1};
  ~Pipe() {
    close_read();
    close_write();
  }
  void open() {
    if (pipe(fds) != 0)
      throw Error(ErrorKind::BackendUnavailable, "pipe() failed");
  }
  int read_fd() const { return fds[0]; }
  int write_fd() const { return fds[1]; }
  void close_read() {
    if (fds[0] >= 0) close(fds[0]);
    fds[0] = -1;
  }
  void close_write() {
    if (fds[1] >= 0) close(fds[1]);
    fds[1] = -1;
  }
};

}  // namespace

bool command_resolvable(const std::string& argv0) {
  if (argv0.empty()) return false;
  if (argv0.find('/') != std::string::npos) {
    return access(argv0.c_str(), X_OK) == 0;
  }
  const char* path = std::getenv("PATH");
  if (!path) return false;
  std::istringstream in(path);
  std::string dir;
  while (std::getline(in, dir, ':')) {
    if (dir.empty()) continue;
    const std::string full = dir + "/" + argv0;
    if (access(full.c_str(), X_OK) == 0) return true;
  }
  return false;
}

SubprocessResult run_subprocess(const std::string& command_line,
                                const std::vector<uint8_t>& input,
                                double timeout_seconds) {
  ignore_sigpipe_once();
  const std::vector<std::string> args = split_command(command_line);
  if (args.empty())
    throw Error(ErrorKind::BackendUnavailable, "empty command line");

  Pipe to_child, from_child, exec_report;
  to_child.open();
  from_child.open();
  exec_report.open();
  fcntl(exec_report.write_fd(), F_SETFD, FD_CLOEXEC);

  const pid_t pid = fork();
  if (pid < 0) throw Error(ErrorKind::BackendUnavailable, "fork() failed");
  if (pid == 0) {
    dup2(to_child.read_fd(), STDIN_FILENO);
    dup2(from_child.write_fd(), STDOUT_FILENO);
    to_child.close_read();
    to_child.close_write();
    from_child.close_read();
    from_child.close_write();
    exec_report.close_read();
    std::vector<char*> argv;
    argv.reserve(args.size() + 1);
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    execvp(argv[0], argv.data());
    const int err = errno;
    ssize_t ignored = write(exec_report.write_fd(), &err, sizeof(err));
    (void)ignored;
    _exit(127);
  }

  to_child.close_read();
  from_child.close_write();
  exec_report.close_write();

  // exec report closes empty on success, carries errno on failure
  int exec_errno = 0;
  const ssize_t reported =
      read(exec_report.read_fd(), &exec_errno, sizeof(exec_errno));
  if (reported > 0) {
    int status = 0;
    waitpid(pid, &status, 0);
    throw Error(ErrorKind::BackendUnavailable,
                "cannot execute '" + args[0] +
                    "': " + std::strerror(exec_errno));
  }

  fcntl(to_child.write_fd(), F_SETFL, O_NONBLOCK);
  fcntl(from_child.read_fd(), F_SETFL, O_NONBLOCK);

  using clock = std::chrono::steady_clock;
  const auto deadline =
      clock::now() + std::chrono::duration_cast<clock::duration>(
                         std::chrono::duration<double>(timeout_seconds));

  SubprocessResult result;
  size_t written = 0;
  bool stdin_open = true;
  bool stdout_open = true;
  uint8_t buf[65536];

  while (stdout_open) {
    const auto now = clock::now();
    if (now >= deadline) {
      kill(pid, SIGKILL);
      int status = 0;
      waitpid(pid, &status, 0);
      throw Error(ErrorKind::BackendTimeout,
                  "'" + args[0] + "' exceeded " +
                      std::to_string(timeout_seconds) + "s");
    }
    const int remaining_ms = static_cast<int>(
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now)
            .count()) + 1;

    pollfd fds[2];
    nfds_t nfds = 0;
    pollfd* write_slot = nullptr;
    pollfd* read_slot = nullptr;
    if (stdin_open) {
      fds[nfds] = {to_child.write_fd(), POLLOUT, 0};
      write_slot = &fds[nfds++];
    }
    fds[nfds] = {from_child.read_fd(), POLLIN, 0};
    read_slot = &fds[nfds++];

    const int rc = poll(fds, nfds, remaining_ms);
    if (rc < 0) {
      if (errno == EINTR) continue;
      kill(pid, SIGKILL);
      waitpid(pid, nullptr, 0);
      throw Error(ErrorKind::BackendUnavailable, "poll() failed");
    }
    if (rc == 0) continue;  // deadline handling at loop top

    if (write_slot && (write_slot->revents & (POLLOUT | POLLERR))) {
      if (written >= input.size()) {
        to_child.close_write();
        stdin_open = false;
      } else {
        const ssize_t n = write(to_child.write_fd(), input.data() + written,
                                input.size() - written);
        if (n > 0) {
          written += static_cast<size_t>(n);
          if (written >= input.size()) {
            to_child.close_write();
            stdin_open = false;
          }
        } else if (n < 0 && errno != EAGAIN && errno != EINTR) {
          // child stopped reading; it may still produce output
          to_child.close_write();
          stdin_open = false;
        }
      }
    }
    if (read_slot->revents & (POLLIN | POLLHUP | POLLERR)) {
      const ssize_t n = read(from_child.read_fd(), buf, sizeof(buf));
      if (n > 0) {
        result.output.insert(result.output.end(), buf, buf + n);
      } else if (n == 0) {
        stdout_open = false;
      } else if (errno != EAGAIN && errno != EINTR) {
        stdout_open = false;
      }
    }
  }

  int status = 0;
  for (;;) {
    const pid_t done = waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    if (clock::now() >= deadline) {
      kill(pid, SIGKILL);
      waitpid(pid, &status, 0);
      throw Error(ErrorKind::BackendTimeout,
                  "'" + args[0] + "' exceeded " +
                      std::to_string(timeout_seconds) + "s");
    }
    usleep(2000);
  }
  if (WIFEXITED(status) && WEXITSTATUS(status) != 0) {
    throw Error(ErrorKind::BackendError,
                "'" + args[0] + "' exited with code " +
                    std::to_string(WEXITSTATUS(status)),
                WEXITSTATUS(status));
  }
  if (WIFSIGNALED(status)) {
    throw Error(ErrorKind::BackendError,
                "'" + args[0] + "' killed by signal " +
                    std::to_string(WTERMSIG(status)),
                128 + WTERMSIG(status));
  }
  return result;
}

}  // namespace dr::backend
