#include "subprocess.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <ctime>

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "wombat/error.hpp"

extern char** environ;

namespace wombat::detail {

namespace {

class Fd {
public:
    Fd() = default;
    explicit Fd(int fd) : fd_(fd) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    ~Fd() { reset(); }
    int get() const { return fd_; }
    void reset()
    {
        if (fd_ >= 0) {
            ::close(fd_);
            fd_ = -1;
        }
    }

private:
    int fd_ = -1;
};

// Writes all of `data`, swallowing SIGPIPE if the child closed its stdin early.
void write_all_ignoring_epipe(int fd, std::string_view data)
{
    sigset_t block;
    sigset_t previous;
    sigemptyset(&block);
    sigaddset(&block, SIGPIPE);
    pthread_sigmask(SIG_BLOCK, &block, &previous);
    bool broken = false;
    while (!data.empty()) {
        auto n = ::write(fd, data.data(), data.size());
        if (n < 0) {
            if (errno == EINTR) continue;
            broken = errno == EPIPE;
            break;
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
    if (broken) {
        timespec zero{0, 0};
        sigtimedwait(&block, nullptr, &zero);
    }
    pthread_sigmask(SIG_SETMASK, &previous, nullptr);
}

} // namespace

std::string run_filter_process(const std::string& command, std::string_view input)
{
    int in_pipe[2];
    int out_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0) {
        throw PipelineError("external stage: pipe failed: " + std::string(std::strerror(errno)));
    }
    Fd in_read(in_pipe[0]);
    Fd in_write(in_pipe[1]);
    if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
        throw PipelineError("external stage: pipe failed: " + std::string(std::strerror(errno)));
    }
    Fd out_read(out_pipe[0]);
    Fd out_write(out_pipe[1]);

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_read.get(), STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_write.get(), STDOUT_FILENO);

    const char* argv[] = {"/bin/sh", "-c", command.c_str(), nullptr};
    pid_t pid = 0;
    int rc = posix_spawn(&pid, "/bin/sh", &actions, nullptr, const_cast<char* const*>(argv), environ);
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0) {
        throw PipelineError("external stage '" + command + "': spawn failed: " + std::strerror(rc));
    }
    in_read.reset();
    out_write.reset();

    write_all_ignoring_epipe(in_write.get(), input);
    in_write.reset();

    std::string output;
    char buffer[4096];
    while (true) {
        auto n = ::read(out_read.get(), buffer, sizeof buffer);
        if (n < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (n == 0) break;
        output.append(buffer, static_cast<std::size_t>(n));
    }

    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        throw PipelineError("external stage '" + command + "' exited with status " + std::to_string(code));
    }
    return output;
}

} // namespace wombat::detail
