#include "c2r/util/process.hpp"

#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace c2r {

namespace {

void set_nonblocking(int fd) {
    int flags = fcntl(fd, F_GETFL, 0);
    fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

void drain(int fd, std::string& sink, bool& open) {
    char buf[8192];
    for (;;) {
        ssize_t n = read(fd, buf, sizeof buf);
        if (n > 0) {
            sink.append(buf, static_cast<std::size_t>(n));
            continue;
        }
        if (n == 0) open = false;
        else if (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) open = false;
        return;
    }
}

} // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options) {
    ProcessResult result;
    if (argv.empty()) {
        result.spawn_failed = true;
        return result;
    }

    int out_pipe[2];
    int err_pipe[2];
    int exec_pipe[2]; // reports exec failure from the child
    if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0 || pipe(exec_pipe) != 0) {
        result.spawn_failed = true;
        return result;
    }
    fcntl(exec_pipe[1], F_SETFD, FD_CLOEXEC);

    std::vector<char*> cargv;
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);

    pid_t pid = fork();
    if (pid < 0) {
        result.spawn_failed = true;
        return result;
    }
    if (pid == 0) {
        setpgid(0, 0);
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(err_pipe[1], STDERR_FILENO);
        close(out_pipe[0]);
        close(err_pipe[0]);
        close(exec_pipe[0]);
        int devnull = open("/dev/null", O_RDONLY);
        if (devnull >= 0) dup2(devnull, STDIN_FILENO);
        if (!options.cwd.empty() && chdir(options.cwd.c_str()) != 0) {
            int e = errno;
            (void)!write(exec_pipe[1], &e, sizeof e);
            _exit(127);
        }
        for (const auto& [k, v] : options.env) setenv(k.c_str(), v.c_str(), 1);
        execvp(cargv[0], cargv.data());
        int e = errno;
        (void)!write(exec_pipe[1], &e, sizeof e);
        _exit(127);
    }

    close(out_pipe[1]);
    close(err_pipe[1]);
    close(exec_pipe[1]);

    int exec_errno = 0;
    if (read(exec_pipe[0], &exec_errno, sizeof exec_errno) == static_cast<ssize_t>(sizeof exec_errno)) {
        result.spawn_failed = true;
    }
    close(exec_pipe[0]);

    set_nonblocking(out_pipe[0]);
    set_nonblocking(err_pipe[0]);
    bool out_open = true;
    bool err_open = true;
    auto deadline = std::chrono::steady_clock::now() + options.timeout;

    while (out_open || err_open) {
        auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (remaining.count() <= 0) {
            result.timed_out = true;
            kill(-pid, SIGKILL);
            break;
        }
        pollfd fds[2];
        int nfds = 0;
        if (out_open) fds[nfds++] = {out_pipe[0], POLLIN, 0};
        if (err_open) fds[nfds++] = {err_pipe[0], POLLIN, 0};
        int rc = poll(fds, static_cast<nfds_t>(nfds), static_cast<int>(std::min<long long>(remaining.count(), 1000)));
        if (rc < 0 && errno != EINTR) break;
        if (out_open) drain(out_pipe[0], result.out, out_open);
        if (err_open) drain(err_pipe[0], result.err, err_open);
    }
    close(out_pipe[0]);
    close(err_pipe[0]);

    int status = 0;
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (result.timed_out || result.spawn_failed) {
        result.exit_code = -1;
    } else if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else {
        result.exit_code = -1;
    }
    return result;
}

bool program_available(const std::string& program) {
    ProcessOptions opts;
    opts.timeout = std::chrono::seconds(30);
    return run_process({program, "--version"}, opts).ok();
}

} // namespace c2r
