#pragma once

#include <cerrno>
#include <csignal>
#include <cstdio>
#include <string>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include "error.hpp"

namespace bbp {

//---------------------------------------------------------------------------//
/*!
 * Child process run through /bin/sh with pipes on stdin and stdout.
 *
 * Not copyable. Reads and writes are line based and must not be interleaved
 * from several threads.
 */
class ChildProcess
{
  public:
    explicit ChildProcess(std::string const& command)
    {
        std::signal(SIGPIPE, SIG_IGN);
        int to_child[2];
        int from_child[2];
        if (::pipe(to_child) != 0)
            detail::fail(ErrorCode::SubprocessFailure, "pipe() failed");
        if (::pipe(from_child) != 0)
        {
            ::close(to_child[0]);
            ::close(to_child[1]);
            detail::fail(ErrorCode::SubprocessFailure, "pipe() failed");
        }
        pid_ = ::fork();
        if (pid_ < 0)
            detail::fail(ErrorCode::SubprocessFailure, "fork() failed");
        if (pid_ == 0)
        {
            ::dup2(to_child[0], STDIN_FILENO);
            ::dup2(from_child[1], STDOUT_FILENO);
            ::close(to_child[0]);
            ::close(to_child[1]);
            ::close(from_child[0]);
            ::close(from_child[1]);
            ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            ::_exit(127);
        }
        ::close(to_child[0]);
        ::close(from_child[1]);
        ::fcntl(to_child[1], F_SETFD, FD_CLOEXEC);
        ::fcntl(from_child[0], F_SETFD, FD_CLOEXEC);
        in_ = ::fdopen(to_child[1], "w");
        out_ = ::fdopen(from_child[0], "r");
        if (!in_ || !out_)
            detail::fail(ErrorCode::SubprocessFailure, "fdopen() failed");
    }

    ChildProcess(ChildProcess const&) = delete;
    ChildProcess& operator=(ChildProcess const&) = delete;

    ~ChildProcess()
    {
        try
        {
            finish();
        }
        catch (...)
        {
        }
    }

    void write_line(std::string const& line)
    {
        require_running();
        if (std::fputs(line.c_str(), in_) < 0 || std::fputc('\n', in_) == EOF || std::fflush(in_) != 0)
            detail::fail(ErrorCode::SubprocessFailure, "generator closed its input");
    }

    //! Next line without the newline; false at end of stream.
    bool read_line(std::string& line)
    {
        require_running();
        line.clear();
        int c;
        while ((c = std::fgetc(out_)) != EOF)
        {
            if (c == '\n')
                return true;
            line.push_back(static_cast<char>(c));
        }
        return !line.empty();
    }

    /*!
     * Close the pipes and wait for the child. Returns the exit status;
     * a child killed by a signal reports 128 + signal.
     */
    int finish()
    {
        if (pid_ <= 0)
            return status_;
        if (in_)
            std::fclose(in_);
        if (out_)
            std::fclose(out_);
        in_ = out_ = nullptr;
        int raw = 0;
        while (::waitpid(pid_, &raw, 0) < 0)
        {
            if (errno != EINTR)
                break;
        }
        pid_ = -1;
        if (WIFEXITED(raw))
            status_ = WEXITSTATUS(raw);
        else if (WIFSIGNALED(raw))
            status_ = 128 + WTERMSIG(raw);
        return status_;
    }

  private:
    void require_running() const
    {
        if (pid_ <= 0)
            detail::fail(ErrorCode::SubprocessFailure, "generator process is no longer running");
    }

    pid_t pid_ = -1;
    std::FILE* in_ = nullptr;
    std::FILE* out_ = nullptr;
    int status_ = 0;
};

}  // namespace bbp
