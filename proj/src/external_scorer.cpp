#include "mindstone/external_scorer.hpp"

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "mindstone/text.hpp"

extern char** environ;

namespace mindstone {

namespace {

using json = nlohmann::json;
using Kind = ScorerError::Kind;
using Clock = std::chrono::steady_clock;

void ignore_sigpipe_once() {
    static std::once_flag flag;
    std::call_once(flag, [] { std::signal(SIGPIPE, SIG_IGN); });
}

std::string snippet(const std::string& line) {
    constexpr std::size_t kMax = 200;
    return line.size() <= kMax ? line : line.substr(0, kMax) + "...";
}

[[noreturn]] void malformed(const std::string& line, const std::string& why) {
    throw ScorerError(Kind::MalformedResponse,
                      "malformed scorer response (" + why + "): " + snippet(line));
}

json parse_line(const std::string& line) {
    try {
        auto j = json::parse(line);
        if (!j.is_object()) malformed(line, "not a JSON object");
        return j;
    } catch (const json::parse_error&) {
        malformed(line, "invalid JSON");
    }
}

std::string type_of(const json& j, const std::string& line) {
    auto it = j.find("type");
    if (it == j.end() || !it->is_string()) malformed(line, "missing 'type'");
    return it->get<std::string>();
}

// Validates the id echo and turns error records into exceptions.
void check_reply(const json& j, const std::string& line, const std::string& id,
                 const std::string& expected_type) {
    auto type = type_of(j, line);
    auto idit = j.find("id");
    if (idit == j.end() || !idit->is_string()) malformed(line, "missing 'id'");
    if (idit->get<std::string>() != id) malformed(line, "unexpected id, wanted " + id);
    if (type == "error") {
        auto msg = j.find("message");
        throw ScorerError(Kind::Remote, "scorer error for request " + id + ": " +
                                            (msg != j.end() && msg->is_string()
                                                 ? msg->get<std::string>()
                                                 : std::string("(no message)")));
    }
    if (type != expected_type) malformed(line, "expected type '" + expected_type + "'");
}

}  // namespace

std::string_view to_string(ScorerRole role) noexcept {
    return role == ScorerRole::Rank ? "rank" : "read";
}

ExternalScorerSession::ExternalScorerSession(std::string command_line, ScorerRole role,
                                             ExternalScorerOptions options)
    : command_(std::move(command_line)), options_(options) {
    ignore_sigpipe_once();
    int in_pipe[2];
    int out_pipe[2];
    if (pipe2(in_pipe, O_CLOEXEC) != 0) {
        throw ScorerError(Kind::SpawnFailed, std::string("pipe: ") + std::strerror(errno));
    }
    if (pipe2(out_pipe, O_CLOEXEC) != 0) {
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        throw ScorerError(Kind::SpawnFailed, std::string("pipe: ") + std::strerror(errno));
    }

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);

    std::string sh = "/bin/sh";
    std::string dash_c = "-c";
    char* argv[] = {sh.data(), dash_c.data(), command_.data(), nullptr};
    // Own process group, so shutdown also reaches anything the shell started.
    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
    posix_spawnattr_setpgroup(&attr, 0);
    pid_t pid = -1;
    int rc = posix_spawn(&pid, "/bin/sh", &actions, &attr, argv, environ);
    posix_spawnattr_destroy(&attr);
    posix_spawn_file_actions_destroy(&actions);
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    if (rc != 0) {
        ::close(in_pipe[1]);
        ::close(out_pipe[0]);
        throw ScorerError(Kind::SpawnFailed, "cannot spawn '" + command_ + "': " + std::strerror(rc));
    }
    pid_ = pid;
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];

    try {
        auto line = read_line(Clock::now() + options_.handshake_timeout, true);
        auto j = parse_line(line);
        if (type_of(j, line) != "hello") malformed(line, "expected hello");
        auto proto = j.find("protocol");
        if (proto == j.end() || !proto->is_number_integer() || proto->get<int>() != 1) {
            malformed(line, "unsupported protocol");
        }
        auto roles = j.find("roles");
        if (roles == j.end() || !roles->is_array()) malformed(line, "missing 'roles'");
        for (const auto& r : *roles) {
            if (!r.is_string()) malformed(line, "non-string role");
            roles_.push_back(r.get<std::string>());
        }
        if (auto p = j.find("pipelined"); p != j.end() && p->is_boolean()) pipelined_ = p->get<bool>();
        if (std::find(roles_.begin(), roles_.end(), to_string(role)) == roles_.end()) {
            throw ScorerError(Kind::UnsupportedRole,
                              "scorer '" + command_ + "' does not offer role " +
                                  std::string(to_string(role)));
        }
    } catch (...) {
        shutdown();
        throw;
    }
}

ExternalScorerSession::~ExternalScorerSession() { shutdown(); }

void ExternalScorerSession::shutdown() noexcept {
    if (to_child_ >= 0) {
        ::close(to_child_);
        to_child_ = -1;
    }
    if (from_child_ >= 0) {
        ::close(from_child_);
        from_child_ = -1;
    }
    if (pid_ > 0) {
        // Give the child a moment to exit on EOF before killing it.
        int status = 0;
        for (int i = 0; i < 100; ++i) {
            if (::waitpid(pid_, &status, WNOHANG) == pid_) {
                pid_ = -1;
                return;
            }
            ::usleep(10000);
        }
        ::kill(-pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
        pid_ = -1;
    }
}

void ExternalScorerSession::fail_exited() {
    int status = 0;
    std::string how = "closed its output";
    if (pid_ > 0) {
        // The child closed stdout; collect it if it has exited.
        for (int i = 0; i < 100; ++i) {
            if (::waitpid(pid_, &status, WNOHANG) == pid_) {
                pid_ = -1;
                if (WIFEXITED(status)) {
                    how = "exited with status " + std::to_string(WEXITSTATUS(status));
                } else if (WIFSIGNALED(status)) {
                    how = "killed by signal " + std::to_string(WTERMSIG(status));
                }
                break;
            }
            ::usleep(5000);
        }
    }
    throw ScorerError(Kind::ProcessExited, "scorer process '" + command_ + "' " + how);
}

void ExternalScorerSession::write_line(const std::string& line) {
    std::string data = line + "\n";
    std::size_t off = 0;
    while (off < data.size()) {
        auto n = ::write(to_child_, data.data() + off, data.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            if (errno == EPIPE) fail_exited();
            throw ScorerError(Kind::ProcessExited, std::string("write to scorer: ") + std::strerror(errno));
        }
        off += static_cast<std::size_t>(n);
    }
}

std::string ExternalScorerSession::read_line(Clock::time_point deadline, bool handshake) {
    for (;;) {
        if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (trim(line).empty()) continue;
            return line;
        }
        auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
        if (remaining.count() <= 0) {
            if (handshake) {
                throw ScorerError(Kind::HandshakeTimeout,
                                  "scorer '" + command_ + "' sent no hello within " +
                                      std::to_string(options_.handshake_timeout.count()) + " ms");
            }
            throw ScorerError(Kind::RequestTimeout, "scorer '" + command_ + "' timed out after " +
                                                        std::to_string(options_.request_timeout.count()) +
                                                        " ms");
        }
        pollfd pfd{from_child_, POLLIN, 0};
        int rc = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining.count(), 1000)));
        if (rc < 0) {
            if (errno == EINTR) continue;
            throw ScorerError(Kind::ProcessExited, std::string("poll: ") + std::strerror(errno));
        }
        if (rc == 0) continue;
        char chunk[4096];
        auto n = ::read(from_child_, chunk, sizeof chunk);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ScorerError(Kind::ProcessExited, std::string("read: ") + std::strerror(errno));
        }
        if (n == 0) fail_exited();
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

std::string ExternalScorerSession::next_id() { return "r" + std::to_string(++counter_); }

double ExternalScorerSession::rank(std::string_view question, std::string_view text) {
    auto id = next_id();
    json req{{"type", "rank"}, {"id", id}, {"question", question}, {"text", text}};
    write_line(req.dump(-1, ' ', false, json::error_handler_t::replace));
    auto line = read_line(Clock::now() + options_.request_timeout, false);
    auto j = parse_line(line);
    check_reply(j, line, id, "rank_result");
    auto s = j.find("score");
    if (s == j.end() || !s->is_number()) malformed(line, "missing numeric 'score'");
    return s->get<double>();
}

std::vector<SpanCandidate> ExternalScorerSession::read(std::string_view question,
                                                       std::string_view text, std::size_t k) {
    auto id = next_id();
    json req{{"type", "read"}, {"id", id}, {"question", question}, {"text", text}, {"k", k}};
    write_line(req.dump(-1, ' ', false, json::error_handler_t::replace));
    auto line = read_line(Clock::now() + options_.request_timeout, false);
    auto j = parse_line(line);
    check_reply(j, line, id, "read_result");
    auto spans = j.find("spans");
    if (spans == j.end() || !spans->is_array()) malformed(line, "missing 'spans'");
    std::vector<SpanCandidate> out;
    for (const auto& s : *spans) {
        if (!s.is_object() || !s.contains("start") || !s.contains("end") || !s.contains("score") ||
            !s["start"].is_number_integer() || !s["end"].is_number_integer() ||
            !s["score"].is_number() || s["start"].get<long long>() < 0 ||
            s["end"].get<long long>() < 0) {
            malformed(line, "bad span record");
        }
        out.push_back({codepoint_to_byte_offset(text, s["start"].get<std::size_t>()),
                       codepoint_to_byte_offset(text, s["end"].get<std::size_t>()),
                       s["score"].get<double>()});
    }
    return out;
}

ExternalScorerPool::ExternalScorerPool(std::string command_line, ScorerRole role, std::size_t size,
                                       ExternalScorerOptions options)
    : command_(std::move(command_line)) {
    if (size == 0) size = 1;
    for (std::size_t i = 0; i < size; ++i) {
        sessions_.push_back(std::make_unique<ExternalScorerSession>(command_, role, options));
        idle_.push_back(sessions_.back().get());
    }
}

ExternalScorerSession& ExternalScorerPool::acquire() const {
    std::unique_lock lock(mutex_);
    available_.wait(lock, [&] { return !idle_.empty(); });
    auto* s = idle_.back();
    idle_.pop_back();
    return *s;
}

void ExternalScorerPool::release(ExternalScorerSession& s) const {
    {
        std::lock_guard lock(mutex_);
        idle_.push_back(&s);
    }
    available_.notify_one();
}

double ExternalScorerPool::rank(std::string_view question, std::string_view text) const {
    auto& s = acquire();
    try {
        auto v = s.rank(question, text);
        release(s);
        return v;
    } catch (...) {
        release(s);
        throw;
    }
}

std::vector<SpanCandidate> ExternalScorerPool::read(std::string_view question,
                                                    std::string_view text, std::size_t k) const {
    auto& s = acquire();
    try {
        auto v = s.read(question, text, k);
        release(s);
        return v;
    } catch (...) {
        release(s);
        throw;
    }
}

double ExternalRanker::score(std::string_view question, const Paragraph& paragraph) const {
    return pool_->rank(question, paragraph.full_text);
}

std::vector<SpanCandidate> ExternalReader::spans(std::string_view question,
                                                 const Paragraph& paragraph, std::size_t k) const {
    return pool_->read(question, paragraph.full_text, k);
}

}  // namespace mindstone
