#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "mindstone/errors.hpp"
#include "mindstone/scorers.hpp"

namespace mindstone {

enum class ScorerRole { Rank, Read };

std::string_view to_string(ScorerRole role) noexcept;

/// Failure of an external scorer subprocess.
class ScorerError : public Error {
  public:
    enum class Kind {
        HandshakeTimeout,
        RequestTimeout,
        MalformedResponse,
        ProcessExited,
        UnsupportedRole,
        SpawnFailed,
        Remote,
    };

    ScorerError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

  private:
    Kind kind_;
};

struct ExternalScorerOptions {
    std::chrono::milliseconds handshake_timeout{30000};
    std::chrono::milliseconds request_timeout{30000};
};

/// One scorer subprocess speaking line-delimited JSON (protocol 1) over its
/// stdin/stdout. Spawned with `/bin/sh -c command_line`; stderr is inherited.
/// A session is a serial channel: callers must not use it concurrently.
class ExternalScorerSession {
  public:
    ExternalScorerSession(std::string command_line, ScorerRole role,
                          ExternalScorerOptions options = {});
    ~ExternalScorerSession();

    ExternalScorerSession(const ExternalScorerSession&) = delete;
    ExternalScorerSession& operator=(const ExternalScorerSession&) = delete;

    double rank(std::string_view question, std::string_view text);
    /// Spans as byte offsets into `text` (the wire carries code point offsets).
    std::vector<SpanCandidate> read(std::string_view question, std::string_view text, std::size_t k);

    bool pipelined() const noexcept { return pipelined_; }
    const std::vector<std::string>& roles() const noexcept { return roles_; }
    const std::string& command_line() const noexcept { return command_; }

  private:
    void shutdown() noexcept;
    void write_line(const std::string& line);
    std::string read_line(std::chrono::steady_clock::time_point deadline, bool handshake);
    [[noreturn]] void fail_exited();
    std::string next_id();

    std::string command_;
    ExternalScorerOptions options_;
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
    std::vector<std::string> roles_;
    bool pipelined_ = false;
    std::uint64_t counter_ = 0;
};

/// Fixed-size pool of sessions. Each call checks one session out, so requests
/// on a handle never interleave.
class ExternalScorerPool {
  public:
    ExternalScorerPool(std::string command_line, ScorerRole role, std::size_t size,
                       ExternalScorerOptions options = {});

    double rank(std::string_view question, std::string_view text) const;
    std::vector<SpanCandidate> read(std::string_view question, std::string_view text,
                                    std::size_t k) const;

    std::size_t size() const noexcept { return sessions_.size(); }
    const std::string& command_line() const noexcept { return command_; }

  private:
    ExternalScorerSession& acquire() const;
    void release(ExternalScorerSession& s) const;

    std::string command_;
    std::vector<std::unique_ptr<ExternalScorerSession>> sessions_;
    mutable std::mutex mutex_;
    mutable std::condition_variable available_;
    mutable std::vector<ExternalScorerSession*> idle_;
};

class ExternalRanker final : public Ranker {
  public:
    explicit ExternalRanker(std::shared_ptr<const ExternalScorerPool> pool) : pool_(std::move(pool)) {}
    double score(std::string_view question, const Paragraph& paragraph) const override;
    std::string descriptor() const override { return "external:" + pool_->command_line(); }

  private:
    std::shared_ptr<const ExternalScorerPool> pool_;
};

class ExternalReader final : public Reader {
  public:
    explicit ExternalReader(std::shared_ptr<const ExternalScorerPool> pool) : pool_(std::move(pool)) {}
    std::vector<SpanCandidate> spans(std::string_view question, const Paragraph& paragraph,
                                     std::size_t k) const override;
    std::string descriptor() const override { return "external:" + pool_->command_line(); }

  private:
    std::shared_ptr<const ExternalScorerPool> pool_;
};

}  // namespace mindstone
