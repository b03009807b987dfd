#pragma once

#include <stdexcept>
#include <string>

namespace mindstone {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition at an API boundary.
class InvalidArgument : public Error {
  public:
    using Error::Error;
};

/// Malformed input file (JSONL record, manifest, model, stopword list).
class FormatError : public Error {
  public:
    using Error::Error;
};

class BuildError : public Error {
  public:
    using Error::Error;
};

/// Failure inside one pipeline stage; `stage()` names it ("retrieve",
/// "rank", "rm3", "read", "fuse").
class StageError : public Error {
  public:
    StageError(std::string stage, const std::string& what)
        : Error(stage + ": " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

  private:
    std::string stage_;
};

}  // namespace mindstone
