#pragma once

#include <stdexcept>
#include <string>

namespace jcrdt {

// A stuck reduction in the semantics maps to one of these named errors.
// Valid programs never raise any of them.
enum class Errc {
  UnboundVariable,
  GetOnHead,
  IndexOutOfBounds,
  NotAMap,
  NotAList,
  NotARegister,
  NotACursor,
  CursorMismatch,
  UnknownReplica,
  ParseError,
  ScriptError,
  ExpectMismatch,
  TooManyExtensions,
  SyncDiverged,
  InvariantViolation,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code),
        message_(message) {}

  Errc code() const { return code_; }
  const char* name() const { return errc_name(code_); }
  const std::string& message() const { return message_; }

 private:
  Errc code_;
  std::string message_;
};

}  // namespace jcrdt
