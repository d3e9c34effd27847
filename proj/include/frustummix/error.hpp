#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fmx {

// Stable error vocabulary. Names returned by error_name() are part of the
// public contract: the CLI prints them and language bindings map them.
enum class Errc {
  InvalidValue,
  DimensionMismatch,
  EmptyInput,
  UnknownId,
  OutOfRange,
  NonFinite,
  BadMagic,
  VersionMismatch,
  CrcMismatch,
  Truncated,
  MalformedStream,
  EmptySupervision,
  UnknownClass,
  NoValidClass,
  DuplicateId,
  Parse,
  Io,
};

std::string_view error_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& message);

}  // namespace fmx
