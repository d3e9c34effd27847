#include "frustummix/error.hpp"

namespace fmx {

std::string_view error_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidValue: return "InvalidValue";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::UnknownId: return "UnknownId";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::NonFinite: return "NonFinite";
    case Errc::BadMagic: return "BadMagic";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::CrcMismatch: return "CrcMismatch";
    case Errc::Truncated: return "Truncated";
    case Errc::MalformedStream: return "MalformedStream";
    case Errc::EmptySupervision: return "EmptySupervision";
    case Errc::UnknownClass: return "UnknownClass";
    case Errc::NoValidClass: return "NoValidClass";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::Parse: return "Parse";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

void fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace fmx
