#pragma once

#include <stdexcept>
#include <string>

namespace specdec {

// Failure categories surfaced by the library. Tests match on the code, not
// the message text.
enum class Errc {
  kAllZero,
  kNegativeMass,
  kSizeMismatch,
  kKTooLarge,
  kZeroVector,
  kInconsistentSet,
  kCapExceeded,
  kEmptyInput,
  kNoSetsRecorded,
  kParseError,
  kRangeError,
  kConfigInvalid,
  kIoFailure,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace specdec
