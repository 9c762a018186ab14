#pragma once

#include <stdexcept>
#include <string>

namespace morava {

// Error taxonomy maps onto process exit codes: invalid input -> 2,
// resource cap -> 3.  Verification outcomes are data, not exceptions.
class InvalidInputError : public std::runtime_error {
 public:
  explicit InvalidInputError(const std::string& msg) : std::runtime_error(msg) {}
};

class ResourceCapError : public std::runtime_error {
 public:
  explicit ResourceCapError(const std::string& msg) : std::runtime_error(msg) {}
};

// Broken internal invariant; always a bug in this library, never user input.
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

[[noreturn]] inline void failInvalid(const std::string& msg) { throw InvalidInputError(msg); }
[[noreturn]] inline void failCap(const std::string& msg) { throw ResourceCapError(msg); }
[[noreturn]] inline void failInternal(const std::string& msg) { throw InternalError(msg); }

inline void require(bool cond, const std::string& msg) {
  if (!cond) failInvalid(msg);
}

inline void internalCheck(bool cond, const std::string& msg) {
  if (!cond) failInternal(msg);
}

}  // namespace morava
