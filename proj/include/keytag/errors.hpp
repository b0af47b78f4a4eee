#pragma once

#include <stdexcept>
#include <string>

namespace keytag {

// Bad scenario or parameter data supplied by the user; the CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// API misuse (mismatched lengths, dimensions, invalid ranges) that validated
// scenario data can never trigger.
class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// An agent driven outside the protocol's own contract, e.g. asking for a round
// beyond the key block.
class ProtocolError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

} // namespace keytag
