#pragma once

#include <stdexcept>
#include <string>

namespace crosscheck {

// Single exception type for all input/contract violations. The message names
// the offending entity (link id, node id, file, ...) so callers can surface it.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace crosscheck
