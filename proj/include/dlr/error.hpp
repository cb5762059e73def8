#pragma once

#include <stdexcept>
#include <string>

namespace dlr {

// Bad or unreadable input: files, configs, argument domains. CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Artifact/contract mismatch, e.g. weights trained under a different
// reservoir config. CLI exit code 3.
class ContractError : public std::runtime_error {
 public:
  explicit ContractError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dlr
