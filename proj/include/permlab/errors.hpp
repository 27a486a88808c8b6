#pragma once

#include <stdexcept>
#include <string>

namespace permlab {

// External data (registry, matrix, pattern table, observation, scenario,
// fixture) failed to parse or violates a documented invariant. The message
// names the offending descriptor/field where one exists.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// A descriptor or target name that the loaded data does not define was used
// where a defined name is required. Query-path operations never throw this;
// they report Unsupported in-band instead.
class UnknownNameError : public std::runtime_error {
 public:
  explicit UnknownNameError(const std::string& what) : std::runtime_error(what) {}
};

// The UserAction supplied to PermissionStore::request does not match what the
// store would actually show: a prompt-bearing action when no prompt occurs,
// or NoPromptNeeded when one does.
class ActionMismatchError : public std::runtime_error {
 public:
  explicit ActionMismatchError(const std::string& what) : std::runtime_error(what) {}
};

// App-id derivation failed: the manifest carries neither id nor start_url,
// or start_url cannot be resolved to an absolute URL.
class AppIdError : public std::runtime_error {
 public:
  explicit AppIdError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace permlab
