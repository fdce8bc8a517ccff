#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dfsim {

/// A caller broke an operation's precondition (advancing an absorbed packet,
/// annihilating a dead group, ...). Indicates a bug, not bad input.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The scenario asked for something the model forbids: an injection the token
/// buckets cannot afford, a re-route with no surviving path, an unannihilated
/// antitoken past its deadline.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::int64_t round, const std::string& what)
      : std::runtime_error("round " + std::to_string(round) + ": " + what), round_(round) {}

  [[nodiscard]] std::int64_t round() const { return round_; }

 private:
  std::int64_t round_;
};

/// Malformed scenario or trace input.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dfsim
