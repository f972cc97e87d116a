#pragma once

#include <stdexcept>
#include <string>

namespace coarse {

/// Domain error with a stable machine-readable code alongside the message.
/// Codes in use: overlapping-subspaces, empty-subspace, size-limit,
/// disconnected-graph, sequence-exhausted, not-found, supplier-failure,
/// excision-insufficient, splitter-violation, control-function-violation,
/// norm-deficit, invalid-witness, invalid-metric, parse-error.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace coarse
