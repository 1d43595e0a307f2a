#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cascade {

enum class ErrorKind {
  InvalidParams,
  InvalidState,
  NonFinite,
  NonDiagonalizable,
  DegenerateSteadyState,
  Unsupported,
  BisectionFailure,
  ZeroRate,
  AnnihilatedState,
  GridMismatch,
  EmptyClass,
  Config,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (the CLI in
// particular) can map it to an exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cascade
