#pragma once

#include <optional>

#include "cascade/error.hpp"
#include "cascade/model.hpp"

namespace testing {

// Kind of the cascade::Error thrown by f, or nullopt when nothing was thrown.
template <class F>
std::optional<cascade::ErrorKind> error_kind(F&& f) {
  try {
    f();
  } catch (const cascade::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

inline double max_abs_diff(const cascade::Matrix4& a, const cascade::Matrix4& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline cascade::Vector4 amps(const cascade::StateVector& s) { return s.amplitudes(); }

}  // namespace testing
