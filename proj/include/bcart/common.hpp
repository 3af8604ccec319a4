#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bcart {

// Hard error: invalid input, broken invariant, bad file. Soft rejection
// signals (infeasible proposals, exhausted candidate pools) use optional
// returns instead so callers can retry.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

using RowIndex = std::int32_t;

}  // namespace bcart
