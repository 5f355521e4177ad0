#pragma once

#include <stdexcept>
#include <string>

namespace gem {

// Analysis / data errors. The CLI maps these to exit code 2 when they
// stem from bad inputs, 1 when an analysis is degenerate but reported.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gem
