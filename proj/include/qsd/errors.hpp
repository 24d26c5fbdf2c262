#pragma once

#include <stdexcept>
#include <string>

namespace qsd {

// Enumeration or search exceeds the configured size budget.
class capacity_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file; carries the offending 1-based line number.
class parse_error : public std::runtime_error {
 public:
  parse_error(std::string msg, long line)
      : std::runtime_error(std::move(msg) + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

}  // namespace qsd
