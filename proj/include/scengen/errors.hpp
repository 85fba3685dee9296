#ifndef SCENGEN_ERRORS_HPP
#define SCENGEN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace scengen {

// Malformed input text (config files, CSV). Carries a 1-based line number
// when one is known; line == 0 means "no line context".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Structurally valid input that violates a domain rule (inverted range,
// unknown route, missing actor, ...).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace scengen

#endif  // SCENGEN_ERRORS_HPP
