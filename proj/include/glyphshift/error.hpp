#ifndef GLYPHSHIFT_ERROR_HPP
#define GLYPHSHIFT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace glyphshift {

enum class ErrorKind {
  empty_input,
  index,
  no_substitution,
  data,
  training,
  solver,
  size,
  alignment,
  parameter,
  invalid_input,
  configuration,
  empty_report,
  model_format,
};

const char* to_string(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace glyphshift

#endif  // GLYPHSHIFT_ERROR_HPP
