#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace degenlab {

enum class ErrorKind {
  Input,        // malformed or out-of-range arguments
  Hypothesis,   // a mathematical precondition of the tested statement fails
  Stencil,      // a finite-difference stencil touches the singular set
  Domain,       // evaluation point outside the domain of a formula
  Singularity,  // evaluation exactly at a singular point
  Resolution,   // grid too coarse for the requested check
  Degenerate,   // the construction collapses (nothing to test)
  Internal      // numerical invariant broken; this is a bug
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace degenlab
