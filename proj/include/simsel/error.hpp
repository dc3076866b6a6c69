#pragma once

#include <stdexcept>
#include <string>

namespace simsel {

enum class ErrorKind
{
  Format,     // malformed file structure, bad magic/version, missing column
  Truncation, // payload shorter or longer than the header promises
  Data,       // non-finite or otherwise invalid numeric content
  Validation, // a domain invariant is violated by the input
  Argument,   // a caller-supplied parameter is out of range
  Numerical,  // a computation produced a non-finite intermediate
  Io          // the file could not be opened or written
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(what), kind_(kind)
  {
  }

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
{
  throw Error(kind, what);
}

} // namespace simsel
