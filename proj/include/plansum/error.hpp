#pragma once

#include <stdexcept>
#include <string>

namespace plansum {

// Base for every failure surfaced by the library; messages are meant for users.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace plansum
