#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sl2c {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Syntax error in an expression, with the byte offset where parsing stopped
/// and the set of tokens that would have been accepted there.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position, std::vector<std::string> expected = {})
      : Error(message), position_(position), expected_(std::move(expected)) {}

  std::size_t position() const noexcept { return position_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::vector<std::string> expected_;
};

class UnboundSymbolError : public Error {
 public:
  explicit UnboundSymbolError(std::vector<std::string> names)
      : Error(make_message(names)), names_(std::move(names)) {}

  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  static std::string make_message(const std::vector<std::string>& names) {
    std::string msg = "unbound symbol(s):";
    for (const auto& n : names) msg += " " + n;
    return msg;
  }
  std::vector<std::string> names_;
};

/// log/sqrt of a negative argument, non-integral power of a negative base.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Evaluation at a point where a realization is singular (q_i = 0 with b_i != 0,
/// polar pole, ...) or where the result is not finite.
class SingularPointError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Invalid arguments to a library entry point (bad dimensions, unknown names, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace sl2c
