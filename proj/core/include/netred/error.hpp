// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef NETRED_ERROR_HPP
#define NETRED_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace netred
{

/// Base class for all errors raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (shape, range, sign, ...).
class InvalidArgument : public Error
{
public:
  using Error::Error;
};

/// A matrix pencil expected to be Hurwitz has an eigenvalue with non-negative real part.
class NotHurwitz : public Error
{
public:
  NotHurwitz(const std::string &what, double re, double im)
    : Error(what), real_part_(re), imag_part_(im)
  {
  }
  double real_part() const noexcept { return real_part_; }
  double imag_part() const noexcept { return imag_part_; }

private:
  double real_part_;
  double imag_part_;
};

/// Two systems do not share the same non-asymptotically stable part, so their
/// error system has poles in the closed right half-plane.
class UnstablePartMismatch : public Error
{
public:
  using Error::Error;
};

/// Exhaustive search would exceed the configured evaluation budget.
class BudgetExceeded : public Error
{
public:
  using Error::Error;
};

/// A valid option is paired with an incompatible one (e.g. QR clustering with r ≠ basis rank).
class InvalidCombination : public Error
{
public:
  using Error::Error;
};

/// Time integration failed (step size underflow, non-finite right-hand side).
class IntegrationError : public Error
{
public:
  IntegrationError(const std::string &what, double last_time)
    : Error(what), last_time_(last_time)
  {
  }
  double last_time() const noexcept { return last_time_; }

private:
  double last_time_;
};

/// Malformed system file; positions are 1-based.
class ParseError : public Error
{
public:
  ParseError(const std::string &what, std::size_t line, std::size_t column)
    : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
            what),
      line_(line), column_(column)
  {
  }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace netred

#endif  // NETRED_ERROR_HPP
