#pragma once

#include <stdexcept>
#include <string>

namespace dirkde {

//! Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

//! Input data that cannot support the requested computation.
class DegenerateInputError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! A numerical evaluation produced a non-finite or otherwise unusable value.
class EvaluationError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! Valid arguments for an unsupported combination (e.g. a circular-only selector at q=2).
class UnsupportedError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

//! Malformed external input (CSV rows, asset files).
class ParseError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

} // namespace dirkde
