#pragma once

#include <stdexcept>
#include <string>

namespace deconvband {

//! Base of all library errors.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! An argument lies outside the domain of the operation.
class DomainError : public Error
{
public:
  using Error::Error;
};

//! Every frequency of the regularized error ECF was masked out.
class DegenerateEcfError : public Error
{
public:
  using Error::Error;
};

//! A linear system that must be solved is rank deficient.
class SingularityError : public Error
{
public:
  using Error::Error;
};

//! Malformed or invalid input data (files, columns, values).
class DataError : public Error
{
public:
  using Error::Error;
};

} // namespace deconvband
