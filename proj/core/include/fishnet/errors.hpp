#pragma once

#include <stdexcept>
#include <string>

namespace fishnet
{
//! Base class for every error thrown by the library.
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//! Argument outside the mathematical domain of an operation.
class DomainError : public Error
{
  public:
    using Error::Error;
};

//! Invalid model or run configuration.
class ConfigError : public Error
{
  public:
    using Error::Error;
};

//! Link or simulation state violates its invariants.
class StateError : public Error
{
  public:
    using Error::Error;
};

//! Reduced stiffness matrix is singular: the specimen has separated.
class SingularSystem : public Error
{
  public:
    using Error::Error;
};

//! No link carries tensile stress under the unit end displacement.
class DegenerateLoad : public Error
{
  public:
    using Error::Error;
};

//! Parameter fitting or estimation could not be carried out.
class FitError : public Error
{
  public:
    using Error::Error;
};
}  // namespace fishnet
