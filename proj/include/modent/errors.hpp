#pragma once

#include <stdexcept>
#include <string>

namespace modent {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed matrices, inconsistent dimensions, invalid configs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A well-formed request that cannot be carried out reliably in floating point.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

#define MODENT_DEFINE_ERROR(Name, Base) \
  class Name : public Base {            \
   public:                              \
    using Base::Base;                   \
  }

MODENT_DEFINE_ERROR(DimensionMismatch, ConfigError);
MODENT_DEFINE_ERROR(InvalidSummand, ConfigError);
MODENT_DEFINE_ERROR(NormViolation, ConfigError);
MODENT_DEFINE_ERROR(OddKernel, ConfigError);
MODENT_DEFINE_ERROR(SpaceMismatch, ConfigError);
MODENT_DEFINE_ERROR(NotInBaseSpace, ConfigError);
MODENT_DEFINE_ERROR(NotIncreasing, ConfigError);
MODENT_DEFINE_ERROR(StencilOutOfDomain, ConfigError);

MODENT_DEFINE_ERROR(DegenerateDecomposition, NumericalError);
MODENT_DEFINE_ERROR(IllConditioned, NumericalError);
MODENT_DEFINE_ERROR(InfiniteComponent, NumericalError);
MODENT_DEFINE_ERROR(SpectralSingularity, NumericalError);
MODENT_DEFINE_ERROR(InfiniteOnStencil, NumericalError);
MODENT_DEFINE_ERROR(JumpOnStencil, NumericalError);
MODENT_DEFINE_ERROR(QuadratureFailure, NumericalError);
MODENT_DEFINE_ERROR(IllConditionedGram, NumericalError);

#undef MODENT_DEFINE_ERROR

}  // namespace modent
