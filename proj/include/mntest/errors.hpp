#pragma once

#include <stdexcept>
#include <string>

namespace mntest {

// Base for every error the library raises. Subclasses name the failure so
// callers (and the CLI exit-code mapping) can dispatch on type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define MNTEST_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                      \
   public:                                                         \
    using Error::Error;                                            \
    const char* kind() const noexcept override { return #Name; }   \
  }

// input validation
MNTEST_DEFINE_ERROR(LengthMismatch);
MNTEST_DEFINE_ERROR(NegativeCount);
MNTEST_DEFINE_ERROR(EmptyGroup);
MNTEST_DEFINE_ERROR(DomainError);
MNTEST_DEFINE_ERROR(IndexError);
MNTEST_DEFINE_ERROR(ParseError);
MNTEST_DEFINE_ERROR(ConfigError);
MNTEST_DEFINE_ERROR(InsufficientDocuments);
MNTEST_DEFINE_ERROR(UnsupportedQuery);
MNTEST_DEFINE_ERROR(TooLarge);

// numeric degeneracy of a particular data set
MNTEST_DEFINE_ERROR(DegenerateVariance);
MNTEST_DEFINE_ERROR(InsufficientSupport);
MNTEST_DEFINE_ERROR(DegeneratePermutation);

#undef MNTEST_DEFINE_ERROR

// True for the errors that describe data too sparse for a statistic rather
// than malformed input.
inline bool is_numeric_degeneracy(const Error& e) noexcept {
  return dynamic_cast<const DegenerateVariance*>(&e) != nullptr ||
         dynamic_cast<const InsufficientSupport*>(&e) != nullptr ||
         dynamic_cast<const DegeneratePermutation*>(&e) != nullptr;
}

}  // namespace mntest
