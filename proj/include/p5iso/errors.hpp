#pragma once

#include <stdexcept>
#include <string>

namespace p5iso {

// Every failure the library reports derives from Error; the kind() string is
// what ends up in JSON reports.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define P5ISO_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  };

P5ISO_DEFINE_ERROR(DivisionByZero)
P5ISO_DEFINE_ERROR(UnknownSymbol)
P5ISO_DEFINE_ERROR(ParseError)
P5ISO_DEFINE_ERROR(SingularSystem)
P5ISO_DEFINE_ERROR(Inconsistent)
P5ISO_DEFINE_ERROR(ShapeError)
P5ISO_DEFINE_ERROR(DerivationFailure)
P5ISO_DEFINE_ERROR(InvalidParameter)
P5ISO_DEFINE_ERROR(InvalidParams)
P5ISO_DEFINE_ERROR(NotOnModuli)
P5ISO_DEFINE_ERROR(OutsideOverlap)
P5ISO_DEFINE_ERROR(OutsideChart)
P5ISO_DEFINE_ERROR(NoSuchReduciblePoint)
P5ISO_DEFINE_ERROR(UnexpectedParabolicData)
P5ISO_DEFINE_ERROR(InsufficientOrder)
P5ISO_DEFINE_ERROR(BadLeadingTerm)
P5ISO_DEFINE_ERROR(IntegrationFailure)
P5ISO_DEFINE_ERROR(InvalidLoop)
P5ISO_DEFINE_ERROR(PathBlocked)

#undef P5ISO_DEFINE_ERROR

}  // namespace p5iso
