#pragma once

#include <stdexcept>
#include <string>

namespace gelk {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorClass { config, numeric, budget };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), class_(cls) {}
  ErrorClass error_class() const noexcept { return class_; }

 private:
  ErrorClass class_;
};

#define GELK_DEFINE_ERROR(Name, Class)                                        \
  class Name : public Error {                                                 \
   public:                                                                    \
    explicit Name(const std::string& what) : Error(ErrorClass::Class, what) {} \
  }

GELK_DEFINE_ERROR(InvalidModel, config);
GELK_DEFINE_ERROR(InvalidArgument, config);
GELK_DEFINE_ERROR(SchemaError, config);
GELK_DEFINE_ERROR(WindowInvalid, config);
GELK_DEFINE_ERROR(HookViolatesConservation, config);

GELK_DEFINE_ERROR(NegativeRate, numeric);
GELK_DEFINE_ERROR(DegenerateMeasure, numeric);
GELK_DEFINE_ERROR(NoConvergence, numeric);
GELK_DEFINE_ERROR(SlowConvergence, numeric);
GELK_DEFINE_ERROR(DegenerateCubic, numeric);
GELK_DEFINE_ERROR(ExplosionReached, numeric);
GELK_DEFINE_ERROR(DualNotSubcritical, numeric);
GELK_DEFINE_ERROR(ToleranceFailure, numeric);
GELK_DEFINE_ERROR(RateUnderflow, numeric);

GELK_DEFINE_ERROR(BudgetExceeded, budget);

#undef GELK_DEFINE_ERROR

}  // namespace gelk
