#ifndef PFR_ERRORS_HPP
#define PFR_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pfr {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition on the mathematical input violated (zero matrix, bad index, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A theorem hypothesis does not hold for the requested parameters.
class InadmissibleError : public Error {
 public:
  InadmissibleError(const std::string& inequality, double value, double bound)
      : Error(inequality + " violated: value " + std::to_string(value) + ", bound " +
              std::to_string(bound) + ", margin " + std::to_string(bound - value)),
        value_(value),
        bound_(bound) {}

  double value() const { return value_; }
  double bound() const { return bound_; }
  double margin() const { return bound_ - value_; }

 private:
  double value_;
  double bound_;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(std::int64_t iteration, const std::string& context = "")
      : Error(context + "iteration diverged at k = " + std::to_string(iteration)), iteration_(iteration) {}

  std::int64_t iteration() const { return iteration_; }

 private:
  std::int64_t iteration_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::int64_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::int64_t line() const { return line_; }

 private:
  std::int64_t line_;
};

}  // namespace pfr

#endif  // PFR_ERRORS_HPP
