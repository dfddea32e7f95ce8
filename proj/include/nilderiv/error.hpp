#ifndef NILDERIV_ERROR_HPP
#define NILDERIV_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace nilderiv {

enum class ErrorKind {
    DivisionByZero,
    NoSolution,
    OutOfRange,
    TooLarge,
    FieldMismatch,
    RingMismatch,
    NotAUnit,
    NotNilpotent,
    BadInput,
    BadWitness,
    BadFrame,
    BadAutomorphism,
    NotSimple,
    ParseError,
    Internal,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI's exit-code mapping) can branch on it.
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

/// Raised by construct_descent / normalize_descent when witness `index`
/// violates `condition`.
class BadWitnessError : public Error {
  public:
    BadWitnessError(std::size_t index, const std::string& condition)
        : Error(ErrorKind::BadWitness, "bad witness " + std::to_string(index) + ": " + condition),
          index_(index),
          condition_(condition) {}

    std::size_t index() const noexcept { return index_; }
    const std::string& condition() const noexcept { return condition_; }

  private:
    std::size_t index_;
    std::string condition_;
};

}  // namespace nilderiv

#endif  // NILDERIV_ERROR_HPP
