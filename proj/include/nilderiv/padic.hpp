#ifndef NILDERIV_PADIC_HPP
#define NILDERIV_PADIC_HPP

#include <cstdint>
#include <vector>

namespace nilderiv {

/// Base-p expansion, least significant digit first. Zero is the single
/// digit [0]; otherwise there are no trailing zeros.
struct PDigits {
    std::uint32_t base = 2;
    std::vector<std::uint32_t> digits;

    std::uint64_t value() const;
    /// Digit k, or 0 past the end.
    std::uint32_t operator[](std::size_t k) const { return k < digits.size() ? digits[k] : 0; }
};

PDigits p_digits(std::uint64_t i, std::uint32_t p);

/// C(i, j) mod p, computed digitwise: C(i, j) = prod_k C(i_k, j_k).
std::uint32_t lucas_binom(std::uint64_t i, std::uint64_t j, std::uint32_t p);

struct FactorialUnit {
    std::uint32_t value;    // j! mod p
    std::uint32_t inverse;  // (j!)^-1 mod p
};

/// j! mod p and its inverse, for 0 <= j <= p - 1 (throws OutOfRange past that).
FactorialUnit factorial_unit(std::uint32_t j, std::uint32_t p);

}  // namespace nilderiv

#endif  // NILDERIV_PADIC_HPP
