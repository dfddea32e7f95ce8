#ifndef NILDERIV_GALOIS_FIELD_HPP
#define NILDERIV_GALOIS_FIELD_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "nilderiv/error.hpp"

namespace nilderiv {

/// Describes F_{p^m} = F_p[w]/(irr). `irr` is monic of degree m and is
/// listed constant term first, leading 1 included.
struct FieldSpec {
    std::uint32_t p = 2;
    std::uint32_t m = 1;
    std::vector<std::uint32_t> irr;

    friend bool operator==(const FieldSpec&, const FieldSpec&) = default;
};

/// Builds a validated spec. An empty `irr` selects the built-in default
/// polynomial (available for p in {2,3,5,7} and m <= 4, and for every m = 1).
FieldSpec make_field_spec(std::uint32_t p, std::uint32_t m, std::vector<std::uint32_t> irr = {});

bool is_prime(std::uint64_t n) noexcept;

/// True when the monic polynomial `poly` (constant first) over F_p has no
/// monic factor of degree 1..deg/2.
bool is_irreducible(const std::vector<std::uint32_t>& poly, std::uint32_t p);

class Fq;

/// Arithmetic context for one finite field. Instances are interned: two
/// contexts are the same field iff they are the same object, and every
/// context lives for the rest of the process.
class GaloisField {
  public:
    static const GaloisField& get(const FieldSpec& spec);
    static const GaloisField& prime(std::uint32_t p);

    GaloisField(const GaloisField&) = delete;
    GaloisField& operator=(const GaloisField&) = delete;

    const FieldSpec& spec() const noexcept { return spec_; }
    std::uint32_t characteristic() const noexcept { return spec_.p; }
    std::uint32_t degree() const noexcept { return spec_.m; }
    std::uint64_t order() const noexcept { return order_; }

    /// The prime subfield F_p as its own context.
    const GaloisField& prime_field() const { return prime(spec_.p); }

    Fq zero() const;
    Fq one() const;
    Fq from_int(std::int64_t v) const;
    /// Element whose base-p digits are those of `packed` (0 <= packed < q).
    Fq from_index(std::uint64_t packed) const;
    Fq from_digits(const std::vector<std::uint32_t>& digits) const;
    /// The class of w, i.e. the power basis element w^1 (equals 1 when m = 1).
    Fq generator() const;

    // Packed-value arithmetic; values are base-p digit encodings in [0, q).
    std::uint32_t add(std::uint32_t a, std::uint32_t b) const noexcept;
    std::uint32_t sub(std::uint32_t a, std::uint32_t b) const noexcept;
    std::uint32_t neg(std::uint32_t a) const noexcept;
    std::uint32_t mul(std::uint32_t a, std::uint32_t b) const noexcept;
    std::uint32_t inv(std::uint32_t a) const;
    std::uint32_t pow(std::uint32_t a, std::uint64_t e) const noexcept;
    std::vector<std::uint32_t> digits(std::uint32_t a) const;

  private:
    explicit GaloisField(FieldSpec spec);

    std::uint32_t mul_poly(std::uint32_t a, std::uint32_t b) const noexcept;

    FieldSpec spec_;
    std::uint64_t order_ = 0;
    std::vector<std::uint32_t> radix_;  // p^k for k = 0..m
    std::vector<std::uint32_t> exp_;    // powers of a primitive element, when tabulated
    std::vector<std::uint32_t> log_;
};

/// An element of a finite field.
///
/// A default-constructed or integer-constructed Fq is an unbound integer
/// literal; it takes on a field the first time it meets a bound element.
/// Eigen creates Scalar(0) and Scalar(1) internally, so this is what lets
/// dense Eigen matrices over runtime-chosen fields work unchanged.
class Fq {
  public:
    Fq() = default;
    Fq(int literal) : raw_(literal) {}  // NOLINT(google-explicit-constructor)

    Fq(const GaloisField& field, std::uint32_t value) : field_(&field), raw_(value) {}

    bool bound() const noexcept { return field_ != nullptr; }
    const GaloisField* field() const noexcept { return field_; }
    /// Packed digit value; binds a literal first if `field` is given.
    std::uint32_t value() const;
    std::int64_t literal() const noexcept { return raw_; }

    Fq bind(const GaloisField& field) const;
    bool is_zero() const noexcept;
    bool is_one() const noexcept;

    std::vector<std::uint32_t> digits() const;

    Fq inverse() const;
    Fq pow(std::uint64_t e) const;
    /// t -> t^(p^e).
    Fq frobenius(std::uint32_t e) const;

    Fq operator-() const;
    Fq& operator+=(const Fq& o) { return *this = *this + o; }
    Fq& operator-=(const Fq& o) { return *this = *this - o; }
    Fq& operator*=(const Fq& o) { return *this = *this * o; }
    Fq& operator/=(const Fq& o) { return *this = *this / o; }

    friend Fq operator+(const Fq& a, const Fq& b);
    friend Fq operator-(const Fq& a, const Fq& b);
    friend Fq operator*(const Fq& a, const Fq& b);
    friend Fq operator/(const Fq& a, const Fq& b);
    friend bool operator==(const Fq& a, const Fq& b);
    friend bool operator!=(const Fq& a, const Fq& b) { return !(a == b); }

    friend std::ostream& operator<<(std::ostream& os, const Fq& a);

  private:
    const GaloisField* field_ = nullptr;
    std::int64_t raw_ = 0;
};

// Eigen needs these to be findable for a custom scalar.
inline const Fq& conj(const Fq& x) { return x; }
inline const Fq& real(const Fq& x) { return x; }
inline Fq imag(const Fq&) { return Fq(0); }
inline Fq abs2(const Fq& x) { return x * x; }

}  // namespace nilderiv

namespace Eigen {

template <>
struct NumTraits<nilderiv::Fq> : GenericNumTraits<nilderiv::Fq> {
    using Real = nilderiv::Fq;
    using NonInteger = nilderiv::Fq;
    using Nested = nilderiv::Fq;
    using Literal = nilderiv::Fq;

    enum {
        IsComplex = 0,
        IsInteger = 0,
        IsSigned = 1,
        RequireInitialization = 1,
        ReadCost = 1,
        AddCost = 2,
        MulCost = 4
    };

    static inline Real epsilon() { return Real(0); }
    static inline Real dummy_precision() { return Real(0); }
    static inline int digits10() { return 0; }
};

}  // namespace Eigen

#endif  // NILDERIV_GALOIS_FIELD_HPP
