#ifndef NILDERIV_TRUNCATED_ALGEBRA_HPP
#define NILDERIV_TRUNCATED_ALGEBRA_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "nilderiv/galois_field.hpp"
#include "nilderiv/linalg.hpp"

namespace nilderiv {

/// T_n = F_q[x_0, ..., x_{n-1}] / (x_0^p, ..., x_{n-1}^p).
struct RingSpec {
    FieldSpec field;
    std::uint32_t n = 1;

    friend bool operator==(const RingSpec&, const RingSpec&) = default;
};

/// Exponent vector with every entry in [0, p).
using MultiIndex = std::vector<std::uint32_t>;

inline constexpr std::size_t kMaxRingDimension = std::size_t{1} << 14;

class RingElement;

/// Interned ring context; dense basis slot i is the plain monomial x^alpha
/// where alpha is the base-p expansion of i (x_0 is the least significant
/// digit).
class Ring {
  public:
    /// Throws TooLarge when p^n exceeds 2^14.
    static const Ring& get(const RingSpec& spec);
    static const Ring& make(std::uint32_t p, std::uint32_t m, std::uint32_t n);

    Ring(const Ring&) = delete;
    Ring& operator=(const Ring&) = delete;

    const RingSpec& spec() const noexcept { return spec_; }
    const GaloisField& field() const noexcept { return *field_; }
    std::uint32_t p() const noexcept { return spec_.field.p; }
    std::uint32_t m() const noexcept { return spec_.field.m; }
    std::uint32_t n() const noexcept { return spec_.n; }
    std::size_t dimension() const noexcept { return dim_; }

    const MultiIndex& exponents(std::size_t slot) const { return exponents_[slot]; }
    std::size_t slot(const MultiIndex& alpha) const;
    std::size_t generator_slot(std::uint32_t i) const { return radix_[i]; }
    /// Total degree of the basis monomial in `slot`.
    std::uint32_t degree(std::size_t slot) const { return degree_[slot]; }
    /// Slot of x^alpha * x^beta, or -1 when some exponent reaches p.
    std::int64_t product_slot(std::size_t a, std::size_t b) const;

    RingElement zero() const;
    RingElement one() const;
    RingElement scalar(const Fq& c) const;
    RingElement generator(std::uint32_t i) const;
    RingElement monomial(std::size_t slot) const;
    RingElement monomial(const MultiIndex& alpha) const;
    /// x^[i] = prod_k x_k^{i_k} / i_k!, with i_k the base-p digits of i.
    RingElement divided_monomial(std::size_t i) const;
    RingElement from_coeffs(FqVector coeffs) const;

  private:
    explicit Ring(RingSpec spec);

    RingSpec spec_;
    const GaloisField* field_;
    std::size_t dim_;
    std::vector<std::size_t> radix_;
    std::vector<MultiIndex> exponents_;
    std::vector<std::uint32_t> degree_;
};

/// Element of T_n stored densely over the plain monomial basis.
class RingElement {
  public:
    RingElement(const Ring& ring, FqVector coeffs);

    const Ring& ring() const noexcept { return *ring_; }
    const FqVector& coeffs() const noexcept { return coeffs_; }
    const Fq& coeff(std::size_t slot) const { return coeffs_(static_cast<Eigen::Index>(slot)); }
    Fq constant_term() const { return coeffs_(0); }

    bool is_zero() const;
    bool is_unit() const { return !coeffs_(0).is_zero(); }
    bool in_maximal_ideal() const { return coeffs_(0).is_zero(); }
    /// Largest total degree with a nonzero coefficient (-1 for zero).
    int degree() const;

    RingElement pow(std::uint64_t e) const;
    /// Throws NotAUnit when the constant term vanishes.
    RingElement inverse() const;

    RingElement operator-() const;
    RingElement& operator+=(const RingElement& o);
    RingElement& operator-=(const RingElement& o);
    RingElement& operator*=(const RingElement& o) { return *this = *this * o; }

    friend RingElement operator+(RingElement a, const RingElement& b) { return a += b; }
    friend RingElement operator-(RingElement a, const RingElement& b) { return a -= b; }
    friend RingElement operator*(const RingElement& a, const RingElement& b);
    friend RingElement operator*(const Fq& c, const RingElement& a);
    friend RingElement operator*(const RingElement& a, const Fq& c) { return c * a; }
    friend bool operator==(const RingElement& a, const RingElement& b);
    friend bool operator!=(const RingElement& a, const RingElement& b) { return !(a == b); }

    friend std::ostream& operator<<(std::ostream& os, const RingElement& a);

  private:
    const Ring* ring_;
    FqVector coeffs_;
};

void check_same_ring(const Ring& a, const Ring& b);

/// d/dx_i, applied termwise.
RingElement partial_derivative(std::uint32_t i, const RingElement& a);

/// Nonzero (alpha, coefficient) pairs sorted lexicographically by alpha.
std::vector<std::pair<MultiIndex, Fq>> nonzero_terms(const RingElement& a);

/// Matrix of r -> a*r over the monomial basis.
FqMatrix multiplication_matrix(const RingElement& a);

}  // namespace nilderiv

#endif  // NILDERIV_TRUNCATED_ALGEBRA_HPP
