#ifndef NILDERIV_DERIVATION_HPP
#define NILDERIV_DERIVATION_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nilderiv/linalg.hpp"
#include "nilderiv/truncated_algebra.hpp"

namespace nilderiv {

/// A derivation of T_n, stored by the images of the generators. Every
/// derivation of T_n is F_q-linear (c = c^q forces d(c) = 0), so the images
/// determine it through the Leibniz rule.
///
/// The dense matrix is computed on first use and cached; copies share the
/// cache, which is filled at most once even under concurrent access.
class Derivation {
  public:
    Derivation(const Ring& ring, std::vector<RingElement> images);

    static Derivation zero(const Ring& ring);
    /// d/dx_i.
    static Derivation partial(const Ring& ring, std::uint32_t i);
    /// Reads the images off a matrix and checks that the matrix really is
    /// the derivation they generate (BadInput otherwise).
    static Derivation from_matrix(const Ring& ring, const FqMatrix& m);

    const Ring& ring() const noexcept { return *ring_; }
    const std::vector<RingElement>& images() const noexcept { return images_; }
    const RingElement& image(std::uint32_t i) const { return images_.at(i); }

    /// d(x^alpha) = sum_v alpha_v x^(alpha - e_v) d(x_v), extended linearly.
    RingElement apply(const RingElement& a) const;
    RingElement operator()(const RingElement& a) const { return apply(a); }

    /// Column s is the image of basis monomial s.
    const FqMatrix& matrix() const;

    Derivation operator+(const Derivation& o) const;
    Derivation operator-(const Derivation& o) const;
    Derivation operator-() const;
    friend Derivation operator*(const RingElement& r, const Derivation& d);
    friend Derivation operator*(const Fq& c, const Derivation& d);
    friend bool operator==(const Derivation& a, const Derivation& b);
    friend bool operator!=(const Derivation& a, const Derivation& b) { return !(a == b); }

  private:
    struct Cache;

    const Ring* ring_;
    std::vector<RingElement> images_;
    std::shared_ptr<Cache> cache_;
};

/// sum_i x^[p^i - 1] d/dx_i, the derivation whose iterative descent is the
/// divided powers of the standard generators.
Derivation canonical_derivation(const Ring& ring);

RingElement apply(const FqMatrix& op, const RingElement& a);

/// x^(slot) * v over the monomial basis.
FqVector monomial_times(const Ring& ring, std::size_t slot, const FqVector& v);

/// Exhaustive Leibniz check of a linear operator on all basis pairs.
bool satisfies_leibniz(const Ring& ring, const FqMatrix& op);

/// d^e as a matrix.
FqMatrix der_power(const Derivation& d, std::uint64_t e);

/// Least e >= 1 with d^e = 0, or nullopt if d is not nilpotent. An operator
/// on a p^n dimensional space is nilpotent iff its p^n-th power vanishes.
std::optional<std::uint64_t> nilpotency_index(const Derivation& d);

/// d^(p^i), which is again a derivation; returned by generator images.
Derivation p_power_derivation(const Derivation& d, std::uint32_t i);

/// d - (-1)^(p-1) x^(p-1)/(p-1)! d^p. Needs d(x) = 1 and x^p = 0.
Derivation kill_p_power(const Derivation& d, const RingElement& x);

/// Operators built from h = x d when d(x) = 1 and x^p = 0.
struct ThetaSystem {
    FqMatrix multiplier;  // r -> x r
    FqMatrix derivation;  // d
    FqMatrix h;           // x d
    /// theta_i = prod_{j != i} (h - j) / (i - j), i = 0..p-1.
    std::vector<FqMatrix> theta;
};

/// Builds the system and checks every identity it is meant to satisfy
/// (Internal error if one fails).
ThetaSystem theta_system(const Derivation& d, const RingElement& x);

/// Names of the identities that fail for `sys`; empty when all hold.
std::vector<std::string> theta_identity_failures(const ThetaSystem& sys, const Derivation& d, const RingElement& x);

/// phi = sum_{i<p} (-1)^i x^i/i! d^i, a projection onto ker d when d^p = 0,
/// d(x) = 1 and x^p = 0.
FqMatrix taylor_projection(const Derivation& d, const RingElement& x);

/// The c_i = phi(d^i(a)/i!) in ker d with a = sum_i c_i x^i.
std::vector<RingElement> taylor_coefficients(const Derivation& d, const RingElement& x, const RingElement& a);

struct KernelBasis {
    std::vector<RingElement> over_fq;  // basis of ker d as an F_q-space
    std::vector<RingElement> over_fp;  // w^t b for every b above, t < m
};

KernelBasis kernel_basis(const Derivation& d);

/// Columns of `m` (coefficient vectors) as ring elements.
std::vector<RingElement> columns_as_elements(const Ring& ring, const FqMatrix& m);
/// Elements as the columns of a matrix.
FqMatrix elements_as_columns(const Ring& ring, const std::vector<RingElement>& elems);

// F_p view. An element of T_n has m * p^n coordinates over F_p: digit k of
// the coefficient at slot s sits at index s*m + k.

FqVector fp_coordinates(const RingElement& a);
RingElement from_fp_coordinates(const Ring& ring, const FqVector& v);
/// Matrix over F_p of an additive map, built column by column.
FqMatrix fp_matrix(const Ring& ring, const std::function<RingElement(const RingElement&)>& f);
/// F_p matrix of an F_q-linear operator.
FqMatrix fp_view(const Ring& ring, const FqMatrix& op);

/// Basis over F_p of {r : r^q = r}.
std::vector<RingElement> frobenius_fixed_basis(const Ring& ring);

}  // namespace nilderiv

#endif  // NILDERIV_DERIVATION_HPP
