#ifndef NILDERIV_HARPER_HPP
#define NILDERIV_HARPER_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nilderiv/derivation.hpp"
#include "nilderiv/descent.hpp"

namespace nilderiv {

/// Square matrix over T_n, row-major.
using RingMatrix = std::vector<std::vector<RingElement>>;

/// Gauss-Jordan over the local ring: every pivot must be a unit, and one
/// exists in each column iff the determinant is a unit (NotAUnit otherwise).
RingMatrix local_inverse(const RingMatrix& m);
RingElement local_determinant(const RingMatrix& m);
/// Residue of every entry modulo the maximal ideal.
FqMatrix residue(const RingMatrix& m);

/// A coefficient field (F_p-basis) together with a canonical set of
/// generators of the maximal ideal.
struct Frame {
    const Ring* ring = nullptr;
    std::vector<RingElement> field_basis;
    std::vector<RingElement> generators;
};

/// Same generators, and field bases with the same F_p-span.
bool operator==(const Frame& a, const Frame& b);
inline bool operator!=(const Frame& a, const Frame& b) { return !(a == b); }

/// Empty when the frame is valid, otherwise the first reason it is not.
std::string frame_defect(const Frame& frame);

struct NsderVerdict {
    bool is_nsder = false;
    std::string failure;
    std::optional<std::uint64_t> nilpotency_index;
    /// y_i with d^(p^i)(y_i) = 1, for every i with d^(p^i) != 0 that has one.
    std::vector<RingElement> witnesses;
    /// Index i whose witness is missing, when that is the failure.
    std::optional<std::uint32_t> missing_witness;
    /// A nonzero element of ker d in the maximal ideal, when that is the failure.
    std::optional<RingElement> kernel_element;
    /// The unique iterative descent, on success.
    std::optional<IterativeDescent> descent;
};

/// d is in nsder iff (a) d is nilpotent, (b) each nonzero d^(p^i) takes
/// the value 1 on the maximal ideal, and (c) ker d meets the maximal ideal
/// only in 0.
NsderVerdict is_nsder(const Derivation& d);

struct CoefficientField {
    FqMatrix projection;                // sum_{i<p^n} (-1)^i x^[i] d^i
    std::vector<RingElement> fp_basis;  // of its image
};

/// NotSimple unless d is in nsder.
CoefficientField coefficient_field(const Derivation& d);

/// g: (ker d; pillars of the unique iterative descent).
Frame canonical_frame(const Derivation& d);

/// g^-1: the derivation sum_i x'^[p^i - 1] d/dx'_i of a valid frame
/// (BadFrame otherwise).
Derivation derivation_from_frame(const Frame& frame);

struct CramerDuals {
    std::vector<Derivation> duals;  // d'_i(x_j) = [i == j]
    RingMatrix coefficients;        // d'_i = sum_l coefficients[i][l] d_l
};

/// NotAUnit when det(d_i(x_j)) lies in the maximal ideal.
CramerDuals cramer_duals(const std::vector<Derivation>& ds, const std::vector<RingElement>& xs);

struct Orthogonalized {
    std::vector<Derivation> derivations;
    std::vector<RingElement> generators;
};

/// Commuting derivations d'_i with d'_i(x'_j) = [i == j] and d'_i^p = 0,
/// built one coordinate at a time. Needs d_i(x_j) = [i == j] exactly
/// (BadInput otherwise); every postcondition is re-checked before return.
Orthogonalized orthogonalize(const std::vector<Derivation>& ds, const std::vector<RingElement>& xs);

/// Postconditions of orthogonalize relative to the original generators;
/// empty when all hold.
std::vector<std::string> orthogonal_defects(const Orthogonalized& out, const std::vector<RingElement>& original);

struct CompositeProjection {
    FqMatrix projection;  // prod_i phi_i
    std::vector<RingElement> fp_basis;
    /// F_p-rank of { b x'^alpha } for b in fp_basis; equals m p^n iff R is
    /// the direct sum of the k' x'^alpha.
    std::size_t decomposition_rank = 0;
};

/// BadInput when some d_i^p != 0, two d_i fail to commute, or d_i(x_j) is
/// not [i == j].
CompositeProjection composite_projection(const std::vector<Derivation>& ds, const std::vector<RingElement>& xs);

struct PairingReport {
    FqMatrix residue;  // r x n, entry (i, j) = d_i(x_j) mod m
    Eigen::Index rank = 0;
    bool perfect = false;
    /// n^2 x (n r) matrix of the endomorphisms x_i (x) d_j of m/m^2.
    FqMatrix endomorphisms;
    Eigen::Index endomorphism_rank = 0;
    bool surjective = false;
};

PairingReport pairing_report(const std::vector<Derivation>& ds, const std::vector<RingElement>& xs);

struct DerBasisCertificate {
    std::vector<Derivation> powers;  // d^(p^i)
    RingMatrix matrix;               // [i][j] = d^(p^i)(x_j) over the pillars x_j
    RingElement determinant;
    RingMatrix inverse;
    /// duals[j] = sum_i inverse[j][i] d^(p^i), the partial along pillar j.
    std::vector<Derivation> duals;
    bool verified = false;
};

/// NotSimple unless d is in nsder.
DerBasisCertificate der_basis_check(const Derivation& d);

struct SimplicityVerdict {
    bool simple = true;
    std::uint64_t elements_checked = 0;
    /// On failure: the first generator of a proper stable ideal of least
    /// dimension, and a basis of that ideal (columns).
    std::optional<RingElement> generator;
    FqMatrix ideal;
};

/// Smallest subspace containing a that is closed under multiplication by
/// the generators and under every operator in `ops`; basis as columns.
FqMatrix stable_closure(const RingElement& a, const std::vector<const FqMatrix*>& ops);

/// Exhaustive over all nonzero elements up to scalars (TooLarge past the
/// oracle cap).
SimplicityVerdict simplicity_oracle(const Derivation& d);
SimplicityVerdict differential_simplicity_oracle(const Ring& ring);

/// sigma(sum c_alpha x^alpha) = sum c_alpha^(p^e) prod sigma(x_i)^alpha_i.
class RingAutomorphism {
  public:
    /// BadAutomorphism unless every image lies in the maximal ideal and the
    /// Jacobian of the images is a unit.
    RingAutomorphism(const Ring& ring, std::uint32_t frobenius, std::vector<RingElement> images);

    static RingAutomorphism identity(const Ring& ring);

    const Ring& ring() const noexcept { return *ring_; }
    std::uint32_t frobenius() const noexcept { return frobenius_; }
    const std::vector<RingElement>& images() const noexcept { return images_; }

    RingElement apply(const RingElement& a) const;
    RingElement apply_inverse(const RingElement& a) const;
    RingElement operator()(const RingElement& a) const { return apply(a); }

    /// Matrix over F_p (see fp_coordinates).
    FqMatrix fp_matrix() const;

    friend bool operator==(const RingAutomorphism& a, const RingAutomorphism& b) {
        return a.ring_ == b.ring_ && a.frobenius_ == b.frobenius_ && a.images_ == b.images_;
    }

  private:
    const Ring* ring_;
    std::uint32_t frobenius_;
    std::vector<RingElement> images_;
    FqMatrix substitution_;  // column s = prod sigma(x_i)^alpha_i
    FqMatrix substitution_inverse_;
};

/// Matrix whose column s is prod_i gens_i^(alpha_i) for alpha = exponents(s).
FqMatrix substitution_matrix(const Ring& ring, const std::vector<RingElement>& gens);

/// sigma d sigma^-1, checked against the composed operator on every basis
/// monomial.
Derivation conjugate(const RingAutomorphism& sigma, const Derivation& d);

/// sigma . frame.
Frame transport(const RingAutomorphism& sigma, const Frame& frame);

/// The automorphism fixing scalars that sends from.generators to
/// to.generators.
RingAutomorphism frame_transport(const Frame& from, const Frame& to);

struct FrobeniusFix {
    RingAutomorphism sigma;  // Frobenius on scalars, identity on the pillars
    bool fixes_pillars = false;
    bool fixes_derivation = false;
};

/// NotSimple unless d is in nsder.
FrobeniusFix frobenius_fix_check(const Derivation& d);

/// All automorphisms (TooLarge past the oracle cap).
std::vector<RingAutomorphism> enumerate_automorphisms(const Ring& ring);

/// Automorphisms sigma with sigma d sigma^-1 = d, by enumeration.
std::vector<RingAutomorphism> fix_group(const Derivation& d);

}  // namespace nilderiv

#endif  // NILDERIV_HARPER_HPP
