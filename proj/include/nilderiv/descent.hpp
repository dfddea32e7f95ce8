#ifndef NILDERIV_DESCENT_HPP
#define NILDERIV_DESCENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nilderiv/derivation.hpp"

namespace nilderiv {

/// x^[0], ..., x^[p^s - 1]. The pillars x^[p^k] determine the rest.
struct IterativeDescent {
    const Ring* ring = nullptr;
    std::uint32_t exponent = 0;
    std::vector<RingElement> elements;

    std::size_t size() const { return elements.size(); }
    const RingElement& operator[](std::size_t i) const { return elements.at(i); }
    const RingElement& pillar(std::uint32_t k) const;
    std::vector<RingElement> pillars() const;

    friend bool operator==(const IterativeDescent& a, const IterativeDescent& b) {
        return a.ring == b.ring && a.exponent == b.exponent && a.elements == b.elements;
    }
};

/// x^[i] = prod_k pillar_k^(i_k) / i_k!. NotNilpotent if a pillar is a unit.
IterativeDescent sequence_from_pillars(const Ring& ring, const std::vector<RingElement>& pillars);

struct DescentVerdict {
    bool ok = true;
    std::string failure;  // first identity that fails

    explicit operator bool() const { return ok; }
};

/// Checks x^[0] = 1, pillar^p = 0 and d(x^[p^j]) = x^[p^j - 1], then that the
/// sequence is the one its pillars generate. `exhaustive` also re-checks the
/// full product law x^[i] x^[j] = C(i+j, i) x^[i+j] and d(x^[i]) = x^[i-1].
DescentVerdict verify_iterative_descent(const IterativeDescent& seq, const Derivation& d, bool exhaustive = false);

/// Pairwise product law only (no derivation involved).
DescentVerdict verify_iterative_law(const IterativeDescent& seq);

/// Some y in the maximal ideal with d^e(y) = 1. The solution of the linear
/// system with every free variable zero is returned, so its support lies on
/// the earliest basis slots that can carry it.
std::optional<RingElement> unit_preimage(const Derivation& d, std::uint64_t e);

/// The iterative d-descent of exponent s = witnesses.size() built from
/// witnesses y_k with y_k^p = 0 and d^(p^k)(y_k) = 1 (BadWitnessError
/// otherwise). The result is verified before it is returned.
IterativeDescent construct_descent(const Derivation& d, const std::vector<RingElement>& witnesses);

struct NilFiltration {
    /// levels[i] holds an F_q-basis of N_i = ker d^(i+1) as columns.
    std::vector<FqMatrix> levels;
    /// dim over F_p of each level.
    std::vector<std::size_t> fp_dimension;
};

/// Computes N_i as ker d^(i+1) and as sum_{j<=i} (ker d) x^[j], and throws
/// Internal if the two ever differ. `descent` must be a d-descent.
NilFiltration nil_filtration(const Derivation& d, const IterativeDescent& descent);

/// Coefficients c_0..c_top in ker d with a = sum_i c_i seq[i], found by
/// peeling the top term off with c_i = d^i(u). BadInput if a is not in the
/// span this allows.
std::vector<RingElement> descent_coordinates(const Derivation& d, const std::vector<RingElement>& seq,
                                             const RingElement& a, std::size_t top);

/// The unique d-descent x^[0..m] whose members have no y^[0] component in
/// the decomposition N_m = sum_j (ker d) y^[j]. Needs d^i(y^[i]) = 1.
std::vector<RingElement> normalize_descent(const Derivation& d, const std::vector<RingElement>& y);

/// x'^[i] = x^[i] + sum_{j=1..i} lambda_j x^[i-j], where lambdas[j-1] is
/// lambda_j. Every lambda must lie in ker d.
std::vector<RingElement> translate_descent(const Derivation& d, const std::vector<RingElement>& seq,
                                           const std::vector<RingElement>& lambdas);

/// True iff d(x^[i]) = x^[i-1] for i >= 1 and x^[0] = 1.
bool is_descent(const Derivation& d, const std::vector<RingElement>& seq);

using LambdaTuple = std::vector<RingElement>;

/// lambda_j = the ker d component of other's pillar j along reference[0]
/// in the decomposition induced by `reference`.
LambdaTuple r_map(const Derivation& d, const IterativeDescent& reference, const IterativeDescent& other);

/// The iterative d-descent whose r-map value relative to `reference` is
/// `lambda` (each lambda_j in ker d with lambda_j^p = 0).
IterativeDescent descent_from_lambda(const Derivation& d, const IterativeDescent& reference, const LambdaTuple& lambda);

/// Default cap on the number of candidates an exhaustive enumeration may
/// touch; NILDERIV_MAX_ORACLE overrides it but cannot go below 2^10.
std::uint64_t oracle_cap();

/// Every iterative d-descent of exponent s (finite scalars only).
std::vector<IterativeDescent> enumerate_descents(const Derivation& d, std::uint32_t s);

/// Every s-tuple of lambda in ker d with lambda^p = 0.
std::vector<LambdaTuple> enumerate_C(const Derivation& d, std::uint32_t s);

}  // namespace nilderiv

#endif  // NILDERIV_DESCENT_HPP
