#ifndef NILDERIV_SAMPLING_HPP
#define NILDERIV_SAMPLING_HPP

#include <random>

#include "nilderiv/harper.hpp"

namespace nilderiv {

/// Uniform over F_q, over R, or over the maximal ideal.
Fq random_scalar(const Ring& ring, std::mt19937_64& rng);
RingElement random_element(const Ring& ring, std::mt19937_64& rng, bool in_ideal = false);
Derivation random_derivation(const Ring& ring, std::mt19937_64& rng);

/// Rejection-samples generator images until the Jacobian is a unit.
/// `frobenius` < 0 picks the exponent at random too.
RingAutomorphism random_automorphism(const Ring& ring, std::mt19937_64& rng, int frobenius = -1);

/// ({r : r^q = r}; sigma(x_0), ..., sigma(x_{n-1})) for a random
/// scalar-fixing sigma. Every frame over finite scalars has this form.
Frame random_frame(const Ring& ring, std::mt19937_64& rng);

/// g^-1 of a random frame.
Derivation random_nsder(const Ring& ring, std::mt19937_64& rng);

}  // namespace nilderiv

#endif  // NILDERIV_SAMPLING_HPP
