#include "nilderiv/sampling.hpp"

namespace nilderiv {

Fq random_scalar(const Ring& ring, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::uint64_t> pick(0, ring.field().order() - 1);
    return ring.field().from_index(pick(rng));
}

RingElement random_element(const Ring& ring, std::mt19937_64& rng, bool in_ideal) {
    FqVector v(static_cast<Eigen::Index>(ring.dimension()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = random_scalar(ring, rng);
    if (in_ideal) v(0) = ring.field().zero();
    return ring.from_coeffs(std::move(v));
}

Derivation random_derivation(const Ring& ring, std::mt19937_64& rng) {
    std::vector<RingElement> images;
    for (std::uint32_t i = 0; i < ring.n(); ++i) images.push_back(random_element(ring, rng));
    return Derivation(ring, std::move(images));
}

RingAutomorphism random_automorphism(const Ring& ring, std::mt19937_64& rng, int frobenius) {
    for (;;) {
        const auto e = frobenius >= 0 ? static_cast<std::uint32_t>(frobenius) : static_cast<std::uint32_t>(rng() % ring.m());
        std::vector<RingElement> images;
        for (std::uint32_t i = 0; i < ring.n(); ++i) images.push_back(random_element(ring, rng, true));
        try {
            return RingAutomorphism(ring, e, std::move(images));
        } catch (const Error& err) {
            if (err.kind() != ErrorKind::BadAutomorphism) throw;
        }
    }
}

Frame random_frame(const Ring& ring, std::mt19937_64& rng) {
    const auto sigma = random_automorphism(ring, rng, 0);
    Frame out{&ring, frobenius_fixed_basis(ring), {}};
    for (std::uint32_t i = 0; i < ring.n(); ++i) out.generators.push_back(sigma(ring.generator(i)));
    return out;
}

Derivation random_nsder(const Ring& ring, std::mt19937_64& rng) { return derivation_from_frame(random_frame(ring, rng)); }

}  // namespace nilderiv
