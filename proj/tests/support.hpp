#ifndef NILDERIV_TESTS_SUPPORT_HPP
#define NILDERIV_TESTS_SUPPORT_HPP

#include <array>
#include <random>
#include <vector>

#include "nilderiv/derivation.hpp"
#include "nilderiv/truncated_algebra.hpp"

namespace test_support {

using nilderiv::Derivation;
using nilderiv::FqVector;
using nilderiv::Ring;
using nilderiv::RingElement;

// (p, m, n)
using Config = std::array<std::uint32_t, 3>;

inline const std::vector<Config>& small_configs() {
    static const std::vector<Config> configs = {{2, 1, 1}, {2, 1, 2}, {2, 1, 3}, {3, 1, 1},
                                                {3, 1, 2}, {5, 1, 1}, {2, 2, 2}, {3, 2, 1}};
    return configs;
}

inline nilderiv::Fq random_scalar(const Ring& r, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::uint64_t> pick(0, r.field().order() - 1);
    return r.field().from_index(pick(rng));
}

inline RingElement random_element(const Ring& r, std::mt19937_64& rng, bool in_ideal = false) {
    FqVector v(static_cast<Eigen::Index>(r.dimension()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = random_scalar(r, rng);
    if (in_ideal) v(0) = r.field().zero();
    return r.from_coeffs(v);
}

inline Derivation random_derivation(const Ring& r, std::mt19937_64& rng) {
    std::vector<RingElement> images;
    for (std::uint32_t i = 0; i < r.n(); ++i) images.push_back(random_element(r, rng));
    return Derivation(r, std::move(images));
}

}  // namespace test_support

#endif  // NILDERIV_TESTS_SUPPORT_HPP
