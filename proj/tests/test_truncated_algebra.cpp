#include <random>

#include "doctest.h"
#include "nilderiv/padic.hpp"
#include "nilderiv/truncated_algebra.hpp"

using namespace nilderiv;

namespace {

RingElement random_element(const Ring& r, std::mt19937_64& rng, bool in_ideal = false) {
    std::uniform_int_distribution<std::uint64_t> pick(0, r.field().order() - 1);
    FqVector v(r.dimension());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = r.field().from_index(pick(rng));
    if (in_ideal) v(0) = r.field().zero();
    return r.from_coeffs(v);
}

const std::vector<std::array<std::uint32_t, 3>> kConfigs = {
    {2, 1, 1}, {2, 1, 2}, {2, 1, 3}, {3, 1, 1}, {3, 1, 2}, {5, 1, 1}, {2, 2, 2}, {3, 2, 1}, {7, 1, 1}};

}  // namespace

TEST_CASE("ring construction") {
    const Ring& r = Ring::make(2, 1, 2);
    CHECK(r.dimension() == 4);
    CHECK(r.exponents(0) == MultiIndex{0, 0});
    CHECK(r.exponents(1) == MultiIndex{1, 0});
    CHECK(r.exponents(2) == MultiIndex{0, 1});
    CHECK(r.exponents(3) == MultiIndex{1, 1});
    CHECK(r.monomial(3) == r.generator(0) * r.generator(1));
    CHECK(Ring::make(3, 1, 1).dimension() == 3);
    try {
        Ring::make(2, 1, 15);
        FAIL("expected TooLarge");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TooLarge);
    }
    CHECK(&Ring::make(2, 1, 2) == &r);
}

TEST_CASE("defining relations") {
    for (const auto& [p, m, n] : kConfigs) {
        const Ring& r = Ring::make(p, m, n);
        for (std::uint32_t i = 0; i < n; ++i) {
            CHECK(r.generator(i).pow(p).is_zero());
            CHECK_FALSE(r.generator(i).pow(p - 1).is_zero());
        }
    }
    const Ring& r2 = Ring::make(2, 1, 2);
    CHECK((r2.generator(0) * r2.generator(0)).is_zero());
    const Ring& r3 = Ring::make(3, 1, 1);
    const RingElement x = r3.generator(0);
    CHECK(x * x == r3.monomial(2));
    CHECK((x * (r3.field().from_int(2) * x * x)).is_zero());
    // x^[1] x^[2] = C(3,1) x^[3] = 0
    CHECK((r3.divided_monomial(1) * r3.divided_monomial(2)).is_zero());
}

TEST_CASE("ring laws and Frobenius additivity on random elements") {
    std::mt19937_64 rng(3);
    for (const auto& [p, m, n] : kConfigs) {
        const Ring& r = Ring::make(p, m, n);
        for (int t = 0; t < 500; ++t) {
            const auto a = random_element(r, rng), b = random_element(r, rng), c = random_element(r, rng);
            REQUIRE(a * b == b * a);
            REQUIRE((a * b) * c == a * (b * c));
            REQUIRE(a * (b + c) == a * b + a * c);
            REQUIRE((a + b).pow(p) == a.pow(p) + b.pow(p));
        }
    }
}

TEST_CASE("the maximal ideal is p-nil and nilpotent of index n(p-1)+1") {
    std::mt19937_64 rng(4);
    for (const auto& [p, m, n] : kConfigs) {
        const Ring& r = Ring::make(p, m, n);
        for (std::size_t s = 1; s < r.dimension(); ++s) CHECK(r.monomial(s).pow(p).is_zero());
        for (int t = 0; t < 100; ++t) CHECK(random_element(r, rng, true).pow(p).is_zero());
        // the top monomial is a product of n(p-1) generators; one more kills it
        RingElement prod = r.one();
        for (std::uint32_t i = 0; i < n; ++i) prod *= r.generator(i).pow(p - 1);
        CHECK_FALSE(prod.is_zero());
        for (std::uint32_t i = 0; i < n; ++i) CHECK((prod * r.generator(i)).is_zero());
        RingElement mprod = r.one();
        for (std::uint32_t k = 0; k < n * (p - 1) + 1; ++k) mprod *= random_element(r, rng, true);
        CHECK(mprod.is_zero());
    }
}

TEST_CASE("units and inverses") {
    const Ring& r = Ring::make(2, 1, 2);
    CHECK(r.one().inverse() == r.one());
    const RingElement u = r.one() + r.generator(0);
    CHECK(u.inverse() == u);
    try {
        r.generator(0).inverse();
        FAIL("expected NotAUnit");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotAUnit);
    }
    std::mt19937_64 rng(9);
    for (const auto& [p, m, n] : kConfigs) {
        const Ring& ring = Ring::make(p, m, n);
        for (int t = 0; t < 50; ++t) {
            auto a = random_element(ring, rng);
            if (!a.is_unit()) a += ring.one();
            if (!a.is_unit()) continue;
            CHECK(a * a.inverse() == ring.one());
        }
    }
}

TEST_CASE("divided monomials") {
    const Ring& r3 = Ring::make(3, 1, 1);
    CHECK(r3.divided_monomial(0) == r3.one());
    CHECK(r3.divided_monomial(2) == r3.field().from_int(2) * r3.monomial(2));
    const Ring& r2 = Ring::make(2, 1, 2);
    CHECK(r2.divided_monomial(3) == r2.generator(0) * r2.generator(1));
}

TEST_CASE("divided monomials obey the iterative product law exhaustively") {
    for (const auto& [p, m, n] : kConfigs) {
        const Ring& r = Ring::make(p, m, n);
        const std::size_t dim = r.dimension();
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = 0; j < dim; ++j) {
                const RingElement lhs = r.divided_monomial(i) * r.divided_monomial(j);
                const Fq c = r.field().from_int(lucas_binom(i + j, i, p));
                const RingElement rhs = i + j < dim ? c * r.divided_monomial(i + j) : r.zero();
                REQUIRE(lhs == rhs);
            }
        }
    }
}

TEST_CASE("partial derivatives") {
    const Ring& r = Ring::make(2, 1, 2);
    CHECK(partial_derivative(0, r.generator(0) * r.generator(1)) == r.generator(1));
    CHECK(partial_derivative(1, r.one()).is_zero());
    const Ring& r3 = Ring::make(3, 1, 2);
    CHECK(partial_derivative(0, r3.generator(0).pow(2)) == r3.field().from_int(2) * r3.generator(0));
    std::mt19937_64 rng(2);
    for (const auto& [p, m, n] : kConfigs) {
        const Ring& ring = Ring::make(p, m, n);
        for (std::uint32_t i = 0; i < n; ++i) {
            for (std::uint32_t j = 0; j < n; ++j) {
                CHECK(partial_derivative(i, ring.generator(j)) == (i == j ? ring.one() : ring.zero()));
            }
            for (int t = 0; t < 30; ++t) {
                const auto a = random_element(ring, rng), b = random_element(ring, rng);
                const Fq c = ring.field().from_index(t % ring.field().order());
                CHECK(partial_derivative(i, a * b) == partial_derivative(i, a) * b + a * partial_derivative(i, b));
                CHECK(partial_derivative(i, c * a + b) == c * partial_derivative(i, a) + partial_derivative(i, b));
            }
        }
    }
}

TEST_CASE("mixing rings is rejected") {
    const Ring& a = Ring::make(2, 1, 2);
    const Ring& b = Ring::make(2, 1, 3);
    try {
        (void)(a.one() * b.one());
        FAIL("expected RingMismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::RingMismatch);
    }
}
