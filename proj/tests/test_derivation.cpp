#include <thread>

#include "doctest.h"
#include "nilderiv/derivation.hpp"
#include "support.hpp"

using namespace nilderiv;
using namespace test_support;

namespace {

const Ring& t22() { return Ring::make(2, 1, 2); }

// Reference application straight from the Leibniz formula, term by term,
// without going through partial_derivative.
RingElement leibniz_reference(const Derivation& d, const RingElement& a) {
    const Ring& r = a.ring();
    RingElement out = r.zero();
    for (std::size_t s = 0; s < r.dimension(); ++s) {
        if (a.coeff(s).is_zero()) continue;
        MultiIndex alpha = r.exponents(s);
        for (std::uint32_t v = 0; v < r.n(); ++v) {
            if (alpha[v] == 0) continue;
            MultiIndex lower = alpha;
            --lower[v];
            out += (a.coeff(s) * r.field().from_int(alpha[v])) * r.monomial(lower) * d.image(v);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("applying a derivation") {
    const Ring& r = t22();
    const Derivation d = canonical_derivation(r);
    CHECK(d.image(0) == r.one());
    CHECK(d.image(1) == r.generator(0));
    CHECK(d(r.one()).is_zero());
    CHECK(d(r.generator(1)) == r.generator(0));
    CHECK(d(r.generator(0) * r.generator(1)) == r.generator(1));
    std::mt19937_64 rng(1);
    for (const auto& [p, m, n] : small_configs()) {
        const Ring& ring = Ring::make(p, m, n);
        for (int t = 0; t < 10; ++t) {
            const Derivation e = random_derivation(ring, rng);
            CHECK(e(ring.one()).is_zero());
            for (int k = 0; k < 10; ++k) {
                const auto a = random_element(ring, rng), b = random_element(ring, rng);
                const auto c = random_scalar(ring, rng);
                CHECK(e(a) == leibniz_reference(e, a));
                CHECK(e(a * b) == e(a) * b + a * e(b));
                CHECK(e(c * a + b) == c * e(a) + e(b));
                CHECK(e(ring.scalar(c)).is_zero());
            }
        }
    }
}

TEST_CASE("the matrix agrees with application and satisfies Leibniz on basis pairs") {
    std::mt19937_64 rng(2);
    for (const auto& [p, m, n] : small_configs()) {
        const Ring& ring = Ring::make(p, m, n);
        for (int t = 0; t < 5; ++t) {
            const Derivation d = random_derivation(ring, rng);
            const FqMatrix& mat = d.matrix();
            for (std::size_t s = 0; s < ring.dimension(); ++s) CHECK(apply(mat, ring.monomial(s)) == d(ring.monomial(s)));
            CHECK(satisfies_leibniz(ring, mat));
            // scalars w^t are killed
            Fq w = ring.field().one();
            for (std::uint32_t k = 0; k < m; ++k, w *= ring.field().generator()) CHECK(d(ring.scalar(w)).is_zero());
            CHECK(Derivation::from_matrix(ring, mat) == d);
        }
    }
    const Ring& r = t22();
    FqMatrix not_derivation = FqMatrix::Identity(4, 4);
    CHECK_FALSE(satisfies_leibniz(r, bind(not_derivation, r.field())));
    CHECK_THROWS_AS(Derivation::from_matrix(r, bind(not_derivation, r.field())), Error);
}

TEST_CASE("concurrent matrix materialization yields one matrix") {
    const Ring& ring = Ring::make(3, 1, 2);
    const Derivation d = canonical_derivation(ring);
    std::vector<const FqMatrix*> seen(8);
    std::vector<std::thread> workers;
    for (std::size_t i = 0; i < seen.size(); ++i) {
        workers.emplace_back([&, i] {
            const Derivation copy = d;
            seen[i] = &copy.matrix();
        });
    }
    for (auto& w : workers) w.join();
    for (auto* m : seen) CHECK(m == seen[0]);
}

TEST_CASE("nilpotency index") {
    CHECK(nilpotency_index(Derivation::zero(t22())) == 1u);
    CHECK(nilpotency_index(Derivation::partial(Ring::make(3, 1, 1), 0)) == 3u);
    CHECK(nilpotency_index(canonical_derivation(t22())) == 4u);
    // x d/dx fixes x, so it is not nilpotent
    const Ring& r = Ring::make(3, 1, 1);
    CHECK_FALSE(nilpotency_index(Derivation(r, {r.generator(0)})).has_value());
    for (const auto& [p, m, n] : small_configs()) {
        const Ring& ring = Ring::make(p, m, n);
        CHECK(nilpotency_index(canonical_derivation(ring)) == ring.dimension());
        for (std::uint32_t i = 0; i < n; ++i) CHECK(nilpotency_index(Derivation::partial(ring, i)) == p);
    }
}

TEST_CASE("p-power derivations") {
    const Ring& r = t22();
    const Derivation d = canonical_derivation(r);
    const Derivation d2 = p_power_derivation(d, 1);
    CHECK(d2.image(0).is_zero());
    CHECK(d2.image(1) == r.one());
    CHECK(p_power_derivation(d, 0) == d);
    for (const auto& [p, m, n] : small_configs()) {
        const Ring& ring = Ring::make(p, m, n);
        for (std::uint32_t i = 0; i < n; ++i) {
            const Derivation dp = p_power_derivation(Derivation::partial(ring, i), 1);
            for (const auto& im : dp.images()) CHECK(im.is_zero());
        }
    }
    std::mt19937_64 rng(5);
    for (const auto& [p, m, n] : small_configs()) {
        const Ring& ring = Ring::make(p, m, n);
        for (int t = 0; t < 5; ++t) {
            const Derivation e = random_derivation(ring, rng);
            std::uint64_t pk = 1;
            for (std::uint32_t i = 0; i <= 2; ++i, pk *= p) {
                FqMatrix direct = e.matrix();
                for (std::uint64_t k = 1; k < pk; ++k) direct = e.matrix() * direct;
                CHECK(p_power_derivation(e, i).matrix() == bind(direct, ring.field()));
            }
        }
    }
}

TEST_CASE("kill_p_power") {
    const Ring& r = t22();
    const Derivation d = canonical_derivation(r);
    const Derivation k = kill_p_power(d, r.generator(0));
    CHECK(k == Derivation::partial(r, 0));
    CHECK(is_zero(der_power(k, 2)));
    CHECK(kill_p_power(Derivation::partial(r, 0), r.generator(0)) == Derivation::partial(r, 0));
    try {
        kill_p_power(d, r.generator(1));
        FAIL("expected BadInput");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::BadInput);
        CHECK(std::string(e.what()).find("d(x)") != std::string::npos);
    }
    try {
        kill_p_power(Derivation(r, {r.one() + r.generator(0), r.zero()}), r.generator(0) + r.one());
        FAIL("expected BadInput");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::BadInput);
    }

    std::mt19937_64 rng(6);
    for (const auto& [p, m, n] : small_configs()) {
        const Ring& ring = Ring::make(p, m, n);
        for (int t = 0; t < 10; ++t) {
            auto images = random_derivation(ring, rng).images();
            images[0] = ring.one();
            const Derivation e(ring, images);
            const RingElement x = ring.generator(0);
            const Derivation c = kill_p_power(e, x);
            CHECK(c(x) == ring.one());
            CHECK(is_zero(der_power(c, p)));
            const FqMatrix lx = multiplication_matrix(x);
            CHECK(bind(lx * c.matrix(), ring.field()) == bind(lx * e.matrix(), ring.field()));
        }
    }
}

TEST_CASE("theta systems") {
    const Ring& r3 = Ring::make(3, 1, 1);
    const Derivation d3 = Derivation::partial(r3, 0);
    const ThetaSystem sys = theta_system(d3, r3.generator(0));
    REQUIRE(sys.theta.size() == 3);
    CHECK(bind(sys.theta[0] + sys.theta[1] + sys.theta[2], r3.field()) == bind(FqMatrix::Identity(3, 3), r3.field()));
    CHECK(theta_identity_failures(sys, d3, r3.generator(0)).empty());

    const Ring& r2 = t22();
    const Derivation d2 = canonical_derivation(r2);
    const ThetaSystem s2 = theta_system(d2, r2.generator(0));
    const FqMatrix id = bind(FqMatrix::Identity(4, 4), r2.field());
    CHECK(s2.theta[1] == s2.h);
    CHECK(s2.theta[0] == bind(id - s2.h, r2.field()));

    std::mt19937_64 rng(7);
    for (const auto& [p, m, n] : small_configs()) {
        const Ring& ring = Ring::make(p, m, n);
        for (int t = 0; t < 5; ++t) {
            auto images = random_derivation(ring, rng).images();
            images[0] = ring.one();
            const Derivation e(ring, images);
            const ThetaSystem s = theta_system(e, ring.generator(0));
            CHECK(theta_identity_failures(s, e, ring.generator(0)).empty());
        }
    }
    CHECK_THROWS_AS(theta_system(d2, r2.generator(1)), Error);
}

TEST_CASE("Taylor projection") {
    const Ring& r = t22();
    const Derivation d0 = Derivation::partial(r, 0);
    const FqMatrix phi = taylor_projection(d0, r.generator(0));
    CHECK(apply(phi, r.generator(0) + r.generator(1)) == r.generator(1));
    CHECK(apply(phi, r.generator(0)).is_zero());
    CHECK(apply(phi, r.generator(1)) == r.generator(1));
    CHECK_THROWS_AS(taylor_projection(canonical_derivation(r), r.generator(0)), Error);

    const Ring& r5 = Ring::make(5, 1, 1);
    const FqMatrix phi5 = taylor_projection(Derivation::partial(r5, 0), r5.generator(0));
    for (std::uint32_t k = 1; k < 5; ++k) CHECK(apply(phi5, r5.generator(0).pow(k)).is_zero());

    std::mt19937_64 rng(8);
    for (const auto& [p, m, n] : small_configs()) {
        const Ring& ring = Ring::make(p, m, n);
        for (int t = 0; t < 5; ++t) {
            auto images = random_derivation(ring, rng).images();
            images[0] = ring.one();
            const RingElement x = ring.generator(0);
            const Derivation e = kill_p_power(Derivation(ring, images), x);
            const FqMatrix ph = taylor_projection(e, x);
            CHECK(bind(ph * ph, ring.field()) == ph);
            const FqMatrix ker = nullspace(e.matrix());
            CHECK(same_column_space(ph, ker));
            for (const auto& k : columns_as_elements(ring, ker)) CHECK(apply(ph, k) == k);
            for (int s = 0; s < 5; ++s) {
                const auto a = random_element(ring, rng);
                const auto coeffs = taylor_coefficients(e, x, a);
                RingElement rebuilt = ring.zero();
                for (std::uint32_t i = 0; i < p; ++i) {
                    CHECK(e(coeffs[i]).is_zero());
                    rebuilt += coeffs[i] * x.pow(i);
                }
                CHECK(rebuilt == a);
            }
        }
    }
}

TEST_CASE("kernel bases") {
    const Ring& r = t22();
    CHECK(kernel_basis(Derivation::zero(r)).over_fq.size() == 4);
    const KernelBasis k0 = kernel_basis(Derivation::partial(r, 0));
    REQUIRE(k0.over_fq.size() == 2);
    CHECK(same_column_space(elements_as_columns(r, k0.over_fq), elements_as_columns(r, {r.one(), r.generator(1)})));
    const KernelBasis kc = kernel_basis(canonical_derivation(r));
    REQUIRE(kc.over_fq.size() == 1);
    CHECK(kc.over_fq[0] == r.one());

    std::mt19937_64 rng(10);
    for (const auto& [p, m, n] : small_configs()) {
        const Ring& ring = Ring::make(p, m, n);
        for (int t = 0; t < 5; ++t) {
            const Derivation e = t == 0 ? canonical_derivation(ring) : random_derivation(ring, rng);
            const KernelBasis kb = kernel_basis(e);
            CHECK(kb.over_fp.size() == kb.over_fq.size() * m);
            // independent route: null space of the F_p matrix
            const FqMatrix fp = fp_view(ring, e.matrix());
            const FqMatrix fp_ker = nullspace(fp);
            FqMatrix ours(fp.rows(), static_cast<Eigen::Index>(kb.over_fp.size()));
            for (std::size_t j = 0; j < kb.over_fp.size(); ++j) ours.col(static_cast<Eigen::Index>(j)) = fp_coordinates(kb.over_fp[j]);
            CHECK(same_column_space(ours, fp_ker));
            CHECK(rank(ours) == fp_ker.cols());
            // closed under products
            for (const auto& a : kb.over_fq)
                for (const auto& b : kb.over_fq) CHECK(e(a * b).is_zero());
        }
    }
}

TEST_CASE("F_p coordinates and the Frobenius-fixed subring") {
    std::mt19937_64 rng(11);
    for (const auto& [p, m, n] : small_configs()) {
        const Ring& ring = Ring::make(p, m, n);
        for (int t = 0; t < 10; ++t) {
            const auto a = random_element(ring, rng);
            CHECK(from_fp_coordinates(ring, fp_coordinates(a)) == a);
        }
        const auto fixed = frobenius_fixed_basis(ring);
        CHECK(fixed.size() == m);
        for (const auto& f : fixed) CHECK(f.degree() <= 0);
    }
}
