#include <functional>

#include "doctest.h"
#include "nilderiv/harper.hpp"
#include "support.hpp"

using namespace nilderiv;
using namespace test_support;

namespace {

const Ring& t22() { return Ring::make(2, 1, 2); }

template <class Kind>
void expect_error(Kind kind, const std::function<void()>& body) {
    try {
        body();
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == kind);
    }
}

// Every derivation of the ring: all q^(p^n) choices for each of the n images.
std::vector<Derivation> all_derivations(const Ring& r) {
    const std::uint64_t q = r.field().order();
    std::uint64_t per = 1;
    for (std::size_t s = 0; s < r.dimension(); ++s) per *= q;
    std::uint64_t total = 1;
    for (std::uint32_t i = 0; i < r.n(); ++i) total *= per;
    std::vector<Derivation> out;
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        std::uint64_t rest = idx;
        std::vector<RingElement> images;
        for (std::uint32_t i = 0; i < r.n(); ++i) {
            FqVector v(static_cast<Eigen::Index>(r.dimension()));
            for (Eigen::Index s = 0; s < v.size(); ++s, rest /= q) v(s) = r.field().from_index(rest % q);
            images.push_back(r.from_coeffs(v));
        }
        out.emplace_back(r, std::move(images));
    }
    return out;
}

RingAutomorphism random_automorphism(const Ring& r, std::mt19937_64& rng) {
    for (;;) {
        std::vector<RingElement> images;
        for (std::uint32_t i = 0; i < r.n(); ++i) images.push_back(random_element(r, rng, true));
        try {
            return RingAutomorphism(r, static_cast<std::uint32_t>(rng() % r.m()), images);
        } catch (const Error& e) {
            REQUIRE(e.kind() == ErrorKind::BadAutomorphism);
        }
    }
}

Derivation random_nsder(const Ring& r, std::mt19937_64& rng) {
    for (;;) {
        const Derivation d = random_derivation(r, rng);
        if (is_nsder(d).is_nsder) return d;
    }
}

std::vector<RingElement> generators(const Ring& r) {
    std::vector<RingElement> out;
    for (std::uint32_t i = 0; i < r.n(); ++i) out.push_back(r.generator(i));
    return out;
}

std::vector<Derivation> partials(const Ring& r) {
    std::vector<Derivation> out;
    for (std::uint32_t i = 0; i < r.n(); ++i) out.push_back(Derivation::partial(r, i));
    return out;
}

}  // namespace

TEST_CASE("local-ring matrices") {
    const Ring& r = t22();
    const auto x0 = r.generator(0);
    const auto x1 = r.generator(1);
    const RingMatrix m{{r.one() + x0, x1}, {x0 * x1, r.one()}};
    const RingMatrix inv = local_inverse(m);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            RingElement s = r.zero();
            for (std::size_t k = 0; k < 2; ++k) s += m[i][k] * inv[k][j];
            CHECK(s == (i == j ? r.one() : r.zero()));
        }
    CHECK(local_determinant(m) == (r.one() + x0) - x1 * x0 * x1);
    // needs a row swap and has a non-unit determinant
    CHECK(local_determinant({{x0, r.one()}, {r.one(), x1}}) == x0 * x1 - r.one());
    CHECK(local_determinant({{x0, x1}, {x1, x0}}) == x0 * x0 - x1 * x1);
    expect_error(ErrorKind::NotAUnit, [&] { local_inverse({{x0, x1}, {r.one(), x0}}); });
    const FqMatrix res = residue(m);
    CHECK(res(0, 0).is_one());
    CHECK(res(0, 1).is_zero());
}

TEST_CASE("nsder membership") {
    const Ring& r = t22();
    const auto canonical = is_nsder(canonical_derivation(r));
    CHECK(canonical.is_nsder);
    CHECK(canonical.witnesses.size() == 2);
    REQUIRE(canonical.descent);
    CHECK(canonical.descent->pillars() == generators(r));

    const auto zero = is_nsder(Derivation::zero(r));
    CHECK_FALSE(zero.is_nsder);
    CHECK(zero.kernel_element.has_value());

    const Derivation sum = Derivation::partial(r, 0) + Derivation::partial(r, 1);
    const auto v = is_nsder(sum);
    CHECK_FALSE(v.is_nsder);
    CHECK(v.missing_witness == std::nullopt);
    CHECK(v.witnesses.size() == 1);
    REQUIRE(v.kernel_element);
    CHECK(sum(*v.kernel_element).is_zero());
    CHECK(v.kernel_element->in_maximal_ideal());
    CHECK_FALSE(v.kernel_element->is_zero());

    CHECK_FALSE(is_nsder(r.generator(0) * Derivation::partial(r, 0)).is_nsder);
}

TEST_CASE("nsder agrees with the simplicity oracle on every derivation") {
    for (const auto& [p, m, n] : std::vector<Config>{{2, 1, 1}, {2, 1, 2}, {3, 1, 1}}) {
        const Ring& r = Ring::make(p, m, n);
        std::size_t members = 0;
        for (const auto& d : all_derivations(r)) {
            const auto v = is_nsder(d);
            const auto index = nilpotency_index(d);
            bool witnesses = index.has_value();
            for (std::uint64_t pk = 1; witnesses && pk < *index; pk *= p) witnesses = unit_preimage(d, pk).has_value();
            const bool expected = index.has_value() && witnesses && simplicity_oracle(d).simple;
            CHECK(v.is_nsder == expected);
            if (!v.is_nsder) continue;
            ++members;
            CHECK(*v.nilpotency_index == r.dimension());
            CHECK(kernel_basis(d).over_fp.size() == m);
            CHECK(nullspace(d.matrix().rightCols(d.matrix().cols() - 1)).cols() == 0);
        }
        CHECK(members > 0);
    }
}

TEST_CASE("coefficient fields") {
    const Ring& r = t22();
    const auto cf = coefficient_field(canonical_derivation(r));
    REQUIRE(cf.fp_basis.size() == 1);
    CHECK(cf.fp_basis[0] == r.one());
    for (std::size_t j = 1; j < r.dimension(); ++j) CHECK(apply(cf.projection, r.divided_monomial(j)).is_zero());
    CHECK(apply(cf.projection, r.one()) == r.one());
    expect_error(ErrorKind::NotSimple, [&] { coefficient_field(Derivation::zero(r)); });

    const Ring& f4 = Ring::make(2, 2, 1);
    const auto cf4 = coefficient_field(canonical_derivation(f4));
    CHECK(cf4.fp_basis.size() == 2);
    for (const auto& b : cf4.fp_basis) CHECK(b.degree() <= 0);
}

TEST_CASE("frames and the bijection") {
    const Ring& r = t22();
    const auto x0 = r.generator(0);
    const auto x1 = r.generator(1);
    const Frame std_frame = canonical_frame(canonical_derivation(r));
    CHECK(std_frame.generators == generators(r));
    CHECK(frame_defect(std_frame).empty());

    const Derivation d = derivation_from_frame(Frame{&r, {r.one()}, {x0, x1}});
    CHECK(d.image(0) == r.one());
    CHECK(d.image(1) == x0);

    const Ring& r3 = Ring::make(3, 1, 1);
    CHECK(derivation_from_frame(Frame{&r3, {r3.one()}, {r3.generator(0)}}) == Derivation::partial(r3, 0));

    const Frame twisted{&r, {r.one()}, {x0, x1 + x0 * x1}};
    CHECK(frame_defect(twisted).empty());
    const Derivation dt = derivation_from_frame(twisted);
    CHECK(is_nsder(dt).is_nsder);
    CHECK(canonical_frame(dt) == twisted);

    expect_error(ErrorKind::NotSimple, [&] { canonical_frame(Derivation::partial(r, 0) + Derivation::partial(r, 1)); });
    expect_error(ErrorKind::BadFrame, [&] { derivation_from_frame(Frame{&r, {r.one()}, {x0, x0}}); });
    expect_error(ErrorKind::BadFrame, [&] { derivation_from_frame(Frame{&r, {r.one()}, {x0, r.one() + x1}}); });
    expect_error(ErrorKind::BadFrame, [&] { derivation_from_frame(Frame{&r, {x0}, {x0, x1}}); });
    expect_error(ErrorKind::BadFrame, [&] { derivation_from_frame(Frame{&r, {r.one()}, {x0}}); });

    // g and its inverse are mutually inverse on every member
    for (const auto& [p, m, n] : std::vector<Config>{{2, 1, 2}, {3, 1, 1}, {2, 2, 1}}) {
        const Ring& ring = Ring::make(p, m, n);
        for (const auto& delta : all_derivations(ring)) {
            if (!is_nsder(delta).is_nsder) continue;
            const Frame f = canonical_frame(delta);
            CHECK(derivation_from_frame(f) == delta);
            CHECK(canonical_frame(derivation_from_frame(f)) == f);
        }
    }
}

TEST_CASE("Cramer duals") {
    const Ring& r = t22();
    const auto id = cramer_duals(partials(r), generators(r));
    CHECK(id.duals == partials(r));

    const Derivation d1 = Derivation::partial(r, 0) + Derivation::partial(r, 1);
    const Derivation d2 = Derivation::partial(r, 1);
    const auto duals = cramer_duals({d1, d2}, generators(r));
    CHECK(duals.duals[0] == Derivation::partial(r, 0));
    CHECK(duals.duals[1] == d2);
    CHECK(duals.coefficients[0][1] == -r.one());

    const Ring& r3 = Ring::make(3, 1, 1);
    const auto u = r3.field().from_int(2) * r3.one() + r3.generator(0);
    const Derivation d = u * Derivation::partial(r3, 0);
    CHECK(cramer_duals({d}, {r3.generator(0)}).duals[0] == u.inverse() * d);

    expect_error(ErrorKind::NotAUnit, [&] { cramer_duals({d2, d2}, generators(r)); });
}

TEST_CASE("orthogonalization") {
    const Ring& r = t22();
    const auto x0 = r.generator(0);
    const auto x1 = r.generator(1);
    const auto same = orthogonalize(partials(r), generators(r));
    CHECK(same.derivations == partials(r));
    CHECK(same.generators == generators(r));

    const RingElement b = x1 + x0 * x1;
    const Derivation d1 = Derivation::partial(r, 0) + b * Derivation::partial(r, 1);
    const Derivation d2 = (r.one() + x0) * Derivation::partial(r, 1);
    const auto out = orthogonalize({d1, d2}, {x0, b});
    CHECK(orthogonal_defects(out, {x0, b}).empty());
    const auto cp = composite_projection(out.derivations, out.generators);
    CHECK(cp.fp_basis.size() == 1);
    CHECK(cp.decomposition_rank == r.dimension());

    expect_error(ErrorKind::BadInput, [&] { orthogonalize({d2, d1}, {x0, b}); });

    // random inputs: Cramer duals of random derivations against random generators
    std::mt19937_64 rng(7);
    for (const auto& [p, m, n] : small_configs()) {
        const Ring& ring = Ring::make(p, m, n);
        for (int trial = 0; trial < 4; ++trial) {
            const auto sigma = random_automorphism(ring, rng);
            std::vector<RingElement> xs;
            for (const auto& g : generators(ring)) xs.push_back(sigma(g));
            std::vector<Derivation> ds;
            for (std::uint32_t i = 0; i < ring.n(); ++i) ds.push_back(random_derivation(ring, rng));
            CramerDuals duals;
            try {
                duals = cramer_duals(ds, xs);
            } catch (const Error& e) {
                CHECK(e.kind() == ErrorKind::NotAUnit);
                continue;
            }
            const auto o = orthogonalize(duals.duals, xs);
            CHECK(orthogonal_defects(o, xs).empty());
            const auto c = composite_projection(o.derivations, o.generators);
            CHECK(c.decomposition_rank == ring.dimension() * ring.m());
            FqMatrix cols(static_cast<Eigen::Index>(ring.dimension() * ring.m()), static_cast<Eigen::Index>(c.fp_basis.size()));
            for (std::size_t j = 0; j < c.fp_basis.size(); ++j) cols.col(static_cast<Eigen::Index>(j)) = fp_coordinates(c.fp_basis[j]);
            CHECK(rank(cols) == static_cast<Eigen::Index>(ring.m()));
        }
    }
}

TEST_CASE("composite projections") {
    const Ring& r = t22();
    const auto c = composite_projection(partials(r), generators(r));
    REQUIRE(c.fp_basis.size() == 1);
    CHECK(c.fp_basis[0] == r.one());

    const Ring& r5 = Ring::make(5, 1, 1);
    const auto single = composite_projection({Derivation::partial(r5, 0)}, {r5.generator(0)});
    CHECK(single.projection == taylor_projection(Derivation::partial(r5, 0), r5.generator(0)));

    expect_error(ErrorKind::BadInput, [&] { composite_projection({canonical_derivation(r), Derivation::partial(r, 1)}, generators(r)); });
    const Derivation twisted = Derivation::partial(r, 0) + r.generator(0) * Derivation::partial(r, 1);
    expect_error(ErrorKind::BadInput, [&] { composite_projection({Derivation::partial(r, 0), twisted}, generators(r)); });
}

TEST_CASE("pairing") {
    const Ring& r = t22();
    const auto std_report = pairing_report(partials(r), generators(r));
    CHECK(std_report.perfect);
    CHECK(std_report.surjective);
    CHECK(std_report.residue(0, 0).is_one());
    CHECK(std_report.residue(0, 1).is_zero());

    const auto single = pairing_report({Derivation::partial(r, 0)}, generators(r));
    CHECK(single.rank <= 1);
    CHECK_FALSE(single.perfect);
    CHECK_FALSE(single.surjective);

    const Derivation d1 = Derivation::partial(r, 0) + r.generator(0) * Derivation::partial(r, 1);
    const auto rep = pairing_report({d1, Derivation::partial(r, 1)}, generators(r));
    CHECK(rep.perfect);
    CHECK(rep.residue(0, 0).is_one());
    CHECK(rep.residue(0, 1).is_zero());
    CHECK(rep.residue(1, 0).is_zero());
    CHECK(rep.residue(1, 1).is_one());

    // perfect iff surjective on random families
    std::mt19937_64 rng(11);
    for (const auto& [p, m, n] : small_configs()) {
        const Ring& ring = Ring::make(p, m, n);
        for (int trial = 0; trial < 6; ++trial) {
            std::vector<Derivation> ds;
            for (std::uint32_t i = 0; i < ring.n(); ++i) ds.push_back(random_derivation(ring, rng));
            const auto report = pairing_report(ds, generators(ring));
            CHECK(report.perfect == report.surjective);
        }
    }
}

TEST_CASE("Der-module bases") {
    const Ring& r = t22();
    const auto cert = der_basis_check(canonical_derivation(r));
    CHECK(cert.verified);
    CHECK(cert.determinant.is_unit());
    CHECK(residue(cert.matrix) == bind(FqMatrix::Identity(2, 2), r.field()));

    const Ring& r3 = Ring::make(3, 1, 1);
    const auto one = der_basis_check(Derivation::partial(r3, 0));
    CHECK(one.matrix[0][0] == r3.one());
    CHECK(one.verified);

    expect_error(ErrorKind::NotSimple, [&] { der_basis_check(Derivation::zero(r)); });

    std::mt19937_64 rng(3);
    for (const auto& [p, m, n] : small_configs()) {
        const Ring& ring = Ring::make(p, m, n);
        const auto sigma = random_automorphism(ring, rng);
        const auto c = der_basis_check(conjugate(sigma, canonical_derivation(ring)));
        CHECK(c.verified);
        CHECK(c.determinant.is_unit());
    }
}

TEST_CASE("simplicity oracles") {
    const Ring& r = t22();
    const auto canonical = simplicity_oracle(canonical_derivation(r));
    CHECK(canonical.simple);
    CHECK(canonical.elements_checked == 15);

    const Derivation sum = Derivation::partial(r, 0) + Derivation::partial(r, 1);
    const auto v = simplicity_oracle(sum);
    CHECK_FALSE(v.simple);
    REQUIRE(v.generator);
    CHECK(*v.generator == r.generator(0) + r.generator(1));
    CHECK(same_column_space(v.ideal, elements_as_columns(r, {r.generator(0) + r.generator(1),
                                                               r.generator(0) * r.generator(1)})));

    for (const auto& [p, m, n] : small_configs()) {
        const Ring& ring = Ring::make(p, m, n);
        if (ring.field().order() > 4 && ring.dimension() > 4) continue;
        CHECK(differential_simplicity_oracle(ring).simple);
    }
    CHECK_FALSE(simplicity_oracle(Derivation::zero(r)).simple);
    expect_error(ErrorKind::TooLarge, [] { differential_simplicity_oracle(Ring::make(2, 1, 5)); });
}

TEST_CASE("automorphisms") {
    const Ring& r = t22();
    const auto x0 = r.generator(0);
    const auto x1 = r.generator(1);
    const auto id = RingAutomorphism::identity(r);
    const Derivation delta = canonical_derivation(r);
    CHECK(conjugate(id, delta) == delta);

    const RingAutomorphism sigma(r, 0, {x0, x1 + x0 * x1});
    CHECK(sigma(x0 * x1) == x0 * (x1 + x0 * x1));
    CHECK(sigma.apply_inverse(sigma(x0 + x1)) == x0 + x1);
    const Derivation conj = conjugate(sigma, delta);
    CHECK(is_nsder(conj).is_nsder);
    CHECK(canonical_frame(conj).generators == std::vector<RingElement>{x0, x1 + x0 * x1});

    expect_error(ErrorKind::BadAutomorphism, [&] { RingAutomorphism(r, 0, {x0, x0}); });
    expect_error(ErrorKind::BadAutomorphism, [&] { RingAutomorphism(r, 0, {x0, r.one() + x1}); });
    expect_error(ErrorKind::BadAutomorphism, [&] { RingAutomorphism(r, 0, {x0}); });

    // multiplicativity and bijectivity
    std::mt19937_64 rng(5);
    for (const auto& [p, m, n] : small_configs()) {
        const Ring& ring = Ring::make(p, m, n);
        const auto s = random_automorphism(ring, rng);
        CHECK(rank(s.fp_matrix()) == static_cast<Eigen::Index>(ring.dimension() * ring.m()));
        for (int k = 0; k < 10; ++k) {
            const auto a = random_element(ring, rng);
            const auto b = random_element(ring, rng);
            CHECK(s(a * b) == s(a) * s(b));
            CHECK(s(a + b) == s(a) + s(b));
            CHECK(s.apply_inverse(s(a)) == a);
        }
    }

    // Frobenius on F_4 fixes the canonical derivation
    const Ring& f4 = Ring::make(2, 2, 2);
    const RingAutomorphism frob(f4, 1, generators(f4));
    CHECK(conjugate(frob, canonical_derivation(f4)) == canonical_derivation(f4));
    const FqMatrix s_fp = frob.fp_matrix();
    const FqMatrix d_fp = fp_view(f4, canonical_derivation(f4).matrix());
    CHECK(is_zero(FqMatrix(s_fp * d_fp - d_fp * s_fp)));
}

TEST_CASE("equivariance of the bijection") {
    std::mt19937_64 rng(13);
    for (const auto& [p, m, n] : small_configs()) {
        const Ring& ring = Ring::make(p, m, n);
        const int pairs = ring.dimension() * ring.field().order() > 16 ? 10 : 50;
        for (int k = 0; k < pairs; ++k) {
            const auto sigma = random_automorphism(ring, rng);
            const auto d = random_nsder(ring, rng);
            const Derivation conj = conjugate(sigma, d);
            REQUIRE(is_nsder(conj).is_nsder);
            CHECK(canonical_frame(conj) == transport(sigma, canonical_frame(d)));
        }
    }
}

TEST_CASE("single orbit and fixers") {
    std::mt19937_64 rng(17);
    for (const auto& [p, m, n] : small_configs()) {
        const Ring& ring = Ring::make(p, m, n);
        const Derivation delta = canonical_derivation(ring);
        for (int k = 0; k < 5; ++k) {
            const auto other = random_nsder(ring, rng);
            const auto sigma = frame_transport(canonical_frame(delta), canonical_frame(other));
            CHECK(conjugate(sigma, delta) == other);
        }
        const auto fix = frobenius_fix_check(random_nsder(ring, rng));
        CHECK(fix.fixes_pillars);
        CHECK(fix.fixes_derivation);
    }

    // Fix(d) is Aut(k): Frobenius powers on scalars, identity on pillars
    for (const auto& [p, m, n] : std::vector<Config>{{2, 1, 1}, {2, 1, 2}, {3, 1, 1}, {2, 2, 1}, {2, 2, 2}}) {
        const Ring& ring = Ring::make(p, m, n);
        const auto d = random_nsder(ring, rng);
        const auto pillars = canonical_frame(d).generators;
        const auto fixers = fix_group(d);
        CHECK(fixers.size() == m);
        for (const auto& s : fixers)
            for (const auto& x : pillars) CHECK(s(x) == x);
    }

    // the action on nsder is free and transitive: |Aut| = |nsder|
    for (const auto& [p, m, n] : std::vector<Config>{{2, 1, 2}, {3, 1, 1}, {2, 2, 1}}) {
        const Ring& ring = Ring::make(p, m, n);
        std::size_t members = 0;
        for (const auto& d : all_derivations(ring)) members += is_nsder(d).is_nsder ? 1 : 0;
        CHECK(enumerate_automorphisms(ring).size() == members * m);
    }
}
