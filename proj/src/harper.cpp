#include "nilderiv/harper.hpp"

#include <functional>

#include "nilderiv/padic.hpp"

namespace nilderiv {

namespace {

std::uint64_t ipow(std::uint64_t base, std::uint32_t e) {
    std::uint64_t out = 1;
    for (std::uint32_t k = 0; k < e; ++k) out *= base;
    return out;
}

Fq sign(const GaloisField& f, std::uint64_t e) { return e % 2 == 0 ? f.one() : -f.one(); }

FqMatrix identity(const Ring& ring) {
    const auto dim = static_cast<Eigen::Index>(ring.dimension());
    return bind(FqMatrix::Identity(dim, dim), ring.field());
}

FqMatrix fp_columns(const Ring& ring, const std::vector<RingElement>& elems) {
    FqMatrix m(static_cast<Eigen::Index>(ring.dimension() * ring.m()), static_cast<Eigen::Index>(elems.size()));
    for (std::size_t j = 0; j < elems.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = fp_coordinates(elems[j]);
    return m;
}

// The m multiples w^t b of each b; an F_p-spanning set of the F_q-span.
std::vector<RingElement> scalar_multiples(const Ring& ring, const std::vector<RingElement>& elems) {
    std::vector<RingElement> out;
    for (const auto& b : elems) {
        Fq w = ring.field().one();
        for (std::uint32_t t = 0; t < ring.m(); ++t, w *= ring.field().generator()) out.push_back(w * b);
    }
    return out;
}

// Basis (columns) of the intersection of the kernels.
FqMatrix common_kernel(const Ring& ring, const std::vector<Derivation>& ds) {
    const auto dim = static_cast<Eigen::Index>(ring.dimension());
    FqMatrix stacked(dim * static_cast<Eigen::Index>(ds.size()), dim);
    for (std::size_t i = 0; i < ds.size(); ++i) stacked.middleRows(static_cast<Eigen::Index>(i) * dim, dim) = ds[i].matrix();
    return nullspace(stacked);
}

// F_q basis of the column space (the pivot columns).
std::vector<RingElement> column_basis(const Ring& ring, const FqMatrix& m) {
    const auto ech = rref(m);
    std::vector<RingElement> out;
    for (auto c : ech.pivots) out.push_back(ring.from_coeffs(m.col(c)));
    return out;
}

RingElement constant(const Ring& ring, std::uint64_t v) { return ring.scalar(ring.field().from_int(static_cast<std::int64_t>(v))); }

bool is_kronecker(const std::vector<Derivation>& ds, const std::vector<RingElement>& xs) {
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t j = 0; j < xs.size(); ++j)
            if (ds[i](xs[j]) != constant(xs[j].ring(), i == j ? 1 : 0)) return false;
    return true;
}

// Linear part of an element of the maximal ideal: its coordinates on x_0..x_{n-1}.
FqVector linear_part(const RingElement& a) {
    const Ring& ring = a.ring();
    FqVector v(ring.n());
    for (std::uint32_t i = 0; i < ring.n(); ++i) v(i) = a.coeff(ring.generator_slot(i));
    return v;
}

FqMatrix jacobian_residue(const Ring& ring, const std::vector<RingElement>& gens) {
    FqMatrix j(static_cast<Eigen::Index>(gens.size()), ring.n());
    for (std::size_t i = 0; i < gens.size(); ++i) j.row(static_cast<Eigen::Index>(i)) = linear_part(gens[i]).transpose();
    return j;
}

// Multi-indices of the first s coordinates, as p-adic slot numbers < p^s.
MultiIndex digits_of(std::uint64_t idx, std::uint32_t p, std::uint32_t s) {
    MultiIndex alpha(s);
    for (auto& a : alpha) {
        a = static_cast<std::uint32_t>(idx % p);
        idx /= p;
    }
    return alpha;
}

// Operators d^alpha = prod_i d_i^alpha_i, in the slot order of the first
// ds.size() coordinates, built from d^(alpha - e_k) for the lowest nonzero k.
template <class T, class Step>
std::vector<T> over_multi_indices(std::uint32_t p, std::uint32_t s, T start, Step step) {
    const std::uint64_t count = ipow(p, s);
    std::vector<T> out;
    out.reserve(count);
    out.push_back(std::move(start));
    for (std::uint64_t idx = 1; idx < count; ++idx) {
        std::uint32_t k = 0;
        std::uint64_t block = 1;
        while ((idx / block) % p == 0) {
            block *= p;
            ++k;
        }
        out.push_back(step(out[idx - block], k));
    }
    return out;
}

struct IncrementalSpan {
    std::vector<FqVector> basis;
    std::vector<Eigen::Index> pivots;

    // Reduces v against the basis; adds and returns true if it was new.
    bool insert(FqVector v) {
        for (std::size_t k = 0; k < basis.size(); ++k) {
            const Fq c = v(pivots[k]);
            if (!c.is_zero()) v -= c * basis[k];
        }
        Eigen::Index piv = 0;
        while (piv < v.size() && v(piv).is_zero()) ++piv;
        if (piv == v.size()) return false;
        v *= v(piv).inverse();
        for (auto& b : basis) {
            const Fq c = b(piv);
            if (!c.is_zero()) b -= c * v;
        }
        basis.push_back(std::move(v));
        pivots.push_back(piv);
        return true;
    }
};

SimplicityVerdict closure_oracle(const Ring& ring, const std::vector<const FqMatrix*>& ops) {
    const std::uint64_t q = ring.field().order();
    const std::uint64_t cap = oracle_cap();
    std::uint64_t count = 1;
    for (std::size_t s = 0; s < ring.dimension(); ++s) {
        if (count > cap / q) {
            throw Error(ErrorKind::TooLarge, "simplicity oracle needs q^(p^n) <= " + std::to_string(cap) +
                                                 " elements (NILDERIV_MAX_ORACLE)");
        }
        count *= q;
    }
    SimplicityVerdict out;
    Eigen::Index best = static_cast<Eigen::Index>(ring.dimension());
    const auto dim = static_cast<Eigen::Index>(ring.dimension());
    for (std::uint64_t idx = 1; idx < count; ++idx) {
        FqVector v(dim);
        std::uint64_t rest = idx;
        for (Eigen::Index s = 0; s < dim; ++s, rest /= q) v(s) = ring.field().from_index(rest % q);
        // one representative per line: leading (first nonzero) coefficient 1
        Eigen::Index lead = 0;
        while (v(lead).is_zero()) ++lead;
        if (!v(lead).is_one()) continue;
        ++out.elements_checked;
        if (lead == 0) continue;  // a unit generates R
        const RingElement a = ring.from_coeffs(v);
        const FqMatrix closure = stable_closure(a, ops);
        if (closure.cols() < best) {
            best = closure.cols();
            out.simple = false;
            out.generator = a;
            out.ideal = closure;
        }
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// local-ring linear algebra

RingMatrix local_inverse(const RingMatrix& m) {
    const std::size_t n = m.size();
    if (n == 0) return {};
    const Ring& ring = m[0][0].ring();
    RingMatrix a = m;
    RingMatrix b(n, std::vector<RingElement>(n, ring.zero()));
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i].size() != n) throw Error(ErrorKind::BadInput, "local_inverse needs a square matrix");
        b[i][i] = ring.one();
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && !a[piv][c].is_unit()) ++piv;
        if (piv == n) throw Error(ErrorKind::NotAUnit, "determinant lies in the maximal ideal");
        std::swap(a[piv], a[c]);
        std::swap(b[piv], b[c]);
        const RingElement inv = a[c][c].inverse();
        for (std::size_t j = 0; j < n; ++j) {
            a[c][j] = inv * a[c][j];
            b[c][j] = inv * b[c][j];
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == c || a[i][c].is_zero()) continue;
            const RingElement f = a[i][c];
            for (std::size_t j = 0; j < n; ++j) {
                a[i][j] -= f * a[c][j];
                b[i][j] -= f * b[c][j];
            }
        }
    }
    return b;
}

RingElement local_determinant(const RingMatrix& m) {
    const std::size_t n = m.size();
    if (n == 0) throw Error(ErrorKind::BadInput, "determinant of an empty matrix");
    const Ring& ring = m[0][0].ring();
    if (n == 1) return m[0][0];
    RingMatrix a = m;
    RingElement det = ring.one();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && !a[piv][c].is_unit()) ++piv;
        if (piv == n) {
            // No unit pivot: expand the remaining block along its first row.
            if (n - c > 8) throw Error(ErrorKind::TooLarge, "determinant expansion too large");
            RingElement sum = ring.zero();
            for (std::size_t j = c; j < n; ++j) {
                RingMatrix minor;
                for (std::size_t i = c + 1; i < n; ++i) {
                    std::vector<RingElement> row;
                    for (std::size_t k = c; k < n; ++k)
                        if (k != j) row.push_back(a[i][k]);
                    minor.push_back(std::move(row));
                }
                const RingElement term = minor.empty() ? a[c][j] : a[c][j] * local_determinant(minor);
                sum += (j - c) % 2 == 0 ? term : -term;
            }
            return det * sum;
        }
        if (piv != c) {
            std::swap(a[piv], a[c]);
            det = -det;
        }
        det *= a[c][c];
        const RingElement inv = a[c][c].inverse();
        for (std::size_t i = c + 1; i < n; ++i) {
            if (a[i][c].is_zero()) continue;
            const RingElement f = a[i][c] * inv;
            for (std::size_t j = c; j < n; ++j) a[i][j] -= f * a[c][j];
        }
    }
    return det;
}

FqMatrix residue(const RingMatrix& m) {
    const auto rows = static_cast<Eigen::Index>(m.size());
    const auto cols = rows == 0 ? 0 : static_cast<Eigen::Index>(m[0].size());
    FqMatrix out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = m[i][j].constant_term();
    return out;
}

// ---------------------------------------------------------------------------
// frames and the classification

bool operator==(const Frame& a, const Frame& b) {
    if (a.ring != b.ring || a.generators != b.generators) return false;
    if (a.field_basis.empty() || b.field_basis.empty()) return a.field_basis.size() == b.field_basis.size();
    return same_column_space(fp_columns(*a.ring, a.field_basis), fp_columns(*b.ring, b.field_basis));
}

std::string frame_defect(const Frame& frame) {
    if (frame.ring == nullptr) return "frame has no ring";
    const Ring& ring = *frame.ring;
    if (frame.generators.size() != ring.n()) return "frame needs exactly n generators";
    for (std::size_t i = 0; i < frame.generators.size(); ++i) {
        check_same_ring(ring, frame.generators[i].ring());
        if (!frame.generators[i].in_maximal_ideal()) {
            return "generator " + std::to_string(i) + " is not in the maximal ideal";
        }
    }
    if (frame.field_basis.empty()) return "field basis is empty";
    for (const auto& b : frame.field_basis) check_same_ring(ring, b.ring());
    const FqMatrix span = fp_columns(ring, frame.field_basis);
    if (rank(span) != ring.m()) return "field basis does not span m dimensions over F_p";
    if (!contains_columns(span, fp_coordinates(ring.one()))) return "field does not contain 1";
    std::vector<RingElement> residues;
    for (const auto& b : frame.field_basis) residues.push_back(ring.scalar(b.constant_term()));
    if (rank(fp_columns(ring, residues)) != ring.m()) return "field meets the maximal ideal";
    for (const auto& a : frame.field_basis)
        for (const auto& b : frame.field_basis)
            if (!contains_columns(span, fp_coordinates(a * b))) return "field basis is not closed under products";
    if (rank(jacobian_residue(ring, frame.generators)) != ring.n()) return "Jacobian of the generators is not a unit";
    return {};
}

NsderVerdict is_nsder(const Derivation& d) {
    const Ring& ring = d.ring();
    NsderVerdict v;
    v.nilpotency_index = nilpotency_index(d);
    if (!v.nilpotency_index) {
        v.failure = "d is not nilpotent";
        return v;
    }
    std::uint64_t pk = 1;
    for (std::uint32_t i = 0; pk < *v.nilpotency_index; ++i, pk *= ring.p()) {
        auto y = unit_preimage(d, pk);
        if (!y) {
            v.missing_witness = i;
            v.failure = "d^(p^" + std::to_string(i) + ") != 0 never takes the value 1 on the maximal ideal";
            return v;
        }
        v.witnesses.push_back(std::move(*y));
    }
    const FqMatrix ideal_kernel = nullspace(d.matrix().rightCols(d.matrix().cols() - 1));
    if (ideal_kernel.cols() > 0) {
        FqVector k(d.matrix().cols());
        k(0) = ring.field().zero();
        k.tail(k.size() - 1) = ideal_kernel.col(0);
        v.kernel_element = ring.from_coeffs(k);
        v.failure = "ker d meets the maximal ideal";
        return v;
    }
    v.descent = construct_descent(d, v.witnesses);
    v.is_nsder = true;
    return v;
}

namespace {

NsderVerdict require_nsder(const Derivation& d) {
    NsderVerdict v = is_nsder(d);
    if (!v.is_nsder) throw Error(ErrorKind::NotSimple, "derivation is not in nsder: " + v.failure);
    return v;
}

}  // namespace

CoefficientField coefficient_field(const Derivation& d) {
    const NsderVerdict v = require_nsder(d);
    const Ring& ring = d.ring();
    const GaloisField& f = ring.field();
    FqMatrix phi = bind(FqMatrix::Zero(ring.dimension(), ring.dimension()), f);
    FqMatrix dpow = identity(ring);
    for (std::size_t i = 0; i < ring.dimension(); ++i) {
        phi += sign(f, i) * (multiplication_matrix((*v.descent)[i]) * dpow);
        dpow = d.matrix() * dpow;
    }
    phi = bind(phi, f);
    if (!(bind(phi * phi, f) == phi)) throw Error(ErrorKind::Internal, "coefficient projection is not idempotent");
    const FqMatrix ker = nullspace(d.matrix());
    if (!same_column_space(phi, ker)) throw Error(ErrorKind::Internal, "coefficient projection image differs from ker d");
    CoefficientField out{phi, kernel_basis(d).over_fp};
    if (!same_column_space(fp_columns(ring, out.fp_basis), fp_columns(ring, frobenius_fixed_basis(ring)))) {
        throw Error(ErrorKind::Internal, "ker d differs from {r : r^q = r}");
    }
    return out;
}

Frame canonical_frame(const Derivation& d) {
    const NsderVerdict v = require_nsder(d);
    return Frame{&d.ring(), kernel_basis(d).over_fp, v.descent->pillars()};
}

Derivation derivation_from_frame(const Frame& frame) {
    if (auto defect = frame_defect(frame); !defect.empty()) throw Error(ErrorKind::BadFrame, "invalid frame: " + defect);
    const Ring& ring = *frame.ring;
    const std::uint32_t n = ring.n();
    const IterativeDescent seq = sequence_from_pillars(ring, frame.generators);
    RingMatrix jac(n, std::vector<RingElement>(n, ring.zero()));
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j) jac[i][j] = partial_derivative(j, frame.generators[i]);
    const RingMatrix inv = local_inverse(jac);
    std::vector<RingElement> images(n, ring.zero());
    std::uint64_t pk = 1;
    std::vector<RingElement> rhs;
    for (std::uint32_t i = 0; i < n; ++i, pk *= ring.p()) rhs.push_back(seq[pk - 1]);
    for (std::uint32_t j = 0; j < n; ++j)
        for (std::uint32_t i = 0; i < n; ++i) images[j] += inv[j][i] * rhs[i];
    Derivation d(ring, std::move(images));
    for (std::uint32_t i = 0; i < n; ++i) {
        if (d(frame.generators[i]) != rhs[i]) throw Error(ErrorKind::Internal, "frame derivation misses its target");
    }
    const NsderVerdict v = is_nsder(d);
    if (!v.is_nsder || v.descent->pillars() != frame.generators) {
        throw Error(ErrorKind::Internal, "frame derivation does not reproduce its frame");
    }
    return d;
}

CramerDuals cramer_duals(const std::vector<Derivation>& ds, const std::vector<RingElement>& xs) {
    if (ds.empty() || ds.size() != xs.size()) throw Error(ErrorKind::BadInput, "cramer_duals needs as many derivations as elements");
    const Ring& ring = ds[0].ring();
    const std::size_t k = ds.size();
    RingMatrix m(k, std::vector<RingElement>(k, ring.zero()));
    for (std::size_t l = 0; l < k; ++l)
        for (std::size_t j = 0; j < k; ++j) m[l][j] = ds[l](xs[j]);
    CramerDuals out;
    out.coefficients = local_inverse(m);
    for (std::size_t i = 0; i < k; ++i) {
        Derivation acc = Derivation::zero(ring);
        for (std::size_t l = 0; l < k; ++l) acc = acc + out.coefficients[i][l] * ds[l];
        out.duals.push_back(acc);
    }
    if (!is_kronecker(out.duals, xs)) throw Error(ErrorKind::Internal, "Cramer duals fail d'_i(x_j) = [i == j]");
    return out;
}

// ---------------------------------------------------------------------------
// orthogonalization and the composite projection

Orthogonalized orthogonalize(const std::vector<Derivation>& ds, const std::vector<RingElement>& xs) {
    if (ds.empty() || ds.size() != xs.size()) throw Error(ErrorKind::BadInput, "orthogonalize needs as many derivations as elements");
    const Ring& ring = ds[0].ring();
    const std::uint32_t p = ring.p();
    const auto count = static_cast<std::uint32_t>(ds.size());
    if (count != ring.n()) throw Error(ErrorKind::BadInput, "orthogonalize needs n derivations and n generators");
    for (const auto& x : xs)
        if (!x.in_maximal_ideal()) throw Error(ErrorKind::BadInput, "orthogonalize: an x_i is not in the maximal ideal");
    if (!is_kronecker(ds, xs)) throw Error(ErrorKind::BadInput, "orthogonalize: the matrix d_i(x_j) is not the identity");

    Orthogonalized out;
    FqMatrix big_phi = identity(ring);  // projection onto the common kernel of the d'_j so far
    for (std::uint32_t s = 0; s < count; ++s) {
        Derivation next = ds[s];
        RingElement x = xs[s];
        if (s > 0) {
            x = apply(big_phi, xs[s]);
            const GaloisField& f = ring.field();
            // a = sum_alpha c_alpha x'^alpha over the first s coordinates, with
            // c_alpha = Phi(d'^alpha(a) / alpha!); the new derivation acts on
            // the c_alpha by Phi d_s and leaves the x'_j alone.
            const auto monomials = over_multi_indices<RingElement>(
                p, s, ring.one(), [&](const RingElement& prev, std::uint32_t k) { return prev * out.generators[k]; });
            std::vector<RingElement> images;
            for (std::uint32_t v = 0; v < ring.n(); ++v) {
                const auto derived = over_multi_indices<RingElement>(
                    p, s, ring.generator(v),
                    [&](const RingElement& prev, std::uint32_t k) { return out.derivations[k](prev); });
                RingElement image = ring.zero();
                for (std::size_t idx = 0; idx < derived.size(); ++idx) {
                    Fq inv_fact = f.one();
                    for (auto a : digits_of(idx, p, s)) inv_fact *= f.from_int(factorial_unit(a, p).inverse);
                    const RingElement c = apply(big_phi, inv_fact * derived[idx]);
                    image += apply(big_phi, ds[s](c)) * monomials[idx];
                }
                images.push_back(image);
            }
            next = Derivation(ring, std::move(images));
            const RingElement u = next(x);
            if (!u.is_unit()) throw Error(ErrorKind::Internal, "orthogonalize: graded component does not take a unit on x'");
            next = u.inverse() * next;
        }
        const Derivation corrected = kill_p_power(next, x);
        big_phi = bind(taylor_projection(corrected, x) * big_phi, ring.field());
        out.derivations.push_back(corrected);
        out.generators.push_back(x);
    }
    const auto defects = orthogonal_defects(out, xs);
    if (!defects.empty()) throw Error(ErrorKind::Internal, "orthogonalize postcondition failed: " + defects.front());
    return out;
}

std::vector<std::string> orthogonal_defects(const Orthogonalized& out, const std::vector<RingElement>& original) {
    std::vector<std::string> bad;
    if (out.derivations.empty() || out.derivations.size() != out.generators.size()) return {"sizes differ"};
    const Ring& ring = out.derivations[0].ring();
    const GaloisField& f = ring.field();
    if (!is_kronecker(out.derivations, out.generators)) bad.push_back("d'_i(x'_j) = [i == j]");
    for (std::size_t i = 0; i < out.derivations.size(); ++i) {
        if (!is_zero(der_power(out.derivations[i], ring.p()))) bad.push_back("d'_" + std::to_string(i) + "^p = 0");
        for (std::size_t j = i + 1; j < out.derivations.size(); ++j) {
            const FqMatrix& a = out.derivations[i].matrix();
            const FqMatrix& b = out.derivations[j].matrix();
            if (!is_zero(bind(a * b - b * a, f))) bad.push_back("[d'_" + std::to_string(i) + ", d'_" + std::to_string(j) + "] = 0");
        }
    }
    auto ideal = [&](const std::vector<RingElement>& gens) {
        const auto dim = static_cast<Eigen::Index>(ring.dimension());
        FqMatrix m(dim, dim * static_cast<Eigen::Index>(gens.size()));
        for (std::size_t i = 0; i < gens.size(); ++i) m.middleCols(static_cast<Eigen::Index>(i) * dim, dim) = multiplication_matrix(gens[i]);
        return m;
    };
    if (!same_column_space(ideal(out.generators), ideal(original))) bad.push_back("(x') = (x) as ideals");
    const auto field = scalar_multiples(ring, columns_as_elements(ring, common_kernel(ring, out.derivations)));
    const FqMatrix field_cols = fp_columns(ring, field);
    if (rank(field_cols) != ring.m()) bad.push_back("dim over F_p of the common kernel is m");
    if (!same_column_space(field_cols, fp_columns(ring, frobenius_fixed_basis(ring)))) {
        bad.push_back("common kernel is the coefficient field");
    }
    std::vector<RingElement> spread;
    const auto monomials = over_multi_indices<RingElement>(
        ring.p(), static_cast<std::uint32_t>(out.generators.size()), ring.one(),
        [&](const RingElement& prev, std::uint32_t k) { return prev * out.generators[k]; });
    for (const auto& b : field)
        for (const auto& mono : monomials) spread.push_back(b * mono);
    if (static_cast<std::size_t>(rank(fp_columns(ring, spread))) != ring.dimension() * ring.m()) {
        bad.push_back("R is the direct sum of the k' x'^alpha");
    }
    return bad;
}

CompositeProjection composite_projection(const std::vector<Derivation>& ds, const std::vector<RingElement>& xs) {
    if (ds.empty() || ds.size() != xs.size()) throw Error(ErrorKind::BadInput, "composite_projection needs matching derivations and elements");
    const Ring& ring = ds[0].ring();
    const GaloisField& f = ring.field();
    const std::uint32_t p = ring.p();
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (!is_zero(der_power(ds[i], p))) throw Error(ErrorKind::BadInput, "d_" + std::to_string(i) + "^p != 0");
        for (std::size_t j = i + 1; j < ds.size(); ++j) {
            const FqMatrix& a = ds[i].matrix();
            const FqMatrix& b = ds[j].matrix();
            if (!is_zero(bind(a * b - b * a, f))) {
                throw Error(ErrorKind::BadInput, "d_" + std::to_string(i) + " and d_" + std::to_string(j) + " do not commute");
            }
        }
    }
    if (!is_kronecker(ds, xs)) throw Error(ErrorKind::BadInput, "d_i(x_j) is not [i == j]");

    FqMatrix product = identity(ring);
    for (std::size_t i = 0; i < ds.size(); ++i) product = taylor_projection(ds[i], xs[i]) * product;
    product = bind(product, f);

    const auto s = static_cast<std::uint32_t>(ds.size());
    const auto ops = over_multi_indices<FqMatrix>(p, s, identity(ring),
                                                  [&](const FqMatrix& prev, std::uint32_t k) -> FqMatrix { return ds[k].matrix() * prev; });
    const auto divided = over_multi_indices<RingElement>(p, s, ring.one(), [&](const RingElement& prev, std::uint32_t k) {
        return prev * xs[k];
    });
    FqMatrix expanded = bind(FqMatrix::Zero(ring.dimension(), ring.dimension()), f);
    for (std::size_t idx = 0; idx < ops.size(); ++idx) {
        Fq c = f.one();
        std::uint64_t total = 0;
        for (auto a : digits_of(idx, p, s)) {
            c *= f.from_int(factorial_unit(a, p).inverse);
            total += a;
        }
        expanded += (sign(f, total) * c) * (multiplication_matrix(divided[idx]) * ops[idx]);
    }
    if (!(bind(expanded, f) == product)) throw Error(ErrorKind::Internal, "product of projections differs from the expanded sum");
    if (!(bind(product * product, f) == product)) throw Error(ErrorKind::Internal, "composite projection is not idempotent");
    if (!same_column_space(product, common_kernel(ring, ds))) {
        throw Error(ErrorKind::Internal, "composite projection image differs from the common kernel");
    }
    CompositeProjection out;
    out.projection = product;
    out.fp_basis = scalar_multiples(ring, column_basis(ring, product));
    std::vector<RingElement> spread;
    for (const auto& b : out.fp_basis)
        for (const auto& mono : divided) spread.push_back(b * mono);
    out.decomposition_rank = static_cast<std::size_t>(rank(fp_columns(ring, spread)));
    return out;
}

// ---------------------------------------------------------------------------
// pairing and the Der-module basis

PairingReport pairing_report(const std::vector<Derivation>& ds, const std::vector<RingElement>& xs) {
    if (ds.empty() || xs.empty()) throw Error(ErrorKind::BadInput, "pairing_report needs derivations and generators");
    const Ring& ring = ds[0].ring();
    const auto n = static_cast<Eigen::Index>(ring.n());
    const auto r = static_cast<Eigen::Index>(ds.size());
    if (static_cast<Eigen::Index>(xs.size()) != n) throw Error(ErrorKind::BadInput, "pairing_report needs n generators");
    for (const auto& x : xs)
        if (!x.in_maximal_ideal()) throw Error(ErrorKind::BadInput, "pairing_report: a generator is not in the maximal ideal");
    PairingReport out;
    out.residue = FqMatrix(r, n);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < n; ++j) out.residue(i, j) = ds[i](xs[j]).constant_term();
    out.rank = rank(out.residue);
    out.perfect = out.rank == n;
    // x_i (x) d_j sends v in m/m^2 to (d_j(v) mod m) x_i.
    out.endomorphisms = FqMatrix(n * n, n * r);
    for (Eigen::Index i = 0; i < n; ++i) {
        const FqVector lin = linear_part(xs[i]);
        for (Eigen::Index j = 0; j < r; ++j) {
            FqVector functional(n);
            for (Eigen::Index k = 0; k < n; ++k) functional(k) = ds[j](ring.generator(static_cast<std::uint32_t>(k))).constant_term();
            const FqMatrix e = lin * functional.transpose();
            out.endomorphisms.col(i * r + j) = e.reshaped();
        }
    }
    out.endomorphism_rank = rank(out.endomorphisms);
    out.surjective = out.endomorphism_rank == n * n;
    return out;
}

DerBasisCertificate der_basis_check(const Derivation& d) {
    const NsderVerdict v = require_nsder(d);
    const Ring& ring = d.ring();
    const std::uint32_t n = ring.n();
    const auto pillars = v.descent->pillars();
    DerBasisCertificate out{{}, {}, ring.zero(), {}, {}, false};
    for (std::uint32_t i = 0; i < n; ++i) out.powers.push_back(p_power_derivation(d, i));
    out.matrix.assign(n, std::vector<RingElement>(n, ring.zero()));
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j) out.matrix[i][j] = out.powers[i](pillars[j]);
    out.determinant = local_determinant(out.matrix);
    out.inverse = local_inverse(out.matrix);
    for (std::uint32_t j = 0; j < n; ++j) {
        Derivation acc = Derivation::zero(ring);
        for (std::uint32_t i = 0; i < n; ++i) acc = acc + out.inverse[j][i] * out.powers[i];
        out.duals.push_back(acc);
    }
    std::vector<Derivation> partials;
    for (std::uint32_t i = 0; i < n; ++i) partials.push_back(Derivation::partial(ring, i));
    const auto frame_partials = cramer_duals(partials, pillars).duals;
    out.verified = out.determinant.is_unit() && is_kronecker(out.duals, pillars) && out.duals == frame_partials;
    return out;
}

// ---------------------------------------------------------------------------
// simplicity oracles

FqMatrix stable_closure(const RingElement& a, const std::vector<const FqMatrix*>& ops) {
    const Ring& ring = a.ring();
    IncrementalSpan span;
    std::vector<FqVector> queue{a.coeffs()};
    while (!queue.empty()) {
        FqVector v = std::move(queue.back());
        queue.pop_back();
        if (!span.insert(v)) continue;
        const FqVector& added = span.basis.back();
        for (std::uint32_t i = 0; i < ring.n(); ++i) queue.push_back(monomial_times(ring, ring.generator_slot(i), added));
        for (const FqMatrix* op : ops) queue.push_back(bind(*op * added, ring.field()));
    }
    FqMatrix out(static_cast<Eigen::Index>(ring.dimension()), static_cast<Eigen::Index>(span.basis.size()));
    for (std::size_t j = 0; j < span.basis.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = span.basis[j];
    return out;
}

SimplicityVerdict simplicity_oracle(const Derivation& d) { return closure_oracle(d.ring(), {&d.matrix()}); }

SimplicityVerdict differential_simplicity_oracle(const Ring& ring) {
    std::vector<Derivation> partials;
    for (std::uint32_t i = 0; i < ring.n(); ++i) partials.push_back(Derivation::partial(ring, i));
    std::vector<const FqMatrix*> ops;
    for (const auto& d : partials) ops.push_back(&d.matrix());
    return closure_oracle(ring, ops);
}

// ---------------------------------------------------------------------------
// automorphisms

FqMatrix substitution_matrix(const Ring& ring, const std::vector<RingElement>& gens) {
    if (gens.size() != ring.n()) throw Error(ErrorKind::BadInput, "substitution needs n images");
    const auto cols = over_multi_indices<RingElement>(ring.p(), ring.n(), ring.one(),
                                                      [&](const RingElement& prev, std::uint32_t k) { return prev * gens[k]; });
    return elements_as_columns(ring, cols);
}

RingAutomorphism::RingAutomorphism(const Ring& ring, std::uint32_t frobenius, std::vector<RingElement> images)
    : ring_(&ring), frobenius_(frobenius % ring.m()), images_(std::move(images)) {
    if (images_.size() != ring.n()) throw Error(ErrorKind::BadAutomorphism, "automorphism needs one image per generator");
    for (std::size_t i = 0; i < images_.size(); ++i) {
        check_same_ring(ring, images_[i].ring());
        if (!images_[i].in_maximal_ideal()) {
            throw Error(ErrorKind::BadAutomorphism, "image of x_" + std::to_string(i) + " is not in the maximal ideal");
        }
    }
    if (rank(jacobian_residue(ring, images_)) != ring.n()) {
        throw Error(ErrorKind::BadAutomorphism, "Jacobian of the images is not a unit");
    }
    substitution_ = substitution_matrix(ring, images_);
    try {
        substitution_inverse_ = bind(inverse(substitution_), ring.field());
    } catch (const Error&) {
        throw Error(ErrorKind::BadAutomorphism, "substitution is not invertible");
    }
}

RingAutomorphism RingAutomorphism::identity(const Ring& ring) {
    std::vector<RingElement> gens;
    for (std::uint32_t i = 0; i < ring.n(); ++i) gens.push_back(ring.generator(i));
    return RingAutomorphism(ring, 0, std::move(gens));
}

RingElement RingAutomorphism::apply(const RingElement& a) const {
    check_same_ring(*ring_, a.ring());
    FqVector c = a.coeffs();
    if (frobenius_ != 0)
        for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = c(i).frobenius(frobenius_);
    return ring_->from_coeffs(substitution_ * c);
}

RingElement RingAutomorphism::apply_inverse(const RingElement& a) const {
    check_same_ring(*ring_, a.ring());
    FqVector c = substitution_inverse_ * a.coeffs();
    if (frobenius_ != 0)
        for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = c(i).bind(ring_->field()).frobenius(ring_->m() - frobenius_);
    return ring_->from_coeffs(std::move(c));
}

FqMatrix RingAutomorphism::fp_matrix() const {
    return nilderiv::fp_matrix(*ring_, [this](const RingElement& a) { return apply(a); });
}

Derivation conjugate(const RingAutomorphism& sigma, const Derivation& d) {
    const Ring& ring = d.ring();
    check_same_ring(ring, sigma.ring());
    auto composed = [&](const RingElement& a) { return sigma(d(sigma.apply_inverse(a))); };
    std::vector<RingElement> images;
    for (std::uint32_t i = 0; i < ring.n(); ++i) images.push_back(composed(ring.generator(i)));
    Derivation out(ring, std::move(images));
    for (std::size_t s = 0; s < ring.dimension(); ++s) {
        if (composed(ring.monomial(s)) != apply(out.matrix(), ring.monomial(s))) {
            throw Error(ErrorKind::Internal, "conjugated operator is not the derivation of its images");
        }
    }
    return out;
}

Frame transport(const RingAutomorphism& sigma, const Frame& frame) {
    Frame out{frame.ring, {}, {}};
    for (const auto& b : frame.field_basis) out.field_basis.push_back(sigma(b));
    for (const auto& x : frame.generators) out.generators.push_back(sigma(x));
    return out;
}

RingAutomorphism frame_transport(const Frame& from, const Frame& to) {
    for (const Frame* f : {&from, &to}) {
        if (auto defect = frame_defect(*f); !defect.empty()) throw Error(ErrorKind::BadFrame, "invalid frame: " + defect);
    }
    if (from.ring != to.ring) throw Error(ErrorKind::RingMismatch, "frames belong to different rings");
    const Ring& ring = *from.ring;
    const FqMatrix t = bind(substitution_matrix(ring, to.generators) * inverse(substitution_matrix(ring, from.generators)), ring.field());
    std::vector<RingElement> images;
    for (std::uint32_t i = 0; i < ring.n(); ++i) images.push_back(apply(t, ring.generator(i)));
    RingAutomorphism sigma(ring, 0, std::move(images));
    for (std::size_t i = 0; i < from.generators.size(); ++i) {
        if (sigma(from.generators[i]) != to.generators[i]) throw Error(ErrorKind::Internal, "frame transport misses a generator");
    }
    return sigma;
}

FrobeniusFix frobenius_fix_check(const Derivation& d) {
    const Frame frame = canonical_frame(d);
    const Ring& ring = d.ring();
    const FqMatrix b = substitution_matrix(ring, frame.generators);
    const FqMatrix b_inv = bind(inverse(b), ring.field());
    std::vector<RingElement> images;
    for (std::uint32_t i = 0; i < ring.n(); ++i) {
        FqVector c = b_inv * ring.generator(i).coeffs();
        for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = c(k).bind(ring.field()).frobenius(1);
        images.push_back(ring.from_coeffs(b * c));
    }
    FrobeniusFix out{RingAutomorphism(ring, 1, std::move(images))};
    out.fixes_pillars = true;
    for (const auto& x : frame.generators) out.fixes_pillars = out.fixes_pillars && out.sigma(x) == x;
    out.fixes_derivation = conjugate(out.sigma, d) == d;
    return out;
}

std::vector<RingAutomorphism> enumerate_automorphisms(const Ring& ring) {
    const std::uint64_t q = ring.field().order();
    const std::uint64_t cap = oracle_cap();
    const std::size_t ideal_dim = ring.dimension() - 1;
    std::uint64_t per_image = 1;
    for (std::size_t k = 0; k < ideal_dim; ++k) {
        if (per_image > cap / q) throw Error(ErrorKind::TooLarge, "automorphism enumeration exceeds the oracle cap");
        per_image *= q;
    }
    std::uint64_t tuples = ring.m();
    for (std::uint32_t i = 0; i < ring.n(); ++i) {
        if (tuples > cap / per_image) throw Error(ErrorKind::TooLarge, "automorphism enumeration exceeds the oracle cap");
        tuples *= per_image;
    }
    std::vector<RingElement> ideal;
    for (std::uint64_t idx = 0; idx < per_image; ++idx) {
        FqVector v(static_cast<Eigen::Index>(ring.dimension()));
        v(0) = ring.field().zero();
        std::uint64_t rest = idx;
        for (std::size_t s = 1; s < ring.dimension(); ++s, rest /= q) v(static_cast<Eigen::Index>(s)) = ring.field().from_index(rest % q);
        ideal.push_back(ring.from_coeffs(v));
    }
    std::vector<RingAutomorphism> out;
    std::vector<RingElement> images(ring.n(), ring.zero());
    const std::uint64_t combos = tuples / ring.m();
    for (std::uint32_t e = 0; e < ring.m(); ++e) {
        for (std::uint64_t idx = 0; idx < combos; ++idx) {
            std::uint64_t rest = idx;
            for (std::uint32_t i = 0; i < ring.n(); ++i, rest /= per_image) images[i] = ideal[rest % per_image];
            if (rank(jacobian_residue(ring, images)) != ring.n()) continue;
            out.emplace_back(ring, e, images);
        }
    }
    return out;
}

std::vector<RingAutomorphism> fix_group(const Derivation& d) {
    std::vector<RingAutomorphism> out;
    for (auto& sigma : enumerate_automorphisms(d.ring()))
        if (conjugate(sigma, d) == d) out.push_back(std::move(sigma));
    return out;
}

}  // namespace nilderiv
