#include "nilderiv/descent.hpp"

#include <cstdlib>
#include <map>

#include "nilderiv/padic.hpp"

namespace nilderiv {

namespace {

std::uint64_t ipow(std::uint64_t base, std::uint32_t e) {
    std::uint64_t out = 1;
    for (std::uint32_t k = 0; k < e; ++k) out *= base;
    return out;
}

Fq sign(const GaloisField& f, std::uint64_t e) { return e % 2 == 0 ? f.one() : -f.one(); }

RingElement apply_times(const Derivation& d, RingElement a, std::uint64_t e) {
    for (std::uint64_t k = 0; k < e && !a.is_zero(); ++k) a = d.apply(a);
    return a;
}

// Powers of one derivation's matrix, computed once each.
class PowerCache {
  public:
    explicit PowerCache(const Derivation& d) : d_(d) {}

    const FqMatrix& get(std::uint64_t e) {
        auto it = cache_.find(e);
        if (it != cache_.end()) return it->second;
        return cache_.emplace(e, der_power(d_, e)).first->second;
    }

  private:
    const Derivation& d_;
    std::map<std::uint64_t, FqMatrix> cache_;
};

// Elements sum_t c_t basis_t for every coefficient tuple over F_q, visited
// in the order of the base-q index with t = 0 least significant.
template <class F>
void for_each_combination(const Ring& ring, const std::vector<RingElement>& basis, F&& visit) {
    const std::uint64_t q = ring.field().order();
    const std::uint64_t count = ipow(q, static_cast<std::uint32_t>(basis.size()));
    for (std::uint64_t idx = 0; idx < count; ++idx) {
        RingElement z = ring.zero();
        std::uint64_t rest = idx;
        for (const auto& b : basis) {
            const std::uint64_t c = rest % q;
            rest /= q;
            if (c != 0) z += ring.field().from_index(c) * b;
        }
        visit(z);
    }
}

void charge(std::uint64_t& used, std::uint64_t amount, std::uint64_t cap, const char* what) {
    if (amount > cap || used > cap - amount) {
        throw Error(ErrorKind::TooLarge,
                    std::string(what) + " needs more than " + std::to_string(cap) + " candidates (NILDERIV_MAX_ORACLE)");
    }
    used += amount;
}

}  // namespace

const RingElement& IterativeDescent::pillar(std::uint32_t k) const {
    if (k >= exponent) throw Error(ErrorKind::OutOfRange, "pillar index out of range");
    return elements.at(ipow(ring->p(), k));
}

std::vector<RingElement> IterativeDescent::pillars() const {
    std::vector<RingElement> out;
    for (std::uint32_t k = 0; k < exponent; ++k) out.push_back(pillar(k));
    return out;
}

IterativeDescent sequence_from_pillars(const Ring& ring, const std::vector<RingElement>& pillars) {
    const std::uint32_t p = ring.p();
    const auto s = static_cast<std::uint32_t>(pillars.size());
    std::uint64_t size = 1;
    for (std::uint32_t k = 0; k < s; ++k) {
        size *= p;
        if (size > kMaxRingDimension) throw Error(ErrorKind::TooLarge, "descent exponent too large");
    }
    // divided[k][a] = pillar_k^a / a!
    std::vector<std::vector<RingElement>> divided(s);
    for (std::uint32_t k = 0; k < s; ++k) {
        check_same_ring(ring, pillars[k].ring());
        if (!pillars[k].in_maximal_ideal()) {
            throw Error(ErrorKind::NotNilpotent, "pillar " + std::to_string(k) + " is a unit, so its p-th power is not 0");
        }
        RingElement power = ring.one();
        for (std::uint32_t a = 0; a < p; ++a) {
            divided[k].push_back(ring.field().from_int(factorial_unit(a, p).inverse) * power);
            power *= pillars[k];
        }
    }
    IterativeDescent out{&ring, s, {ring.one()}};
    out.elements.reserve(size);
    std::uint64_t block = 1;
    for (std::uint32_t k = 0; k < s; ++k, block *= p) {
        // indices in [block, block * p) have top digit k
        for (std::uint64_t i = block; i < block * p; ++i) {
            out.elements.push_back(out.elements[i % block] * divided[k][i / block]);
        }
    }
    return out;
}

DescentVerdict verify_iterative_law(const IterativeDescent& seq) {
    const Ring& ring = *seq.ring;
    const std::size_t size = seq.size();
    if (seq.elements.at(0) != ring.one()) return {false, "x^[0] = 1"};
    for (std::size_t i = 0; i < size; ++i) {
        for (std::size_t j = i; j < size; ++j) {
            const RingElement lhs = seq[i] * seq[j];
            const bool fits = i + j < size;
            if (fits ? lhs != ring.field().from_int(lucas_binom(i + j, i, ring.p())) * seq[i + j] : !lhs.is_zero()) {
                return {false, "x^[" + std::to_string(i) + "] x^[" + std::to_string(j) + "] = C(" +
                                   std::to_string(i + j) + ", " + std::to_string(i) + ") x^[" + std::to_string(i + j) +
                                   "]"};
            }
        }
    }
    return {};
}

DescentVerdict verify_iterative_descent(const IterativeDescent& seq, const Derivation& d, bool exhaustive) {
    const Ring& ring = d.ring();
    if (seq.ring != &ring) return {false, "descent and derivation live in different rings"};
    const std::uint32_t p = ring.p();
    if (seq.size() != ipow(p, seq.exponent)) return {false, "sequence length is p^s"};
    if (seq[0] != ring.one()) return {false, "x^[0] = 1"};
    for (std::uint32_t j = 0; j < seq.exponent; ++j) {
        if (!seq.pillar(j).pow(p).is_zero()) return {false, "x^[p^" + std::to_string(j) + "]^p = 0"};
    }
    for (std::uint32_t j = 0; j < seq.exponent; ++j) {
        const std::uint64_t pj = ipow(p, j);
        if (d.apply(seq[pj]) != seq[pj - 1]) {
            return {false, "d(x^[p^" + std::to_string(j) + "]) = x^[p^" + std::to_string(j) + " - 1]"};
        }
    }
    const IterativeDescent rebuilt = sequence_from_pillars(ring, seq.pillars());
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (rebuilt[i] != seq[i]) return {false, "x^[" + std::to_string(i) + "] = product of divided pillar powers"};
    }
    if (exhaustive) {
        if (auto law = verify_iterative_law(seq); !law) return law;
        for (std::size_t i = 1; i < seq.size(); ++i) {
            if (d.apply(seq[i]) != seq[i - 1]) {
                return {false, "d(x^[" + std::to_string(i) + "]) = x^[" + std::to_string(i - 1) + "]"};
            }
        }
    }
    return {};
}

std::optional<RingElement> unit_preimage(const Derivation& d, std::uint64_t e) {
    if (e < 1) throw Error(ErrorKind::BadInput, "unit_preimage needs e >= 1");
    const Ring& ring = d.ring();
    const FqMatrix power = der_power(d, e);
    const Eigen::Index dim = power.cols();
    const FqMatrix ideal_cols = power.rightCols(dim - 1);
    const auto sol = try_solve(ideal_cols, ring.one().coeffs());
    if (!sol) return std::nullopt;
    FqVector y(dim);
    y(0) = ring.field().zero();
    y.tail(dim - 1) = sol->particular;
    return ring.from_coeffs(std::move(y));
}

IterativeDescent construct_descent(const Derivation& d, const std::vector<RingElement>& witnesses) {
    const Ring& ring = d.ring();
    const std::uint32_t p = ring.p();
    const GaloisField& f = ring.field();
    const auto s = static_cast<std::uint32_t>(witnesses.size());
    if (s == 0) throw Error(ErrorKind::BadInput, "construct_descent needs at least one witness");
    PowerCache powers(d);
    for (std::uint32_t k = 0; k < s; ++k) {
        check_same_ring(ring, witnesses[k].ring());
        if (!witnesses[k].pow(p).is_zero()) throw BadWitnessError(k, "y^p != 0");
        if (apply(powers.get(ipow(p, k)), witnesses[k]) != ring.one()) {
            throw BadWitnessError(k, "d^(p^" + std::to_string(k) + ")(y) != 1");
        }
    }
    std::vector<RingElement> pillars{witnesses[0]};
    for (std::uint32_t k = 0; k + 1 < s; ++k) {
        const std::uint64_t pk = ipow(p, k);
        const RingElement& xk = pillars[k];
        const FqMatrix& step = powers.get(pk);
        // phi_k(z) = sum_{j<p} (-1)^j x_k^j / j! d^(p^k j)(z)
        RingElement phi = ring.zero();
        RingElement dz = witnesses[k + 1];
        RingElement xpow = ring.one();
        for (std::uint32_t j = 0; j < p; ++j) {
            phi += (sign(f, j) * f.from_int(factorial_unit(j, p).inverse)) * xpow * dz;
            dz = apply(step, dz);
            xpow *= xk;
        }
        const RingElement lower = sequence_from_pillars(ring, pillars)[pk - 1];
        pillars.push_back(sign(f, p - 1) * apply(powers.get(pk - 1), lower * phi));
    }
    IterativeDescent out = sequence_from_pillars(ring, pillars);
    if (auto v = verify_iterative_descent(out, d); !v) {
        throw Error(ErrorKind::Internal, "constructed descent fails: " + v.failure);
    }
    return out;
}

bool is_descent(const Derivation& d, const std::vector<RingElement>& seq) {
    if (seq.empty() || seq[0] != d.ring().one()) return false;
    for (std::size_t i = 1; i < seq.size(); ++i)
        if (d.apply(seq[i]) != seq[i - 1]) return false;
    return true;
}

NilFiltration nil_filtration(const Derivation& d, const IterativeDescent& descent) {
    const Ring& ring = d.ring();
    if (descent.ring != &ring || !is_descent(d, descent.elements)) {
        throw Error(ErrorKind::BadInput, "nil_filtration needs a descent for this derivation");
    }
    const auto kernel = columns_as_elements(ring, nullspace(d.matrix()));
    NilFiltration out;
    FqMatrix power = d.matrix();
    std::vector<RingElement> spanning;
    for (std::size_t i = 0; i < descent.size(); ++i) {
        const FqMatrix level = nullspace(power);
        for (const auto& k : kernel) spanning.push_back(k * descent[i]);
        if (!same_column_space(level, elements_as_columns(ring, spanning))) {
            throw Error(ErrorKind::Internal, "N_" + std::to_string(i) + ": ker d^(i+1) differs from the descent span");
        }
        out.fp_dimension.push_back(static_cast<std::size_t>(level.cols()) * ring.m());
        out.levels.push_back(level);
        power = d.matrix() * power;
    }
    return out;
}

std::vector<RingElement> descent_coordinates(const Derivation& d, const std::vector<RingElement>& seq,
                                             const RingElement& a, std::size_t top) {
    if (top >= seq.size()) throw Error(ErrorKind::OutOfRange, "descent_coordinates: top index out of range");
    std::vector<RingElement> c(top + 1, d.ring().zero());
    RingElement u = a;
    for (std::size_t i = top + 1; i-- > 0;) {
        c[i] = apply_times(d, u, i);
        if (!d.apply(c[i]).is_zero()) {
            throw Error(ErrorKind::BadInput, "element is not in N_" + std::to_string(top) + " of the filtration");
        }
        u -= c[i] * seq[i];
    }
    return c;
}

std::vector<RingElement> normalize_descent(const Derivation& d, const std::vector<RingElement>& y) {
    const Ring& ring = d.ring();
    if (y.empty()) throw Error(ErrorKind::BadInput, "normalize_descent needs y^[0]");
    for (std::size_t i = 0; i < y.size(); ++i) {
        check_same_ring(ring, y[i].ring());
        if (apply_times(d, y[i], i) != ring.one()) throw BadWitnessError(i, "d^i(y^[i]) != 1");
    }
    const std::size_t m = y.size() - 1;
    std::vector<RingElement> z(m + 1, ring.zero());
    z[m] = y[m];
    for (std::size_t i = m; i-- > 0;) z[i] = d.apply(z[i + 1]);
    std::vector<RingElement> constant(m + 1, ring.zero());
    for (std::size_t i = 0; i <= m; ++i) constant[i] = descent_coordinates(d, y, z[i], i)[0];
    std::vector<RingElement> lambda(m + 1, ring.zero());
    for (std::size_t i = 1; i <= m; ++i) {
        RingElement acc = -constant[i];
        for (std::size_t j = 1; j < i; ++j) acc -= lambda[j] * constant[i - j];
        lambda[i] = acc;
    }
    std::vector<RingElement> x(m + 1, ring.zero());
    for (std::size_t i = 0; i <= m; ++i) {
        x[i] = z[i];
        for (std::size_t j = 1; j <= i; ++j) x[i] += lambda[j] * z[i - j];
    }
    if (!is_descent(d, x)) throw Error(ErrorKind::Internal, "normalized sequence is not a descent");
    for (std::size_t i = 1; i <= m; ++i) {
        if (!descent_coordinates(d, y, x[i], i)[0].is_zero()) {
            throw Error(ErrorKind::Internal, "normalized x^[" + std::to_string(i) + "] keeps a y^[0] component");
        }
    }
    return x;
}

std::vector<RingElement> translate_descent(const Derivation& d, const std::vector<RingElement>& seq,
                                           const std::vector<RingElement>& lambdas) {
    for (std::size_t j = 0; j < lambdas.size(); ++j) {
        if (!d.apply(lambdas[j]).is_zero()) {
            throw Error(ErrorKind::BadInput, "lambda_" + std::to_string(j + 1) + " is not in ker d");
        }
    }
    std::vector<RingElement> out = seq;
    for (std::size_t i = 1; i < seq.size(); ++i) {
        for (std::size_t j = 1; j <= i && j <= lambdas.size(); ++j) out[i] += lambdas[j - 1] * seq[i - j];
    }
    if (is_descent(d, seq) && !is_descent(d, out)) throw Error(ErrorKind::Internal, "translate is not a descent");
    return out;
}

LambdaTuple r_map(const Derivation& d, const IterativeDescent& reference, const IterativeDescent& other) {
    if (reference.exponent != other.exponent) throw Error(ErrorKind::BadInput, "r_map: descent exponents differ");
    if (auto v = verify_iterative_descent(reference, d); !v) {
        throw Error(ErrorKind::BadInput, "r_map: reference is not an iterative descent: " + v.failure);
    }
    if (auto v = verify_iterative_descent(other, d); !v) {
        throw Error(ErrorKind::BadInput, "r_map: other is not an iterative descent: " + v.failure);
    }
    LambdaTuple out;
    for (std::uint32_t j = 0; j < other.exponent; ++j) {
        out.push_back(descent_coordinates(d, reference.elements, other.pillar(j), ipow(d.ring().p(), j))[0]);
    }
    return out;
}

IterativeDescent descent_from_lambda(const Derivation& d, const IterativeDescent& reference, const LambdaTuple& lambda) {
    const Ring& ring = d.ring();
    const std::uint32_t p = ring.p();
    if (lambda.size() != reference.exponent) throw Error(ErrorKind::BadInput, "lambda tuple has the wrong length");
    for (std::size_t j = 0; j < lambda.size(); ++j) {
        if (!d.apply(lambda[j]).is_zero()) throw Error(ErrorKind::BadInput, "lambda_" + std::to_string(j) + " is not in ker d");
        if (!lambda[j].pow(p).is_zero()) throw Error(ErrorKind::BadInput, "lambda_" + std::to_string(j) + "^p != 0");
    }
    std::vector<RingElement> pillars;
    for (std::uint32_t k = 0; k < lambda.size(); ++k) {
        const std::uint64_t pk = ipow(p, k);
        const RingElement target = k == 0 ? ring.one() : sequence_from_pillars(ring, pillars)[pk - 1];
        const auto sol = try_solve(d.matrix(), target.coeffs());
        if (!sol) throw Error(ErrorKind::Internal, "no solution of d(z) = x^[p^k - 1]");
        RingElement z = ring.from_coeffs(sol->particular);
        z += lambda[k] - descent_coordinates(d, reference.elements, z, pk)[0];
        pillars.push_back(z);
    }
    IterativeDescent out = sequence_from_pillars(ring, pillars);
    if (auto v = verify_iterative_descent(out, d); !v) {
        throw Error(ErrorKind::Internal, "descent from lambda fails: " + v.failure);
    }
    return out;
}

std::uint64_t oracle_cap() {
    constexpr std::uint64_t kDefault = std::uint64_t{1} << 20;
    constexpr std::uint64_t kFloor = std::uint64_t{1} << 10;
    const char* env = std::getenv("NILDERIV_MAX_ORACLE");
    if (env == nullptr || *env == '\0') return kDefault;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') return kDefault;
    return v < kFloor ? kFloor : v;
}

std::vector<IterativeDescent> enumerate_descents(const Derivation& d, std::uint32_t s) {
    const Ring& ring = d.ring();
    const std::uint32_t p = ring.p();
    const std::uint64_t cap = oracle_cap();
    const auto kernel = columns_as_elements(ring, nullspace(d.matrix()));
    const std::uint64_t per_branch = ipow(ring.field().order(), static_cast<std::uint32_t>(kernel.size()));
    std::uint64_t used = 0;
    std::vector<std::vector<RingElement>> partial{{}};
    for (std::uint32_t k = 0; k < s; ++k) {
        std::vector<std::vector<RingElement>> next;
        for (const auto& pillars : partial) {
            const RingElement target = k == 0 ? ring.one() : sequence_from_pillars(ring, pillars)[ipow(p, k) - 1];
            const auto sol = try_solve(d.matrix(), target.coeffs());
            if (!sol) continue;
            charge(used, per_branch, cap, "descent enumeration");
            const RingElement base = ring.from_coeffs(sol->particular);
            for_each_combination(ring, kernel, [&](const RingElement& shift) {
                const RingElement z = base + shift;
                if (!z.pow(p).is_zero()) return;
                auto extended = pillars;
                extended.push_back(z);
                next.push_back(std::move(extended));
            });
        }
        partial = std::move(next);
    }
    std::vector<IterativeDescent> out;
    for (const auto& pillars : partial) out.push_back(sequence_from_pillars(ring, pillars));
    return out;
}

std::vector<LambdaTuple> enumerate_C(const Derivation& d, std::uint32_t s) {
    const Ring& ring = d.ring();
    const std::uint64_t cap = oracle_cap();
    const auto kernel = columns_as_elements(ring, nullspace(d.matrix()));
    std::uint64_t used = 0;
    charge(used, ipow(ring.field().order(), static_cast<std::uint32_t>(kernel.size())), cap, "C enumeration");
    std::vector<RingElement> nil;
    for_each_combination(ring, kernel, [&](const RingElement& z) {
        if (z.pow(ring.p()).is_zero()) nil.push_back(z);
    });
    std::uint64_t total = 1;
    for (std::uint32_t k = 0; k < s; ++k) {
        if (total > cap / nil.size()) throw Error(ErrorKind::TooLarge, "C enumeration exceeds the oracle cap");
        total *= nil.size();
    }
    charge(used, total, cap, "C enumeration");
    std::vector<LambdaTuple> out;
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        LambdaTuple t(s, ring.zero());
        std::uint64_t rest = idx;
        for (std::uint32_t k = s; k-- > 0;) {
            t[k] = nil[rest % nil.size()];
            rest /= nil.size();
        }
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace nilderiv
