#include "nilderiv/truncated_algebra.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <tuple>

#include "nilderiv/padic.hpp"

namespace nilderiv {

const Ring& Ring::get(const RingSpec& spec) {
    static std::mutex mutex;
    static std::map<std::tuple<std::uint32_t, std::uint32_t, std::vector<std::uint32_t>, std::uint32_t>,
                    std::unique_ptr<Ring>>
        registry;
    // Validate (and normalize the default irr) before taking the lock.
    const GaloisField& field = GaloisField::get(spec.field);
    RingSpec normalized{field.spec(), spec.n};
    std::lock_guard lock(mutex);
    auto key = std::make_tuple(normalized.field.p, normalized.field.m, normalized.field.irr, normalized.n);
    auto it = registry.find(key);
    if (it != registry.end()) return *it->second;
    std::unique_ptr<Ring> ring(new Ring(std::move(normalized)));
    const Ring& ref = *ring;
    registry.emplace(std::move(key), std::move(ring));
    return ref;
}

const Ring& Ring::make(std::uint32_t p, std::uint32_t m, std::uint32_t n) {
    return get(RingSpec{make_field_spec(p, m), n});
}

Ring::Ring(RingSpec spec) : spec_(std::move(spec)), field_(&GaloisField::get(spec_.field)) {
    if (spec_.n < 1) throw Error(ErrorKind::BadInput, "a truncated algebra needs at least one generator");
    const std::uint32_t p = spec_.field.p;
    std::size_t dim = 1;
    radix_.push_back(1);
    for (std::uint32_t k = 0; k < spec_.n; ++k) {
        dim *= p;
        if (dim > kMaxRingDimension) {
            throw Error(ErrorKind::TooLarge, "p^n exceeds the desk-scale cap 2^14 (p = " + std::to_string(p) +
                                                 ", n = " + std::to_string(spec_.n) + ")");
        }
        radix_.push_back(dim);
    }
    dim_ = dim;
    exponents_.resize(dim_);
    degree_.resize(dim_);
    for (std::size_t s = 0; s < dim_; ++s) {
        MultiIndex alpha(spec_.n);
        std::size_t v = s;
        std::uint32_t deg = 0;
        for (auto& a : alpha) {
            a = static_cast<std::uint32_t>(v % p);
            v /= p;
            deg += a;
        }
        exponents_[s] = std::move(alpha);
        degree_[s] = deg;
    }
}

std::size_t Ring::slot(const MultiIndex& alpha) const {
    if (alpha.size() != spec_.n) throw Error(ErrorKind::BadInput, "multi-index has the wrong length");
    std::size_t s = 0;
    for (std::uint32_t k = 0; k < spec_.n; ++k) {
        if (alpha[k] >= p()) throw Error(ErrorKind::BadInput, "multi-index entry must be below p");
        s += alpha[k] * radix_[k];
    }
    return s;
}

std::int64_t Ring::product_slot(std::size_t a, std::size_t b) const {
    const MultiIndex& ea = exponents_[a];
    const MultiIndex& eb = exponents_[b];
    for (std::uint32_t k = 0; k < spec_.n; ++k) {
        if (ea[k] + eb[k] >= p()) return -1;
    }
    return static_cast<std::int64_t>(a + b);
}

RingElement Ring::zero() const { return RingElement(*this, FqVector::Constant(dim_, field_->zero())); }

RingElement Ring::one() const { return scalar(field_->one()); }

RingElement Ring::scalar(const Fq& c) const {
    FqVector v = FqVector::Constant(dim_, field_->zero());
    v(0) = c.bind(*field_);
    return RingElement(*this, std::move(v));
}

RingElement Ring::generator(std::uint32_t i) const {
    if (i >= spec_.n) throw Error(ErrorKind::OutOfRange, "generator index out of range");
    return monomial(radix_[i]);
}

RingElement Ring::monomial(std::size_t s) const {
    if (s >= dim_) throw Error(ErrorKind::OutOfRange, "basis slot out of range");
    FqVector v = FqVector::Constant(dim_, field_->zero());
    v(static_cast<Eigen::Index>(s)) = field_->one();
    return RingElement(*this, std::move(v));
}

RingElement Ring::monomial(const MultiIndex& alpha) const { return monomial(slot(alpha)); }

RingElement Ring::divided_monomial(std::size_t i) const {
    if (i >= dim_) throw Error(ErrorKind::OutOfRange, "divided monomial index out of range");
    Fq c = field_->one();
    for (auto digit : exponents_[i]) c *= field_->from_int(factorial_unit(digit, p()).inverse);
    FqVector v = FqVector::Constant(dim_, field_->zero());
    v(static_cast<Eigen::Index>(i)) = c;
    return RingElement(*this, std::move(v));
}

RingElement Ring::from_coeffs(FqVector coeffs) const { return RingElement(*this, std::move(coeffs)); }

// ---------------------------------------------------------------------------

void check_same_ring(const Ring& a, const Ring& b) {
    if (&a != &b) throw Error(ErrorKind::RingMismatch, "operands belong to different rings");
}

RingElement::RingElement(const Ring& ring, FqVector coeffs) : ring_(&ring), coeffs_(std::move(coeffs)) {
    if (static_cast<std::size_t>(coeffs_.size()) != ring.dimension()) {
        throw Error(ErrorKind::BadInput, "ring element needs exactly p^n coefficients");
    }
    const GaloisField& f = ring.field();
    for (Eigen::Index i = 0; i < coeffs_.size(); ++i) coeffs_(i) = coeffs_(i).bind(f);
}

bool RingElement::is_zero() const {
    for (Eigen::Index i = 0; i < coeffs_.size(); ++i)
        if (!coeffs_(i).is_zero()) return false;
    return true;
}

int RingElement::degree() const {
    int deg = -1;
    for (std::size_t s = 0; s < ring_->dimension(); ++s) {
        if (!coeff(s).is_zero()) deg = std::max(deg, static_cast<int>(ring_->degree(s)));
    }
    return deg;
}

RingElement RingElement::pow(std::uint64_t e) const {
    RingElement acc = ring_->one();
    RingElement base = *this;
    while (e) {
        if (e & 1) acc *= base;
        e >>= 1;
        if (e) base *= base;
    }
    return acc;
}

RingElement RingElement::inverse() const {
    if (!is_unit()) throw Error(ErrorKind::NotAUnit, "element lies in the maximal ideal");
    // u = c(1 - w) with w nilpotent; the geometric series stops once w^t = 0.
    const Fq c_inv = constant_term().inverse();
    const RingElement w = ring_->one() - c_inv * *this;
    const std::uint32_t terms = ring_->n() * (ring_->p() - 1) + 1;
    RingElement sum = ring_->one();
    RingElement power = ring_->one();
    for (std::uint32_t t = 1; t < terms; ++t) {
        power *= w;
        sum += power;
    }
    return c_inv * sum;
}

RingElement RingElement::operator-() const { return RingElement(*ring_, -coeffs_); }

RingElement& RingElement::operator+=(const RingElement& o) {
    check_same_ring(*ring_, *o.ring_);
    coeffs_ += o.coeffs_;
    return *this;
}

RingElement& RingElement::operator-=(const RingElement& o) {
    check_same_ring(*ring_, *o.ring_);
    coeffs_ -= o.coeffs_;
    return *this;
}

RingElement operator*(const RingElement& a, const RingElement& b) {
    check_same_ring(*a.ring_, *b.ring_);
    const Ring& ring = *a.ring_;
    const std::size_t dim = ring.dimension();
    FqVector out = FqVector::Constant(dim, ring.field().zero());
    for (std::size_t i = 0; i < dim; ++i) {
        const Fq& ai = a.coeff(i);
        if (ai.is_zero()) continue;
        for (std::size_t j = 0; j < dim; ++j) {
            const Fq& bj = b.coeff(j);
            if (bj.is_zero()) continue;
            const auto s = ring.product_slot(i, j);
            if (s >= 0) out(s) += ai * bj;
        }
    }
    return RingElement(ring, std::move(out));
}

RingElement operator*(const Fq& c, const RingElement& a) {
    const Fq cb = c.bind(a.ring().field());
    return RingElement(*a.ring_, a.coeffs_ * cb);
}

bool operator==(const RingElement& a, const RingElement& b) { return a.ring_ == b.ring_ && a.coeffs_ == b.coeffs_; }

std::ostream& operator<<(std::ostream& os, const RingElement& a) {
    bool first = true;
    const Ring& ring = a.ring();
    for (std::size_t s = 0; s < ring.dimension(); ++s) {
        const Fq& c = a.coeff(s);
        if (c.is_zero()) continue;
        if (!first) os << " + ";
        first = false;
        const bool bare = s != 0 && c.is_one();
        if (!bare) os << c;
        bool wrote = !bare;
        const MultiIndex& alpha = ring.exponents(s);
        for (std::uint32_t k = 0; k < ring.n(); ++k) {
            if (alpha[k] == 0) continue;
            if (wrote) os << '*';
            os << 'x' << k;
            if (alpha[k] > 1) os << '^' << alpha[k];
            wrote = true;
        }
    }
    if (first) os << '0';
    return os;
}

RingElement partial_derivative(std::uint32_t i, const RingElement& a) {
    const Ring& ring = a.ring();
    if (i >= ring.n()) throw Error(ErrorKind::OutOfRange, "partial derivative index out of range");
    const std::size_t step = ring.generator_slot(i);
    const GaloisField& f = ring.field();
    FqVector out = FqVector::Constant(ring.dimension(), f.zero());
    for (std::size_t s = 0; s < ring.dimension(); ++s) {
        const std::uint32_t e = ring.exponents(s)[i];
        if (e == 0 || a.coeff(s).is_zero()) continue;
        out(static_cast<Eigen::Index>(s - step)) += f.from_int(e) * a.coeff(s);
    }
    return RingElement(ring, std::move(out));
}

std::vector<std::pair<MultiIndex, Fq>> nonzero_terms(const RingElement& a) {
    std::vector<std::pair<MultiIndex, Fq>> out;
    for (std::size_t s = 0; s < a.ring().dimension(); ++s) {
        if (!a.coeff(s).is_zero()) out.emplace_back(a.ring().exponents(s), a.coeff(s));
    }
    std::sort(out.begin(), out.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
    return out;
}

FqMatrix multiplication_matrix(const RingElement& a) {
    const Ring& ring = a.ring();
    const auto dim = static_cast<Eigen::Index>(ring.dimension());
    FqMatrix m = FqMatrix::Constant(dim, dim, ring.field().zero());
    for (Eigen::Index j = 0; j < dim; ++j) m.col(j) = (a * ring.monomial(static_cast<std::size_t>(j))).coeffs();
    return m;
}

}  // namespace nilderiv
