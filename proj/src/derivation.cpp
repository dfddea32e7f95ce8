#include "nilderiv/derivation.hpp"

#include <mutex>

#include "nilderiv/padic.hpp"

namespace nilderiv {

struct Derivation::Cache {
    std::once_flag once;
    FqMatrix matrix;
};

Derivation::Derivation(const Ring& ring, std::vector<RingElement> images)
    : ring_(&ring), images_(std::move(images)), cache_(std::make_shared<Cache>()) {
    if (images_.size() != ring.n()) throw Error(ErrorKind::BadInput, "a derivation needs one image per generator");
    for (const auto& im : images_) check_same_ring(ring, im.ring());
}

Derivation Derivation::zero(const Ring& ring) { return Derivation(ring, std::vector<RingElement>(ring.n(), ring.zero())); }

Derivation Derivation::partial(const Ring& ring, std::uint32_t i) {
    if (i >= ring.n()) throw Error(ErrorKind::OutOfRange, "partial derivative index out of range");
    std::vector<RingElement> images(ring.n(), ring.zero());
    images[i] = ring.one();
    return Derivation(ring, std::move(images));
}

Derivation Derivation::from_matrix(const Ring& ring, const FqMatrix& m) {
    const auto dim = static_cast<Eigen::Index>(ring.dimension());
    if (m.rows() != dim || m.cols() != dim) throw Error(ErrorKind::BadInput, "operator has the wrong size");
    std::vector<RingElement> images;
    for (std::uint32_t i = 0; i < ring.n(); ++i) {
        images.push_back(ring.from_coeffs(m.col(static_cast<Eigen::Index>(ring.generator_slot(i)))));
    }
    Derivation d(ring, std::move(images));
    if (!(d.matrix() == bind(m, ring.field()))) throw Error(ErrorKind::BadInput, "operator is not a derivation");
    return d;
}

RingElement Derivation::apply(const RingElement& a) const {
    check_same_ring(*ring_, a.ring());
    RingElement out = ring_->zero();
    for (std::uint32_t v = 0; v < ring_->n(); ++v) {
        if (images_[v].is_zero()) continue;
        out += partial_derivative(v, a) * images_[v];
    }
    return out;
}

const FqMatrix& Derivation::matrix() const {
    std::call_once(cache_->once, [this] {
        const Ring& r = *ring_;
        const auto dim = static_cast<Eigen::Index>(r.dimension());
        const GaloisField& f = r.field();
        FqMatrix m = FqMatrix::Constant(dim, dim, f.zero());
        for (Eigen::Index s = 0; s < dim; ++s) {
            const MultiIndex& alpha = r.exponents(static_cast<std::size_t>(s));
            for (std::uint32_t v = 0; v < r.n(); ++v) {
                if (alpha[v] == 0) continue;
                const auto lower = static_cast<std::size_t>(s) - r.generator_slot(v);
                m.col(s) += f.from_int(alpha[v]) * monomial_times(r, lower, images_[v].coeffs());
            }
        }
        cache_->matrix = std::move(m);
    });
    return cache_->matrix;
}

Derivation Derivation::operator+(const Derivation& o) const {
    check_same_ring(*ring_, *o.ring_);
    std::vector<RingElement> out;
    for (std::uint32_t i = 0; i < ring_->n(); ++i) out.push_back(images_[i] + o.images_[i]);
    return Derivation(*ring_, std::move(out));
}

Derivation Derivation::operator-(const Derivation& o) const { return *this + (-o); }

Derivation Derivation::operator-() const {
    std::vector<RingElement> out;
    for (const auto& im : images_) out.push_back(-im);
    return Derivation(*ring_, std::move(out));
}

Derivation operator*(const RingElement& r, const Derivation& d) {
    check_same_ring(r.ring(), *d.ring_);
    std::vector<RingElement> out;
    for (const auto& im : d.images_) out.push_back(r * im);
    return Derivation(*d.ring_, std::move(out));
}

Derivation operator*(const Fq& c, const Derivation& d) { return d.ring_->scalar(c) * d; }

bool operator==(const Derivation& a, const Derivation& b) { return a.ring_ == b.ring_ && a.images_ == b.images_; }

Derivation canonical_derivation(const Ring& ring) {
    std::vector<RingElement> images;
    std::size_t pk = 1;
    for (std::uint32_t i = 0; i < ring.n(); ++i) {
        images.push_back(ring.divided_monomial(pk - 1));
        pk *= ring.p();
    }
    return Derivation(ring, std::move(images));
}

RingElement apply(const FqMatrix& op, const RingElement& a) { return a.ring().from_coeffs(op * a.coeffs()); }

FqVector monomial_times(const Ring& ring, std::size_t slot, const FqVector& v) {
    FqVector out = FqVector::Constant(v.size(), ring.field().zero());
    for (std::size_t t = 0; t < ring.dimension(); ++t) {
        const auto s = ring.product_slot(slot, t);
        if (s >= 0) out(s) = v(static_cast<Eigen::Index>(t));
    }
    return out;
}

bool satisfies_leibniz(const Ring& ring, const FqMatrix& op) {
    const std::size_t dim = ring.dimension();
    for (std::size_t a = 0; a < dim; ++a) {
        for (std::size_t b = a; b < dim; ++b) {
            const auto ab = ring.product_slot(a, b);
            FqVector lhs = FqVector::Constant(static_cast<Eigen::Index>(dim), ring.field().zero());
            if (ab >= 0) lhs = op.col(ab);
            const FqVector rhs = monomial_times(ring, b, op.col(static_cast<Eigen::Index>(a))) +
                                 monomial_times(ring, a, op.col(static_cast<Eigen::Index>(b)));
            if (!(bind(lhs, ring.field()) == bind(rhs, ring.field()))) return false;
        }
    }
    return true;
}

FqMatrix der_power(const Derivation& d, std::uint64_t e) { return bind(matrix_power(d.matrix(), e), d.ring().field()); }

std::optional<std::uint64_t> nilpotency_index(const Derivation& d) {
    const std::uint64_t dim = d.ring().dimension();
    if (!is_zero(matrix_power(d.matrix(), dim))) return std::nullopt;
    FqMatrix power = d.matrix();
    std::uint64_t e = 1;
    while (!is_zero(power)) {
        power = d.matrix() * power;
        ++e;
    }
    return e;
}

Derivation p_power_derivation(const Derivation& d, std::uint32_t i) {
    std::uint64_t e = 1;
    for (std::uint32_t k = 0; k < i; ++k) {
        if (e > (std::uint64_t{1} << 56)) throw Error(ErrorKind::OutOfRange, "p-power exponent too large");
        e *= d.ring().p();
    }
    std::vector<RingElement> images;
    const FqMatrix m = der_power(d, e);
    for (std::uint32_t j = 0; j < d.ring().n(); ++j) images.push_back(apply(m, d.ring().generator(j)));
    return Derivation(d.ring(), std::move(images));
}

namespace {

void check_coordinate(const Derivation& d, const RingElement& x) {
    check_same_ring(d.ring(), x.ring());
    if (d.apply(x) != d.ring().one()) throw Error(ErrorKind::BadInput, "precondition failed: d(x) != 1");
    if (!x.pow(d.ring().p()).is_zero()) throw Error(ErrorKind::BadInput, "precondition failed: x^p != 0");
}

FqMatrix identity(const Ring& ring) {
    const auto dim = static_cast<Eigen::Index>(ring.dimension());
    return bind(FqMatrix::Identity(dim, dim), ring.field());
}

}  // namespace

Derivation kill_p_power(const Derivation& d, const RingElement& x) {
    check_coordinate(d, x);
    const Ring& ring = d.ring();
    const std::uint32_t p = ring.p();
    const Fq sign = (p - 1) % 2 == 0 ? ring.field().one() : -ring.field().one();
    const RingElement c = sign * ring.field().from_int(factorial_unit(p - 1, p).inverse) * x.pow(p - 1);
    return d - c * p_power_derivation(d, 1);
}

ThetaSystem theta_system(const Derivation& d, const RingElement& x) {
    check_coordinate(d, x);
    const Ring& ring = d.ring();
    const std::uint32_t p = ring.p();
    const GaloisField& f = ring.field();
    ThetaSystem sys;
    sys.multiplier = multiplication_matrix(x);
    sys.derivation = d.matrix();
    sys.h = bind(sys.multiplier * sys.derivation, f);
    const FqMatrix id = identity(ring);
    for (std::uint32_t i = 0; i < p; ++i) {
        FqMatrix num = id;
        Fq den = f.one();
        for (std::uint32_t j = 0; j < p; ++j) {
            if (j == i) continue;
            num = num * (sys.h - f.from_int(j) * id);
            den *= f.from_int(static_cast<std::int64_t>(i) - j);
        }
        sys.theta.push_back(bind(num * den.inverse(), f));
    }
    const auto failures = theta_identity_failures(sys, d, x);
    if (!failures.empty()) throw Error(ErrorKind::Internal, "theta system identity failed: " + failures.front());
    return sys;
}

std::vector<std::string> theta_identity_failures(const ThetaSystem& sys, const Derivation& d, const RingElement& x) {
    const Ring& ring = d.ring();
    const std::uint32_t p = ring.p();
    const GaloisField& f = ring.field();
    const FqMatrix id = identity(ring);
    const FqMatrix zero = bind(FqMatrix::Zero(id.rows(), id.cols()), f);
    std::vector<std::string> out;
    FqMatrix sum = zero;
    for (std::uint32_t i = 0; i < p; ++i) {
        sum += sys.theta[i];
        for (std::uint32_t j = 0; j < p; ++j) {
            const FqMatrix prod = bind(sys.theta[i] * sys.theta[j], f);
            if (!(prod == (i == j ? sys.theta[i] : zero))) {
                out.push_back("theta_" + std::to_string(i) + " theta_" + std::to_string(j));
            }
        }
    }
    if (!(bind(sum, f) == id)) out.push_back("sum of theta_i = 1");
    FqMatrix falling = id;
    FqMatrix complements = id;
    for (std::uint32_t j = 0; j < p; ++j) {
        falling = falling * (sys.h - f.from_int(j) * id);
        complements = complements * (id - sys.theta[j]);
    }
    if (!is_zero(bind(falling, f))) out.push_back("h(h-1)...(h-p+1) = 0");
    if (!is_zero(bind(complements, f))) out.push_back("prod (1 - theta_i) = 0");
    for (std::uint32_t i = 0; i < p; ++i) {
        const FqMatrix di = (id - sys.theta[i]) * sys.derivation;
        if (!is_zero(bind(matrix_power(di, p), f))) out.push_back("((1 - theta_" + std::to_string(i) + ") d)^p = 0");
        const std::uint32_t up = (i + 1) % p, down = (i + p - 1) % p;
        if (!(bind(sys.multiplier * sys.theta[i], f) == bind(sys.theta[up] * sys.multiplier, f))) {
            out.push_back("x theta_" + std::to_string(i) + " = theta_" + std::to_string(up) + " x");
        }
        if (!(bind(sys.derivation * sys.theta[i], f) == bind(sys.theta[down] * sys.derivation, f))) {
            out.push_back("d theta_" + std::to_string(i) + " = theta_" + std::to_string(down) + " d");
        }
    }
    const FqMatrix corrected = bind((id - sys.theta[p - 1]) * sys.derivation, f);
    if (!(corrected == kill_p_power(d, x).matrix())) out.push_back("(1 - theta_{p-1}) d = corrected derivation");
    return out;
}

FqMatrix taylor_projection(const Derivation& d, const RingElement& x) {
    check_coordinate(d, x);
    const Ring& ring = d.ring();
    const std::uint32_t p = ring.p();
    const GaloisField& f = ring.field();
    if (!is_zero(der_power(d, p))) throw Error(ErrorKind::BadInput, "precondition failed: d^p != 0");
    FqMatrix phi = bind(FqMatrix::Zero(ring.dimension(), ring.dimension()), f);
    FqMatrix dpow = identity(ring);
    for (std::uint32_t i = 0; i < p; ++i) {
        const Fq c = f.from_int(i % 2 == 0 ? 1 : -1) * f.from_int(factorial_unit(i, p).inverse);
        phi += c * (multiplication_matrix(x.pow(i)) * dpow);
        dpow = d.matrix() * dpow;
    }
    return bind(phi, f);
}

std::vector<RingElement> taylor_coefficients(const Derivation& d, const RingElement& x, const RingElement& a) {
    const FqMatrix phi = taylor_projection(d, x);
    const std::uint32_t p = d.ring().p();
    std::vector<RingElement> out;
    RingElement da = a;
    for (std::uint32_t i = 0; i < p; ++i) {
        out.push_back(apply(phi, d.ring().field().from_int(factorial_unit(i, p).inverse) * da));
        da = d.apply(da);
    }
    return out;
}

std::vector<RingElement> columns_as_elements(const Ring& ring, const FqMatrix& m) {
    std::vector<RingElement> out;
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(ring.from_coeffs(m.col(j)));
    return out;
}

FqMatrix elements_as_columns(const Ring& ring, const std::vector<RingElement>& elems) {
    FqMatrix m(static_cast<Eigen::Index>(ring.dimension()), static_cast<Eigen::Index>(elems.size()));
    for (std::size_t j = 0; j < elems.size(); ++j) {
        check_same_ring(ring, elems[j].ring());
        m.col(static_cast<Eigen::Index>(j)) = elems[j].coeffs();
    }
    return m;
}

KernelBasis kernel_basis(const Derivation& d) {
    const Ring& ring = d.ring();
    KernelBasis out;
    out.over_fq = columns_as_elements(ring, nullspace(d.matrix()));
    Fq w_power = ring.field().one();
    std::vector<Fq> powers;
    for (std::uint32_t t = 0; t < ring.m(); ++t) {
        powers.push_back(w_power);
        w_power *= ring.field().generator();
    }
    for (const auto& b : out.over_fq)
        for (const auto& w : powers) out.over_fp.push_back(w * b);
    return out;
}

FqVector fp_coordinates(const RingElement& a) {
    const Ring& ring = a.ring();
    const std::uint32_t m = ring.m();
    const GaloisField& fp = ring.field().prime_field();
    FqVector v(static_cast<Eigen::Index>(ring.dimension() * m));
    for (std::size_t s = 0; s < ring.dimension(); ++s) {
        const auto digits = a.coeff(s).digits();
        for (std::uint32_t k = 0; k < m; ++k) v(static_cast<Eigen::Index>(s * m + k)) = fp.from_int(digits[k]);
    }
    return v;
}

RingElement from_fp_coordinates(const Ring& ring, const FqVector& v) {
    const std::uint32_t m = ring.m();
    if (static_cast<std::size_t>(v.size()) != ring.dimension() * m) {
        throw Error(ErrorKind::BadInput, "F_p coordinate vector has the wrong length");
    }
    FqVector coeffs(static_cast<Eigen::Index>(ring.dimension()));
    const GaloisField& fp = ring.field().prime_field();
    for (std::size_t s = 0; s < ring.dimension(); ++s) {
        std::vector<std::uint32_t> digits(m);
        for (std::uint32_t k = 0; k < m; ++k) digits[k] = v(static_cast<Eigen::Index>(s * m + k)).bind(fp).value();
        coeffs(static_cast<Eigen::Index>(s)) = ring.field().from_digits(digits);
    }
    return ring.from_coeffs(std::move(coeffs));
}

FqMatrix fp_matrix(const Ring& ring, const std::function<RingElement(const RingElement&)>& f) {
    const std::uint32_t m = ring.m();
    const auto size = static_cast<Eigen::Index>(ring.dimension() * m);
    FqMatrix out(size, size);
    Fq w_power = ring.field().one();
    for (std::uint32_t k = 0; k < m; ++k) {
        for (std::size_t s = 0; s < ring.dimension(); ++s) {
            out.col(static_cast<Eigen::Index>(s * m + k)) = fp_coordinates(f(w_power * ring.monomial(s)));
        }
        w_power *= ring.field().generator();
    }
    return out;
}

FqMatrix fp_view(const Ring& ring, const FqMatrix& op) {
    return fp_matrix(ring, [&](const RingElement& a) { return apply(op, a); });
}

std::vector<RingElement> frobenius_fixed_basis(const Ring& ring) {
    const std::uint64_t q = ring.field().order();
    const FqMatrix fix = fp_matrix(ring, [q](const RingElement& r) { return r.pow(q) - r; });
    std::vector<RingElement> out;
    const FqMatrix basis = nullspace(fix);
    for (Eigen::Index j = 0; j < basis.cols(); ++j) out.push_back(from_fp_coordinates(ring, basis.col(j)));
    return out;
}

}  // namespace nilderiv
