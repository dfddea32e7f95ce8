#include "nilderiv/galois_field.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <tuple>

namespace nilderiv {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::DivisionByZero: return "DivisionByZero";
        case ErrorKind::NoSolution: return "NoSolution";
        case ErrorKind::OutOfRange: return "OutOfRange";
        case ErrorKind::TooLarge: return "TooLarge";
        case ErrorKind::FieldMismatch: return "FieldMismatch";
        case ErrorKind::RingMismatch: return "RingMismatch";
        case ErrorKind::NotAUnit: return "NotAUnit";
        case ErrorKind::NotNilpotent: return "NotNilpotent";
        case ErrorKind::BadInput: return "BadInput";
        case ErrorKind::BadWitness: return "BadWitness";
        case ErrorKind::BadFrame: return "BadFrame";
        case ErrorKind::BadAutomorphism: return "BadAutomorphism";
        case ErrorKind::NotSimple: return "NotSimple";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::Internal: return "Internal";
    }
    return "Unknown";
}

namespace {

constexpr std::uint64_t kMaxOrder = std::uint64_t{1} << 31;
constexpr std::uint64_t kTabulateLimit = std::uint64_t{1} << 16;
constexpr std::uint32_t kMaxDegree = 8;

// Conway polynomials, constant term first.
const std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::uint32_t>>& default_table() {
    static const std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::uint32_t>> table = {
        {{2, 2}, {1, 1, 1}},       {{2, 3}, {1, 1, 0, 1}},    {{2, 4}, {1, 1, 0, 0, 1}},
        {{3, 2}, {2, 2, 1}},       {{3, 3}, {1, 2, 0, 1}},    {{3, 4}, {2, 0, 0, 2, 1}},
        {{5, 2}, {2, 4, 1}},       {{5, 3}, {3, 3, 0, 1}},    {{5, 4}, {2, 4, 4, 0, 1}},
        {{7, 2}, {3, 6, 1}},       {{7, 3}, {4, 0, 6, 1}},    {{7, 4}, {3, 4, 5, 0, 1}},
    };
    return table;
}

// Remainder of `num` modulo the monic `den`, both constant-first over F_p.
std::vector<std::uint64_t> poly_mod(std::vector<std::uint64_t> num, const std::vector<std::uint32_t>& den,
                                    std::uint32_t p) {
    const std::size_t d = den.size() - 1;
    for (std::size_t top = num.size(); top-- > d;) {
        const std::uint64_t c = num[top] % p;
        if (c == 0) continue;
        for (std::size_t k = 0; k <= d; ++k) {
            const std::size_t idx = top - d + k;
            num[idx] = (num[idx] + (p - c) * den[k]) % p;
        }
    }
    num.resize(std::min(num.size(), d));
    return num;
}

std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t f = 2; f * f <= n; ++f) {
        if (n % f == 0) {
            out.push_back(f);
            while (n % f == 0) n /= f;
        }
    }
    if (n > 1) out.push_back(n);
    return out;
}

}  // namespace

bool is_prime(std::uint64_t n) noexcept {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d) {
        if (n % d == 0) return false;
    }
    return true;
}

bool is_irreducible(const std::vector<std::uint32_t>& poly, std::uint32_t p) {
    if (poly.size() < 2) return false;
    const std::size_t deg = poly.size() - 1;
    std::vector<std::uint64_t> num(poly.begin(), poly.end());
    for (std::size_t d = 1; d <= deg / 2; ++d) {
        // every monic polynomial of degree d, lower coefficients as a base-p counter
        std::vector<std::uint32_t> factor(d + 1, 0);
        factor[d] = 1;
        while (true) {
            const auto rem = poly_mod(num, factor, p);
            bool zero = true;
            for (auto c : rem) zero = zero && (c % p == 0);
            if (zero) return false;
            std::size_t k = 0;
            while (k < d && ++factor[k] == p) factor[k++] = 0;
            if (k == d) break;
        }
    }
    return true;
}

FieldSpec make_field_spec(std::uint32_t p, std::uint32_t m, std::vector<std::uint32_t> irr) {
    if (!is_prime(p)) throw Error(ErrorKind::BadInput, "p = " + std::to_string(p) + " is not prime");
    if (m < 1 || m > kMaxDegree) {
        throw Error(ErrorKind::OutOfRange, "extension degree must lie in [1, 8], got " + std::to_string(m));
    }
    std::uint64_t q = 1;
    for (std::uint32_t k = 0; k < m; ++k) {
        q *= p;
        if (q >= kMaxOrder) throw Error(ErrorKind::TooLarge, "field order p^m must stay below 2^31");
    }
    if (irr.empty()) {
        if (m == 1) {
            irr = {0, 1};
        } else {
            auto it = default_table().find({p, m});
            if (it == default_table().end()) {
                throw Error(ErrorKind::BadInput, "no built-in irreducible polynomial for p = " + std::to_string(p) +
                                                     ", m = " + std::to_string(m) + "; supply irr");
            }
            irr = it->second;
        }
    }
    if (irr.size() != m + 1) {
        throw Error(ErrorKind::BadInput, "irr must have m + 1 = " + std::to_string(m + 1) + " coefficients");
    }
    for (auto c : irr) {
        if (c >= p) throw Error(ErrorKind::BadInput, "irr coefficient " + std::to_string(c) + " not reduced mod p");
    }
    if (irr.back() != 1) throw Error(ErrorKind::BadInput, "irr must be monic");
    if (!is_irreducible(irr, p)) throw Error(ErrorKind::BadInput, "irr is reducible over F_p");
    return FieldSpec{p, m, std::move(irr)};
}

const GaloisField& GaloisField::get(const FieldSpec& spec) {
    static std::mutex mutex;
    static std::map<std::tuple<std::uint32_t, std::uint32_t, std::vector<std::uint32_t>>,
                    std::unique_ptr<GaloisField>>
        registry;
    std::lock_guard lock(mutex);
    auto key = std::make_tuple(spec.p, spec.m, spec.irr);
    auto it = registry.find(key);
    if (it != registry.end()) return *it->second;
    FieldSpec checked = make_field_spec(spec.p, spec.m, spec.irr);
    std::unique_ptr<GaloisField> field(new GaloisField(std::move(checked)));
    const GaloisField& ref = *field;
    registry.emplace(std::move(key), std::move(field));
    return ref;
}

const GaloisField& GaloisField::prime(std::uint32_t p) { return get(FieldSpec{p, 1, {0, 1}}); }

GaloisField::GaloisField(FieldSpec spec) : spec_(std::move(spec)) {
    radix_.resize(spec_.m + 1);
    radix_[0] = 1;
    for (std::uint32_t k = 1; k <= spec_.m; ++k) radix_[k] = radix_[k - 1] * spec_.p;
    order_ = radix_[spec_.m];

    if (spec_.m > 1 && order_ <= kTabulateLimit) {
        const auto factors = prime_factors(order_ - 1);
        std::uint32_t g = 2;
        for (; g < order_; ++g) {
            bool primitive = true;
            for (auto r : factors) {
                std::uint32_t acc = 1, base = g;
                for (std::uint64_t e = (order_ - 1) / r; e; e >>= 1) {
                    if (e & 1) acc = mul_poly(acc, base);
                    base = mul_poly(base, base);
                }
                if (acc == 1) {
                    primitive = false;
                    break;
                }
            }
            if (primitive) break;
        }
        exp_.resize(order_ - 1);
        log_.assign(order_, 0);
        std::uint32_t cur = 1;
        for (std::uint32_t k = 0; k + 1 < order_; ++k) {
            exp_[k] = cur;
            log_[cur] = k;
            cur = mul_poly(cur, g);
        }
    }
}

std::uint32_t GaloisField::add(std::uint32_t a, std::uint32_t b) const noexcept {
    const std::uint32_t p = spec_.p;
    if (spec_.m == 1) return static_cast<std::uint32_t>((std::uint64_t{a} + b) % p);
    std::uint32_t out = 0;
    for (std::uint32_t k = 0; k < spec_.m; ++k) {
        out += ((a % p + b % p) % p) * radix_[k];
        a /= p;
        b /= p;
    }
    return out;
}

std::uint32_t GaloisField::neg(std::uint32_t a) const noexcept {
    const std::uint32_t p = spec_.p;
    if (spec_.m == 1) return a == 0 ? 0 : p - a;
    std::uint32_t out = 0;
    for (std::uint32_t k = 0; k < spec_.m; ++k) {
        const std::uint32_t d = a % p;
        out += (d == 0 ? 0 : p - d) * radix_[k];
        a /= p;
    }
    return out;
}

std::uint32_t GaloisField::sub(std::uint32_t a, std::uint32_t b) const noexcept { return add(a, neg(b)); }

std::uint32_t GaloisField::mul_poly(std::uint32_t a, std::uint32_t b) const noexcept {
    const std::uint32_t p = spec_.p, m = spec_.m;
    std::vector<std::uint64_t> prod(2 * m - 1, 0);
    std::uint32_t bd[kMaxDegree] = {};
    for (std::uint32_t k = 0; k < m; ++k) {
        bd[k] = b % p;
        b /= p;
    }
    for (std::uint32_t i = 0; i < m; ++i) {
        const std::uint64_t ai = a % p;
        a /= p;
        if (ai == 0) continue;
        for (std::uint32_t j = 0; j < m; ++j) prod[i + j] = (prod[i + j] + ai * bd[j]) % p;
    }
    const auto rem = poly_mod(std::move(prod), spec_.irr, p);
    std::uint32_t out = 0;
    for (std::uint32_t k = 0; k < rem.size(); ++k) out += static_cast<std::uint32_t>(rem[k]) * radix_[k];
    return out;
}

std::uint32_t GaloisField::mul(std::uint32_t a, std::uint32_t b) const noexcept {
    if (spec_.m == 1) return static_cast<std::uint32_t>((std::uint64_t{a} * b) % spec_.p);
    if (a == 0 || b == 0) return 0;
    if (!exp_.empty()) {
        std::uint64_t e = std::uint64_t{log_[a]} + log_[b];
        if (e >= order_ - 1) e -= order_ - 1;
        return exp_[e];
    }
    return mul_poly(a, b);
}

std::uint32_t GaloisField::pow(std::uint32_t a, std::uint64_t e) const noexcept {
    std::uint32_t acc = 1;
    while (e) {
        if (e & 1) acc = mul(acc, a);
        a = mul(a, a);
        e >>= 1;
    }
    return acc;
}

std::uint32_t GaloisField::inv(std::uint32_t a) const {
    if (a == 0) throw Error(ErrorKind::DivisionByZero, "inverse of zero in F_" + std::to_string(order_));
    if (!exp_.empty()) return exp_[log_[a] == 0 ? 0 : (order_ - 1) - log_[a]];
    return pow(a, order_ - 2);
}

std::vector<std::uint32_t> GaloisField::digits(std::uint32_t a) const {
    std::vector<std::uint32_t> out(spec_.m);
    for (auto& d : out) {
        d = a % spec_.p;
        a /= spec_.p;
    }
    return out;
}

Fq GaloisField::zero() const { return Fq(*this, 0); }
Fq GaloisField::one() const { return Fq(*this, 1); }

Fq GaloisField::from_int(std::int64_t v) const {
    const std::int64_t p = spec_.p;
    const std::int64_t r = ((v % p) + p) % p;
    return Fq(*this, static_cast<std::uint32_t>(r));
}

Fq GaloisField::from_index(std::uint64_t packed) const {
    if (packed >= order_) throw Error(ErrorKind::OutOfRange, "field element index out of range");
    return Fq(*this, static_cast<std::uint32_t>(packed));
}

Fq GaloisField::from_digits(const std::vector<std::uint32_t>& digits) const {
    if (digits.size() != spec_.m) {
        throw Error(ErrorKind::BadInput, "field element needs exactly m = " + std::to_string(spec_.m) + " digits");
    }
    std::uint32_t out = 0;
    for (std::uint32_t k = 0; k < spec_.m; ++k) {
        if (digits[k] >= spec_.p) throw Error(ErrorKind::BadInput, "field element digit not reduced mod p");
        out += digits[k] * radix_[k];
    }
    return Fq(*this, out);
}

Fq GaloisField::generator() const { return Fq(*this, spec_.m == 1 ? 1 : spec_.p); }

// ---------------------------------------------------------------------------

namespace {

const GaloisField* common_field(const Fq& a, const Fq& b) {
    if (a.field() && b.field() && a.field() != b.field()) {
        throw Error(ErrorKind::FieldMismatch, "operands live in different fields");
    }
    return a.field() ? a.field() : b.field();
}

}  // namespace

std::uint32_t Fq::value() const {
    if (!field_) throw Error(ErrorKind::Internal, "value of an unbound field literal");
    return static_cast<std::uint32_t>(raw_);
}

Fq Fq::bind(const GaloisField& field) const {
    if (field_) {
        if (field_ != &field) throw Error(ErrorKind::FieldMismatch, "element belongs to another field");
        return *this;
    }
    return field.from_int(raw_);
}

bool Fq::is_zero() const noexcept { return raw_ == 0; }

bool Fq::is_one() const noexcept { return raw_ == 1; }

std::vector<std::uint32_t> Fq::digits() const { return field_->digits(value()); }

Fq Fq::inverse() const {
    if (!field_) {
        if (raw_ == 1 || raw_ == -1) return *this;
        throw Error(ErrorKind::Internal, "inverse of an unbound literal other than +-1");
    }
    return Fq(*field_, field_->inv(value()));
}

Fq Fq::pow(std::uint64_t e) const {
    if (!field_) throw Error(ErrorKind::Internal, "power of an unbound literal");
    return Fq(*field_, field_->pow(value(), e));
}

Fq Fq::frobenius(std::uint32_t e) const {
    if (!field_) return *this;
    std::uint32_t v = value();
    for (std::uint32_t k = 0; k < e % field_->degree(); ++k) v = field_->pow(v, field_->characteristic());
    return Fq(*field_, v);
}

Fq Fq::operator-() const {
    if (!field_) return Fq(static_cast<int>(-raw_));
    return Fq(*field_, field_->neg(value()));
}

Fq operator+(const Fq& a, const Fq& b) {
    const GaloisField* f = common_field(a, b);
    if (!f) return Fq(static_cast<int>(a.raw_ + b.raw_));
    return Fq(*f, f->add(a.bind(*f).value(), b.bind(*f).value()));
}

Fq operator-(const Fq& a, const Fq& b) {
    const GaloisField* f = common_field(a, b);
    if (!f) return Fq(static_cast<int>(a.raw_ - b.raw_));
    return Fq(*f, f->sub(a.bind(*f).value(), b.bind(*f).value()));
}

Fq operator*(const Fq& a, const Fq& b) {
    const GaloisField* f = common_field(a, b);
    if (!f) return Fq(static_cast<int>(a.raw_ * b.raw_));
    return Fq(*f, f->mul(a.bind(*f).value(), b.bind(*f).value()));
}

Fq operator/(const Fq& a, const Fq& b) {
    const GaloisField* f = common_field(a, b);
    if (!f) return a * b.inverse();
    return a.bind(*f) * b.bind(*f).inverse();
}

bool operator==(const Fq& a, const Fq& b) {
    if (a.field_ && b.field_ && a.field_ != b.field_) return false;
    const GaloisField* f = a.field_ ? a.field_ : b.field_;
    if (!f) return a.raw_ == b.raw_;
    return a.bind(*f).raw_ == b.bind(*f).raw_;
}

std::ostream& operator<<(std::ostream& os, const Fq& a) {
    if (!a.field_) return os << a.raw_;
    if (a.field_->degree() == 1) return os << a.raw_;
    os << '[';
    const auto d = a.digits();
    for (std::size_t k = 0; k < d.size(); ++k) os << (k ? "," : "") << d[k];
    return os << ']';
}

}  // namespace nilderiv
