#include "nilderiv/padic.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "nilderiv/error.hpp"
#include "nilderiv/galois_field.hpp"

namespace nilderiv {

namespace {

// Factorials and inverse factorials of 0..p-1 modulo p. A digit binomial
// C(a, b) with b <= a < p is a! / (b! (a-b)!), all three units mod p.
class DigitTable {
  public:
    explicit DigitTable(std::uint32_t p) : p_(p), fact_(p), inv_fact_(p) {
        fact_[0] = 1;
        for (std::uint32_t a = 1; a < p; ++a) fact_[a] = static_cast<std::uint32_t>(std::uint64_t{fact_[a - 1]} * a % p);
        inv_fact_[p - 1] = power(fact_[p - 1], p - 2);
        for (std::uint32_t a = p - 1; a > 0; --a) {
            inv_fact_[a - 1] = static_cast<std::uint32_t>(std::uint64_t{inv_fact_[a]} * a % p);
        }
    }

    std::uint32_t binom(std::uint32_t a, std::uint32_t b) const {
        if (b > a) return 0;
        return static_cast<std::uint32_t>(std::uint64_t{fact_[a]} * inv_fact_[b] % p_ * inv_fact_[a - b] % p_);
    }

    std::uint32_t fact(std::uint32_t a) const { return fact_[a]; }
    std::uint32_t inv_fact(std::uint32_t a) const { return inv_fact_[a]; }

  private:
    std::uint32_t power(std::uint64_t base, std::uint64_t e) const {
        std::uint64_t acc = 1;
        base %= p_;
        while (e) {
            if (e & 1) acc = acc * base % p_;
            base = base * base % p_;
            e >>= 1;
        }
        return static_cast<std::uint32_t>(acc);
    }

    std::uint32_t p_;
    std::vector<std::uint32_t> fact_;
    std::vector<std::uint32_t> inv_fact_;
};

const DigitTable& table_for(std::uint32_t p) {
    static std::mutex mutex;
    static std::map<std::uint32_t, std::unique_ptr<DigitTable>> tables;
    std::lock_guard lock(mutex);
    auto& slot = tables[p];
    if (!slot) {
        if (!is_prime(p)) throw Error(ErrorKind::BadInput, std::to_string(p) + " is not prime");
        slot = std::make_unique<DigitTable>(p);
    }
    return *slot;
}

}  // namespace

std::uint64_t PDigits::value() const {
    std::uint64_t v = 0;
    for (std::size_t k = digits.size(); k-- > 0;) v = v * base + digits[k];
    return v;
}

PDigits p_digits(std::uint64_t i, std::uint32_t p) {
    if (p < 2) throw Error(ErrorKind::BadInput, "p-adic base must be at least 2");
    PDigits out{p, {}};
    do {
        out.digits.push_back(static_cast<std::uint32_t>(i % p));
        i /= p;
    } while (i > 0);
    return out;
}

std::uint32_t lucas_binom(std::uint64_t i, std::uint64_t j, std::uint32_t p) {
    if (j > i) return 0;
    const DigitTable& table = table_for(p);
    std::uint64_t acc = 1;
    while (j > 0 && acc != 0) {
        acc = acc * table.binom(static_cast<std::uint32_t>(i % p), static_cast<std::uint32_t>(j % p)) % p;
        i /= p;
        j /= p;
    }
    return static_cast<std::uint32_t>(acc);
}

FactorialUnit factorial_unit(std::uint32_t j, std::uint32_t p) {
    if (j >= p) {
        throw Error(ErrorKind::OutOfRange,
                    std::to_string(j) + "! is divisible by p = " + std::to_string(p) + " and has no inverse");
    }
    const DigitTable& table = table_for(p);
    return {table.fact(j), table.inv_fact(j)};
}

}  // namespace nilderiv
