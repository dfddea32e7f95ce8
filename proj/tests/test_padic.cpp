#include <vector>

#include "doctest.h"
#include "nilderiv/error.hpp"
#include "nilderiv/padic.hpp"
#include "oracles.hpp"

using namespace nilderiv;

TEST_CASE("p_digits examples") {
    CHECK(p_digits(6, 3).digits == std::vector<std::uint32_t>{0, 2});
    for (std::uint32_t p : {2u, 3u, 5u, 7u}) {
        CHECK(p_digits(0, p).digits == std::vector<std::uint32_t>{0});
        std::uint64_t pk = 1;
        for (std::uint32_t k = 1; k <= 4; ++k) {
            pk *= p;
            CHECK(p_digits(pk - 1, p).digits == std::vector<std::uint32_t>(k, p - 1));
        }
    }
}

TEST_CASE("p_digits reconstructs its input with reduced digits and no trailing zeros") {
    for (std::uint32_t p : {2u, 3u, 5u, 13u}) {
        for (std::uint64_t i = 0; i < 3000; ++i) {
            const auto d = p_digits(i, p);
            CHECK(d.value() == i);
            for (auto x : d.digits) CHECK(x < p);
            if (i > 0) CHECK(d.digits.back() != 0);
        }
    }
}

TEST_CASE("lucas_binom examples") {
    CHECK(lucas_binom(4, 2, 2) == 0);
    CHECK(lucas_binom(6, 3, 3) == 2);
    for (std::uint64_t i = 0; i < 50; ++i) CHECK(lucas_binom(i, i, 5) == 1);
    CHECK(lucas_binom(2, 5, 3) == 0);
}

TEST_CASE("lucas_binom matches Pascal's triangle mod p and the digit support laws") {
    for (std::uint32_t p : {2u, 3u, 5u}) {
        const std::uint64_t limit = std::uint64_t{p} * p * p;
        const auto pascal = test_oracles::pascal_mod(limit, p);
        for (std::uint64_t i = 0; i < limit; ++i) {
            const auto di = p_digits(i, p);
            for (std::uint64_t j = 0; j <= i; ++j) {
                const auto c = lucas_binom(i, j, p);
                REQUIRE(c == pascal[i][j]);
                const auto dj = p_digits(j, p);
                bool dominated = true, carry_free = true;
                for (std::size_t k = 0; k < 4; ++k) {
                    dominated = dominated && dj[k] <= di[k];
                }
                CHECK((c != 0) == dominated);
                if (i + j < limit) {
                    for (std::size_t k = 0; k < 4; ++k) carry_free = carry_free && di[k] + dj[k] < p;
                    CHECK((lucas_binom(i + j, j, p) != 0) == carry_free);
                }
                if (i * p < limit) CHECK(lucas_binom(i * p, j * p, p) == c);
            }
        }
    }
}

TEST_CASE("factorial units") {
    for (std::uint32_t p : {2u, 3u, 5u, 7u, 11u, 13u}) {
        CHECK(factorial_unit(0, p).value == 1);
        std::uint64_t direct = 1;
        for (std::uint32_t j = 1; j < p; ++j) direct = direct * j % p;
        CHECK(factorial_unit(p - 1, p).value == direct);
        CHECK(factorial_unit(p - 1, p).value == p - 1);  // Wilson
        for (std::uint32_t j = 0; j < p; ++j) {
            const auto u = factorial_unit(j, p);
            CHECK(std::uint64_t{u.value} * u.inverse % p == 1);
        }
        CHECK_THROWS_AS(factorial_unit(p, p), Error);
    }
    CHECK(factorial_unit(2, 5).value == 2);
    CHECK(factorial_unit(2, 5).inverse == 3);
}
