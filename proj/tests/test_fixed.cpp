#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "voltgrid/errors.hpp"
#include "voltgrid/fixed.hpp"

#include <cstdint>

using voltgrid::Fixed;
using namespace voltgrid::fixed_literals;

TEST_CASE("construction and raw mantissa") {
    CHECK(Fixed().raw() == 0);
    CHECK(Fixed::from_int(1).raw() == 100'000'000);
    CHECK(Fixed::from_int(-3).raw() == -300'000'000);
    CHECK(Fixed::from_raw(1).str() == "0.00000001");
    CHECK(Fixed::from_double(1.5).raw() == 150'000'000);
    CHECK(Fixed::from_double(0.1).raw() == 10'000'000);
}

TEST_CASE("parse accepts plain decimals up to eight fractional digits") {
    CHECK(Fixed::parse("0").raw() == 0);
    CHECK(Fixed::parse("-0.5").raw() == -50'000'000);
    CHECK(Fixed::parse("+2.25").raw() == 225'000'000);
    CHECK(Fixed::parse("123.45678901").raw() == 12'345'678'901);
    CHECK(Fixed::parse("1.").raw() == 100'000'000);
    CHECK(Fixed::parse("0.00000001").raw() == 1);

    CHECK_THROWS_AS(Fixed::parse(""), voltgrid::ValidationError);
    CHECK_THROWS_AS(Fixed::parse("."), voltgrid::ValidationError);
    CHECK_THROWS_AS(Fixed::parse("-"), voltgrid::ValidationError);
    CHECK_THROWS_AS(Fixed::parse("1e5"), voltgrid::ValidationError);
    CHECK_THROWS_AS(Fixed::parse("1.0 "), voltgrid::ValidationError);
    CHECK_THROWS_AS(Fixed::parse("0.123456789"), voltgrid::ValidationError);
}

TEST_CASE("str is canonical with eight digits and round-trips parse") {
    CHECK(Fixed::parse("-12.34").str() == "-12.34000000");
    CHECK(Fixed::from_int(0).str() == "0.00000000");
    CHECK(Fixed::from_raw(-1).str() == "-0.00000001");
    const char* samples[] = {"0.00000001", "42.5", "-97531.2468", "0.1", "12345678.87654321"};
    for (const char* s : samples) {
        Fixed f = Fixed::parse(s);
        CHECK(Fixed::parse(f.str()) == f);
    }
}

TEST_CASE("addition and subtraction are exact and overflow-checked") {
    CHECK((Fixed::parse("0.1") + Fixed::parse("0.2")) == Fixed::parse("0.3"));
    CHECK((Fixed::parse("1") - Fixed::parse("0.00000001")) == Fixed::parse("0.99999999"));
    Fixed acc;
    for (int i = 0; i < 10; ++i) acc += Fixed::parse("0.1");
    CHECK(acc == Fixed::from_int(1));

    Fixed near_max = Fixed::from_raw(INT64_MAX);
    CHECK_THROWS_AS(near_max + Fixed::from_raw(1), voltgrid::Error);
    CHECK_THROWS_AS(Fixed::from_raw(INT64_MIN) - Fixed::from_raw(1), voltgrid::Error);
    CHECK_THROWS_AS(-Fixed::from_raw(INT64_MIN), voltgrid::Error);
    CHECK_THROWS_AS(Fixed::from_int(100'000'000'000), voltgrid::Error);
}

TEST_CASE("multiplication rounds half to even at the eighth digit") {
    // Exact products stay exact.
    CHECK(Fixed::mul(Fixed::from_int(100), Fixed::from_int(5)) == Fixed::from_int(500));
    CHECK(Fixed::mul(Fixed::from_int(500), Fixed::parse("0.0002")) == Fixed::parse("0.1"));
    // 0.00000015 * 0.1 = 0.000000015 -> ties to even digit 2.
    CHECK(Fixed::mul(Fixed::parse("0.00000015"), Fixed::parse("0.1")).raw() == 2);
    // 0.00000025 * 0.1 = 0.000000025 -> ties to even digit 2 as well.
    CHECK(Fixed::mul(Fixed::parse("0.00000025"), Fixed::parse("0.1")).raw() == 2);
    // Symmetric for negatives.
    CHECK(Fixed::mul(Fixed::parse("-0.00000015"), Fixed::parse("0.1")).raw() == -2);
    CHECK(Fixed::mul(Fixed::parse("-0.00000025"), Fixed::parse("0.1")).raw() == -2);
}

TEST_CASE("division rounds half to even and rejects zero divisors") {
    CHECK(Fixed::div(Fixed::from_int(1), Fixed::from_int(3)) == Fixed::parse("0.33333333"));
    CHECK(Fixed::div(Fixed::from_int(2), Fixed::from_int(3)) == Fixed::parse("0.66666667"));
    CHECK(Fixed::div(Fixed::parse("3.5"), Fixed::from_int(70)) == Fixed::parse("0.05"));
    // 0.00000001 / 2 = 0.000000005 -> tie, rounds to even 0.
    CHECK(Fixed::div(Fixed::from_raw(1), Fixed::from_int(2)).raw() == 0);
    // 0.00000003 / 2 = 0.000000015 -> tie, rounds to even 2.
    CHECK(Fixed::div(Fixed::from_raw(3), Fixed::from_int(2)).raw() == 2);
    CHECK_THROWS_AS(Fixed::div(Fixed::from_int(1), Fixed()), voltgrid::Error);
}

TEST_CASE("div_floor always rounds toward negative infinity") {
    CHECK(Fixed::div_floor(Fixed::from_int(150), Fixed::from_int(90)) ==
          Fixed::parse("1.66666666"));
    CHECK(Fixed::div_floor(Fixed::from_int(2), Fixed::from_int(3)) ==
          Fixed::parse("0.66666666"));
    CHECK(Fixed::div_floor(Fixed::from_int(-1), Fixed::from_int(3)) ==
          Fixed::parse("-0.33333334"));
    CHECK(Fixed::div_floor(Fixed::from_int(1), Fixed::from_int(-3)) ==
          Fixed::parse("-0.33333334"));
    CHECK(Fixed::div_floor(Fixed::from_int(6), Fixed::from_int(3)) ==
          Fixed::from_int(2));
    CHECK_THROWS_AS(Fixed::div_floor(Fixed::from_int(1), Fixed()), voltgrid::Error);
}

TEST_CASE("floor_to and ceil_to snap to step multiples") {
    Fixed tick = Fixed::parse("0.25");
    CHECK(Fixed::parse("101.37").floor_to(tick) == Fixed::parse("101.25"));
    CHECK(Fixed::parse("101.37").ceil_to(tick) == Fixed::parse("101.5"));
    CHECK(Fixed::parse("-101.37").floor_to(tick) == Fixed::parse("-101.5"));
    CHECK(Fixed::parse("-101.37").ceil_to(tick) == Fixed::parse("-101.25"));
    CHECK(Fixed::parse("101.25").floor_to(tick) == Fixed::parse("101.25"));
    CHECK(Fixed::parse("101.25").ceil_to(tick) == Fixed::parse("101.25"));
    CHECK(Fixed::parse("101.25").is_multiple_of(tick));
    CHECK_FALSE(Fixed::parse("101.37").is_multiple_of(tick));
    CHECK_THROWS_AS(Fixed::parse("1").floor_to(Fixed()), voltgrid::Error);
}

TEST_CASE("ordering, sign helpers, and literal") {
    CHECK(Fixed::parse("1.5") > Fixed::parse("1.49999999"));
    CHECK(Fixed::parse("-2") < Fixed());
    CHECK(Fixed().is_zero());
    CHECK(Fixed::parse("-0.1").is_negative());
    CHECK(Fixed::parse("-0.1").abs() == Fixed::parse("0.1"));
    CHECK(("1.5"_fx).raw() == 150'000'000);
    CHECK("0.00000002"_fx == Fixed::from_raw(2));
}
