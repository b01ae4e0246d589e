#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace voltgrid {

/// Fixed-point decimal with 8 fractional digits on a signed 64-bit mantissa.
///
/// All ledger-path arithmetic (cash, fees, funding, notional) runs on this
/// type; addition and subtraction are exact, multiplication and division
/// round half-to-even at the 8-digit scale. Binary floating point never
/// touches the accounting path.
class Fixed {
public:
    static constexpr int frac_digits = 8;
    static constexpr std::int64_t scale = 100'000'000;

    constexpr Fixed() = default;

    static constexpr Fixed from_raw(std::int64_t raw) {
        Fixed f;
        f.raw_ = raw;
        return f;
    }
    static Fixed from_int(std::int64_t units);
    /// Nearest fixed value, ties to even.
    static Fixed from_double(double v);
    /// Parses "[+-]digits[.digits]" with at most 8 fractional digits.
    static Fixed parse(std::string_view text);

    constexpr std::int64_t raw() const { return raw_; }
    double to_double() const { return static_cast<double>(raw_) / scale; }
    /// Canonical form, always 8 fractional digits: "-12.34000000".
    std::string str() const;

    constexpr bool is_zero() const { return raw_ == 0; }
    constexpr bool is_negative() const { return raw_ < 0; }
    Fixed abs() const { return raw_ < 0 ? from_raw(-raw_) : *this; }

    Fixed operator-() const;
    Fixed operator+(Fixed rhs) const;
    Fixed operator-(Fixed rhs) const;
    Fixed& operator+=(Fixed rhs) { return *this = *this + rhs; }
    Fixed& operator-=(Fixed rhs) { return *this = *this - rhs; }

    /// a*b rounded half-to-even at the scale.
    static Fixed mul(Fixed a, Fixed b);
    /// a/b rounded half-to-even at the scale. Throws on b == 0.
    static Fixed div(Fixed a, Fixed b);
    /// a/b rounded toward negative infinity at the scale; never overshoots
    /// the true quotient. Throws on b == 0.
    static Fixed div_floor(Fixed a, Fixed b);

    /// Largest multiple of step <= *this (step > 0).
    Fixed floor_to(Fixed step) const;
    /// Smallest multiple of step >= *this (step > 0).
    Fixed ceil_to(Fixed step) const;
    bool is_multiple_of(Fixed step) const;

    auto operator<=>(const Fixed&) const = default;

private:
    std::int64_t raw_ = 0;
};

inline namespace fixed_literals {
/// Fixed from a decimal literal string: "1.5"_fx.
Fixed operator""_fx(const char* text, std::size_t len);
} // namespace fixed_literals

} // namespace voltgrid
