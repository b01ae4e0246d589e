#include "voltgrid/fixed.hpp"

#include "voltgrid/errors.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace voltgrid {

namespace {

using i128 = __int128;

[[noreturn]] void overflow(const char* op) {
    throw Error(std::string("fixed-point overflow in ") + op);
}

std::int64_t narrow(i128 v, const char* op) {
    if (v > std::numeric_limits<std::int64_t>::max() ||
        v < std::numeric_limits<std::int64_t>::min()) {
        overflow(op);
    }
    return static_cast<std::int64_t>(v);
}

/// num/den rounded half-to-even, exact in integer arithmetic. den > 0.
i128 div_half_even(i128 num, i128 den) {
    i128 q = num / den;
    i128 r = num % den;
    if (r == 0) return q;
    // Work with the magnitude of the remainder; q truncates toward zero.
    bool neg = num < 0;
    i128 ar = neg ? -r : r;
    i128 twice = 2 * ar;
    if (twice > den || (twice == den && ((neg ? q - 1 : q + 1) % 2 == 0))) {
        q += neg ? -1 : 1;
    }
    return q;
}

} // namespace

Fixed Fixed::from_int(std::int64_t units) {
    i128 raw = static_cast<i128>(units) * scale;
    return from_raw(narrow(raw, "from_int"));
}

Fixed Fixed::from_double(double v) {
    if (!std::isfinite(v)) throw Error("fixed-point from non-finite double");
    double scaled = v * static_cast<double>(scale);
    if (scaled >= 9.3e18 || scaled <= -9.3e18) overflow("from_double");
    // nearbyint honours the default round-to-nearest-even mode.
    return from_raw(static_cast<std::int64_t>(std::nearbyint(scaled)));
}

Fixed Fixed::parse(std::string_view text) {
    std::size_t i = 0;
    bool neg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
        neg = text[i] == '-';
        ++i;
    }
    if (i >= text.size()) throw ValidationError("empty decimal literal");

    i128 int_part = 0;
    bool any_digit = false;
    for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) {
        int_part = int_part * 10 + (text[i] - '0');
        if (int_part > std::numeric_limits<std::int64_t>::max()) overflow("parse");
        any_digit = true;
    }
    std::int64_t frac = 0;
    int frac_len = 0;
    if (i < text.size() && text[i] == '.') {
        ++i;
        for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) {
            if (frac_len >= frac_digits) {
                throw ValidationError("more than 8 fractional digits: '" +
                                      std::string(text) + "'");
            }
            frac = frac * 10 + (text[i] - '0');
            ++frac_len;
            any_digit = true;
        }
    }
    if (!any_digit || i != text.size()) {
        throw ValidationError("malformed decimal literal: '" + std::string(text) + "'");
    }
    for (; frac_len < frac_digits; ++frac_len) frac *= 10;
    i128 raw = int_part * scale + frac;
    if (neg) raw = -raw;
    return from_raw(narrow(raw, "parse"));
}

std::string Fixed::str() const {
    std::int64_t r = raw_;
    std::string sign;
    unsigned long long mag;
    if (r < 0) {
        sign = "-";
        mag = static_cast<unsigned long long>(-(r + 1)) + 1ULL;
    } else {
        mag = static_cast<unsigned long long>(r);
    }
    unsigned long long whole = mag / scale;
    unsigned long long frac = mag % scale;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%llu.%08llu", whole, frac);
    return sign + buf;
}

Fixed Fixed::operator-() const {
    if (raw_ == std::numeric_limits<std::int64_t>::min()) overflow("negate");
    return from_raw(-raw_);
}

Fixed Fixed::operator+(Fixed rhs) const {
    std::int64_t out;
    if (__builtin_add_overflow(raw_, rhs.raw_, &out)) overflow("add");
    return from_raw(out);
}

Fixed Fixed::operator-(Fixed rhs) const {
    std::int64_t out;
    if (__builtin_sub_overflow(raw_, rhs.raw_, &out)) overflow("sub");
    return from_raw(out);
}

Fixed Fixed::mul(Fixed a, Fixed b) {
    i128 prod = static_cast<i128>(a.raw_) * b.raw_;
    return from_raw(narrow(div_half_even(prod, scale), "mul"));
}

Fixed Fixed::div(Fixed a, Fixed b) {
    if (b.raw_ == 0) throw Error("fixed-point division by zero");
    i128 num = static_cast<i128>(a.raw_) * scale;
    return from_raw(narrow(div_half_even(num, b.raw_), "div"));
}

Fixed Fixed::div_floor(Fixed a, Fixed b) {
    if (b.raw_ == 0) throw Error("fixed-point division by zero");
    i128 num = static_cast<i128>(a.raw_) * scale;
    i128 den = b.raw_;
    if (den < 0) {
        num = -num;
        den = -den;
    }
    i128 q = num / den;
    if (num % den != 0 && num < 0) --q;
    return from_raw(narrow(q, "div_floor"));
}

Fixed Fixed::floor_to(Fixed step) const {
    if (step.raw_ <= 0) throw Error("floor_to requires positive step");
    std::int64_t q = raw_ / step.raw_;
    std::int64_t r = raw_ % step.raw_;
    if (r < 0) --q;
    i128 out = static_cast<i128>(q) * step.raw_;
    return from_raw(narrow(out, "floor_to"));
}

Fixed Fixed::ceil_to(Fixed step) const {
    if (step.raw_ <= 0) throw Error("ceil_to requires positive step");
    std::int64_t q = raw_ / step.raw_;
    std::int64_t r = raw_ % step.raw_;
    if (r > 0) ++q;
    i128 out = static_cast<i128>(q) * step.raw_;
    return from_raw(narrow(out, "ceil_to"));
}

bool Fixed::is_multiple_of(Fixed step) const {
    if (step.raw_ <= 0) throw Error("is_multiple_of requires positive step");
    return raw_ % step.raw_ == 0;
}

inline namespace fixed_literals {
Fixed operator""_fx(const char* text, std::size_t len) {
    return Fixed::parse(std::string_view(text, len));
}
} // namespace fixed_literals

} // namespace voltgrid
