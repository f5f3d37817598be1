#pragma once

#include <charconv>
#include <cmath>
#include <compare>
#include <limits>
#include <stdexcept>
#include <string>

#include "histwalk/errors.hpp"

namespace histwalk {

/// A real number or one of the two infinities. NaN is never representable.
///
/// Rate functions are +inf outside the convex hull of the support, and the
/// regime thresholds are padded with -inf/+inf sentinels at both ends, so a
/// plain double with checked arithmetic is enough here.
class ExtendedReal {
public:
    constexpr ExtendedReal() = default;

    ExtendedReal(double v) : value_(v) { // NOLINT(google-explicit-constructor)
        if (std::isnan(v)) throw InvalidInput("ExtendedReal cannot hold NaN");
    }

    static constexpr ExtendedReal infinity() { return ExtendedReal(Raw{}, std::numeric_limits<double>::infinity()); }
    static constexpr ExtendedReal neg_infinity() { return ExtendedReal(Raw{}, -std::numeric_limits<double>::infinity()); }

    [[nodiscard]] bool is_finite() const { return std::isfinite(value_); }
    [[nodiscard]] bool is_pos_infinity() const { return value_ == std::numeric_limits<double>::infinity(); }
    [[nodiscard]] bool is_neg_infinity() const { return value_ == -std::numeric_limits<double>::infinity(); }

    /// The finite value; throws when infinite.
    [[nodiscard]] double value() const {
        if (!is_finite()) throw InvalidInput("ExtendedReal::value() on an infinite quantity");
        return value_;
    }

    /// IEEE representation, infinities included.
    [[nodiscard]] constexpr double raw() const { return value_; }

    friend ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
        if ((a.is_pos_infinity() && b.is_neg_infinity()) || (a.is_neg_infinity() && b.is_pos_infinity()))
            throw InvalidInput("indeterminate sum of opposite infinities");
        return ExtendedReal(Raw{}, a.value_ + b.value_);
    }
    friend ExtendedReal operator-(ExtendedReal a) { return ExtendedReal(Raw{}, -a.value_); }
    friend ExtendedReal operator-(ExtendedReal a, ExtendedReal b) { return a + (-b); }

    friend std::strong_ordering operator<=>(ExtendedReal a, ExtendedReal b) {
        if (a.value_ < b.value_) return std::strong_ordering::less;
        if (a.value_ > b.value_) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }
    friend bool operator==(ExtendedReal a, ExtendedReal b) { return a.value_ == b.value_; }

    /// "inf", "-inf" or the shortest round-trip decimal.
    [[nodiscard]] std::string to_string() const;

private:
    struct Raw {};
    constexpr ExtendedReal(Raw, double v) : value_(v) {}

    double value_ = 0.0;
};

/// max(x, 0)
inline ExtendedReal positive_part(ExtendedReal x) { return x > ExtendedReal(0.0) ? x : ExtendedReal(0.0); }

inline ExtendedReal min(ExtendedReal a, ExtendedReal b) { return b < a ? b : a; }
inline ExtendedReal max(ExtendedReal a, ExtendedReal b) { return a < b ? b : a; }

inline std::string ExtendedReal::to_string() const {
    if (is_pos_infinity()) return "inf";
    if (is_neg_infinity()) return "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, value_);
    return std::string(buf, res.ptr);
}

} // namespace histwalk
