#pragma once

#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "rational.hpp"

namespace linematch {

/// Largest supported scale exponent. Numerators stay in signed 64 bits.
inline constexpr int kMaxScale = 62;

/// Exact dyadic coordinate `numerator / 2^scale`.
///
/// Values compare and subtract exactly across different scales: the operand
/// with the smaller scale is lifted to the larger one. Arithmetic that would
/// leave the signed 64-bit numerator range throws std::overflow_error.
class Coord {
public:
    constexpr Coord() = default;

    static Coord from_numerator(std::int64_t numerator, int scale) {
        if (scale < 0 || scale > kMaxScale) throw std::out_of_range("Coord: scale outside [0, 62]");
        Coord c;
        c.num_ = numerator;
        c.k_ = scale;
        return c;
    }

    [[nodiscard]] constexpr std::int64_t numerator() const noexcept { return num_; }
    [[nodiscard]] constexpr int scale() const noexcept { return k_; }

    /// Numerator of the same value expressed at `scale` (must be >= scale()).
    [[nodiscard]] std::int64_t numerator_at(int scale) const {
        if (scale < k_) {
            const int drop = k_ - scale;
            if ((num_ & ((std::int64_t{1} << drop) - 1)) != 0)
                throw std::domain_error("Coord: value not representable at coarser scale");
            return num_ >> drop;
        }
        return checked_shift(num_, scale - k_);
    }

    [[nodiscard]] Coord rescaled(int scale) const { return from_numerator(numerator_at(scale), scale); }

    [[nodiscard]] double to_double() const noexcept { return std::ldexp(static_cast<double>(num_), -k_); }

    [[nodiscard]] Rational to_rational() const { return {num_, std::int64_t{1} << k_}; }

    [[nodiscard]] std::string str() const {
        return std::to_string(num_) + "/2^" + std::to_string(k_);
    }

    friend Coord operator+(const Coord& a, const Coord& b) {
        const int k = a.k_ > b.k_ ? a.k_ : b.k_;
        std::int64_t out = 0;
        if (__builtin_add_overflow(a.numerator_at(k), b.numerator_at(k), &out))
            throw std::overflow_error("Coord: addition overflow");
        return from_numerator(out, k);
    }
    friend Coord operator-(const Coord& a, const Coord& b) {
        const int k = a.k_ > b.k_ ? a.k_ : b.k_;
        std::int64_t out = 0;
        if (__builtin_sub_overflow(a.numerator_at(k), b.numerator_at(k), &out))
            throw std::overflow_error("Coord: subtraction overflow");
        return from_numerator(out, k);
    }
    Coord& operator+=(const Coord& o) { return *this = *this + o; }
    Coord& operator-=(const Coord& o) { return *this = *this - o; }

    /// Value equality: 1/2^0 == 2/2^1.
    friend bool operator==(const Coord& a, const Coord& b) noexcept { return (a <=> b) == 0; }
    friend std::strong_ordering operator<=>(const Coord& a, const Coord& b) noexcept {
        const int k = a.k_ > b.k_ ? a.k_ : b.k_;
        const __int128 lhs = static_cast<__int128>(a.num_) << (k - a.k_);
        const __int128 rhs = static_cast<__int128>(b.num_) << (k - b.k_);
        if (lhs < rhs) return std::strong_ordering::less;
        if (lhs > rhs) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    /// Representation equality (same numerator and scale).
    [[nodiscard]] bool identical(const Coord& o) const noexcept { return num_ == o.num_ && k_ == o.k_; }

private:
    static std::int64_t checked_shift(std::int64_t v, int by) {
        if (by == 0 || v == 0) return v;
        const __int128 wide = static_cast<__int128>(v) << by;
        if (by >= 63 || wide > INT64_MAX || wide < INT64_MIN) throw std::overflow_error("Coord: rescale overflow");
        return static_cast<std::int64_t>(wide);
    }

    std::int64_t num_ = 0;
    int k_ = 0;
};

/// The integer `j` embedded at scale `k`.
inline Coord coord_from_integer(std::int64_t j, int k) {
    if (j < 0) throw std::domain_error("coord_from_integer: negative integer");
    if (k < 0 || k + std::bit_width(static_cast<std::uint64_t>(j)) > kMaxScale)
        throw std::overflow_error("coord_from_integer: k + bits(j) exceeds 62");
    return Coord::from_numerator(j << k, k);
}

/// Nearest multiple of 2^-k to a finer-scale coordinate; exact ties go down.
inline Coord snap_to_grid(const Coord& x, int k) {
    if (k >= x.scale()) return x.rescaled(k);
    const int drop = x.scale() - k;
    const std::int64_t floor_q = x.numerator() >> drop;  // arithmetic shift floors
    const std::int64_t rem = x.numerator() - (floor_q << drop);
    const std::int64_t half = std::int64_t{1} << (drop - 1);
    return Coord::from_numerator(rem > half ? floor_q + 1 : floor_q, k);
}

/// Nearest multiple of 2^-k to a real `x` in [0, upper]; exact ties go down.
inline Coord snap_to_grid(double x, int k, double upper) {
    if (!(x >= 0.0) || !(x <= upper)) throw std::domain_error("snap_to_grid: x outside [0, n+1]");
    if (k < 0 || k > kMaxScale) throw std::out_of_range("snap_to_grid: scale outside [0, 62]");
    // Scaling by a power of two and taking the fractional part are exact in binary floating point.
    const double scaled = std::ldexp(x, k);
    const double fl = std::floor(scaled);
    if (fl >= 0x1p63) throw std::overflow_error("snap_to_grid: numerator overflow");
    const auto q = static_cast<std::int64_t>(fl);
    return Coord::from_numerator(scaled - fl > 0.5 ? q + 1 : q, k);
}

inline Coord abs_distance(const Coord& a, const Coord& b) { return a < b ? b - a : a - b; }

/// Closed piece [left, right] of the line.
struct Segment {
    Coord left;
    Coord right;

    Segment(Coord l, Coord r) : left(l), right(r) {
        if (right < left) throw std::invalid_argument("Segment: right < left");
    }

    [[nodiscard]] Coord length() const { return right - left; }
};

}  // namespace linematch
