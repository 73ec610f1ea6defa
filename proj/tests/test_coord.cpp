#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>

#include "coord.hpp"
#include "rng.hpp"

using namespace linematch;

TEST(Coord, FromInteger) {
    const Coord one = coord_from_integer(1, 32);
    EXPECT_EQ(one.to_double(), 1.0);
    EXPECT_EQ(one, coord_from_integer(1, 0));
    EXPECT_EQ(coord_from_integer(0, 0).to_double(), 0.0);
    EXPECT_EQ(coord_from_integer(7, 30).numerator(), std::int64_t{7} * (std::int64_t{1} << 30));
}

TEST(Coord, FromIntegerRejectsOverflowAndNegatives) {
    EXPECT_THROW(coord_from_integer(1, 62), std::overflow_error);  // 62 + 1 bit
    EXPECT_NO_THROW(coord_from_integer(1, 61));
    EXPECT_THROW(coord_from_integer(1024, 52), std::overflow_error);
    EXPECT_THROW(coord_from_integer(-1, 3), std::domain_error);
}

TEST(Coord, CrossScaleComparisonAndArithmetic) {
    const Coord half = Coord::from_numerator(1, 1);
    const Coord quarter3 = Coord::from_numerator(3, 2);
    EXPECT_LT(half, quarter3);
    const Coord sum = half + quarter3;
    EXPECT_EQ(sum.scale(), 2);
    EXPECT_EQ(sum.numerator(), 5);
    EXPECT_EQ(quarter3 - half, Coord::from_numerator(1, 2));
    EXPECT_TRUE(Coord::from_numerator(2, 1).identical(Coord::from_numerator(2, 1)));
    EXPECT_FALSE(Coord::from_numerator(2, 1).identical(coord_from_integer(1, 0)));
}

TEST(Coord, ArithmeticOverflowThrows) {
    const Coord big = Coord::from_numerator(INT64_MAX, 0);
    EXPECT_THROW(big + coord_from_integer(1, 0), std::overflow_error);
    EXPECT_THROW((void)big.rescaled(1), std::overflow_error);
}

TEST(SnapToGrid, Examples) {
    EXPECT_EQ(snap_to_grid(1.0, 4, 3.0), coord_from_integer(1, 0));
    // 6.5/16 is an exact tie between 6/16 and 7/16; ties go down.
    const Coord c = snap_to_grid(0.40625, 4, 3.0);
    EXPECT_EQ(c.numerator(), 6);
    EXPECT_EQ(c.scale(), 4);
    EXPECT_EQ(snap_to_grid(0.40626, 4, 3.0).numerator(), 7);
}

TEST(SnapToGrid, DomainErrors) {
    EXPECT_THROW(snap_to_grid(-0.1, 4, 3.0), std::domain_error);
    EXPECT_THROW(snap_to_grid(3.01, 4, 3.0), std::domain_error);
    EXPECT_THROW(snap_to_grid(std::nan(""), 4, 3.0), std::domain_error);
}

TEST(SnapToGrid, ExactCoordTiesGoDown) {
    // 13/32 at scale 4 is 6.5/16.
    EXPECT_EQ(snap_to_grid(Coord::from_numerator(13, 5), 4).numerator(), 6);
    EXPECT_EQ(snap_to_grid(Coord::from_numerator(27, 5), 4).numerator(), 13);
    EXPECT_EQ(snap_to_grid(Coord::from_numerator(29, 5), 4).numerator(), 14);
    EXPECT_EQ(snap_to_grid(Coord::from_numerator(3, 2), 4).numerator(), 12);
}

TEST(SnapToGrid, ErrorAtMostHalfCellOverMillionSamples) {
    Stream s(2024, {});
    const int k = 20;
    const double half_cell = std::ldexp(1.0, -k - 1);
    for (int x = 0; x < 1000000; ++x) {
        const double v = s.uniform01() * 8.0;
        const Coord g = snap_to_grid(v, k, 8.0);
        ASSERT_EQ(g.scale(), k);
        ASSERT_LE(std::fabs(g.to_double() - v), half_cell);
    }
}

// Brute force over every point of a coarse grid: the snapped point is a nearest one.
TEST(SnapToGrid, MinimizesDistanceOverCoarseGrid) {
    Stream s(77, {});
    const int k = 3;
    for (int x = 0; x < 20000; ++x) {
        const double v = s.uniform01() * 4.0;
        const Coord g = snap_to_grid(v, k, 4.0);
        double best = 1e9;
        for (int q = 0; q <= 4 << k; ++q) best = std::min(best, std::fabs(std::ldexp(q, -k) - v));
        ASSERT_EQ(std::fabs(g.to_double() - v), best);
    }
}

TEST(AbsDistance, Examples) {
    EXPECT_EQ(abs_distance(coord_from_integer(2, 5), coord_from_integer(2, 5)), Coord{});
    EXPECT_EQ(abs_distance(coord_from_integer(1, 5), coord_from_integer(4, 5)), coord_from_integer(3, 0));
}

TEST(AbsDistance, SymmetryTriangleAndExactInverse) {
    Stream s(3, {});
    auto draw = [&] { return Coord::from_numerator(static_cast<std::int64_t>(s.bits(30)), static_cast<int>(s.uniform_below(30))); };
    for (int x = 0; x < 20000; ++x) {
        const Coord a = draw(), b = draw(), c = draw();
        ASSERT_EQ(abs_distance(a, b), abs_distance(b, a));
        ASSERT_LE(abs_distance(a, c), abs_distance(a, b) + abs_distance(b, c));
        ASSERT_EQ((a - b) + b, a);
    }
}

TEST(Segment, LengthAndOrdering) {
    const Segment seg(coord_from_integer(2, 0), coord_from_integer(5, 3));
    EXPECT_EQ(seg.length(), coord_from_integer(3, 0));
    EXPECT_THROW(Segment(coord_from_integer(5, 0), coord_from_integer(2, 0)), std::invalid_argument);
}
