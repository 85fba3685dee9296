#include "scengen/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using scengen::normalize_angle;
using scengen::OrientedRect;
using scengen::sat_overlap;
using scengen::Vec2;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(Vec2Ops, Arithmetic) {
  const Vec2 a{3.0, 4.0};
  const Vec2 b{-1.0, 2.0};
  EXPECT_DOUBLE_EQ((a + b).x, 2.0);
  EXPECT_DOUBLE_EQ((a + b).y, 6.0);
  EXPECT_DOUBLE_EQ((a - b).x, 4.0);
  EXPECT_DOUBLE_EQ((a * 2.0).y, 8.0);
  EXPECT_DOUBLE_EQ(a.dot(b), 5.0);
  EXPECT_DOUBLE_EQ(a.norm(), 5.0);
}

TEST(NormalizeAngle, PrincipalRange) {
  EXPECT_DOUBLE_EQ(normalize_angle(0.0), 0.0);
  EXPECT_DOUBLE_EQ(normalize_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(normalize_angle(-kPi), kPi);  // (-pi, pi]: -pi maps to +pi
  EXPECT_NEAR(normalize_angle(3.0 * kPi), kPi, 1e-12);
  EXPECT_NEAR(normalize_angle(-3.0 * kPi), kPi, 1e-12);
  EXPECT_NEAR(normalize_angle(2.0 * kPi + 0.25), 0.25, 1e-12);
  EXPECT_NEAR(normalize_angle(-2.0 * kPi - 0.25), -0.25, 1e-12);
}

TEST(NormalizeAngle, AlwaysInRange) {
  for (int i = -1000; i <= 1000; ++i) {
    const double a = normalize_angle(0.037 * i);
    ASSERT_GT(a, -kPi - 1e-15);
    ASSERT_LE(a, kPi + 1e-15);
  }
}

TEST(SatOverlap, IdenticalRects) {
  const OrientedRect r{0.0, 0.0, 0.0, 4.5, 2.0};
  EXPECT_TRUE(sat_overlap(r, r));
}

TEST(SatOverlap, FarApartOnX) {
  const OrientedRect a{0.0, 0.0, 0.0, 4.5, 2.0};
  const OrientedRect b{10.0, 0.0, 0.0, 4.5, 2.0};
  EXPECT_FALSE(sat_overlap(a, b));
}

TEST(SatOverlap, JustOverlappingOnX) {
  // Half-lengths sum to 4.5, so 4.4 m spacing intersects.
  const OrientedRect a{0.0, 0.0, 0.0, 4.5, 2.0};
  const OrientedRect b{4.4, 0.0, 0.0, 4.5, 2.0};
  EXPECT_TRUE(sat_overlap(a, b));
}

TEST(SatOverlap, TouchingCountsAsOverlap) {
  const OrientedRect a{0.0, 0.0, 0.0, 4.5, 2.0};
  const OrientedRect b{4.5, 0.0, 0.0, 4.5, 2.0};
  EXPECT_TRUE(sat_overlap(a, b));
}

TEST(SatOverlap, SeparatedLaterally) {
  const OrientedRect a{0.0, 0.0, 0.0, 4.5, 2.0};
  const OrientedRect b{0.0, 2.1, 0.0, 4.5, 2.0};
  EXPECT_FALSE(sat_overlap(a, b));
  const OrientedRect c{0.0, 1.9, 0.0, 4.5, 2.0};
  EXPECT_TRUE(sat_overlap(a, c));
}

TEST(SatOverlap, RotationMatters) {
  // A rect rotated 90 degrees reaches 2.25 m laterally instead of 1.0 m.
  const OrientedRect a{0.0, 0.0, 0.0, 4.5, 2.0};
  const OrientedRect b{0.0, 3.2, kPi / 2.0, 4.5, 2.0};
  EXPECT_TRUE(sat_overlap(a, b));
  const OrientedRect c{0.0, 3.2, 0.0, 4.5, 2.0};
  EXPECT_FALSE(sat_overlap(a, c));
}

TEST(SatOverlap, DiagonalSeparatingAxis) {
  // Corner-to-corner diagonal cases need the second rect's axes.
  const OrientedRect a{0.0, 0.0, 0.0, 4.0, 4.0};
  const OrientedRect b{4.0, 4.0, kPi / 4.0, 4.0, 4.0};
  EXPECT_FALSE(sat_overlap(a, b));
  const OrientedRect c{2.5, 2.5, kPi / 4.0, 4.0, 4.0};
  EXPECT_TRUE(sat_overlap(a, c));
}

TEST(SatOverlap, Symmetric) {
  const OrientedRect a{1.0, 2.0, 0.3, 4.5, 2.0};
  const OrientedRect b{3.0, 2.5, -0.8, 5.0, 2.2};
  EXPECT_EQ(sat_overlap(a, b), sat_overlap(b, a));
}
