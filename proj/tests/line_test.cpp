#include "ccd/line.hpp"
#include "ccd/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

namespace ccd {
namespace {

TEST(Line2D, CanonicalDirection) {
    const Line2D up({0, 0}, {0, -3});
    EXPECT_EQ(up.direction(), (Point2{0.0, 1.0}));
    const Line2D left({0, 0}, {-2, 0});
    EXPECT_EQ(left.direction(), (Point2{1.0, 0.0}));
    const Line2D diag({0, 0}, {-1, -1});
    EXPECT_GT(diag.direction().y, 0.0);
    EXPECT_NEAR(norm(diag.direction()), 1.0, 1e-12);
    EXPECT_THROW(Line2D({0, 0}, {0, 0}), Error);
}

TEST(Line2D, UnitNormInvariantOnRandomDirections) {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const Point2 d{uniform_real(rng, -1e3, 1e3), uniform_real(rng, -1e3, 1e3)};
        if (d == Point2{}) continue;
        const Line2D l({0, 0}, d);
        const auto u = l.direction();
        EXPECT_NEAR(u.x * u.x + u.y * u.y, 1.0, 1e-12);
        EXPECT_TRUE(u.y > 0.0 || (u.y == 0.0 && u.x > 0.0));
    }
}

TEST(Residual, HandGeometry) {
    const Line2D horizontal({0, 0}, {1, 0});
    EXPECT_DOUBLE_EQ(residual(horizontal, Point2{5, 3}), 3.0);
    EXPECT_EQ(residual(horizontal, Point2{17, 0}), 0.0);
    const Line2D diagonal({0, 0}, {1, 1});
    EXPECT_NEAR(residual(diagonal, Point2{1, 0}), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(LeastSquaresLine, ExactOnSlopedLine) {
    std::vector<Point2> pts;
    for (int x = -5; x <= 10; ++x) pts.push_back({static_cast<double>(x), 2.0 * x + 1.0});
    const auto line = least_squares_line(pts);
    for (const auto& p : pts) EXPECT_LT(residual(line, p), 1e-9);
}

TEST(LeastSquaresLine, VerticalLine) {
    std::vector<Point2> pts;
    for (int y = 0; y < 20; ++y) pts.push_back({7.0, static_cast<double>(y)});
    const auto line = least_squares_line(pts);
    EXPECT_EQ(line.direction(), (Point2{0.0, 1.0}));
    EXPECT_EQ(line.anchor().x, 7.0);
}

// Oracle: brute-force the angle minimizing summed squared orthogonal distance
// over a fine grid, for lines through the mean.
TEST(LeastSquaresLine, RectangleCornersMatchBruteForce) {
    const std::vector<Point2> pts{{0, 0}, {2, 0}, {0, 1}, {2, 1}};
    const Point2 mean{1.0, 0.5};
    double best_angle = 0.0, best_cost = 1e300;
    for (int k = 0; k < 180000; ++k) {
        const double a = k * std::numbers::pi / 180000.0;
        const Point2 d{std::cos(a), std::sin(a)};
        double cost = 0.0;
        for (const auto& p : pts) {
            const double r = cross(d, p - mean);
            cost += r * r;
        }
        if (cost < best_cost) {
            best_cost = cost;
            best_angle = a;
        }
    }
    EXPECT_NEAR(best_angle, 0.0, 1e-9);  // frozen: parallel to the long (x) side

    const auto line = least_squares_line(pts);
    EXPECT_EQ(line.anchor(), mean);
    EXPECT_EQ(line.direction(), (Point2{1.0, 0.0}));
}

TEST(LeastSquaresLine, NeedsTwoDistinctPoints) {
    EXPECT_THROW(least_squares_line(std::vector<Point2>{{1, 1}}), Error);
    EXPECT_THROW(least_squares_line(std::vector<Point2>{{1, 1}, {1, 1}, {1, 1}}), Error);
    EXPECT_THROW(least_squares_line(std::vector<Point2>{}), Error);
}

TEST(LeastSquaresLine, RotationEquivariant) {
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const double base = uniform_real(rng, 0, std::numbers::pi);
        const Point2 d{std::cos(base), std::sin(base)};
        const Point2 a{uniform_real(rng, -100, 100), uniform_real(rng, -100, 100)};
        std::vector<Point2> pts;
        for (int i = 0; i < 30; ++i) pts.push_back(a + uniform_real(rng, -200, 200) * d);

        const double phi = uniform_real(rng, -std::numbers::pi, std::numbers::pi);
        std::vector<Point2> rotated;
        for (const auto& p : pts) {
            rotated.push_back({p.x * std::cos(phi) - p.y * std::sin(phi), p.x * std::sin(phi) + p.y * std::cos(phi)});
        }
        const auto l0 = least_squares_line(pts).direction();
        const auto l1 = least_squares_line(rotated).direction();
        const Point2 expected{l0.x * std::cos(phi) - l0.y * std::sin(phi), l0.x * std::sin(phi) + l0.y * std::cos(phi)};
        // Same undirected direction up to sign.
        EXPECT_LT(std::abs(cross(expected, l1)), 1e-9);
    }
}

} // namespace
} // namespace ccd
