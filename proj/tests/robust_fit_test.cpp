#include "ccd/geometry.hpp"
#include "ccd/random.hpp"
#include "ccd/robust_fit.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

namespace ccd {
namespace {

struct Contaminated {
    Line2D truth;
    std::vector<Point2> points;
    std::vector<bool> is_inlier;
};

// Exact points on a random line through the raster plus uniform outliers.
// A uniform draw landing inside the inlier band is by definition an inlier,
// so outliers are redrawn until they sit beyond `band`.
Contaminated make_contaminated(std::uint64_t seed, int inliers, int outliers, double band, double size = 512.0) {
    Rng rng(seed);
    const double angle = uniform_real(rng, 0.0, std::numbers::pi);
    const Point2 dir{std::cos(angle), std::sin(angle)};
    const Point2 center{uniform_real(rng, 0.4 * size, 0.6 * size), uniform_real(rng, 0.4 * size, 0.6 * size)};
    Contaminated c{Line2D(center, dir), {}, {}};
    for (int i = 0; i < inliers; ++i) {
        c.points.push_back(center + uniform_real(rng, -0.35 * size, 0.35 * size) * dir);
        c.is_inlier.push_back(true);
    }
    for (int i = 0; i < outliers; ++i) {
        Point2 p;
        do {
            p = {uniform_real(rng, 0.0, size), uniform_real(rng, 0.0, size)};
        } while (residual(c.truth, p) <= band);
        // interleave so inliers are not all first
        const auto at = uniform_index(rng, c.points.size() + 1);
        c.points.insert(c.points.begin() + static_cast<std::ptrdiff_t>(at), p);
        c.is_inlier.insert(c.is_inlier.begin() + static_cast<std::ptrdiff_t>(at), false);
    }
    return c;
}

double angle_error_deg(const Line2D& a, const Line2D& b) { return direction_gap(a, b) * 180.0 / std::numbers::pi; }

TEST(RansacConfig, Validation) {
    RansacConfig c;
    EXPECT_NO_THROW(c.validate());
    c.min_inliers = 1;
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.residual_threshold = 0.0;
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.max_iterations = 0;
    EXPECT_THROW(c.validate(), Error);
}

TEST(RansacFit, RecoversLineAmongOutliers) {
    RansacConfig config;
    const auto data = make_contaminated(42, 100, 20, config.residual_threshold);
    const auto fit = ransac_fit(data.points, config);
    double worst = 0.0;
    for (std::size_t i = 0; i < data.points.size(); ++i) {
        if (data.is_inlier[i]) {
            worst = std::max(worst, residual(fit.line, data.points[i]));
            EXPECT_TRUE(fit.inlier_flags[i]);
        }
    }
    EXPECT_LT(worst, 1e-6);
    EXPECT_EQ(fit.inlier_count, 100u);
}

TEST(RansacFit, TwoPoints) {
    RansacConfig config;
    config.min_inliers = 2;
    const std::vector<Point2> pts{{3, 4}, {10, 20}};
    const auto fit = ransac_fit(pts, config);
    EXPECT_EQ(fit.inlier_count, 2u);
    EXPECT_LT(residual(fit.line, pts[0]), 1e-12);
    EXPECT_LT(residual(fit.line, pts[1]), 1e-12);
}

TEST(RansacFit, TooFewPointsIsFitFailure) {
    RansacConfig config;
    config.min_inliers = 11;
    std::vector<Point2> pts;
    for (int i = 0; i < 10; ++i) pts.push_back({static_cast<double>(i), 0.0});
    try {
        ransac_fit(pts, config);
        FAIL();
    } catch (const FitFailedError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::FitFailed);
    }
}

TEST(RansacFit, ScatteredPointsFailWithBestCount) {
    RansacConfig config;
    config.min_inliers = 10;
    config.residual_threshold = 0.5;
    // points on a parabola: no 10 of them within 0.5 px of one line
    std::vector<Point2> pts;
    for (int i = -10; i <= 10; ++i) pts.push_back({10.0 * i, 2.0 * i * i});
    try {
        ransac_fit(pts, config);
        FAIL();
    } catch (const FitFailedError& e) {
        EXPECT_GE(e.best_count(), 2u);
        EXPECT_LT(e.best_count(), 10u);
    }
}

TEST(RansacFit, CoincidentPointsNeverFormACandidate) {
    RansacConfig config;
    config.min_inliers = 2;
    const std::vector<Point2> pts(12, Point2{5, 5});
    EXPECT_THROW(ransac_fit(pts, config), FitFailedError);
}

TEST(RansacFit, DeterministicPerSeed) {
    RansacConfig config;
    const auto data = make_contaminated(9, 60, 30, config.residual_threshold);
    for (std::uint64_t seed : {0ULL, 1ULL, 12345ULL}) {
        config.seed = seed;
        EXPECT_EQ(ransac_fit(data.points, config), ransac_fit(data.points, config));
    }
}

TEST(RansacFit, InlierSoundness) {
    RansacConfig config;
    Rng rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        // noisy band so inliers are not exact
        std::vector<Point2> pts;
        for (int i = 0; i < 80; ++i) {
            pts.push_back({uniform_real(rng, 0, 300), 0.0});
            pts.back().y = 0.3 * pts.back().x + uniform_real(rng, -1.5, 1.5);
        }
        for (int i = 0; i < 20; ++i) pts.push_back({uniform_real(rng, 0, 300), uniform_real(rng, 0, 300)});
        config.seed = static_cast<std::uint64_t>(trial);
        const auto fit = ransac_fit(pts, config);
        std::size_t count = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            EXPECT_EQ(fit.inlier_flags[i], residual(fit.line, pts[i]) <= config.residual_threshold);
            count += fit.inlier_flags[i];
        }
        EXPECT_EQ(count, fit.inlier_count);
    }
}

TEST(RansacFit, OutlierRobustnessOverSeeds) {
    RansacConfig config;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        // 50 inliers + 30% of the total as outliers
        const auto data = make_contaminated(1000 + seed, 50, 21, config.residual_threshold);
        config.seed = seed;
        const auto fit = ransac_fit(data.points, config);
        EXPECT_LT(angle_error_deg(fit.line, data.truth), 0.01) << "seed " << seed;
    }
}

TEST(HuberRefine, CollinearInliersAreAFixedPoint) {
    std::vector<Point2> pts;
    for (int i = 0; i < 25; ++i) pts.push_back({1.0 + 3.0 * i, 2.0 - 1.5 * i});
    const std::vector<bool> flags(pts.size(), true);
    const auto initial = least_squares_line(pts);
    EXPECT_EQ(huber_refine(pts, flags, initial, 1.35), initial);
}

// Oracle: the constructed line is the truth; compare both estimators against it.
TEST(HuberRefine, DownweightsAnOffsetPoint) {
    const double delta = 1.35;
    const Line2D truth({100, 100}, {1, 0.2});
    std::vector<Point2> pts;
    for (int i = -20; i <= 20; ++i) pts.push_back(truth.at(5.0 * i));
    pts.push_back(truth.at(90.0) + (3.0 * delta) * truth.normal());
    const std::vector<bool> flags(pts.size(), true);

    const auto ls = least_squares_line(pts);
    const auto huber = huber_refine(pts, flags, ls, delta);
    EXPECT_LT(direction_gap(huber, truth), direction_gap(ls, truth));
}

TEST(HuberRefine, HugeDeltaDegeneratesToLeastSquares) {
    Rng rng(4);
    std::vector<Point2> pts;
    for (int i = 0; i < 50; ++i) pts.push_back({uniform_real(rng, 0, 100), uniform_real(rng, 0, 10)});
    const std::vector<bool> flags(pts.size(), true);
    const auto ls = least_squares_line(pts);
    const auto start = Line2D(ls.anchor() + Point2{0.5, -0.3}, ls.direction() + Point2{0.0, 0.05});
    const auto huber = huber_refine(pts, flags, start, 1e9);
    EXPECT_LT(direction_gap(huber, ls), 1e-9);
    EXPECT_LT(distance(huber.anchor(), ls.anchor()), 1e-9);
}

TEST(HuberRefine, UsesOnlyFlaggedPoints) {
    std::vector<Point2> pts{{0, 0}, {10, 0}, {20, 0}, {5, 50}};
    const std::vector<bool> flags{true, true, true, false};
    const auto line = huber_refine(pts, flags, Line2D({0, 1}, {1, 0.1}), 1.35);
    EXPECT_LT(std::abs(line.direction().y), 1e-9);
}

TEST(HuberRefine, NeedsTwoInliers) {
    const std::vector<Point2> pts{{0, 0}, {1, 1}};
    EXPECT_THROW(huber_refine(pts, {true, false}, Line2D({0, 0}, {1, 1}), 1.0), Error);
}

} // namespace
} // namespace ccd
