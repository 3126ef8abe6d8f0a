#include "ccd/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

namespace ccd {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

TEST(RenderLineHeatmap, ProfileValues) {
    const Segment seg{{10.0, 10.0}, {10.0, 50.0}};
    const auto r = render_line_heatmap(seg, 3.0, 64, 64);
    EXPECT_EQ(r.at(10, 30), 1.0);
    EXPECT_EQ(r.at(13, 30), std::exp(-0.5));
    // beyond the end cap the distance is to the endpoint
    EXPECT_NEAR(r.at(10, 54), std::exp(-16.0 / 18.0), 1e-15);
}

// Oracle: Gaussian of the perpendicular distance computed by hand for a
// diagonal segment, scanned across a row.
TEST(RenderLineHeatmap, DiagonalScanlineMatchesHandProfile) {
    const Segment seg{{0.0, 0.0}, {100.0, 100.0}};
    const double sigma = 2.5;
    const auto r = render_line_heatmap(seg, sigma, 101, 101);
    for (int x = 30; x <= 70; ++x) {
        const double d = std::abs(x - 50.0) / std::sqrt(2.0);
        EXPECT_NEAR(r.at(x, 50), std::exp(-d * d / (2 * sigma * sigma)), 1e-12) << x;
    }
}

TEST(RenderLineHeatmap, RejectsDegenerateInput) {
    EXPECT_THROW(render_line_heatmap({{1, 1}, {1, 1}}, 3.0, 8, 8), Error);
    EXPECT_THROW(render_line_heatmap({{1, 1}, {5, 1}}, 0.0, 8, 8), Error);
}

TEST(SyntheticSpec, Validation) {
    SyntheticSpec s;
    EXPECT_NO_THROW(s.validate());
    s.width = 100;
    EXPECT_THROW(s.validate(), Error);
    s = {};
    s.outlier_fraction = 1.0;
    EXPECT_THROW(s.validate(), Error);
    s = {};
    s.blur_noise = 0.2;
    EXPECT_THROW(s.validate(), Error);
}

TEST(GenerateCase, HasTwelveChannelsAndBothSides) {
    const auto c = generate_case({}, 0);
    EXPECT_EQ(c.heatmap.channels().size(), 12u);
    ASSERT_TRUE(c.truth.left && c.truth.right);
    // Right femur on the image's left half.
    EXPECT_LT(c.truth.right->shaft.first.x, 256.0);
    EXPECT_GT(c.truth.left->shaft.first.x, 256.0);
}

TEST(GenerateCase, CleanCaseRecoversTruthCcd) {
    const auto c = generate_case({}, 3);
    for (Side side : {Side::Left, Side::Right}) {
        const auto m = measure_femur(c.heatmap, side);
        EXPECT_NEAR(m.ccd_degrees, c.truth.side(side)->ccd, 0.1) << to_string(side);
    }
}

TEST(GenerateCase, TruthCcdWithinConfiguredRange) {
    SyntheticSpec spec;
    spec.seed = 99;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        // geometry only: rendering 1000 rasters is not needed to check the draw
        Rng rng(derive_seed(spec.seed, i));
        for (Side side : {Side::Right, Side::Left}) {
            const auto g = detail::draw_side(rng, side, spec.width, spec.height);
            EXPECT_GE(g.truth.ccd, kMinSyntheticCcd - 1e-9);
            EXPECT_LE(g.truth.ccd, kMaxSyntheticCcd + 1e-9);
        }
    }
}

TEST(GenerateCase, StoredCcdMatchesSegments) {
    const auto c = generate_case({}, 11);
    for (Side side : {Side::Left, Side::Right}) {
        const auto& t = *c.truth.side(side);
        EXPECT_EQ(t.ccd, ccd_angle(line_from_segment(t.neck), line_from_segment(t.shaft)));
    }
}

TEST(GenerateCase, DeterministicForSameSeed) {
    SyntheticSpec spec;
    spec.outlier_fraction = 0.2;
    spec.blur_noise = 0.05;
    spec.seed = 5;
    const auto a = generate_case(spec, 2);
    const auto b = generate_case(spec, 2);
    EXPECT_EQ(a.heatmap, b.heatmap);
    EXPECT_EQ(truth_to_json(a.truth), truth_to_json(b.truth));
    const auto other = generate_case(spec, 3);
    EXPECT_NE(truth_to_json(a.truth), truth_to_json(other.truth));
}

// Every clean above-cutoff pixel lies within the closed-form band half-width
// of its generating segment.
TEST(GenerateCase, CleanBandProperty) {
    const auto c = generate_case({}, 7);
    const double half = band_half_width(3.0, kDefaultCutoff);
    for (Side side : {Side::Left, Side::Right}) {
        const auto& t = *c.truth.side(side);
        for (const auto& [name, seg] : {std::pair{neck_centerline(side), t.neck}, std::pair{shaft_centerline(side), t.shaft}}) {
            const auto cloud = threshold_points(*c.heatmap.find(name), kDefaultCutoff);
            ASSERT_FALSE(cloud.empty());
            for (const auto& p : cloud) EXPECT_LE(point_segment_distance({p.x, p.y}, seg), half + 1e-9);
        }
    }
}

TEST(GenerateCase, OutliersAddAboveCutoffPixels) {
    SyntheticSpec clean, dirty;
    dirty.outlier_fraction = 0.2;
    const auto a = generate_case(clean, 0);
    const auto b = generate_case(dirty, 0);
    const auto name = neck_centerline(Side::Left);
    const auto na = threshold_points(*a.heatmap.find(name), kDefaultCutoff).size();
    const auto nb = threshold_points(*b.heatmap.find(name), kDefaultCutoff).size();
    EXPECT_GT(nb, na);
    EXPECT_LE(nb, na + static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(na))));
}

TEST(Truth, JsonRoundTrip) {
    const auto c = generate_case({}, 1);
    const auto back = truth_from_json(nlohmann::json::parse(truth_to_json(c.truth).dump()));
    ASSERT_TRUE(back.left && back.right);
    EXPECT_EQ(back.left->neck, c.truth.left->neck);
    EXPECT_EQ(back.right->shaft, c.truth.right->shaft);
    EXPECT_EQ(back.right->ccd, c.truth.right->ccd);
}

TEST(Truth, MissingFileNamesPath) {
    try {
        load_truth("/nonexistent/dir/truth.json");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Io);
        EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/truth.json"), std::string::npos);
    }
}

TEST(WriteDataset, LayoutAndByteIdenticalRerun) {
    const auto root = fs::temp_directory_path() / "ccd_synth_dataset";
    fs::remove_all(root);
    SyntheticSpec spec;
    spec.cases = 3;
    spec.width = spec.height = 128;
    const auto manifests = write_dataset(spec, root / "a", 2);
    ASSERT_EQ(manifests.size(), 3u);
    for (int i = 0; i < 3; ++i) {
        const auto dir = root / "a" / case_directory_name(static_cast<std::uint64_t>(i));
        EXPECT_EQ(manifests[static_cast<std::size_t>(i)], dir / "manifest.json");
        EXPECT_TRUE(fs::exists(dir / "truth.json"));
        std::size_t pngs = 0;
        for (const auto& e : fs::directory_iterator(dir)) pngs += e.path().extension() == ".png";
        EXPECT_EQ(pngs, 12u);
    }
    write_dataset(spec, root / "b", 1);
    for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), root / "a");
        EXPECT_EQ(slurp(e.path()), slurp(root / "b" / rel)) << rel;
    }
    fs::remove_all(root);
}

TEST(WriteDataset, LoadedCaseMatchesGenerated) {
    const auto root = fs::temp_directory_path() / "ccd_synth_roundtrip";
    fs::remove_all(root);
    SyntheticSpec spec;
    spec.width = spec.height = 160;
    const auto manifests = write_dataset(spec, root);
    EXPECT_EQ(load_heatmap(manifests[0]), quantized(generate_case(spec, 0).heatmap));
    fs::remove_all(root);
}

} // namespace
} // namespace ccd
