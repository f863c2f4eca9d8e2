#include <cmath>

#include <gtest/gtest.h>

#include "deepmorph/eval.hpp"
#include "deepmorph/io.hpp"
#include "deepmorph/synth.hpp"
#include "support/fixtures.hpp"
#include "support/tempdir.hpp"

using namespace deepmorph;
using namespace deepmorph::eval;
using testing_support::TempDir;

TEST(Aggregate, MeanMedianMax) {
    const std::vector<CaseRecord> records{{"a", "clean", "m", 1.0}, {"b", "clean", "m", 4.0},
                                          {"c", "clean", "m", 2.0}, {"d", "clean", "m", 3.0},
                                          {"e", "occluded", "m", 7.0}, {"a", "clean", "k", 0.5}};
    const auto aggs = aggregate(records);
    ASSERT_EQ(aggs.size(), 3u);
    EXPECT_EQ(aggs[0].metric, "k");
    EXPECT_EQ(aggs[1].metric, "m");
    EXPECT_EQ(aggs[1].count, 4u);
    EXPECT_DOUBLE_EQ(aggs[1].mean, 2.5);
    EXPECT_DOUBLE_EQ(aggs[1].median, 2.5);
    EXPECT_DOUBLE_EQ(aggs[1].max, 4.0);
    EXPECT_EQ(aggs[2].stratum, "occluded");
    EXPECT_DOUBLE_EQ(aggs[2].median, 7.0);
}

TEST(CircleSuite, CleanOccludedAndGated) {
    std::vector<CircleFixture> fx;
    fx.push_back({"c0", synth::confmap_from_circle(Circle(40, 40, 20), 80, 80, {}), Circle(40, 40, 20), false});
    fx.push_back({"c1", synth::apply_squares(synth::confmap_from_circle(Circle(40, 40, 20), 80, 80, {}), {{50, 30, 20}}),
                  Circle(40, 40, 20), true});
    fx.push_back({"c2", ConfidenceMap::zeros(80, 80), Circle(1, 1, 1), false});
    const auto report = evaluate_circle_suite(fx);
    EXPECT_EQ(report.find(kClean, "rmse_algebraic").count, 1u);
    EXPECT_LT(report.find(kClean, "rmse_geometric").max, 0.5);
    EXPECT_LT(report.find(kOccluded, "rmse_geometric").max, 0.5);
    EXPECT_EQ(report.find(kClean, "no_detection_algebraic").count, 1u);
    EXPECT_FALSE(report.has(kOccluded, "no_detection_geometric"));
    EXPECT_THROW(report.find("nope", "rmse_geometric"), Error);
    try {
        evaluate_circle_suite(std::vector<CircleFixture>{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyFixtureSet);
    }
}

TEST(CircleSuite, DirectoryLoaderAndReport) {
    TempDir dir;
    for (int i = 0; i < 3; ++i) {
        const Circle c(30 + i, 35, 15 + i);
        const std::string id = "fx" + std::to_string(i);
        io::write_cmap(dir / (id + ".cmap"), synth::confmap_from_circle(c, 70, 70, {}));
        io::FixtureTruth t;
        t.circle = c;
        if (i == 2) t.squares = {{0, 0, 3}};
        io::write_truth(dir / (id + ".truth"), t);
    }
    io::write_text(dir / "orphan.cmap.txt", "ignored");
    const auto loaded = load_circle_fixtures(dir.path());
    ASSERT_EQ(loaded.size(), 3u);
    EXPECT_EQ(loaded[0].id, "fx0");
    EXPECT_TRUE(loaded[2].occluded);
    const auto report = evaluate_circle_suite(dir.path());
    EXPECT_EQ(report.find(kClean, "rmse_algebraic").count, 2u);
    EXPECT_EQ(report.find(kOccluded, "rmse_algebraic").count, 1u);
    write_report(report, dir / "r.records", dir / "r.summary");
    const std::string records = io::read_text(dir / "r.records");
    EXPECT_NE(records.find("fx1 clean rmse_geometric "), std::string::npos);
    const std::string summary = io::read_text(dir / "r.summary");
    EXPECT_NE(summary.find("occluded rmse_algebraic 1 "), std::string::npos);

    TempDir empty;
    EXPECT_THROW(evaluate_circle_suite(empty.path()), Error);
}

TEST(ShapeSuite, FitsAndFailures) {
    const auto model = fixtures::shape_model(3);
    SeededRng rng(90);
    const auto fx = fixtures::in_span_case(model, rng, 320);
    std::vector<ShapeFixture> suite;
    suite.push_back({"s0", synth::confmap_from_outline(fx.outline, 320, 320, {}), fx.outline, false});
    suite.push_back({"s1", ConfidenceMap::zeros(320, 320), fx.outline, true});
    const auto report = evaluate_shape_suite(suite, model);
    EXPECT_LT(report.find(kClean, "point_to_curve_rmse").max, 1.0);
    EXPECT_EQ(report.find(kClean, "converged").count, 1u);
    EXPECT_EQ(report.find(kOccluded, "fit_failed").count, 1u);
    EXPECT_FALSE(report.has(kOccluded, "point_to_curve_rmse"));
}
