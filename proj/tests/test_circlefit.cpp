#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "deepmorph/circlefit.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace deepmorph;
using namespace deepmorph::circlefit;

namespace {

void expect_circle(const Circle& got, double cx, double cy, double r, double tol) {
    EXPECT_NEAR(got.cx(), cx, tol);
    EXPECT_NEAR(got.cy(), cy, tol);
    EXPECT_NEAR(got.r(), r, tol);
}

double algebraic_cost_oracle(const PointSet& pts, double B, double C, double D) {
    double s = 0.0;
    for (const auto& p : pts) {
        const double v = p.x() * p.x() + p.y() * p.y() + B * p.x() + C * p.y() + D;
        s += v * v;
    }
    return s;
}

}  // namespace

TEST(AlgebraicFit, ExactCircles) {
    expect_circle(fit_circle_algebraic({Point2(1, 0), Point2(0, 1), Point2(-1, 0), Point2(0, -1)}), 0, 0, 1, 1e-12);
    expect_circle(fit_circle_algebraic({Point2(7, 0), Point2(-1, 0), Point2(3, 4), Point2(3, -4)}), 3, 0, 4, 1e-12);
}

TEST(AlgebraicFit, Degenerate) {
    EXPECT_THROW(fit_circle_algebraic({Point2(0, 0), Point2(1, 1)}), Error);
    try {
        fit_circle_algebraic({Point2(0, 0), Point2(1, 1), Point2(2, 2), Point2(5, 5)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateInput);
    }
    EXPECT_THROW(fit_circle_algebraic({Point2(1, 1), Point2(1, 1), Point2(1, 1)}), Error);
}

TEST(AlgebraicFit, CoefficientsMinimizeAlgebraicCostOnGrid) {
    SeededRng rng(40);
    const PointSet pts = gen::on_circle(rng, Point2(10, 20), 5, 40, 0.3);
    const auto k = fit_circle_algebraic_coefficients(pts);
    const double best = algebraic_cost_oracle(pts, k.B, k.C, k.D);
    EXPECT_NEAR(algebraic_cost(pts, k), best, 1e-9 * best);
    // Dense neighbourhood grid: nothing beats the returned coefficients.
    double grid_min = 1e300;
    for (int i = -10; i <= 10; ++i)
        for (int j = -10; j <= 10; ++j)
            for (int l = -10; l <= 10; ++l)
                grid_min = std::min(grid_min, algebraic_cost_oracle(pts, k.B + 0.01 * i, k.C + 0.01 * j, k.D + 0.05 * l));
    EXPECT_LE(best, grid_min * (1.0 + 1e-12));
}

TEST(AlgebraicFit, CoefficientRoundTrip) {
    const Circle c(3, -2, 7);
    const auto k = AlgebraicCircleCoefficients::from_circle(c);
    EXPECT_NEAR(k.radicand(), 49.0, 1e-12);
    expect_circle(k.to_circle(), 3, -2, 7, 1e-12);
    EXPECT_THROW((AlgebraicCircleCoefficients{0, 0, 1}.to_circle()), Error);
}

TEST(AlgebraicFit, ExactRecoveryProperty) {
    gen::for_all(41, 200, [](SeededRng& rng) {
        const Point2 c = gen::point(rng, -500, 500);
        const double r = gen::uniform(rng, 1, 300);
        const int n = static_cast<int>(rng.uniform_int(3, 30));
        const auto fit = fit_circle_algebraic(gen::on_circle(rng, c, r, n));
        EXPECT_LE(circle_param_rmse(fit, Circle(c.x(), c.y(), r)), 1e-9);
    });
}

TEST(AlgebraicFit, ThreePointsMatchCircumcircleOracle) {
    gen::for_all(42, 100, [](SeededRng& rng) {
        const PointSet p = gen::cloud(rng, 3, 0, 100);
        const auto o = oracle::circumcircle(p[0], p[1], p[2]);
        if (o[2] > 1e4) return;  // nearly collinear draw
        const auto fit = fit_circle_algebraic(p);
        EXPECT_NEAR(fit.cx(), o[0], 1e-7 * o[2]);
        EXPECT_NEAR(fit.cy(), o[1], 1e-7 * o[2]);
        EXPECT_NEAR(fit.r(), o[2], 1e-7 * o[2]);
    });
}

TEST(GeometricFit, InitAtTruthStays) {
    SeededRng rng(43);
    const PointSet pts = gen::on_circle(rng, Point2(5, 5), 10, 30);
    const auto res = fit_circle_geometric(pts, Circle(5, 5, 10));
    expect_circle(res.circle, 5, 5, 10, 1e-12);
    EXPECT_LT(res.cost, 1e-20);
    EXPECT_TRUE(res.converged);
}

TEST(GeometricFit, PerturbedInitConverges) {
    SeededRng rng(44);
    const PointSet pts = gen::on_circle(rng, Point2(5, 5), 10, 30);
    const auto res = fit_circle_geometric(pts, Circle(6, 6, 10.5));
    expect_circle(res.circle, 5, 5, 10, 1e-6);
    EXPECT_TRUE(res.converged);
}

TEST(GeometricFit, NoisyHalfArcNotWorseThanAlgebraic) {
    SeededRng rng(45);
    const PointSet pts = gen::on_circle(rng, Point2(50, 50), 30, 60, 0.5, 0.0, 2.0 * std::numbers::pi / 3.0);
    const Circle alg = fit_circle_algebraic(pts);
    const Circle geo = fit_circle_geometric(pts, alg).circle;
    const std::vector<oracle::P2> op(pts.begin(), pts.end());
    EXPECT_LE(oracle::circle_cost(op, geo.cx(), geo.cy(), geo.r()), oracle::circle_cost(op, alg.cx(), alg.cy(), alg.r()));
    EXPECT_NEAR(geometric_cost(pts, geo), oracle::circle_cost(op, geo.cx(), geo.cy(), geo.r()), 1e-9);
}

TEST(GeometricFit, NeverIncreasesCostProperty) {
    gen::for_all(46, 100, [](SeededRng& rng) {
        const PointSet pts = gen::on_circle(rng, gen::point(rng, 0, 100), gen::uniform(rng, 5, 50),
                                            static_cast<int>(rng.uniform_int(5, 80)), gen::uniform(rng, 0, 3),
                                            gen::uniform(rng, 0, 6), gen::uniform(rng, 0.5, 6.3));
        const Circle init(gen::uniform(rng, 0, 100), gen::uniform(rng, 0, 100), gen::uniform(rng, 1, 60));
        const std::vector<oracle::P2> op(pts.begin(), pts.end());
        const auto res = fit_circle_geometric(pts, init);
        EXPECT_LE(oracle::circle_cost(op, res.circle.cx(), res.circle.cy(), res.circle.r()),
                  oracle::circle_cost(op, init.cx(), init.cy(), init.r()));
    });
}

TEST(GeometricFit, IterationCapReportsNonConvergence) {
    SeededRng rng(47);
    const PointSet pts = gen::on_circle(rng, Point2(0, 0), 10, 30, 1.0);
    GeometricFitConfig cfg;
    cfg.max_iterations = 1;
    const auto res = fit_circle_geometric(pts, Circle(3, 3, 4), cfg);
    EXPECT_FALSE(res.converged);
    EXPECT_LE(res.iterations, 1);
    cfg.max_iterations = 0;
    EXPECT_THROW(fit_circle_geometric(pts, Circle(3, 3, 4), cfg), Error);
}

TEST(CircleFit, TranslationAndRotationEquivariance) {
    gen::for_all(48, 50, [](SeededRng& rng) {
        const Point2 c = gen::point(rng, -20, 20);
        const double r = gen::uniform(rng, 2, 30);
        const PointSet pts = gen::on_circle(rng, c, r, 12);
        const Point2 shift = gen::point(rng, -100, 100);
        const double a = gen::uniform(rng, -3, 3);
        const Point2 pivot = gen::point(rng, -50, 50);
        Eigen::Matrix2d rot;
        rot << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        PointSet moved;
        for (const auto& p : pts) moved.push_back(rot * (p - pivot) + pivot + shift);
        const Point2 c2 = rot * (c - pivot) + pivot + shift;
        for (const auto m : {Method::Algebraic, Method::Geometric}) {
            const Circle base = m == Method::Algebraic ? fit_circle_algebraic(pts)
                                                       : fit_circle_geometric(pts, fit_circle_algebraic(pts)).circle;
            const Circle got = m == Method::Algebraic ? fit_circle_algebraic(moved)
                                                      : fit_circle_geometric(moved, fit_circle_algebraic(moved)).circle;
            const Point2 want = rot * (base.center() - pivot) + pivot + shift;
            EXPECT_NEAR(got.cx(), want.x(), 1e-9);
            EXPECT_NEAR(got.cy(), want.y(), 1e-9);
            EXPECT_NEAR(got.r(), base.r(), 1e-9);
            EXPECT_NEAR(got.cx(), c2.x(), 1e-8);
        }
    });
}

TEST(DetectCircle, GateAndEmptyMap) {
    std::vector<float> v(100 * 100, 0.0f);
    for (int i = 0; i < 99; ++i) v[static_cast<std::size_t>(i)] = 1.0f;
    const auto det = detect_circle(ConfidenceMap(100, 100, v));
    EXPECT_FALSE(det.detected());
    EXPECT_EQ(det.reason, NoDetectionReason::TooFewForeground);
    EXPECT_EQ(det.n_points, 99u);
    EXPECT_EQ(detect_circle(ConfidenceMap::zeros(50, 50)).reason, NoDetectionReason::TooFewForeground);
    EXPECT_THROW(detect_circle(ConfidenceMap::zeros(5, 5), 0.5, 2), Error);
}

TEST(DetectCircle, CollinearForegroundIsDegenerate) {
    std::vector<float> v(200 * 10, 0.0f);
    for (int x = 0; x < 150; ++x) v[static_cast<std::size_t>(5 * 200 + x)] = 1.0f;
    const auto det = detect_circle(ConfidenceMap(200, 10, v));
    EXPECT_FALSE(det.detected());
    EXPECT_EQ(det.reason, NoDetectionReason::DegenerateInput);
}

TEST(DetectCircle, RasterizedCircle) {
    std::vector<float> v(128 * 128, 0.0f);
    for (int i = 0; i < 2000; ++i) {
        const double t = 2.0 * std::numbers::pi * i / 2000.0;
        const int x = static_cast<int>(std::lround(64 + 30 * std::cos(t)));
        const int y = static_cast<int>(std::lround(64 + 30 * std::sin(t)));
        v[static_cast<std::size_t>(y * 128 + x)] = 1.0f;
    }
    const ConfidenceMap map(128, 128, v);
    for (const auto m : {Method::Algebraic, Method::Geometric}) {
        const auto det = detect_circle(map, 0.5, 100, {}, m);
        ASSERT_TRUE(det.detected());
        EXPECT_LE(circle_param_rmse(*det.circle, Circle(64, 64, 30)), 0.5);
        EXPECT_EQ(det.method, m);
    }
    const auto geo = detect_circle(map, 0.5, 100, {}, Method::Geometric);
    const auto alg = detect_circle(map, 0.5, 100, {}, Method::Algebraic);
    EXPECT_LE(geo.cost, alg.cost);
}

TEST(DetectCircle, RecordFormat) {
    Detection d;
    d.circle = Circle(1.5, 2, 3);
    d.cost = 0.25;
    d.n_points = 120;
    d.method = Method::Geometric;
    EXPECT_EQ(format_detection(d), "1.5 2 3 0.25 120 geometric");
    EXPECT_EQ(method_from_string("algebraic"), Method::Algebraic);
    EXPECT_THROW(method_from_string("hough"), Error);
    EXPECT_THROW(format_detection(Detection{}), Error);
}
