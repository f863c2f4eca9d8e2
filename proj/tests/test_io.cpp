#include <cmath>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "deepmorph/io.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"
#include "support/tempdir.hpp"

using namespace deepmorph;
using testing_support::TempDir;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Cmap, BitExactRoundTrip) {
    gen::for_all(80, 10, [](SeededRng& rng) {
        const int w = static_cast<int>(rng.uniform_int(1, 30));
        const int h = static_cast<int>(rng.uniform_int(1, 30));
        std::vector<float> v(static_cast<std::size_t>(w * h));
        for (auto& x : v) x = static_cast<float>(rng.uniform());
        const ConfidenceMap map(w, h, v);
        std::stringstream ss;
        io::write_cmap(ss, map);
        const auto back = io::read_cmap(ss);
        EXPECT_EQ(back.width(), w);
        EXPECT_EQ(back.height(), h);
        EXPECT_EQ(fixtures::values_of(back), fixtures::values_of(map));
    });
}

TEST(Cmap, RejectsBadStreams) {
    std::stringstream bad("CMAP 2 1 1\n");
    EXPECT_EQ(code_of([&] { io::read_cmap(bad); }), ErrorCode::Parse);
    std::stringstream truncated("CMAP 1 2 2\n\x01\x02");
    EXPECT_EQ(code_of([&] { io::read_cmap(truncated); }), ErrorCode::Parse);
    EXPECT_EQ(code_of([] { io::read_cmap(std::filesystem::path("/nonexistent/x.cmap")); }), ErrorCode::Io);
}

TEST(PointList, RoundTripAndClosedFlag) {
    const PointSet pts{Point2(0.1, 2), Point2(-3.25, 1e-9), Point2(7, 8)};
    for (const bool closed : {false, true}) {
        std::stringstream ss;
        io::write_polyline(ss, pts, closed);
        const auto back = io::read_point_list(ss);
        EXPECT_EQ(back.closed, closed);
        EXPECT_EQ(back.points, pts);
    }
    std::stringstream junk("1,2\nabc\n");
    EXPECT_EQ(code_of([&] { io::read_point_list(junk); }), ErrorCode::Parse);
}

TEST(Pgm, RoundTrip) {
    TempDir dir;
    GrayImage img(5, 3);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 5; ++x) img.at(x, y) = static_cast<std::uint8_t>(x * 40 + y);
    io::write_pgm(dir / "a.pgm", img);
    EXPECT_EQ(io::read_pgm(dir / "a.pgm"), img);
    io::write_text(dir / "b.pgm", "P2\n1 1\n255\n0\n");
    EXPECT_EQ(code_of([&] { io::read_pgm(dir / "b.pgm"); }), ErrorCode::Parse);
}

TEST(Ctvol, RoundTrip) {
    TempDir dir;
    auto vol = drr::CtVolume::filled({3, 2, 4}, drr::Vec3(0.5, 1, 2), drr::Vec3(-1, 2, -3), -1024.0f);
    vol.set_voxel(1, 1, 2, 1500.0f);
    vol.set_voxel(2, 0, 3, -7.0f);
    io::write_ctvol(dir / "v.ctvol", vol);
    const auto back = io::read_ctvol(dir / "v.ctvol");
    EXPECT_EQ(back.dims(), vol.dims());
    EXPECT_EQ(back.spacing(), vol.spacing());
    EXPECT_EQ(back.origin(), vol.origin());
    EXPECT_EQ(back.values(), vol.values());
}

TEST(Obj, RoundTripAndSubset) {
    TempDir dir;
    const auto mesh = fixtures::cube_mesh(drr::Vec3(1, 2, 3), 4.0, 3);
    io::write_obj(dir / "m.obj", mesh);
    const auto back = io::read_obj(dir / "m.obj");
    EXPECT_EQ(back.vertices, mesh.vertices);
    EXPECT_EQ(back.faces, mesh.faces);
    std::stringstream ss("# comment\nv 0 0 0\nv 1 0 0\nvn 0 0 1\nv 0 1 0\nf 1/1 2/2 3/3\n");
    const auto tri = io::read_obj(ss);
    ASSERT_EQ(tri.faces.size(), 1u);
    EXPECT_EQ(tri.faces[0], (std::array<int, 3>{0, 1, 2}));
    std::stringstream bad("v 0 0 0\nf 1 2\n");
    EXPECT_EQ(code_of([&] { io::read_obj(bad); }), ErrorCode::Parse);
}

TEST(Pdm, RoundTripKeepsInvariants) {
    const auto m = fixtures::shape_model(3);
    std::stringstream ss;
    io::write_pdm(ss, m);
    const auto back = io::read_pdm(ss);
    EXPECT_EQ(back.mean().coords(), m.mean().coords());
    EXPECT_EQ(back.modes(), m.modes());
    EXPECT_EQ(back.eigenvalues(), m.eigenvalues());
    std::stringstream bad("PDM 1 3 1\n1 2\n");
    EXPECT_EQ(code_of([&] { io::read_pdm(bad); }), ErrorCode::Parse);
}

TEST(CircleRecord, ParseForms) {
    EXPECT_EQ(io::parse_circle_record("1.5 2 3 0.25 120 geometric"), Circle(1.5, 2, 3));
    EXPECT_EQ(io::parse_circle_record("circle 4 5 6"), Circle(4, 5, 6));
    EXPECT_EQ(code_of([] { io::parse_circle_record("1 2"); }), ErrorCode::Parse);
    const Circle c(1.0 / 3.0, 2e-7, 123.456789);
    EXPECT_EQ(io::parse_circle_record(io::format_circle(c)), c);
}

TEST(Truth, RoundTrip) {
    TempDir dir;
    io::FixtureTruth truth;
    truth.circle = Circle(10, 11, 12);
    truth.outline = Polyline({Point2(0, 0), Point2(5, 0), Point2(5, 5)}, true);
    truth.squares = {{1, 2, 3}, {4, 5, 6}};
    io::write_truth(dir / "t.truth", truth);
    const auto back = io::read_truth(dir / "t.truth");
    EXPECT_EQ(back.circle, truth.circle);
    ASSERT_TRUE(back.outline.has_value());
    EXPECT_EQ(back.outline->vertices(), truth.outline->vertices());
    EXPECT_TRUE(back.outline->closed());
    EXPECT_EQ(back.squares, truth.squares);
    EXPECT_EQ(io::read_circle_record(dir / "t.truth"), Circle(10, 11, 12));
}
