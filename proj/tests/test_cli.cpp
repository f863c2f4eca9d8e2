#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "deepmorph/io.hpp"
#include "deepmorph/synth.hpp"
#include "support/fixtures.hpp"
#include "support/tempdir.hpp"

using namespace deepmorph;
using testing_support::TempDir;

namespace {

struct Run {
    int status = -1;
    std::string out;
    std::string err;
};

Run run(const TempDir& dir, const std::string& args) {
    const auto out = dir / "stdout.txt";
    const auto err = dir / "stderr.txt";
    const std::string cmd = std::string("cd '") + dir.path().string() + "' && '" + DEEPMORPH_CLI + "' " + args +
                            " > '" + out.string() + "' 2> '" + err.string() + "'";
    const int raw = std::system(cmd.c_str());
    Run r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = io::read_text(out);
    r.err = io::read_text(err);
    return r;
}

void write_shape(const std::filesystem::path& path, const pdm::ShapeVector& s) {
    io::write_polyline(path, s.to_points(), true);
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
    TempDir dir;
    const auto r = run(dir, "render --out x.pgm");
    EXPECT_EQ(r.status, 2);
    EXPECT_NE((r.out + r.err).find("--volume"), std::string::npos);
    EXPECT_EQ(run(dir, "no-such-command").status, 2);
    EXPECT_EQ(run(dir, "synth --size 10x10 --out a.cmap").status, 2);
    EXPECT_EQ(run(dir, "synth --circle 1,2 --out a.cmap").status, 2);
}

TEST(Cli, MissingInputFileExitsOne) {
    TempDir dir;
    EXPECT_EQ(run(dir, "fit-circle --confmap missing.cmap --out-prefix f").status, 1);
}

TEST(Cli, NinetyNinePixelMapIsNoDetection) {
    TempDir dir;
    std::vector<float> v(100 * 100, 0.0f);
    for (int i = 0; i < 99; ++i) v[static_cast<std::size_t>(i)] = 1.0f;
    io::write_cmap(dir / "m.cmap", ConfidenceMap(100, 100, v));
    const auto r = run(dir, "fit-circle --confmap m.cmap --out-prefix f");
    EXPECT_EQ(r.status, 3);
    EXPECT_NE(r.out.find("no_detection TooFewForeground 99"), std::string::npos) << r.out;
}

TEST(Cli, SynthThenFitCircle) {
    TempDir dir;
    const std::string synth = "synth --circle 64,64,30 --size 128x128 --noise 0.02 --seed 4 --out c.cmap";
    ASSERT_EQ(run(dir, synth).status, 0);
    const std::string first = io::read_text(dir / "c.cmap");
    ASSERT_EQ(run(dir, synth).status, 0);
    EXPECT_EQ(io::read_text(dir / "c.cmap"), first);

    const auto r = run(dir, "fit-circle --confmap c.cmap --method geometric --truth c.truth --out-prefix f");
    ASSERT_EQ(r.status, 0) << r.err;
    const Circle fit = io::read_circle_record(dir / "f.circle");
    EXPECT_LT(circle_param_rmse(fit, Circle(64, 64, 30)), 0.5);
    // Detection line `cx cy r cost n method`, then the algebraic cost for comparison.
    std::istringstream line(r.out.substr(0, r.out.find('\n')));
    double cx = 0, cy = 0, rad = 0, geometric_cost = 0;
    std::string n, method;
    line >> cx >> cy >> rad >> geometric_cost >> n >> method;
    EXPECT_EQ(method, "geometric");
    const auto cost_after = [&](const std::string& key) {
        const auto at = r.out.find(key + " ");
        EXPECT_NE(at, std::string::npos) << r.out;
        return at == std::string::npos ? NAN : std::stod(r.out.substr(at + key.size() + 1));
    };
    EXPECT_LE(geometric_cost, cost_after("algebraic_cost"));
    EXPECT_LT(cost_after("circle_param_rmse"), 0.5);
    // The overlay matches the gray rendering of the map except on the drawn circle.
    const auto overlay = io::read_pgm(dir / "f.overlay.pgm");
    const auto map = io::read_cmap(dir / "c.cmap");
    int changed = 0;
    for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x) {
            const auto base = static_cast<int>(std::lround(255.0 * map.at(x, y)));
            if (overlay.at(x, y) != base) {
                ++changed;
                EXPECT_LE(std::abs((Point2(x, y) - fit.center()).norm() - fit.r()), 1.5);
            }
        }
    EXPECT_GT(changed, 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "f.manifest"));
}

TEST(Cli, FullImageOcclusionZeroesMap) {
    TempDir dir;
    ASSERT_EQ(run(dir, "synth --circle 20,20,10 --size 40x40 --occlusions 1 --occlusion-side 40,40 --out z.cmap").status, 0);
    for (float v : io::read_cmap(dir / "z.cmap").values()) EXPECT_EQ(v, 0.0f);
}

TEST(Cli, BuildPdmModeCounts) {
    TempDir dir;
    std::filesystem::create_directories(dir / "rank1");
    std::filesystem::create_directories(dir / "multi");
    const auto base = synth::asymmetric_outline(24, Point2(0, 0), 50);
    const auto one = synth::generate_shape_family(base, 20, 1, {4.0}, 3);
    for (std::size_t i = 0; i < one.size(); ++i) write_shape(dir / "rank1" / ("s" + std::to_string(i) + ".pts"), one[i]);
    const auto many = synth::generate_shape_family(base, 8, 5, {4, 3, 2, 2, 1}, 5);
    for (std::size_t i = 0; i < many.size(); ++i) write_shape(dir / "multi" / ("s" + std::to_string(i) + ".pts"), many[i]);

    auto r = run(dir, "build-pdm --shapes 'rank1/*.pts' --out one.pdm");
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(io::read_pdm(dir / "one.pdm").mode_count(), 1);

    r = run(dir, "build-pdm --shapes 'multi/*.pts' --variance 1.0 --out full.pdm");
    ASSERT_EQ(r.status, 0) << r.err;
    const auto full = io::read_pdm(dir / "full.pdm");
    // Eight aligned shapes span at most seven directions.
    EXPECT_EQ(full.mode_count(), 7);
    const Eigen::MatrixXd gram = full.modes().transpose() * full.modes();
    EXPECT_LE((gram - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff(), 1e-9);

    write_shape(dir / "odd.pts", synth::asymmetric_outline(10, Point2(0, 0), 5));
    EXPECT_EQ(run(dir, "build-pdm --shapes 'multi/*.pts' odd.pts --out bad.pdm").status, 1);
}

TEST(Cli, FitShapeZeroMapAndOrdering) {
    TempDir dir;
    const auto model = fixtures::shape_model(3);
    io::write_pdm(dir / "m.pdm", model);
    io::write_cmap(dir / "zero.cmap", ConfidenceMap::zeros(200, 200));
    EXPECT_EQ(run(dir, "fit-shape --model m.pdm --confmap zero.cmap --out-prefix z").status, 3);

    SeededRng rng(8);
    const auto fx = fixtures::in_span_case(model, rng, 320);
    io::write_polyline(dir / "truth.pts", fx.points, true);
    ASSERT_EQ(run(dir, "synth --outline truth.pts --size 320x320 --seed 2 --out s.cmap").status, 0);
    const auto r = run(dir, "fit-shape --model m.pdm --confmap s.cmap --truth-outline truth.pts --out-prefix a");
    ASSERT_EQ(r.status, 0) << r.err;
    const auto at = r.out.find("point_to_curve_rmse ");
    ASSERT_NE(at, std::string::npos) << r.out;
    EXPECT_LT(std::stod(r.out.substr(at + 20)), 1.0);
    // Landmark i of the fit stays next to landmark i of the truth.
    const auto landmarks = io::read_point_list(dir / "a.landmarks").points;
    ASSERT_EQ(landmarks.size(), fx.points.size());
    std::size_t nearest = 0;
    for (std::size_t i = 1; i < fx.points.size(); ++i)
        if ((landmarks[0] - fx.points[i]).norm() < (landmarks[0] - fx.points[nearest]).norm()) nearest = i;
    EXPECT_TRUE(nearest == 0 || nearest == 1 || nearest == fx.points.size() - 1) << nearest;
    ASSERT_EQ(run(dir, "fit-shape --model m.pdm --confmap s.cmap --out-prefix b").status, 0);
    EXPECT_EQ(io::read_text(dir / "a.landmarks"), io::read_text(dir / "b.landmarks"));
}

TEST(Cli, ProjectGroundTruth) {
    TempDir dir;
    io::write_obj(dir / "cube.obj", fixtures::cube_mesh(drr::Vec3(0, 0, 0), 40.0, 6));
    const auto r = run(dir, "project-gt --mesh cube.obj --out cube.pts");
    ASSERT_EQ(r.status, 0) << r.err;
    const auto outline = io::read_polyline(dir / "cube.pts");
    EXPECT_TRUE(outline.closed());
    EXPECT_GE(outline.vertices().size(), 8u);
    EXPECT_TRUE(std::filesystem::exists(dir / "cube.pts.mask.pgm"));

    io::write_obj(dir / "behind.obj", fixtures::cube_mesh(drr::Vec3(0, 0, -900), 20.0, 3));
    const auto behind = run(dir, "project-gt --mesh behind.obj --out b.pts");
    EXPECT_EQ(behind.status, 1);
    EXPECT_NE(behind.err.find("EmptyProjection"), std::string::npos) << behind.err;
}

TEST(Cli, RenderSaturationAndDeterminism) {
    TempDir dir;
    io::write_ctvol(dir / "cube.ctvol", fixtures::water_cube(24, 4.0));
    const std::string cmd = "render --volume cube.ctvol --size 64x64 --pitch 4 --samples 300 --out d.pgm";
    ASSERT_EQ(run(dir, cmd).status, 0);
    const auto img = io::read_pgm(dir / "d.pgm");
    int saturated = 0;
    for (auto p : img.pixels()) saturated += p == 255 ? 1 : 0;
    EXPECT_GE(saturated, static_cast<int>(std::ceil(0.025 * 64 * 64)));
    const std::string first = io::read_text(dir / "d.pgm");
    const std::string manifest = io::read_text(dir / "d.pgm.manifest");
    ASSERT_EQ(run(dir, cmd + " --threads 3").status, 0);
    EXPECT_EQ(io::read_text(dir / "d.pgm"), first);
    EXPECT_NE(manifest.find("input "), std::string::npos);
}
