#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <sstream>

#include "deepmorph/circlefit.hpp"
#include "deepmorph/drr.hpp"
#include "deepmorph/eval.hpp"
#include "deepmorph/io.hpp"
#include "deepmorph/morph.hpp"
#include "deepmorph/pdm.hpp"
#include "deepmorph/synth.hpp"
#include "manifest.hpp"
#include "overlay.hpp"

namespace deepmorph::cli {

namespace fs = std::filesystem;

namespace {

std::vector<double> parse_numbers(const std::string& text, char sep, std::size_t expected,
                                  const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size() || !std::isfinite(v)) {
            throw UsageError("malformed " + what + ": '" + text + "'");
        }
        out.push_back(v);
    }
    if (out.size() != expected) {
        throw UsageError("malformed " + what + ": '" + text + "'");
    }
    return out;
}

drr::Vec3 parse_vec3(const std::string& text, const std::string& what) {
    const auto v = parse_numbers(text, ',', 3, what);
    return {v[0], v[1], v[2]};
}

std::pair<int, int> parse_int_pair(const std::string& text, char sep, const std::string& what) {
    const auto v = parse_numbers(text, sep, 2, what);
    for (double d : v) {
        if (d != std::floor(d) || std::abs(d) > 1e9) {
            throw UsageError("malformed " + what + ": '" + text + "'");
        }
    }
    return {static_cast<int>(v[0]), static_cast<int>(v[1])};
}

drr::CameraGeometry make_camera(const CameraOptions& o, const drr::Vec3& scene_center) {
    drr::CameraGeometry cam;
    if (o.preset == "ap-1000mm") {
        cam.focal_point = scene_center - 600.0 * drr::Vec3::UnitZ();
        cam.detector_center = scene_center + 400.0 * drr::Vec3::UnitZ();
    } else if (!o.preset.empty()) {
        throw UsageError("unknown preset '" + o.preset + "'");
    }
    if (!o.focal.empty()) cam.focal_point = parse_vec3(o.focal, "--focal");
    if (!o.detector_center.empty()) cam.detector_center = parse_vec3(o.detector_center, "--detector-center");
    if (!o.detector_u.empty()) cam.detector_u = parse_vec3(o.detector_u, "--detector-u");
    if (!o.detector_v.empty()) cam.detector_v = parse_vec3(o.detector_v, "--detector-v");
    cam.pixel_pitch = o.pitch;
    const auto [w, h] = parse_int_pair(o.size, 'x', "--size");
    cam.width = w;
    cam.height = h;
    cam.circular_mask = o.circular_mask;
    cam.validate();
    return cam;
}

fs::path with_suffix(const std::string& base, const char* suffix) {
    return fs::path(base + suffix);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

bool glob_match(const char* pattern, const char* text) {
    if (*pattern == '\0') return *text == '\0';
    if (*pattern == '*') {
        return glob_match(pattern + 1, text) || (*text != '\0' && glob_match(pattern, text + 1));
    }
    if (*text == '\0') return false;
    return (*pattern == '?' || *pattern == *text) && glob_match(pattern + 1, text + 1);
}

morph::MorphConfig morph_config(const FitShapeOptions& o) {
    morph::MorphConfig cfg;
    cfg.tau = o.tau;
    cfg.profile_half_length = o.profile_length;
    cfg.max_iterations = o.max_iter;
    cfg.convergence_tolerance = o.tol;
    cfg.n_rotations = o.rotations;
    cfg.try_reflection = o.reflection;
    cfg.validate();
    return cfg;
}

}  // namespace

std::vector<std::string> expand_glob(const std::string& pattern) {
    const fs::path p(pattern);
    const std::string name = p.filename().string();
    if (name.find_first_of("*?") == std::string::npos) {
        return {pattern};
    }
    const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
    std::vector<std::string> out;
    if (fs::is_directory(dir)) {
        for (const auto& entry : fs::directory_iterator(dir)) {
            const std::string candidate = entry.path().filename().string();
            if (entry.is_regular_file() && glob_match(name.c_str(), candidate.c_str())) {
                out.push_back((p.has_parent_path() ? dir / candidate : fs::path(candidate)).string());
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

int cmd_render(const RenderOptions& o, const Parameters& params) {
    const auto volume = io::read_ctvol(o.volume);
    const auto camera = make_camera(o.camera, volume.center());
    drr::RenderConfig cfg;
    cfg.n_samples = o.samples;
    cfg.mu_water = o.mu_water;
    cfg.saturation_fraction = o.saturation;
    std::tie(cfg.gray_min, cfg.gray_max) = parse_int_pair(o.gray_range, ',', "--gray-range");
    cfg.validate();
    if (o.threads < 1) {
        throw UsageError("--threads must be >= 1");
    }

    const auto result = drr::render(volume, camera, cfg, o.threads);
    io::write_pgm(o.out, result.image);

    std::size_t saturated = 0;
    for (int y = 0; y < camera.height; ++y) {
        for (int x = 0; x < camera.width; ++x) {
            const auto i = static_cast<std::size_t>(y) * camera.width + x;
            if (camera.pixel_in_mask(x, y) && result.attenuation[i] <= result.saturation_threshold) {
                ++saturated;
            }
        }
    }
    std::cout << camera.width << ' ' << camera.height << ' ' << fmt(result.saturation_threshold)
              << ' ' << saturated << ' ' << (result.degenerate ? 1 : 0) << '\n';

    RunManifest{"render", params, {o.volume}, {o.out}}.write(with_suffix(o.out, ".manifest"));
    return 0;
}

int cmd_project_gt(const ProjectGtOptions& o, const Parameters& params) {
    const auto mesh = io::read_obj(fs::path(o.mesh));
    mesh.validate();
    drr::Vec3 lo = mesh.vertices.front();
    drr::Vec3 hi = lo;
    for (const auto& v : mesh.vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    const auto camera = make_camera(o.camera, 0.5 * (lo + hi));
    if (o.closing_radius < 0) {
        throw UsageError("--closing-radius must be >= 0");
    }
    const auto gt = drr::project_mesh_ground_truth(mesh, camera, o.closing_radius);
    const fs::path mask_path = with_suffix(o.out, ".mask.pgm");
    io::write_polyline(o.out, gt.outline.vertices(), true);
    io::write_pgm(mask_path, gt.mask);
    std::cout << gt.projected.size() << ' ' << gt.outline.vertices().size() << '\n';
    RunManifest{"project-gt", params, {o.mesh}, {o.out, mask_path}}.write(
        with_suffix(o.out, ".manifest"));
    return 0;
}

int cmd_fit_circle(const FitCircleOptions& o, const Parameters& params) {
    const auto map = io::read_cmap(fs::path(o.confmap));
    const auto method = circlefit::method_from_string(o.method);
    const auto det = circlefit::detect_circle(map, o.tau, o.min_foreground, {}, method);
    if (!det.detected()) {
        std::cout << "no_detection " << circlefit::to_string(det.reason) << ' ' << det.n_points
                  << '\n';
        throw DetectionFailure(std::string(circlefit::to_string(det.reason)));
    }
    const std::string record = circlefit::format_detection(det);
    std::cout << record << '\n';
    if (method == circlefit::Method::Geometric) {
        const auto ref = circlefit::detect_circle(map, o.tau, o.min_foreground, {},
                                                  circlefit::Method::Algebraic);
        std::cout << "algebraic_cost " << fmt(ref.cost) << '\n';
    }
    std::vector<fs::path> inputs{o.confmap};
    if (!o.truth.empty()) {
        const Circle truth = io::read_circle_record(o.truth);
        std::cout << "circle_param_rmse " << fmt(circle_param_rmse(*det.circle, truth)) << '\n';
        inputs.emplace_back(o.truth);
    }

    const fs::path record_path = with_suffix(o.out_prefix, ".circle");
    const fs::path overlay_path = with_suffix(o.out_prefix, ".overlay.pgm");
    io::write_text(record_path, record + "\n");
    GrayImage overlay = confmap_to_gray(map);
    draw_circle(overlay, *det.circle);
    io::write_pgm(overlay_path, overlay);
    RunManifest{"fit-circle", params, inputs, {record_path, overlay_path}}.write(
        with_suffix(o.out_prefix, ".manifest"));
    return 0;
}

int cmd_build_pdm(const BuildPdmOptions& o, const Parameters& params) {
    std::vector<fs::path> inputs;
    for (const auto& pattern : o.shapes) {
        for (const auto& path : expand_glob(pattern)) {
            inputs.emplace_back(path);
        }
    }
    std::sort(inputs.begin(), inputs.end());
    inputs.erase(std::unique(inputs.begin(), inputs.end()), inputs.end());
    if (inputs.empty()) {
        throw Error(ErrorCode::Io, "no shape files match --shapes");
    }
    std::vector<pdm::ShapeVector> shapes;
    for (const auto& path : inputs) {
        shapes.push_back(pdm::ShapeVector::from_points(io::read_point_list(path).points));
    }
    const auto model = pdm::build_pdm(pdm::align_training_shapes(shapes).aligned, o.variance);
    io::write_pdm(fs::path(o.out), model);
    std::cout << model.mode_count() << ' ' << model.point_count() << ' ' << shapes.size() << '\n';
    RunManifest{"build-pdm", params, inputs, {o.out}}.write(with_suffix(o.out, ".manifest"));
    return 0;
}

int cmd_fit_shape(const FitShapeOptions& o, const Parameters& params) {
    const auto cfg = morph_config(o);
    const auto model = io::read_pdm(fs::path(o.model));
    const auto map = io::read_cmap(fs::path(o.confmap));
    const auto fit = morph::fit_shape(model, map, cfg);
    const PointSet points = fit.shape.points.to_points();

    const std::string summary = morph::format_fit_summary(fit);
    std::cout << summary << '\n';
    std::vector<fs::path> inputs{o.model, o.confmap};
    if (!o.truth_outline.empty()) {
        const Polyline truth = io::read_polyline(o.truth_outline);
        std::cout << "point_to_curve_rmse " << fmt(point_to_curve_rmse(points, truth)) << '\n';
        inputs.emplace_back(o.truth_outline);
    }

    const fs::path landmarks_path = with_suffix(o.out_prefix, ".landmarks");
    const fs::path overlay_path = with_suffix(o.out_prefix, ".overlay.pgm");
    const fs::path summary_path = with_suffix(o.out_prefix, ".summary");
    io::write_polyline(landmarks_path, points, cfg.closed_contour);
    GrayImage overlay = confmap_to_gray(map);
    draw_polyline(overlay, points, cfg.closed_contour);
    io::write_pgm(overlay_path, overlay);
    io::write_text(summary_path, summary + "\n");
    RunManifest{"fit-shape", params, inputs, {landmarks_path, overlay_path, summary_path}}.write(
        with_suffix(o.out_prefix, ".manifest"));
    return 0;
}

int cmd_synth(const SynthOptions& o, const Parameters& params) {
    if (o.outline.empty() == o.circle.empty()) {
        throw UsageError("exactly one of --outline or --circle is required");
    }
    const auto [w, h] = parse_int_pair(o.size, 'x', "--size");
    const auto [side_min, side_max] = parse_int_pair(o.occlusion_side, ',', "--occlusion-side");
    synth::SynthConfig cfg;
    cfg.ridge_sigma = o.sigma;
    cfg.peak_value = o.peak;
    cfg.background_noise_sigma = o.noise;
    cfg.seed = o.seed;

    io::FixtureTruth truth;
    std::vector<fs::path> inputs;
    ConfidenceMap map = ConfidenceMap::zeros(1, 1);
    if (!o.circle.empty()) {
        const auto c = parse_numbers(o.circle, ',', 3, "--circle");
        truth.circle = Circle(c[0], c[1], c[2]);
        map = synth::confmap_from_circle(*truth.circle, w, h, cfg);
    } else {
        const auto list = io::read_point_list(fs::path(o.outline));
        truth.outline = Polyline(list.points, list.closed);
        map = synth::confmap_from_outline(*truth.outline, w, h, cfg);
        inputs.emplace_back(o.outline);
    }
    if (o.occlusions > 0) {
        // Decorrelated from the noise stream, which uses the seed directly.
        auto occ = synth::occlude_squares(map, o.occlusions, side_min, side_max,
                                          o.seed ^ 0x9E3779B97F4A7C15ULL);
        map = std::move(occ.map);
        truth.squares = std::move(occ.squares);
    } else if (o.occlusions < 0) {
        throw UsageError("--occlusions must be >= 0");
    }

    const fs::path out(o.out);
    const fs::path truth_path = fs::path(out).replace_extension(".truth");
    io::write_cmap(out, map);
    io::write_truth(truth_path, truth);
    RunManifest{"synth", params, inputs, {out, truth_path}}.write(with_suffix(o.out, ".manifest"));
    return 0;
}

namespace {

std::vector<fs::path> fixture_files(const std::string& dir) {
    std::vector<fs::path> files;
    if (fs::is_directory(dir)) {
        for (const auto& entry : fs::directory_iterator(dir)) {
            const auto ext = entry.path().extension();
            if (entry.is_regular_file() && (ext == ".cmap" || ext == ".truth")) {
                files.push_back(entry.path());
            }
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

int finish_eval(const char* name, const eval::EvaluationReport& report, const EvalOptions& o,
                const Parameters& params, std::vector<fs::path> inputs) {
    const fs::path records = with_suffix(o.out_prefix, ".records");
    const fs::path summary = with_suffix(o.out_prefix, ".summary");
    eval::write_report(report, records, summary);
    std::cout << io::read_text(summary);
    RunManifest{name, params, std::move(inputs), {records, summary}}.write(
        with_suffix(o.out_prefix, ".manifest"));
    return 0;
}

}  // namespace

int cmd_eval_circle(const EvalOptions& o, const Parameters& params) {
    eval::CircleEvalConfig cfg;
    cfg.tau = o.tau;
    cfg.min_foreground = o.min_foreground;
    const auto report = eval::evaluate_circle_suite(fs::path(o.fixtures), cfg);
    return finish_eval("eval-circle", report, o, params, fixture_files(o.fixtures));
}

int cmd_eval_shape(const EvalOptions& o, const Parameters& params) {
    if (o.model.empty()) {
        throw UsageError("--model is required");
    }
    const auto model = io::read_pdm(fs::path(o.model));
    morph::MorphConfig cfg;
    cfg.tau = o.tau;
    const auto report = eval::evaluate_shape_suite(fs::path(o.fixtures), model, cfg);
    auto inputs = fixture_files(o.fixtures);
    inputs.insert(inputs.begin(), o.model);
    return finish_eval("eval-shape", report, o, params, std::move(inputs));
}

}  // namespace deepmorph::cli
