// deepmorph command-line entry point.
//
// Exit codes: 0 success, 1 I/O or data error, 2 usage error, 3 detection or
// registration failure.

#include <cstdlib>
#include <functional>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "deepmorph/error.hpp"

using namespace deepmorph;
using namespace deepmorph::cli;

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDetection = 3;

int default_threads() {
    if (const char* env = std::getenv("DEEPMORPH_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) {
            return n;
        }
    }
    return 1;
}

Parameters collect_parameters(const CLI::App& sub) {
    Parameters params;
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") {
            continue;
        }
        std::string value;
        if (opt->count() > 0) {
            for (const auto& r : opt->results()) {
                value += (value.empty() ? "" : ",") + r;
            }
        } else {
            value = opt->get_default_str();
        }
        params.emplace_back(opt->get_lnames().front(), value.empty() ? "-" : value);
    }
    return params;
}

void add_camera_options(CLI::App* sub, CameraOptions& o) {
    sub->add_option("--preset", o.preset, "Scene preset (ap-1000mm: 1000 mm source-detector along +z)");
    sub->add_option("--focal", o.focal, "Focal point x,y,z in mm");
    sub->add_option("--detector-center", o.detector_center, "Detector centre x,y,z in mm");
    sub->add_option("--detector-u", o.detector_u, "Detector row direction x,y,z");
    sub->add_option("--detector-v", o.detector_v, "Detector column direction x,y,z");
    sub->add_option("--pitch", o.pitch, "Pixel pitch in mm")->capture_default_str();
    sub->add_option("--size", o.size, "Detector size WxH in pixels")->capture_default_str();
    sub->add_flag("--circular-mask", o.circular_mask, "Restrict to the inscribed disk");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deepmorph: shape-model fitting to confidence maps and X-ray simulation"};
    app.require_subcommand(1);

    RenderOptions render;
    render.threads = default_threads();
    auto* s_render = app.add_subcommand("render", "Ray-cast a DRR from a CTVOL volume");
    s_render->add_option("--volume", render.volume, "Input CTVOL file")->required();
    add_camera_options(s_render, render.camera);
    s_render->add_option("--samples", render.samples, "Samples per ray")->capture_default_str();
    s_render->add_option("--mu-water", render.mu_water, "Water attenuation per mm")->capture_default_str();
    s_render->add_option("--saturation", render.saturation, "Saturated pixel fraction")->capture_default_str();
    s_render->add_option("--gray-range", render.gray_range, "Output gray range a,b")->capture_default_str();
    s_render->add_option("--threads", render.threads, "Worker threads (default $DEEPMORPH_THREADS or 1)")
        ->capture_default_str();
    s_render->add_option("--out", render.out, "Output PGM")->required();

    ProjectGtOptions project;
    auto* s_project = app.add_subcommand("project-gt", "Project a mesh and trace its outline");
    s_project->add_option("--mesh", project.mesh, "Input OBJ mesh")->required();
    add_camera_options(s_project, project.camera);
    s_project->add_option("--closing-radius", project.closing_radius, "Closing disk radius (px)")
        ->capture_default_str();
    s_project->add_option("--out", project.out, "Output outline file (mask at <out>.mask.pgm)")->required();

    FitCircleOptions circle;
    auto* s_circle = app.add_subcommand("fit-circle", "Fit a circle to a confidence map");
    s_circle->add_option("--confmap", circle.confmap, "Input CMAP")->required();
    s_circle->add_option("--tau", circle.tau, "Foreground threshold")->capture_default_str();
    s_circle->add_option("--min-foreground", circle.min_foreground, "Minimum foreground pixels")
        ->capture_default_str();
    s_circle->add_option("--method", circle.method, "algebraic or geometric")
        ->check(CLI::IsMember({"algebraic", "geometric"}))
        ->capture_default_str();
    s_circle->add_option("--truth", circle.truth, "Truth circle record");
    s_circle->add_option("--out-prefix", circle.out_prefix, "Output prefix")->required();

    BuildPdmOptions pdm;
    auto* s_pdm = app.add_subcommand("build-pdm", "Align training shapes and build a PDM");
    s_pdm->add_option("--shapes", pdm.shapes, "Shape files or glob")->required()->expected(1, -1);
    s_pdm->add_option("--variance", pdm.variance, "Retained variance fraction")->capture_default_str();
    s_pdm->add_option("--out", pdm.out, "Output PDM")->required();

    FitShapeOptions shape;
    auto* s_shape = app.add_subcommand("fit-shape", "Fit a PDM to a confidence map");
    s_shape->add_option("--model", shape.model, "Input PDM")->required();
    s_shape->add_option("--confmap", shape.confmap, "Input CMAP")->required();
    s_shape->add_option("--tau", shape.tau, "Foreground threshold")->capture_default_str();
    s_shape->add_option("--profile-length", shape.profile_length, "Profile half-length (px)")
        ->capture_default_str();
    s_shape->add_option("--max-iter", shape.max_iter, "Maximum iterations")->capture_default_str();
    s_shape->add_option("--tol", shape.tol, "Mean movement tolerance (px)")->capture_default_str();
    s_shape->add_option("--rotations", shape.rotations, "CPD rotation restarts")->capture_default_str();
    s_shape->add_flag("--reflection,!--no-reflection", shape.reflection, "Also try reflected restarts")
        ->capture_default_str();
    s_shape->add_option("--truth-outline", shape.truth_outline, "Truth outline for RMSE");
    s_shape->add_option("--out-prefix", shape.out_prefix, "Output prefix")->required();

    SynthOptions syn;
    auto* s_synth = app.add_subcommand("synth", "Generate a synthetic confidence map fixture");
    auto* o_outline = s_synth->add_option("--outline", syn.outline, "Outline point file");
    auto* o_circle = s_synth->add_option("--circle", syn.circle, "Circle cx,cy,r");
    o_outline->excludes(o_circle);
    s_synth->add_option("--size", syn.size, "Map size WxH")->capture_default_str();
    s_synth->add_option("--sigma", syn.sigma, "Ridge width (px)")->capture_default_str();
    s_synth->add_option("--peak", syn.peak, "Ridge peak value")->capture_default_str();
    s_synth->add_option("--noise", syn.noise, "Gaussian noise sigma")->capture_default_str();
    s_synth->add_option("--occlusions", syn.occlusions, "Number of square occlusions")->capture_default_str();
    s_synth->add_option("--occlusion-side", syn.occlusion_side, "Square side range a,b")
        ->capture_default_str();
    s_synth->add_option("--seed", syn.seed, "Random seed")->capture_default_str();
    s_synth->add_option("--out", syn.out, "Output CMAP (truth at <out>.truth)")->required();

    EvalOptions ecircle;
    auto* s_ecircle = app.add_subcommand("eval-circle", "Evaluate circle detection on a fixture directory");
    s_ecircle->add_option("--fixtures", ecircle.fixtures, "Directory of .cmap/.truth pairs")->required();
    s_ecircle->add_option("--tau", ecircle.tau, "Foreground threshold")->capture_default_str();
    s_ecircle->add_option("--min-foreground", ecircle.min_foreground, "Minimum foreground pixels")
        ->capture_default_str();
    s_ecircle->add_option("--out-prefix", ecircle.out_prefix, "Output prefix")->required();

    EvalOptions eshape;
    auto* s_eshape = app.add_subcommand("eval-shape", "Evaluate PDM fitting on a fixture directory");
    s_eshape->add_option("--fixtures", eshape.fixtures, "Directory of .cmap/.truth pairs")->required();
    s_eshape->add_option("--model", eshape.model, "Input PDM")->required();
    s_eshape->add_option("--tau", eshape.tau, "Foreground threshold")->capture_default_str();
    s_eshape->add_option("--out-prefix", eshape.out_prefix, "Output prefix")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n";
        const CLI::App* failed = &app;
        for (const auto* sub : app.get_subcommands()) {
            failed = sub;
        }
        std::cerr << failed->help();
        return kExitUsage;
    }

    const CLI::App* chosen = app.get_subcommands().front();
    const Parameters params = collect_parameters(*chosen);
    std::function<int()> run;
    if (chosen == s_render) run = [&] { return cmd_render(render, params); };
    if (chosen == s_project) run = [&] { return cmd_project_gt(project, params); };
    if (chosen == s_circle) run = [&] { return cmd_fit_circle(circle, params); };
    if (chosen == s_pdm) run = [&] { return cmd_build_pdm(pdm, params); };
    if (chosen == s_shape) run = [&] { return cmd_fit_shape(shape, params); };
    if (chosen == s_synth) run = [&] { return cmd_synth(syn, params); };
    if (chosen == s_ecircle) run = [&] { return cmd_eval_circle(ecircle, params); };
    if (chosen == s_eshape) run = [&] { return cmd_eval_shape(eshape, params); };

    try {
        return run();
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << chosen->help();
        return kExitUsage;
    } catch (const DetectionFailure& e) {
        std::cerr << "no detection: " << e.what() << '\n';
        return kExitDetection;
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
        switch (e.code()) {
        case ErrorCode::InvalidArgument:
            return kExitUsage;
        case ErrorCode::InsufficientForeground:
        case ErrorCode::RegistrationFailed:
            return kExitDetection;
        default:
            return kExitData;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
}
