#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace deepmorph::cli {

using Parameters = std::vector<std::pair<std::string, std::string>>;

/// Bad flag combinations or values detected after parsing; exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// No detection or failed registration; exit code 3.
struct DetectionFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CameraOptions {
    std::string preset;
    std::string focal;
    std::string detector_center;
    std::string detector_u;
    std::string detector_v;
    double pitch = 1.0;
    std::string size = "448x448";
    bool circular_mask = false;
};

struct RenderOptions {
    std::string volume;
    CameraOptions camera;
    int samples = 2000;
    double mu_water = 0.02;
    double saturation = 0.025;
    std::string gray_range = "20,255";
    int threads = 1;
    std::string out;
};

struct ProjectGtOptions {
    std::string mesh;
    CameraOptions camera;
    int closing_radius = 3;
    std::string out;
};

struct FitCircleOptions {
    std::string confmap;
    double tau = 0.5;
    std::size_t min_foreground = 100;
    std::string method = "algebraic";
    std::string truth;
    std::string out_prefix;
};

struct BuildPdmOptions {
    std::vector<std::string> shapes;
    double variance = 0.95;
    std::string out;
};

struct FitShapeOptions {
    std::string model;
    std::string confmap;
    double tau = 0.5;
    double profile_length = 20.0;
    int max_iter = 10;
    double tol = 0.5;
    int rotations = 8;
    bool reflection = true;
    std::string truth_outline;
    std::string out_prefix;
};

struct SynthOptions {
    std::string outline;
    std::string circle;
    std::string size = "448x448";
    double sigma = 2.0;
    double peak = 1.0;
    double noise = 0.02;
    int occlusions = 0;
    std::string occlusion_side = "10,40";
    std::uint64_t seed = 0;
    std::string out;
};

struct EvalOptions {
    std::string fixtures;
    std::string model;
    double tau = 0.5;
    std::size_t min_foreground = 100;
    std::string out_prefix;
};

int cmd_render(const RenderOptions& o, const Parameters& params);
int cmd_project_gt(const ProjectGtOptions& o, const Parameters& params);
int cmd_fit_circle(const FitCircleOptions& o, const Parameters& params);
int cmd_build_pdm(const BuildPdmOptions& o, const Parameters& params);
int cmd_fit_shape(const FitShapeOptions& o, const Parameters& params);
int cmd_synth(const SynthOptions& o, const Parameters& params);
int cmd_eval_circle(const EvalOptions& o, const Parameters& params);
int cmd_eval_shape(const EvalOptions& o, const Parameters& params);

/// Glob over the final path component (`*` and `?`); sorted. Non-glob arguments pass through.
std::vector<std::string> expand_glob(const std::string& pattern);

}  // namespace deepmorph::cli
