#pragma once

#include <optional>
#include <string>
#include <vector>

#include "deepmorph/core.hpp"
#include "deepmorph/cpd.hpp"
#include "deepmorph/pdm.hpp"
#include "deepmorph/transform.hpp"

namespace deepmorph::morph {

/// Model instance placed in the image: points = pose(reconstruct(model, coefficients)).
struct ShapeInstance {
    pdm::ShapeVector points;
    SimilarityTransform2D pose;
    pdm::ShapeCoefficients coefficients;
};

struct MorphConfig {
    double profile_half_length = 20.0;
    double profile_step = 1.0;
    int max_iterations = 10;
    /// Mean per-point movement (pixels) below which the loop stops.
    double convergence_tolerance = 0.5;
    double tau = 0.5;
    /// Initialization registers the mean onto at most 1000 foreground pixels; a
    /// ridge band holds a few thousand, and the E-step cost is linear in the count.
    cpd::CpdConfig cpd{0.1, 150, 1e-8, true, 1000};
    int n_rotations = 8;
    bool try_reflection = true;
    /// Whether the landmark chain wraps around when estimating normals.
    bool closed_contour = true;

    void validate() const;
};

struct FitResult {
    ShapeInstance shape;
    int iterations_used = 0;
    bool converged = false;
    std::vector<double> per_iteration_movement;
};

/// Places the model mean on the thresholded foreground via robust CPD.
/// Throws InsufficientForeground when fewer foreground pixels than model points exist.
ShapeInstance initialize_shape(const pdm::PointDistributionModel& model, const ConfidenceMap& map,
                               const MorphConfig& config = {});

/// Unit normals from the chord p[i-1] -> p[i+1], rotated +90 degrees: (-ty, tx).
std::vector<Point2> estimate_normals(const pdm::ShapeVector& shape, bool closed);

/// Position of maximal bilinear confidence among point + k*step*normal,
/// k = -K..K. Ties prefer smaller |k|, then negative k.
Point2 profile_search(const ConfidenceMap& map, const Point2& point, const Point2& normal,
                      double half_length, double step);

/// Pose from Procrustes of the mean onto `proposed`, then project, clip and
/// reconstruct in the model frame. The pose is then refit to the reconstructed
/// shape while that lowers the residual to `proposed`. The overload without handedness tries
/// both and keeps the smaller residual.
ShapeInstance constrain_shape(const pdm::PointDistributionModel& model,
                              const pdm::ShapeVector& proposed, bool reflected);
ShapeInstance constrain_shape(const pdm::PointDistributionModel& model,
                              const pdm::ShapeVector& proposed);

/// Initialization followed by alternating profile search and model constraint.
/// Landmarks whose profile maximum does not exceed tau keep their position.
FitResult fit_shape(const pdm::PointDistributionModel& model, const ConfidenceMap& map,
                    const MorphConfig& config = {});

/// Summary record `converged iterations final_movement`.
std::string format_fit_summary(const FitResult& result);

}  // namespace deepmorph::morph
