#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "deepmorph/core.hpp"
#include "deepmorph/transform.hpp"

namespace deepmorph::cpd {

struct CpdConfig {
    /// Weight of the uniform outlier component, in [0,1).
    double outlier_weight = 0.1;
    int max_iterations = 150;
    /// EM stops once |sigma2_new - sigma2_old| falls below this. Measured in the
    /// normalized frame (target centred, unit RMS radius), as is kMinSigma2.
    double sigma_tolerance = 1e-8;
    bool estimate_scale = true;
    /// Larger targets are reduced to grid-cell means before EM (see subsample_uniform).
    std::size_t max_target_points = 5000;

    void validate() const;
};

inline constexpr double kMinSigma2 = 1e-12;

struct CpdResult {
    /// Maps source points onto the target frame.
    SimilarityTransform2D transform;
    /// posteriors(n, m) = p(source n | target m) over the (possibly reduced) target;
    /// column sums are <= 1.
    Eigen::MatrixXd posteriors;
    /// Outlier-component posterior per target point.
    Eigen::VectorXd outlier_posteriors;
    /// In input units.
    double final_sigma2 = 0.0;
    /// Negative log-likelihood of the target under the final mixture.
    double objective = 0.0;
    /// Objective before each M-step, then the final value.
    std::vector<double> objective_history;
    int iterations = 0;
    bool sigma_collapsed = false;
};

/// Rigid/similarity coherent point drift of `source` (mixture centroids) onto
/// `target` (observations), starting from `init`.
CpdResult cpd_register(const PointSet& source, const PointSet& target, const CpdConfig& config = {},
                       const SimilarityTransform2D& init = SimilarityTransform2D::identity());

/// Best (lowest objective) of n_rotations restarts spaced over [0, 2pi) about the
/// source centroid, plus reflected restarts when requested. Each restart starts with
/// centroids and RMS radii matched. Ties go to the earliest restart.
CpdResult cpd_register_robust(const PointSet& source, const PointSet& target,
                              const CpdConfig& config = {}, int n_rotations = 8,
                              bool try_reflection = true);

/// Returns `points` unchanged when it has at most max_points entries. Otherwise bins the
/// points into square cells anchored at their centroid, growing the cell size until at
/// most max_points cells are occupied, and returns each cell's mean. The result does not
/// depend on input order, and rotating or mirroring the input about any point rotates or
/// mirrors the output.
PointSet subsample_uniform(const PointSet& points, std::size_t max_points);

}  // namespace deepmorph::cpd
