#pragma once

#include <vector>

#include <Eigen/Core>

#include "deepmorph/core.hpp"

namespace deepmorph::pdm {

/// Landmark coordinates packed as [x1, y1, ..., xN, yN].
class ShapeVector {
public:
    /// Requires an even length >= 4 and finite entries.
    explicit ShapeVector(Eigen::VectorXd coords);

    static ShapeVector from_points(const PointSet& points);

    const Eigen::VectorXd& coords() const noexcept { return coords_; }
    Eigen::Index point_count() const noexcept { return coords_.size() / 2; }
    Point2 point(Eigen::Index i) const { return {coords_(2 * i), coords_(2 * i + 1)}; }
    PointSet to_points() const;

private:
    Eigen::VectorXd coords_;
};

using ShapeCoefficients = Eigen::VectorXd;

/// Linear shape model x ~ mean + sum_i modes.col(i) * b_i.
class PointDistributionModel {
public:
    /// Validates orthonormal modes, non-increasing non-negative eigenvalues and 1 <= M <= 2N.
    PointDistributionModel(ShapeVector mean, Eigen::MatrixXd modes, Eigen::VectorXd eigenvalues);

    const ShapeVector& mean() const noexcept { return mean_; }
    const Eigen::MatrixXd& modes() const noexcept { return modes_; }
    const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
    Eigen::Index point_count() const noexcept { return mean_.point_count(); }
    Eigen::Index mode_count() const noexcept { return modes_.cols(); }

private:
    ShapeVector mean_;
    Eigen::MatrixXd modes_;
    Eigen::VectorXd eigenvalues_;
};

struct AlignmentResult {
    std::vector<ShapeVector> aligned;
    ShapeVector mean;
    int rounds = 0;
};

inline constexpr int kMaxAlignmentRounds = 50;
inline constexpr double kAlignmentTolerance = 1e-9;

/// Generalized Procrustes alignment to a centered, unit-centroid-size mean.
AlignmentResult align_training_shapes(const std::vector<ShapeVector>& shapes);

/// Sum of squared distances between each aligned shape and the mean.
double alignment_residual(const AlignmentResult& alignment);

/// Sample-covariance PCA keeping the fewest modes whose eigenvalues reach
/// `variance_fraction` of the total, capped at the number of positive eigenvalues.
PointDistributionModel build_pdm(const std::vector<ShapeVector>& shapes,
                                 double variance_fraction = 0.95);

/// b_i = p_i^T (x - mean).
ShapeCoefficients project(const PointDistributionModel& model, const ShapeVector& shape);

/// mean + P b.
ShapeVector reconstruct(const PointDistributionModel& model, const ShapeCoefficients& b);

/// Clamps each b_i to +-3 sqrt(lambda_i).
ShapeCoefficients constrain(const PointDistributionModel& model, const ShapeCoefficients& b);

inline constexpr double kClipSigmas = 3.0;

}  // namespace deepmorph::pdm
