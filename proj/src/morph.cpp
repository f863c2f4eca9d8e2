#include "deepmorph/morph.hpp"

#include <cmath>
#include <sstream>

namespace deepmorph::morph {

namespace {

constexpr int kPoseRefinementRounds = 20;
constexpr double kPoseRefinementTolerance = 1e-12;

ShapeInstance constrain_with_pose(const pdm::PointDistributionModel& model,
                                  const pdm::ShapeVector& proposed,
                                  const SimilarityTransform2D& pose) {
    PointSet local;
    local.reserve(static_cast<std::size_t>(proposed.point_count()));
    for (Eigen::Index i = 0; i < proposed.point_count(); ++i) {
        local.push_back(pose.apply_inverse(proposed.point(i)));
    }
    const auto b = pdm::constrain(model, pdm::project(model, pdm::ShapeVector::from_points(local)));
    const auto model_shape = pdm::reconstruct(model, b);
    return {pdm::ShapeVector::from_points(apply_transform(pose, model_shape.to_points())), pose, b};
}

}  // namespace

void MorphConfig::validate() const {
    if (!(profile_half_length > 0.0) || !(profile_step > 0.0) || max_iterations < 1 ||
        !(convergence_tolerance >= 0.0) || !(tau >= 0.0 && tau <= 1.0) || n_rotations < 1) {
        throw Error(ErrorCode::InvalidArgument, "invalid morph configuration");
    }
    cpd.validate();
}

ShapeInstance initialize_shape(const pdm::PointDistributionModel& model, const ConfidenceMap& map,
                               const MorphConfig& config) {
    config.validate();
    const PointSet fg = threshold_foreground(map, config.tau);
    if (static_cast<Eigen::Index>(fg.size()) < model.point_count()) {
        throw Error(ErrorCode::InsufficientForeground,
                    std::to_string(fg.size()) + " foreground pixels for " +
                        std::to_string(model.point_count()) + " model points");
    }
    const PointSet mean = model.mean().to_points();
    const cpd::CpdResult reg =
        cpd::cpd_register_robust(mean, fg, config.cpd, config.n_rotations, config.try_reflection);
    return {pdm::ShapeVector::from_points(apply_transform(reg.transform, mean)), reg.transform,
            pdm::ShapeCoefficients::Zero(model.mode_count())};
}

std::vector<Point2> estimate_normals(const pdm::ShapeVector& shape, bool closed) {
    const Eigen::Index n = shape.point_count();
    if (n < 3) {
        throw Error(ErrorCode::InvalidArgument, "normals need at least 3 points");
    }
    std::vector<Point2> normals;
    normals.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index prev = i - 1;
        Eigen::Index next = i + 1;
        if (closed) {
            prev = (i + n - 1) % n;
            next = (i + 1) % n;
        } else {
            prev = std::max<Eigen::Index>(prev, 0);
            next = std::min<Eigen::Index>(next, n - 1);
        }
        const Point2 chord = shape.point(next) - shape.point(prev);
        const double len = chord.norm();
        if (!(len > 0.0)) {
            throw Error(ErrorCode::DegenerateShape,
                        "zero-length chord at point " + std::to_string(i));
        }
        normals.emplace_back(-chord.y() / len, chord.x() / len);
    }
    return normals;
}

Point2 profile_search(const ConfidenceMap& map, const Point2& point, const Point2& normal,
                      double half_length, double step) {
    if (!(half_length > 0.0) || !(step > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "profile half length and step must be positive");
    }
    const auto k_max = static_cast<int>(std::floor(half_length / step));
    Point2 best = point;
    double best_value = map.sample_bilinear(point.x(), point.y());
    // Visit 0, -1, +1, -2, +2, ... so strict improvement implements the tie-break.
    for (int mag = 1; mag <= k_max; ++mag) {
        for (const int k : {-mag, mag}) {
            const Point2 pos = point + (k * step) * normal;
            const double v = map.sample_bilinear(pos.x(), pos.y());
            if (v > best_value) {
                best_value = v;
                best = pos;
            }
        }
    }
    return best;
}

ShapeInstance constrain_shape(const pdm::PointDistributionModel& model,
                              const pdm::ShapeVector& proposed, bool reflected) {
    if (proposed.coords().size() != model.mean().coords().size()) {
        throw Error(ErrorCode::ShapeMismatch, "proposed shape length does not match the model");
    }
    const PointSet target = proposed.to_points();
    ShapeInstance best =
        constrain_with_pose(model, proposed, procrustes_similarity(model.mean().to_points(), target, reflected));
    double best_error = (best.points.coords() - proposed.coords()).squaredNorm();
    // The modes are not exactly orthogonal to the similarity directions of the mean, so
    // the pose is refit to the reconstructed shape until neither changes.
    for (int round = 0; round < kPoseRefinementRounds; ++round) {
        const auto pose = procrustes_similarity(
            pdm::reconstruct(model, best.coefficients).to_points(), target, reflected);
        ShapeInstance next = constrain_with_pose(model, proposed, pose);
        const double error = (next.points.coords() - proposed.coords()).squaredNorm();
        if (!(error < best_error)) {
            break;
        }
        const double gain = best_error - error;
        best = std::move(next);
        best_error = error;
        if (gain <= kPoseRefinementTolerance * best_error) {
            break;
        }
    }
    return best;
}

ShapeInstance constrain_shape(const pdm::PointDistributionModel& model,
                              const pdm::ShapeVector& proposed) {
    ShapeInstance direct = constrain_shape(model, proposed, false);
    ShapeInstance mirrored = constrain_shape(model, proposed, true);
    const double e_direct = (direct.points.coords() - proposed.coords()).squaredNorm();
    const double e_mirrored = (mirrored.points.coords() - proposed.coords()).squaredNorm();
    return e_mirrored < e_direct ? mirrored : direct;
}

FitResult fit_shape(const pdm::PointDistributionModel& model, const ConfidenceMap& map,
                    const MorphConfig& config) {
    FitResult result{initialize_shape(model, map, config), 0, false, {}};
    const bool reflected = result.shape.pose.reflected;
    const Eigen::Index n = model.point_count();

    for (int it = 1; it <= config.max_iterations; ++it) {
        const auto& current = result.shape.points;
        const auto normals = estimate_normals(current, config.closed_contour);
        PointSet proposed;
        proposed.reserve(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            const Point2 found = profile_search(map, current.point(i),
                                                normals[static_cast<std::size_t>(i)],
                                                config.profile_half_length, config.profile_step);
            // A profile with no foreground-level sample carries no evidence (occluded or
            // missing ridge): the landmark stays and the model constraint fills the gap.
            const bool evidence = map.sample_bilinear(found.x(), found.y()) > config.tau;
            proposed.push_back(evidence ? found : current.point(i));
        }
        ShapeInstance next =
            constrain_shape(model, pdm::ShapeVector::from_points(proposed), reflected);

        double movement = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            movement += (next.points.point(i) - current.point(i)).norm();
        }
        movement /= static_cast<double>(n);

        result.shape = std::move(next);
        result.per_iteration_movement.push_back(movement);
        result.iterations_used = it;
        if (movement < config.convergence_tolerance) {
            result.converged = true;
            break;
        }
    }
    return result;
}

std::string format_fit_summary(const FitResult& result) {
    std::ostringstream os;
    os.precision(17);
    os << (result.converged ? 1 : 0) << ' ' << result.iterations_used << ' '
       << (result.per_iteration_movement.empty() ? 0.0 : result.per_iteration_movement.back());
    return os.str();
}

}  // namespace deepmorph::morph
