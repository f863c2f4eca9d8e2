#include "deepmorph/pdm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "deepmorph/transform.hpp"

namespace deepmorph::pdm {

namespace {

constexpr double kOrthonormalTolerance = 1e-9;
constexpr double kPositiveEigenRatio = 1e-10;
constexpr double kSignEntryThreshold = 1e-12;

Eigen::VectorXd centered(const Eigen::VectorXd& coords) {
    const Eigen::Index n = coords.size() / 2;
    double cx = 0.0;
    double cy = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        cx += coords(2 * i);
        cy += coords(2 * i + 1);
    }
    cx /= static_cast<double>(n);
    cy /= static_cast<double>(n);
    Eigen::VectorXd out = coords;
    for (Eigen::Index i = 0; i < n; ++i) {
        out(2 * i) -= cx;
        out(2 * i + 1) -= cy;
    }
    return out;
}

ShapeVector align_onto(const ShapeVector& shape, const ShapeVector& target) {
    const auto t = procrustes_similarity(shape.to_points(), target.to_points());
    return ShapeVector::from_points(apply_transform(t, shape.to_points()));
}

void check_same_length(const PointDistributionModel& model, Eigen::Index length) {
    if (length != model.mean().coords().size()) {
        throw Error(ErrorCode::ShapeMismatch, "shape length " + std::to_string(length) +
                                                  " != model length " +
                                                  std::to_string(model.mean().coords().size()));
    }
}

void check_coefficients(const PointDistributionModel& model, const ShapeCoefficients& b) {
    if (b.size() != model.mode_count()) {
        throw Error(ErrorCode::CoefficientMismatch, "expected " + std::to_string(model.mode_count()) +
                                                        " coefficients, got " +
                                                        std::to_string(b.size()));
    }
}

}  // namespace

ShapeVector::ShapeVector(Eigen::VectorXd coords) : coords_(std::move(coords)) {
    if (coords_.size() < 4 || coords_.size() % 2 != 0) {
        throw Error(ErrorCode::InvalidArgument, "shape vector needs an even length >= 4");
    }
    if (!coords_.allFinite()) {
        throw Error(ErrorCode::InvalidArgument, "shape vector has non-finite coordinates");
    }
}

ShapeVector ShapeVector::from_points(const PointSet& points) {
    Eigen::VectorXd coords(static_cast<Eigen::Index>(2 * points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
        coords(static_cast<Eigen::Index>(2 * i)) = points[i].x();
        coords(static_cast<Eigen::Index>(2 * i + 1)) = points[i].y();
    }
    return ShapeVector(std::move(coords));
}

PointSet ShapeVector::to_points() const {
    PointSet out;
    out.reserve(static_cast<std::size_t>(point_count()));
    for (Eigen::Index i = 0; i < point_count(); ++i) {
        out.push_back(point(i));
    }
    return out;
}

PointDistributionModel::PointDistributionModel(ShapeVector mean, Eigen::MatrixXd modes,
                                               Eigen::VectorXd eigenvalues)
    : mean_(std::move(mean)), modes_(std::move(modes)), eigenvalues_(std::move(eigenvalues)) {
    const Eigen::Index dim = mean_.coords().size();
    const Eigen::Index m = modes_.cols();
    if (modes_.rows() != dim || m < 1 || m > dim || eigenvalues_.size() != m) {
        throw Error(ErrorCode::ShapeMismatch, "model dimensions are inconsistent");
    }
    if (!modes_.allFinite() || !eigenvalues_.allFinite()) {
        throw Error(ErrorCode::InvalidArgument, "model contains non-finite values");
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        if (eigenvalues_(i) < 0.0 || (i > 0 && eigenvalues_(i) > eigenvalues_(i - 1))) {
            throw Error(ErrorCode::InvalidArgument,
                        "eigenvalues must be non-negative and non-increasing");
        }
    }
    const Eigen::MatrixXd gram = modes_.transpose() * modes_;
    if ((gram - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() > kOrthonormalTolerance) {
        throw Error(ErrorCode::InvalidArgument, "model modes are not orthonormal");
    }
}

AlignmentResult align_training_shapes(const std::vector<ShapeVector>& shapes) {
    if (shapes.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "alignment needs at least 2 shapes");
    }
    const Eigen::Index dim = shapes.front().coords().size();
    std::vector<ShapeVector> work;
    work.reserve(shapes.size());
    for (const auto& s : shapes) {
        if (s.coords().size() != dim) {
            throw Error(ErrorCode::ShapeMismatch, "training shapes have different point counts");
        }
        Eigen::VectorXd c = centered(s.coords());
        if (!(c.norm() > 0.0)) {
            throw Error(ErrorCode::DegenerateShape, "training shape has all points coincident");
        }
        work.emplace_back(std::move(c));
    }

    ShapeVector mean(work.front().coords().normalized());
    AlignmentResult result{{}, mean, 0};
    std::vector<ShapeVector> aligned = work;
    for (int round = 1; round <= kMaxAlignmentRounds; ++round) {
        result.rounds = round;
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
        for (std::size_t i = 0; i < work.size(); ++i) {
            aligned[i] = align_onto(work[i], mean);
            sum += aligned[i].coords();
        }
        Eigen::VectorXd next = centered(sum / static_cast<double>(work.size()));
        const double size = next.norm();
        if (!(size > 0.0)) {
            throw Error(ErrorCode::DegenerateShape, "aligned mean collapsed to a point");
        }
        next /= size;
        const double change = (next - mean.coords()).norm();
        mean = ShapeVector(std::move(next));
        if (change < kAlignmentTolerance) {
            break;
        }
    }
    // Final pass so every returned shape is optimally aligned to the returned mean.
    for (std::size_t i = 0; i < work.size(); ++i) {
        aligned[i] = align_onto(work[i], mean);
    }
    result.aligned = std::move(aligned);
    result.mean = std::move(mean);
    return result;
}

double alignment_residual(const AlignmentResult& alignment) {
    double total = 0.0;
    for (const auto& s : alignment.aligned) {
        total += (s.coords() - alignment.mean.coords()).squaredNorm();
    }
    return total;
}

PointDistributionModel build_pdm(const std::vector<ShapeVector>& shapes, double variance_fraction) {
    if (shapes.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "build_pdm needs at least 2 shapes");
    }
    if (!(variance_fraction > 0.0 && variance_fraction <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "variance_fraction must lie in (0,1]");
    }
    const Eigen::Index dim = shapes.front().coords().size();
    const auto count = static_cast<Eigen::Index>(shapes.size());
    Eigen::MatrixXd data(dim, count);
    for (Eigen::Index j = 0; j < count; ++j) {
        const auto& c = shapes[static_cast<std::size_t>(j)].coords();
        if (c.size() != dim) {
            throw Error(ErrorCode::ShapeMismatch, "training shapes have different point counts");
        }
        data.col(j) = c;
    }
    const Eigen::VectorXd mean = data.rowwise().mean();
    data.colwise() -= mean;
    const Eigen::MatrixXd cov = data * data.transpose() / static_cast<double>(count - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorCode::DegenerateShape, "covariance eigendecomposition failed");
    }
    // Eigen returns ascending order.
    const Eigen::VectorXd values = solver.eigenvalues().reverse().cwiseMax(0.0);
    const Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();

    const double total = values.sum();
    if (!(total > 0.0)) {
        throw Error(ErrorCode::DegenerateShape, "training shapes have zero total variance");
    }
    Eigen::Index positive = 0;
    while (positive < dim && values(positive) > kPositiveEigenRatio * values(0)) {
        ++positive;
    }
    Eigen::Index m = 0;
    double cumulative = 0.0;
    while (m < positive) {
        cumulative += values(m);
        ++m;
        if (cumulative / total >= variance_fraction) {
            break;
        }
    }

    Eigen::MatrixXd modes = vectors.leftCols(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index k = 0; k < dim; ++k) {
            if (std::abs(modes(k, i)) > kSignEntryThreshold) {
                if (modes(k, i) < 0.0) {
                    modes.col(i) = -modes.col(i);
                }
                break;
            }
        }
    }
    return PointDistributionModel(ShapeVector(mean), std::move(modes), values.head(m));
}

ShapeCoefficients project(const PointDistributionModel& model, const ShapeVector& shape) {
    check_same_length(model, shape.coords().size());
    return model.modes().transpose() * (shape.coords() - model.mean().coords());
}

ShapeVector reconstruct(const PointDistributionModel& model, const ShapeCoefficients& b) {
    check_coefficients(model, b);
    return ShapeVector(model.mean().coords() + model.modes() * b);
}

ShapeCoefficients constrain(const PointDistributionModel& model, const ShapeCoefficients& b) {
    check_coefficients(model, b);
    ShapeCoefficients out = b;
    for (Eigen::Index i = 0; i < b.size(); ++i) {
        const double bound = kClipSigmas * std::sqrt(model.eigenvalues()(i));
        out(i) = std::clamp(b(i), -bound, bound);
    }
    return out;
}

}  // namespace deepmorph::pdm
