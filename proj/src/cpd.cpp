#include "deepmorph/cpd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace deepmorph::cpd {

namespace {

constexpr int kCellBisections = 30;

constexpr double kDim = 2.0;
constexpr double kNegligibleExponent = -50.0;

struct Params {
    Eigen::Matrix2d rotation = Eigen::Matrix2d::Identity();
    double scale = 1.0;
    Eigen::Vector2d translation = Eigen::Vector2d::Zero();
};

Eigen::Matrix2d rotation_matrix(double angle) {
    Eigen::Matrix2d r;
    r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return r;
}

Eigen::MatrixX2d to_matrix(const PointSet& points, bool reflect) {
    Eigen::MatrixX2d m(static_cast<Eigen::Index>(points.size()), 2);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        m(row, 0) = points[i].x();
        m(row, 1) = reflect ? -points[i].y() : points[i].y();
    }
    return m;
}

bool has_extent(const Eigen::MatrixX2d& m) {
    const Eigen::RowVector2d mean = m.colwise().mean();
    return (m.rowwise() - mean).squaredNorm() > 0.0;
}

Eigen::MatrixX2d transformed(const Eigen::MatrixX2d& y, const Params& p) {
    Eigen::MatrixX2d out = p.scale * y * p.rotation.transpose();
    out.rowwise() += p.translation.transpose();
    return out;
}

/// Posteriors and the negative log-likelihood at fixed parameters.
struct EStep {
    Eigen::MatrixXd posteriors;
    Eigen::VectorXd outlier;
    double nll = 0.0;
};

EStep expectation(const Eigen::MatrixX2d& x, const Eigen::MatrixX2d& ty, double sigma2, double w) {
    const Eigen::Index n = ty.rows();
    const Eigen::Index m = x.rows();
    EStep e;
    e.posteriors.resize(n, m);
    e.outlier.resize(m);

    // Outlier term relative to the Gaussian kernel sum, in log form.
    const bool has_outlier = w > 0.0;
    const double log_c = has_outlier
                             ? std::log(2.0 * std::numbers::pi * sigma2) + std::log(w / (1.0 - w)) +
                                   std::log(static_cast<double>(n) / static_cast<double>(m))
                             : -std::numeric_limits<double>::infinity();
    const double log_prefactor = std::log((1.0 - w) / (static_cast<double>(n) * 2.0 *
                                                       std::numbers::pi * sigma2));
    const double inv_two_s2 = 1.0 / (2.0 * sigma2);
    const double* ty0 = ty.col(0).data();
    const double* ty1 = ty.col(1).data();
    std::vector<double> expo(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < m; ++j) {
        const double xj0 = x(j, 0);
        const double xj1 = x(j, 1);
        double peak = log_c;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double d0 = ty0[i] - xj0;
            const double d1 = ty1[i] - xj1;
            const double v = -(d0 * d0 + d1 * d1) * inv_two_s2;
            expo[static_cast<std::size_t>(i)] = v;
            peak = std::max(peak, v);
        }
        double* col = e.posteriors.col(j).data();
        double z = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            // Terms below e^-50 of the peak vanish against it in double precision.
            const double d = expo[static_cast<std::size_t>(i)] - peak;
            const double v = d < kNegligibleExponent ? 0.0 : std::exp(d);
            col[i] = v;
            z += v;
        }
        const double outlier_share = has_outlier ? std::exp(log_c - peak) : 0.0;
        z += outlier_share;
        const double inv_z = 1.0 / z;
        for (Eigen::Index i = 0; i < n; ++i) {
            col[i] *= inv_z;
        }
        e.outlier(j) = outlier_share * inv_z;
        e.nll -= log_prefactor + peak + std::log(z);
    }
    return e;
}

/// Weighted similarity Procrustes update; returns the new sigma^2.
double maximization(const Eigen::MatrixX2d& x, const Eigen::MatrixX2d& y, const Eigen::MatrixXd& p,
                    bool estimate_scale, Params& params) {
    const Eigen::VectorXd p1 = p.rowwise().sum();
    const Eigen::VectorXd pt1 = p.colwise().sum().transpose();
    const double np = p1.sum();
    if (!(np > std::numeric_limits<double>::min())) {
        return 0.0;
    }
    const Eigen::Vector2d mu_x = (x.transpose() * pt1) / np;
    const Eigen::Vector2d mu_y = (y.transpose() * p1) / np;

    const Eigen::MatrixX2d px = p * x;
    const Eigen::Matrix2d a = px.transpose() * y - np * mu_x * mu_y.transpose();

    Eigen::JacobiSVD<Eigen::Matrix2d> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix2d c = Eigen::Matrix2d::Identity();
    c(1, 1) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
    const Eigen::Matrix2d r = svd.matrixU() * c * svd.matrixV().transpose();
    const double trace_ar = (a.transpose() * r).trace();

    double yy = 0.0;
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        yy += p1(i) * (y.row(i).transpose() - mu_y).squaredNorm();
    }
    double xx = 0.0;
    for (Eigen::Index j = 0; j < x.rows(); ++j) {
        xx += pt1(j) * (x.row(j).transpose() - mu_x).squaredNorm();
    }

    double s = params.scale;
    if (estimate_scale && yy > 0.0) {
        s = trace_ar / yy;
    }
    params.rotation = r;
    params.scale = s;
    params.translation = mu_x - s * r * mu_y;
    return (xx - 2.0 * s * trace_ar + s * s * yy) / (np * kDim);
}

SimilarityTransform2D to_transform(const Params& p, bool reflected) {
    SimilarityTransform2D t;
    t.rotation = wrap_angle(std::atan2(p.rotation(1, 0), p.rotation(0, 0)));
    t.scale = p.scale;
    t.translation = p.translation;
    t.reflected = reflected;
    return t;
}

}  // namespace

void CpdConfig::validate() const {
    if (!(outlier_weight >= 0.0 && outlier_weight < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "outlier_weight must lie in [0,1)");
    }
    if (max_iterations < 1 || !(sigma_tolerance > 0.0) || max_target_points < 2) {
        throw Error(ErrorCode::InvalidArgument, "invalid CPD configuration");
    }
}

PointSet subsample_uniform(const PointSet& points, std::size_t max_points) {
    if (max_points == 0) {
        throw Error(ErrorCode::InvalidArgument, "max_points must be positive");
    }
    if (points.size() <= max_points) {
        return points;
    }
    Point2 centroid = Point2::Zero();
    for (const auto& p : points) {
        centroid += p;
    }
    centroid /= static_cast<double>(points.size());
    double extent = 0.0;
    for (const auto& p : points) {
        extent = std::max(extent, (p - centroid).cwiseAbs().maxCoeff());
    }
    if (max_points < 4 || !(extent > 0.0)) {
        return {centroid};
    }

    using Cell = std::pair<long long, long long>;
    auto reduce = [&](double cell) {
        std::map<Cell, std::pair<Point2, std::size_t>> cells;
        for (const auto& p : points) {
            const Point2 q = (p - centroid) / cell;
            auto& slot = cells.try_emplace({static_cast<long long>(std::floor(q.x())),
                                            static_cast<long long>(std::floor(q.y()))},
                                           Point2::Zero(), 0)
                             .first->second;
            slot.first += p;
            ++slot.second;
        }
        PointSet out;
        out.reserve(cells.size());
        for (const auto& [key, sum] : cells) {
            out.push_back(sum.first / static_cast<double>(sum.second));
        }
        return out;
    };
    // Four cells always suffice at this size; bisect for the finest grid that fits.
    double coarse = 2.0 * extent;
    double fine = coarse / static_cast<double>(points.size());
    PointSet best = reduce(coarse);
    for (int it = 0; it < kCellBisections; ++it) {
        const double mid = std::sqrt(coarse * fine);
        PointSet candidate = reduce(mid);
        if (candidate.size() <= max_points) {
            coarse = mid;
            best = std::move(candidate);
        } else {
            fine = mid;
        }
    }
    return best;
}

CpdResult cpd_register(const PointSet& source, const PointSet& target, const CpdConfig& config,
                       const SimilarityTransform2D& init) {
    config.validate();
    init.validate();
    if (source.size() < 2 || target.size() < 2) {
        throw Error(ErrorCode::DegenerateInput, "CPD needs at least 2 source and 2 target points");
    }
    Eigen::MatrixX2d y = to_matrix(source, init.reflected);
    Eigen::MatrixX2d x = to_matrix(subsample_uniform(target, config.max_target_points), false);
    if (!has_extent(y) || !has_extent(x)) {
        throw Error(ErrorCode::DegenerateInput, "CPD point set has all points coincident");
    }

    // EM runs on coordinates centred on the target and scaled to unit RMS radius;
    // the outlier constant assumes that unit area.
    const Eigen::RowVector2d shift = x.colwise().mean();
    const double unit = std::sqrt((x.rowwise() - shift).squaredNorm() / static_cast<double>(x.rows()));
    x = (x.rowwise() - shift) / unit;
    y = (y.rowwise() - shift) / unit;

    Params params;
    params.rotation = rotation_matrix(init.rotation);
    params.scale = init.scale;
    params.translation =
        (init.translation + params.scale * params.rotation * shift.transpose() - shift.transpose()) / unit;

    const auto n = static_cast<double>(y.rows());
    const auto m = static_cast<double>(x.rows());
    Eigen::MatrixX2d ty = transformed(y, params);
    // Mean squared pair distance over D, via expanded sums.
    const double sum_pairs = m * ty.squaredNorm() + n * x.squaredNorm() -
                             2.0 * ty.colwise().sum().dot(x.colwise().sum());
    double sigma2 = std::max(sum_pairs / (kDim * n * m), kMinSigma2);

    CpdResult result;
    const double w = config.outlier_weight;
    for (int it = 1; it <= config.max_iterations; ++it) {
        const EStep e = expectation(x, ty, sigma2, w);
        result.objective_history.push_back(e.nll);

        Params next = params;
        double next_sigma2 = maximization(x, y, e.posteriors, config.estimate_scale, next);
        result.iterations = it;
        if (!std::isfinite(next_sigma2) || !next.translation.allFinite() || !(next.scale > 0.0)) {
            break;
        }
        if (next_sigma2 < kMinSigma2) {
            next_sigma2 = kMinSigma2;
            result.sigma_collapsed = true;
        }
        const double change = std::abs(next_sigma2 - sigma2);
        params = next;
        sigma2 = next_sigma2;
        ty = transformed(y, params);
        if (result.sigma_collapsed || change < config.sigma_tolerance) {
            break;
        }
    }

    EStep final_e = expectation(x, ty, sigma2, w);
    result.objective_history.push_back(final_e.nll);
    // Back to input units: densities pick up a factor 1/unit^2 per target point.
    const double nll_offset = m * std::log(unit * unit);
    for (double& v : result.objective_history) {
        v += nll_offset;
    }
    result.objective = result.objective_history.back();
    result.posteriors = std::move(final_e.posteriors);
    result.outlier_posteriors = std::move(final_e.outlier);
    result.final_sigma2 = sigma2 * unit * unit;
    params.translation = unit * params.translation - params.scale * params.rotation * shift.transpose() +
                         shift.transpose();
    result.transform = to_transform(params, init.reflected);
    return result;
}

CpdResult cpd_register_robust(const PointSet& source, const PointSet& target_in,
                              const CpdConfig& config, int n_rotations, bool try_reflection) {
    if (n_rotations < 1) {
        throw Error(ErrorCode::InvalidArgument, "n_rotations must be >= 1");
    }
    if (source.empty()) {
        throw Error(ErrorCode::DegenerateInput, "CPD source is empty");
    }
    auto moments = [](const PointSet& pts, Point2& centroid, double& rms) {
        centroid = Point2::Zero();
        for (const auto& p : pts) {
            centroid += p;
        }
        centroid /= static_cast<double>(pts.size());
        double ss = 0.0;
        for (const auto& p : pts) {
            ss += (p - centroid).squaredNorm();
        }
        rms = std::sqrt(ss / static_cast<double>(pts.size()));
    };
    if (target_in.empty()) {
        throw Error(ErrorCode::DegenerateInput, "CPD target is empty");
    }
    config.validate();
    const PointSet target = subsample_uniform(target_in, config.max_target_points);
    Point2 source_centroid;
    Point2 target_centroid;
    double source_rms = 0.0;
    double target_rms = 0.0;
    moments(source, source_centroid, source_rms);
    moments(target, target_centroid, target_rms);
    const double scale = source_rms > 0.0 && target_rms > 0.0 ? target_rms / source_rms : 1.0;

    std::optional<CpdResult> best;
    std::optional<Error> last_error;
    for (const bool reflected : {false, true}) {
        if (reflected && !try_reflection) {
            continue;
        }
        for (int k = 0; k < n_rotations; ++k) {
            // Rotate (and reflect) about the source centroid, then carry that centroid
            // onto the target centroid with the RMS radii matched.
            SimilarityTransform2D init;
            init.rotation = wrap_angle(2.0 * std::numbers::pi * k / n_rotations);
            init.scale = scale;
            init.reflected = reflected;
            init.translation = target_centroid - init.linear() * source_centroid;
            try {
                CpdResult r = cpd_register(source, target, config, init);
                if (!std::isfinite(r.objective)) {
                    continue;
                }
                if (!best || r.objective < best->objective) {
                    best = std::move(r);
                }
            } catch (const Error& e) {
                if (e.code() == ErrorCode::InvalidArgument) {
                    throw;
                }
                last_error = e;
            }
        }
    }
    if (!best) {
        throw Error(ErrorCode::RegistrationFailed,
                    last_error ? last_error->what() : "no restart produced a finite objective");
    }
    return std::move(*best);
}

}  // namespace deepmorph::cpd
