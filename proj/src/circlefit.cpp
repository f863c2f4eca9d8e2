#include "deepmorph/circlefit.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

namespace deepmorph::circlefit {

namespace {

constexpr double kCollinearityRatio = 1e-10;

/// Points shifted to their centroid and divided by their RMS spread.
struct NormalizedPoints {
    Eigen::MatrixX2d uv;
    Point2 mean;
    double scale = 1.0;
};

NormalizedPoints normalize(const PointSet& points) {
    NormalizedPoints n;
    const auto count = static_cast<Eigen::Index>(points.size());
    n.mean = Point2::Zero();
    for (const auto& p : points) {
        n.mean += p;
    }
    n.mean /= static_cast<double>(count);

    n.uv.resize(count, 2);
    double sum2 = 0.0;
    for (Eigen::Index i = 0; i < count; ++i) {
        const Point2 d = points[static_cast<std::size_t>(i)] - n.mean;
        n.uv.row(i) = d.transpose();
        sum2 += d.squaredNorm();
    }
    n.scale = std::sqrt(sum2 / static_cast<double>(count));
    if (n.scale > 0.0) {
        n.uv /= n.scale;
    }
    return n;
}

void check_normalized(const NormalizedPoints& n) {
    if (n.uv.rows() < 3) {
        throw Error(ErrorCode::DegenerateInput, "circle fit needs at least 3 points");
    }
    if (!(n.scale > 0.0) || !std::isfinite(n.scale)) {
        throw Error(ErrorCode::DegenerateInput, "circle fit points are coincident or not finite");
    }
    Eigen::JacobiSVD<Eigen::MatrixX2d> svd(n.uv);
    const auto& sv = svd.singularValues();
    if (sv(1) < kCollinearityRatio * sv(0)) {
        throw Error(ErrorCode::DegenerateInput, "circle fit points are collinear");
    }
}

/// Minimizer (B', C', D') of the algebraic cost in normalized coordinates.
Eigen::Vector3d solve_normalized(const NormalizedPoints& n) {
    const Eigen::Index count = n.uv.rows();
    Eigen::MatrixX3d design(count, 3);
    Eigen::VectorXd rhs(count);
    for (Eigen::Index i = 0; i < count; ++i) {
        const double u = n.uv(i, 0);
        const double v = n.uv(i, 1);
        design(i, 0) = u;
        design(i, 1) = v;
        design(i, 2) = 1.0;
        rhs(i) = -(u * u + v * v);
    }
    return design.colPivHouseholderQr().solve(rhs);
}

double normalized_cost(const Eigen::MatrixX2d& uv, const Eigen::Vector3d& p) {
    double cost = 0.0;
    for (Eigen::Index i = 0; i < uv.rows(); ++i) {
        const double dx = p(0) - uv(i, 0);
        const double dy = p(1) - uv(i, 1);
        const double res = std::sqrt(dx * dx + dy * dy) - p(2);
        cost += res * res;
    }
    return cost;
}

}  // namespace

Circle AlgebraicCircleCoefficients::to_circle() const {
    const double rad = radicand();
    if (!(rad > 0.0)) {
        throw Error(ErrorCode::NoRealCircle, "B^2/4 + C^2/4 - D <= 0");
    }
    return Circle(-B / 2.0, -C / 2.0, std::sqrt(rad));
}

AlgebraicCircleCoefficients AlgebraicCircleCoefficients::from_circle(const Circle& c) noexcept {
    return {-2.0 * c.cx(), -2.0 * c.cy(), c.cx() * c.cx() + c.cy() * c.cy() - c.r() * c.r()};
}

void GeometricFitConfig::validate() const {
    if (max_iterations < 1 || !(step_tolerance > 0.0) || !(damping_init > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "invalid geometric fit configuration");
    }
}

std::string_view to_string(Method m) {
    return m == Method::Algebraic ? "algebraic" : "geometric";
}

Method method_from_string(std::string_view s) {
    if (s == "algebraic") return Method::Algebraic;
    if (s == "geometric") return Method::Geometric;
    throw Error(ErrorCode::InvalidArgument, "unknown circle fit method: " + std::string(s));
}

std::string_view to_string(NoDetectionReason r) {
    switch (r) {
        case NoDetectionReason::None: return "None";
        case NoDetectionReason::TooFewForeground: return "TooFewForeground";
        case NoDetectionReason::DegenerateInput: return "DegenerateInput";
        case NoDetectionReason::NoRealCircle: return "NoRealCircle";
    }
    return "Unknown";
}

double geometric_cost(const PointSet& points, const Circle& circle) noexcept {
    double cost = 0.0;
    for (const auto& p : points) {
        const double res = (p - circle.center()).norm() - circle.r();
        cost += res * res;
    }
    return cost;
}

double algebraic_cost(const PointSet& points, const AlgebraicCircleCoefficients& c) noexcept {
    double cost = 0.0;
    for (const auto& p : points) {
        const double res = p.x() * p.x() + p.y() * p.y() + c.B * p.x() + c.C * p.y() + c.D;
        cost += res * res;
    }
    return cost;
}

void check_fit_input(const PointSet& points) {
    check_normalized(normalize(points));
}

AlgebraicCircleCoefficients fit_circle_algebraic_coefficients(const PointSet& points) {
    const NormalizedPoints n = normalize(points);
    check_normalized(n);
    const Eigen::Vector3d q = solve_normalized(n);

    // Undo x = s*u + m.
    const double s = n.scale;
    const double mx = n.mean.x();
    const double my = n.mean.y();
    AlgebraicCircleCoefficients c;
    c.B = q(0) * s - 2.0 * mx;
    c.C = q(1) * s - 2.0 * my;
    c.D = q(2) * s * s - mx * mx - my * my - c.B * mx - c.C * my;
    return c;
}

Circle fit_circle_algebraic(const PointSet& points) {
    const NormalizedPoints n = normalize(points);
    check_normalized(n);
    const Eigen::Vector3d q = solve_normalized(n);

    const double rad = q(0) * q(0) / 4.0 + q(1) * q(1) / 4.0 - q(2);
    if (!(rad > 0.0)) {
        throw Error(ErrorCode::NoRealCircle, "algebraic fit has no real circle");
    }
    // Center and radius are recovered in the normalized frame for accuracy.
    return Circle(n.mean.x() - n.scale * q(0) / 2.0, n.mean.y() - n.scale * q(1) / 2.0,
                  n.scale * std::sqrt(rad));
}

GeometricFitResult fit_circle_geometric(const PointSet& points, const Circle& init,
                                        const GeometricFitConfig& config) {
    config.validate();
    const NormalizedPoints n = normalize(points);
    check_normalized(n);

    const double s = n.scale;
    Eigen::Vector3d p((init.cx() - n.mean.x()) / s, (init.cy() - n.mean.y()) / s, init.r() / s);
    double cost = normalized_cost(n.uv, p);
    double lambda = config.damping_init;

    GeometricFitResult result{init, geometric_cost(points, init), 0, false};
    const Eigen::Index count = n.uv.rows();
    Eigen::MatrixX3d jac(count, 3);
    Eigen::VectorXd res(count);

    for (int it = 1; it <= config.max_iterations; ++it) {
        result.iterations = it;
        for (Eigen::Index i = 0; i < count; ++i) {
            const double dx = p(0) - n.uv(i, 0);
            const double dy = p(1) - n.uv(i, 1);
            const double d = std::sqrt(dx * dx + dy * dy);
            res(i) = d - p(2);
            if (d > 0.0) {
                jac(i, 0) = dx / d;
                jac(i, 1) = dy / d;
            } else {
                jac(i, 0) = 0.0;
                jac(i, 1) = 0.0;
            }
            jac(i, 2) = -1.0;
        }
        const Eigen::Matrix3d jtj = jac.transpose() * jac;
        const Eigen::Vector3d grad = jac.transpose() * res;

        // Retry with growing damping until a step lowers the cost or becomes negligible.
        bool moved = false;
        while (true) {
            const Eigen::Matrix3d damped = jtj + lambda * Eigen::Matrix3d::Identity();
            const Eigen::Vector3d step = damped.ldlt().solve(-grad);
            if (!step.allFinite() || step.norm() * s < config.step_tolerance) {
                result.converged = true;
                break;
            }
            const Eigen::Vector3d trial = p + step;
            const double trial_cost = trial(2) > 0.0 ? normalized_cost(n.uv, trial)
                                                     : std::numeric_limits<double>::infinity();
            if (trial_cost < cost) {
                p = trial;
                cost = trial_cost;
                lambda /= 10.0;
                moved = true;
                break;
            }
            lambda *= 10.0;
            if (lambda > 1e30) {
                result.converged = true;
                break;
            }
        }
        if (result.converged || !moved) {
            break;
        }
    }

    const Circle fitted(n.mean.x() + s * p(0), n.mean.y() + s * p(1), s * p(2));
    const double fitted_cost = geometric_cost(points, fitted);
    // The normalized-frame cost decreased strictly; guard the round trip to pixel units.
    if (fitted_cost <= result.cost) {
        result.circle = fitted;
        result.cost = fitted_cost;
    }
    return result;
}

Detection detect_circle(const ConfidenceMap& map, double tau, std::size_t min_foreground,
                        const GeometricFitConfig& config, Method method) {
    if (min_foreground < 3) {
        throw Error(ErrorCode::InvalidArgument, "min_foreground must be >= 3");
    }
    Detection det;
    det.method = method;
    const PointSet fg = threshold_foreground(map, tau);
    det.n_points = fg.size();
    if (fg.size() < min_foreground) {
        det.reason = NoDetectionReason::TooFewForeground;
        return det;
    }
    try {
        Circle c = fit_circle_algebraic(fg);
        if (method == Method::Geometric) {
            c = fit_circle_geometric(fg, c, config).circle;
        }
        det.circle = c;
        det.cost = geometric_cost(fg, c);
    } catch (const Error& e) {
        det.reason = e.code() == ErrorCode::NoRealCircle ? NoDetectionReason::NoRealCircle
                                                          : NoDetectionReason::DegenerateInput;
    }
    return det;
}

std::string format_detection(const Detection& d) {
    if (!d.circle) {
        throw Error(ErrorCode::InvalidArgument, "cannot format a missing detection");
    }
    std::ostringstream os;
    os.precision(17);
    os << d.circle->cx() << ' ' << d.circle->cy() << ' ' << d.circle->r() << ' ' << d.cost << ' '
       << d.n_points << ' ' << to_string(d.method);
    return os.str();
}

}  // namespace deepmorph::circlefit
