#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "deepmorph/core.hpp"

namespace deepmorph::circlefit {

/// Implicit circle x^2 + y^2 + Bx + Cy + D = 0.
struct AlgebraicCircleCoefficients {
    double B = 0.0;
    double C = 0.0;
    double D = 0.0;

    /// B^2/4 + C^2/4 - D; the squared radius when positive.
    double radicand() const noexcept { return B * B / 4.0 + C * C / 4.0 - D; }
    Circle to_circle() const;
    static AlgebraicCircleCoefficients from_circle(const Circle& c) noexcept;
};

struct GeometricFitConfig {
    int max_iterations = 100;
    double step_tolerance = 1e-8;
    double damping_init = 1e-3;

    void validate() const;
};

struct GeometricFitResult {
    Circle circle;
    double cost = 0.0;
    int iterations = 0;
    /// False when max_iterations ran out; circle is then the best iterate.
    bool converged = false;
};

enum class Method { Algebraic, Geometric };

std::string_view to_string(Method m);
Method method_from_string(std::string_view s);

/// Sum of squared geometric residuals (||p - c|| - r)^2.
double geometric_cost(const PointSet& points, const Circle& circle) noexcept;

/// Sum of squared algebraic residuals (x^2 + y^2 + Bx + Cy + D)^2.
double algebraic_cost(const PointSet& points, const AlgebraicCircleCoefficients& coeffs) noexcept;

/// Throws DegenerateInput for fewer than 3 points or collinear points.
void check_fit_input(const PointSet& points);

/// Closed-form minimizer of the algebraic cost, in original coordinates.
AlgebraicCircleCoefficients fit_circle_algebraic_coefficients(const PointSet& points);

/// Closed-form algebraic fit. Throws DegenerateInput or NoRealCircle.
Circle fit_circle_algebraic(const PointSet& points);

/// Damped Gauss-Newton on geometric residuals. Never returns a circle whose
/// cost exceeds that of `init`.
GeometricFitResult fit_circle_geometric(const PointSet& points, const Circle& init,
                                        const GeometricFitConfig& config = {});

enum class NoDetectionReason { None, TooFewForeground, DegenerateInput, NoRealCircle };

std::string_view to_string(NoDetectionReason r);

struct Detection {
    std::optional<Circle> circle;
    NoDetectionReason reason = NoDetectionReason::None;
    /// Geometric cost of the returned circle over the foreground set.
    double cost = 0.0;
    std::size_t n_points = 0;
    Method method = Method::Algebraic;

    bool detected() const noexcept { return circle.has_value(); }
};

/// Threshold, gate on the foreground count, then fit. Geometric fits are
/// warm-started from the algebraic fit.
Detection detect_circle(const ConfidenceMap& map, double tau = 0.5, std::size_t min_foreground = 100,
                        const GeometricFitConfig& config = {}, Method method = Method::Algebraic);

/// Record `cx cy r cost n_points method`.
std::string format_detection(const Detection& d);

}  // namespace deepmorph::circlefit
