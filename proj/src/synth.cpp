#include "deepmorph/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "deepmorph/random.hpp"

namespace deepmorph::synth {

namespace {

constexpr double kKeepFraction = 0.1;

template <typename DistanceFn>
ConfidenceMap ridge_map(int width, int height, const SynthConfig& config, DistanceFn distance) {
    config.validate();
    if (width < 1 || height < 1) {
        throw Error(ErrorCode::InvalidArgument, "image size must be positive");
    }
    SeededRng rng(config.seed);
    const double two_s2 = 2.0 * config.ridge_sigma * config.ridge_sigma;
    std::vector<float> values(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double d = distance(Point2(x, y));
            double v = config.peak_value * std::exp(-d * d / two_s2);
            if (config.background_noise_sigma > 0.0) {
                v += config.background_noise_sigma * rng.normal();
            }
            values[static_cast<std::size_t>(y) * width + x] =
                static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
    }
    return ConfidenceMap(width, height, std::move(values));
}

/// Removes components along `basis` columns; returns false if little is left.
bool orthogonalize(Eigen::VectorXd& v, const std::vector<Eigen::VectorXd>& basis) {
    const double original = v.norm();
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto& b : basis) {
            v -= b.dot(v) * b;
        }
    }
    const double left = v.norm();
    if (!(left > kKeepFraction * original) || !(left > 0.0)) {
        return false;
    }
    v /= left;
    return true;
}

}  // namespace

void SynthConfig::validate() const {
    if (!(ridge_sigma > 0.0) || !(peak_value > 0.0 && peak_value <= 1.0) ||
        !(background_noise_sigma >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "invalid synth configuration");
    }
}

ConfidenceMap confmap_from_outline(const Polyline& outline, int width, int height,
                                   const SynthConfig& config) {
    return ridge_map(width, height, config,
                     [&](const Point2& p) { return outline.distance_to(p); });
}

ConfidenceMap confmap_from_circle(const Circle& circle, int width, int height,
                                  const SynthConfig& config) {
    return ridge_map(width, height, config, [&](const Point2& p) {
        return std::abs((p - circle.center()).norm() - circle.r());
    });
}

ConfidenceMap apply_squares(const ConfidenceMap& map, const std::vector<Square>& squares) {
    std::vector<float> values(map.values().begin(), map.values().end());
    const int w = map.width();
    for (const auto& s : squares) {
        const int x_end = std::min(s.x + s.side, w);
        const int y_end = std::min(s.y + s.side, map.height());
        for (int y = std::max(s.y, 0); y < y_end; ++y) {
            for (int x = std::max(s.x, 0); x < x_end; ++x) {
                values[static_cast<std::size_t>(y) * w + x] = 0.0f;
            }
        }
    }
    return ConfidenceMap(w, map.height(), std::move(values));
}

OcclusionResult occlude_squares(const ConfidenceMap& map, int n_squares, int side_min,
                                int side_max, std::uint64_t seed) {
    if (n_squares < 0 || side_min < 1 || side_max < side_min) {
        throw Error(ErrorCode::InvalidArgument, "invalid occlusion parameters");
    }
    SeededRng rng(seed);
    std::vector<Square> squares;
    for (int i = 0; i < n_squares; ++i) {
        Square s;
        s.side = static_cast<int>(rng.uniform_int(side_min, side_max));
        s.x = static_cast<int>(rng.uniform_int(0, std::max(0, map.width() - s.side)));
        s.y = static_cast<int>(rng.uniform_int(0, std::max(0, map.height() - s.side)));
        squares.push_back(s);
    }
    return {apply_squares(map, squares), std::move(squares)};
}

Eigen::MatrixXd deformation_fields(const pdm::ShapeVector& base, int n_modes) {
    const Eigen::Index n = base.point_count();
    const Eigen::Index dim = 2 * n;
    if (n_modes < 0 || n_modes > dim) {
        throw Error(ErrorCode::InvalidArgument, "n_modes must lie in [0, 2N]");
    }
    Point2 centroid = Point2::Zero();
    for (Eigen::Index i = 0; i < n; ++i) {
        centroid += base.point(i);
    }
    centroid /= static_cast<double>(n);

    std::vector<Eigen::VectorXd> similarity;
    {
        Eigen::VectorXd tx = Eigen::VectorXd::Zero(dim);
        Eigen::VectorXd ty = Eigen::VectorXd::Zero(dim);
        Eigen::VectorXd sc(dim);
        Eigen::VectorXd rot(dim);
        for (Eigen::Index i = 0; i < n; ++i) {
            const Point2 c = base.point(i) - centroid;
            tx(2 * i) = 1.0;
            ty(2 * i + 1) = 1.0;
            sc(2 * i) = c.x();
            sc(2 * i + 1) = c.y();
            rot(2 * i) = -c.y();
            rot(2 * i + 1) = c.x();
        }
        for (auto* v : {&tx, &ty, &sc, &rot}) {
            if (orthogonalize(*v, similarity)) {
                similarity.push_back(*v);
            }
        }
    }

    // Chord normals and tangents of the closed base chain.
    std::vector<Point2> normal(static_cast<std::size_t>(n));
    std::vector<Point2> tangent(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        Point2 chord = base.point((i + 1) % n) - base.point((i + n - 1) % n);
        if (!(chord.norm() > 0.0)) {
            chord = Point2(1.0, 0.0);
        }
        chord.normalize();
        tangent[static_cast<std::size_t>(i)] = chord;
        normal[static_cast<std::size_t>(i)] = Point2(-chord.y(), chord.x());
    }

    std::vector<Eigen::VectorXd> accepted;
    std::vector<Eigen::VectorXd> basis = similarity;
    auto try_candidate = [&](const std::vector<Point2>& dirs, int harmonic, bool use_sin) {
        Eigen::VectorXd v(dim);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double phase = 2.0 * std::numbers::pi * harmonic * static_cast<double>(i) /
                                 static_cast<double>(n);
            const double a = use_sin ? std::sin(phase) : std::cos(phase);
            v(2 * i) = a * dirs[static_cast<std::size_t>(i)].x();
            v(2 * i + 1) = a * dirs[static_cast<std::size_t>(i)].y();
        }
        if (orthogonalize(v, basis)) {
            basis.push_back(v);
            accepted.push_back(v);
        }
    };
    const int max_harmonic = static_cast<int>(n / 2);
    for (const auto* dirs : {&normal, &tangent}) {
        for (int h = 1; h <= max_harmonic && static_cast<int>(accepted.size()) < n_modes; ++h) {
            try_candidate(*dirs, h, false);
            if (static_cast<int>(accepted.size()) < n_modes) {
                try_candidate(*dirs, h, true);
            }
        }
    }
    if (static_cast<int>(accepted.size()) < n_modes) {
        throw Error(ErrorCode::InvalidArgument, "cannot build that many independent deformation fields");
    }
    Eigen::MatrixXd fields(dim, n_modes);
    for (int j = 0; j < n_modes; ++j) {
        fields.col(j) = accepted[static_cast<std::size_t>(j)];
    }
    return fields;
}

std::vector<pdm::ShapeVector> generate_shape_family(const pdm::ShapeVector& base, int n_shapes,
                                                    int n_modes,
                                                    const std::vector<double>& mode_amplitudes,
                                                    std::uint64_t seed) {
    if (static_cast<int>(mode_amplitudes.size()) != n_modes) {
        throw Error(ErrorCode::AmplitudeMismatch, "expected one amplitude per mode");
    }
    if (n_shapes < 0) {
        throw Error(ErrorCode::InvalidArgument, "n_shapes must be >= 0");
    }
    const Eigen::MatrixXd fields = deformation_fields(base, n_modes);
    SeededRng rng(seed);
    std::vector<pdm::ShapeVector> family;
    family.reserve(static_cast<std::size_t>(n_shapes));
    for (int s = 0; s < n_shapes; ++s) {
        Eigen::VectorXd coords = base.coords();
        for (int j = 0; j < n_modes; ++j) {
            coords += mode_amplitudes[static_cast<std::size_t>(j)] * rng.normal() * fields.col(j);
        }
        family.emplace_back(std::move(coords));
    }
    return family;
}

pdm::ShapeVector asymmetric_outline(int n_points, const Point2& center, double radius) {
    if (n_points < 3 || !(radius > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "outline needs >= 3 points and a positive radius");
    }
    PointSet pts;
    for (int i = 0; i < n_points; ++i) {
        const double t = 2.0 * std::numbers::pi * i / n_points;
        const double r = radius * (1.0 + 0.2 * std::cos(t) + 0.12 * std::sin(2.0 * t + 0.5) +
                                   0.06 * std::cos(3.0 * t + 1.0));
        pts.emplace_back(center.x() + r * std::cos(t), center.y() + r * std::sin(t));
    }
    return pdm::ShapeVector::from_points(pts);
}

}  // namespace deepmorph::synth
