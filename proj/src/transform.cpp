#include "deepmorph/transform.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace deepmorph {

void SimilarityTransform2D::validate() const {
    if (!std::isfinite(rotation) || !std::isfinite(scale) || !translation.allFinite()) {
        throw Error(ErrorCode::InvalidArgument, "transform parameters must be finite");
    }
    if (!(scale > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "transform scale must be positive");
    }
}

Eigen::Matrix2d SimilarityTransform2D::linear() const {
    const double c = std::cos(rotation);
    const double s = std::sin(rotation);
    Eigen::Matrix2d m;
    m << c, -s, s, c;
    if (reflected) {
        m.col(1) = -m.col(1);
    }
    return scale * m;
}

Point2 SimilarityTransform2D::apply_inverse(const Point2& q) const {
    const double c = std::cos(rotation);
    const double s = std::sin(rotation);
    const Point2 d = q - translation;
    Point2 p(c * d.x() + s * d.y(), -s * d.x() + c * d.y());
    if (reflected) {
        p.y() = -p.y();
    }
    return p / scale;
}

SimilarityTransform2D SimilarityTransform2D::inverse() const {
    SimilarityTransform2D inv;
    inv.scale = 1.0 / scale;
    inv.reflected = reflected;
    // (R F)^-1 = F R(-theta) = R(theta) F when reflected, R(-theta) otherwise.
    inv.rotation = reflected ? rotation : wrap_angle(-rotation);
    inv.translation = -(inv.linear() * translation);
    return inv;
}

SimilarityTransform2D compose(const SimilarityTransform2D& a, const SimilarityTransform2D& b) {
    SimilarityTransform2D out;
    out.scale = a.scale * b.scale;
    out.rotation = wrap_angle(a.rotation + (a.reflected ? -b.rotation : b.rotation));
    out.reflected = a.reflected != b.reflected;
    out.translation = a.linear() * b.translation + a.translation;
    return out;
}

PointSet apply_transform(const SimilarityTransform2D& t, const PointSet& points) {
    const Eigen::Matrix2d m = t.linear();
    PointSet out;
    out.reserve(points.size());
    for (const auto& p : points) {
        out.push_back(m * p + t.translation);
    }
    return out;
}

double wrap_angle(double radians) noexcept {
    double a = std::remainder(radians, 2.0 * std::numbers::pi);
    if (a <= -std::numbers::pi) {
        a += 2.0 * std::numbers::pi;
    }
    return a;
}

SimilarityTransform2D procrustes_similarity(const PointSet& from, const PointSet& to,
                                            bool reflected) {
    if (from.size() != to.size() || from.empty()) {
        throw Error(ErrorCode::ShapeMismatch, "procrustes needs equally sized non-empty point sets");
    }
    const double n = static_cast<double>(from.size());
    Point2 cf = Point2::Zero();
    Point2 ct = Point2::Zero();
    for (std::size_t i = 0; i < from.size(); ++i) {
        cf += from[i];
        ct += to[i];
    }
    cf /= n;
    ct /= n;

    // In complex form the optimal scaled rotation is z = sum(conj(a) b) / sum |a|^2.
    std::complex<double> num{0.0, 0.0};
    double den = 0.0;
    for (std::size_t i = 0; i < from.size(); ++i) {
        const Point2 a = from[i] - cf;
        const Point2 b = to[i] - ct;
        const std::complex<double> za(a.x(), reflected ? -a.y() : a.y());
        num += std::conj(za) * std::complex<double>(b.x(), b.y());
        den += a.squaredNorm();
    }
    if (!(den > 0.0)) {
        throw Error(ErrorCode::DegenerateShape, "procrustes source has no spatial extent");
    }
    const std::complex<double> z = num / den;
    if (!(std::abs(z) > 0.0)) {
        throw Error(ErrorCode::DegenerateShape, "procrustes target has no spatial extent");
    }

    SimilarityTransform2D t;
    t.reflected = reflected;
    t.scale = std::abs(z);
    t.rotation = wrap_angle(std::arg(z));
    t.translation = ct - t.linear() * cf;
    return t;
}

std::string format_transform(const SimilarityTransform2D& t) {
    std::ostringstream os;
    os.precision(17);
    os << t.rotation << ' ' << t.scale << ' ' << t.translation.x() << ' ' << t.translation.y() << ' '
       << (t.reflected ? 1 : 0);
    return os.str();
}

SimilarityTransform2D parse_transform(const std::string& record) {
    std::istringstream is(record);
    SimilarityTransform2D t;
    int reflected = 0;
    if (!(is >> t.rotation >> t.scale >> t.translation.x() >> t.translation.y() >> reflected)) {
        throw Error(ErrorCode::Parse, "malformed transform record");
    }
    t.reflected = reflected != 0;
    t.validate();
    return t;
}

}  // namespace deepmorph
