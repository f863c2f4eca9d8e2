#include "deepmorph/drr.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>
#include <thread>

#include <Eigen/Geometry>

namespace deepmorph::drr {

namespace {

constexpr double kFrameTolerance = 1e-9;

/// Attenuation without the range check; callers guarantee valid HU.
inline double attenuation_unchecked(double ct, double mu_water) {
    return (ct + 1024.0) / 1024.0 * mu_water;
}

/// Parametric interval [t0, t1] of start + t*(end - start) inside the box, if any.
bool clip_to_box(const Vec3& start, const Vec3& dir, const Vec3& lo, const Vec3& hi, double& t0,
                 double& t1) {
    t0 = 0.0;
    t1 = 1.0;
    for (int a = 0; a < 3; ++a) {
        if (dir(a) == 0.0) {
            if (start(a) < lo(a) || start(a) > hi(a)) {
                return false;
            }
            continue;
        }
        double ta = (lo(a) - start(a)) / dir(a);
        double tb = (hi(a) - start(a)) / dir(a);
        if (ta > tb) {
            std::swap(ta, tb);
        }
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) {
            return false;
        }
    }
    return true;
}

struct Offset {
    int dx;
    int dy;
};

std::vector<Offset> disk(int radius) {
    std::vector<Offset> out;
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            if (dx * dx + dy * dy <= radius * radius) {
                out.push_back({dx, dy});
            }
        }
    }
    return out;
}

// Moore neighbourhood, clockwise on screen (y down) starting west.
constexpr std::array<int, 8> kDx = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr std::array<int, 8> kDy = {0, -1, -1, -1, 0, 1, 1, 1};

int direction_index(int dx, int dy) {
    for (int i = 0; i < 8; ++i) {
        if (kDx[i] == dx && kDy[i] == dy) {
            return i;
        }
    }
    return -1;
}

}  // namespace

// =============================================================================
// Types
// =============================================================================

CtVolume::CtVolume(std::array<int, 3> dims, Vec3 spacing, Vec3 origin, std::vector<float> values)
    : dims_(dims), spacing_(std::move(spacing)), origin_(std::move(origin)),
      values_(std::move(values)) {
    for (int d : dims_) {
        if (d < 1) {
            throw Error(ErrorCode::InvalidArgument, "volume dimensions must be >= 1");
        }
    }
    if (!(spacing_.minCoeff() > 0.0) || !spacing_.allFinite() || !origin_.allFinite()) {
        throw Error(ErrorCode::InvalidArgument, "volume spacing must be positive and finite");
    }
    const std::size_t expected = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
    if (values_.size() != expected) {
        throw Error(ErrorCode::InvalidArgument, "volume value count does not match dimensions");
    }
    for (float v : values_) {
        if (!(v >= kAirHu && v <= kMaxHu)) {
            throw Error(ErrorCode::OutOfRange, "CT value outside [-1024, 3071] HU");
        }
    }
}

CtVolume CtVolume::filled(std::array<int, 3> dims, Vec3 spacing, Vec3 origin, float hu) {
    const std::size_t n = static_cast<std::size_t>(std::max(dims[0], 0)) *
                          static_cast<std::size_t>(std::max(dims[1], 0)) *
                          static_cast<std::size_t>(std::max(dims[2], 0));
    return CtVolume(dims, std::move(spacing), std::move(origin), std::vector<float>(n, hu));
}

void CtVolume::set_voxel(int i, int j, int k, float hu) {
    if (!(hu >= kAirHu && hu <= kMaxHu)) {
        throw Error(ErrorCode::OutOfRange, "CT value outside [-1024, 3071] HU");
    }
    values_[index(i, j, k)] = hu;
}

Vec3 CtVolume::upper_corner() const {
    return origin_ + Vec3((dims_[0] - 1) * spacing_(0), (dims_[1] - 1) * spacing_(1),
                          (dims_[2] - 1) * spacing_(2));
}

void CameraGeometry::validate() const {
    if (std::abs(detector_u.dot(detector_v)) > kFrameTolerance ||
        std::abs(detector_u.norm() - 1.0) > kFrameTolerance ||
        std::abs(detector_v.norm() - 1.0) > kFrameTolerance) {
        throw Error(ErrorCode::InvalidArgument, "detector axes must be orthonormal");
    }
    if (!(pixel_pitch > 0.0) || width < 1 || height < 1) {
        throw Error(ErrorCode::InvalidArgument, "pixel pitch and image size must be positive");
    }
    if (std::abs((focal_point - detector_center).dot(detector_normal())) <= kFrameTolerance) {
        throw Error(ErrorCode::InvalidArgument, "focal point lies on the detector plane");
    }
}

Vec3 CameraGeometry::pixel_position(double x, double y) const {
    const double a = (x - (width - 1) / 2.0) * pixel_pitch;
    const double b = (y - (height - 1) / 2.0) * pixel_pitch;
    return detector_center + a * detector_u + b * detector_v;
}

bool CameraGeometry::pixel_in_mask(int x, int y) const noexcept {
    if (!circular_mask) {
        return true;
    }
    const double dx = x - (width - 1) / 2.0;
    const double dy = y - (height - 1) / 2.0;
    const double r = std::min(width, height) / 2.0;
    return dx * dx + dy * dy <= r * r;
}

void RenderConfig::validate() const {
    if (n_samples < 2 || !(mu_water > 0.0) ||
        !(saturation_fraction >= 0.0 && saturation_fraction < 1.0) || gray_min < 0 ||
        gray_max > 255 || gray_min >= gray_max) {
        throw Error(ErrorCode::InvalidArgument, "invalid render configuration");
    }
}

void TriangleMesh::validate() const {
    if (faces.empty()) {
        throw Error(ErrorCode::InvalidArgument, "mesh needs at least one face");
    }
    const auto n = static_cast<int>(vertices.size());
    for (const auto& f : faces) {
        for (int idx : f) {
            if (idx < 0 || idx >= n) {
                throw Error(ErrorCode::InvalidArgument, "mesh face index out of range");
            }
        }
    }
}

// =============================================================================
// Ray casting
// =============================================================================

double hu_to_attenuation(double ct, double mu_water) {
    if (!(ct >= kAirHu && ct <= kMaxHu)) {
        throw Error(ErrorCode::OutOfRange, "CT value " + std::to_string(ct) + " outside range");
    }
    return attenuation_unchecked(ct, mu_water);
}

double trilinear_sample(const CtVolume& volume, const Vec3& position) noexcept {
    const auto& dims = volume.dims();
    std::array<int, 3> i0{};
    std::array<int, 3> i1{};
    std::array<double, 3> frac{};
    for (int a = 0; a < 3; ++a) {
        const double f = (position(a) - volume.origin()(a)) / volume.spacing()(a);
        if (!(f >= 0.0 && f <= dims[a] - 1)) {
            return kAirHu;
        }
        if (dims[a] == 1) {
            i0[a] = i1[a] = 0;
            frac[a] = 0.0;
            continue;
        }
        const int base = std::min(static_cast<int>(f), dims[a] - 2);
        i0[a] = base;
        i1[a] = base + 1;
        frac[a] = f - base;
    }
    const double c000 = volume.voxel(i0[0], i0[1], i0[2]);
    const double c100 = volume.voxel(i1[0], i0[1], i0[2]);
    const double c010 = volume.voxel(i0[0], i1[1], i0[2]);
    const double c110 = volume.voxel(i1[0], i1[1], i0[2]);
    const double c001 = volume.voxel(i0[0], i0[1], i1[2]);
    const double c101 = volume.voxel(i1[0], i0[1], i1[2]);
    const double c011 = volume.voxel(i0[0], i1[1], i1[2]);
    const double c111 = volume.voxel(i1[0], i1[1], i1[2]);

    const double c00 = c000 + frac[0] * (c100 - c000);
    const double c10 = c010 + frac[0] * (c110 - c010);
    const double c01 = c001 + frac[0] * (c101 - c001);
    const double c11 = c011 + frac[0] * (c111 - c011);
    const double c0 = c00 + frac[1] * (c10 - c00);
    const double c1 = c01 + frac[1] * (c11 - c01);
    return c0 + frac[2] * (c1 - c0);
}

double cast_ray(const CtVolume& volume, const Vec3& start, const Vec3& end, int n_samples,
                double mu_water) {
    if (n_samples < 2) {
        throw Error(ErrorCode::InvalidArgument, "cast_ray needs n_samples >= 2");
    }
    const Vec3 dir = end - start;
    const double length = dir.norm();
    if (!(length > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "cast_ray start and end coincide");
    }
    double t0 = 0.0;
    double t1 = 0.0;
    if (!clip_to_box(start, dir, volume.lower_corner(), volume.upper_corner(), t0, t1)) {
        return 0.0;
    }
    // Samples outside [t0, t1] read air (zero attenuation), so only the clipped
    // index range is visited; widen by one sample on each side.
    const double n = n_samples;
    const int k_lo = std::max(0, static_cast<int>(std::floor(t0 * n - 0.5)) - 1);
    const int k_hi = std::min(n_samples - 1, static_cast<int>(std::ceil(t1 * n - 0.5)) + 1);

    double sum = 0.0;
    for (int k = k_lo; k <= k_hi; ++k) {
        const double t = (k + 0.5) / n;
        sum += attenuation_unchecked(trilinear_sample(volume, start + t * dir), mu_water);
    }
    return sum * (length / n);
}

RenderResult render(const CtVolume& volume, const CameraGeometry& camera,
                    const RenderConfig& config, int threads) {
    camera.validate();
    config.validate();
    const int w = camera.width;
    const int h = camera.height;
    RenderResult result;
    result.image = GrayImage(w, h, 0);
    result.attenuation.assign(static_cast<std::size_t>(w) * h, 0.0);

    auto render_rows = [&](int row_begin, int row_step) {
        for (int y = row_begin; y < h; y += row_step) {
            for (int x = 0; x < w; ++x) {
                if (!camera.pixel_in_mask(x, y)) {
                    continue;
                }
                result.attenuation[static_cast<std::size_t>(y) * w + x] =
                    cast_ray(volume, camera.focal_point, camera.pixel_position(x, y),
                             config.n_samples, config.mu_water);
            }
        }
    };
    threads = std::clamp(threads, 1, h);
    if (threads == 1) {
        render_rows(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back(render_rows, t, threads);
        }
    }

    std::vector<double> active;
    active.reserve(result.attenuation.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (camera.pixel_in_mask(x, y)) {
                active.push_back(result.attenuation[static_cast<std::size_t>(y) * w + x]);
            }
        }
    }
    if (active.empty()) {
        result.degenerate = true;
        return result;
    }
    std::sort(active.begin(), active.end());
    // Smallest value such that at least ceil(f * n) pixels lie at or below it.
    const auto needed = static_cast<std::size_t>(
        std::ceil(config.saturation_fraction * static_cast<double>(active.size())));
    const double threshold = active[needed == 0 ? 0 : needed - 1];
    result.saturation_threshold = threshold;
    const double a_max = std::max(active.back(), threshold);

    const double i_max = std::exp(-threshold);
    const double i_min = std::exp(-a_max);
    result.degenerate = !(i_max > i_min);
    const double range = config.gray_max - config.gray_min;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!camera.pixel_in_mask(x, y)) {
                continue;
            }
            const double a =
                std::max(result.attenuation[static_cast<std::size_t>(y) * w + x], threshold);
            double gray = config.gray_max;
            if (!result.degenerate) {
                gray = config.gray_min + (std::exp(-a) - i_min) / (i_max - i_min) * range;
            }
            const double rounded = std::floor(gray + 0.5);
            result.image.at(x, y) = static_cast<std::uint8_t>(
                std::clamp(rounded, double(config.gray_min), double(config.gray_max)));
        }
    }
    return result;
}

// =============================================================================
// Ground-truth projection
// =============================================================================

std::optional<Eigen::Vector2d> project_to_detector(const CameraGeometry& camera, const Vec3& p) {
    const Vec3 n = camera.detector_normal();
    const double to_plane = (camera.detector_center - camera.focal_point).dot(n);
    const double to_point = (p - camera.focal_point).dot(n);
    if (to_point == 0.0) {
        return std::nullopt;
    }
    const double t = to_plane / to_point;
    if (!(t > 0.0) || !std::isfinite(t)) {
        return std::nullopt;
    }
    const Vec3 hit = camera.focal_point + t * (p - camera.focal_point);
    const Vec3 d = hit - camera.detector_center;
    return Eigen::Vector2d(d.dot(camera.detector_u), d.dot(camera.detector_v));
}

std::optional<Point2> project_to_pixel(const CameraGeometry& camera, const Vec3& p) {
    const auto mm = project_to_detector(camera, p);
    if (!mm) {
        return std::nullopt;
    }
    return Point2(mm->x() / camera.pixel_pitch + (camera.width - 1) / 2.0,
                  mm->y() / camera.pixel_pitch + (camera.height - 1) / 2.0);
}

GrayImage morphological_close(const GrayImage& mask, int radius) {
    if (radius <= 0) {
        return mask;
    }
    const int pad = radius;
    const int pw = mask.width() + 2 * pad;
    const int ph = mask.height() + 2 * pad;
    const auto kernel = disk(radius);

    std::vector<std::uint8_t> padded(static_cast<std::size_t>(pw) * ph, 0);
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            padded[static_cast<std::size_t>(y + pad) * pw + (x + pad)] = mask.at(x, y) ? 1 : 0;
        }
    }
    std::vector<std::uint8_t> dilated(padded.size(), 0);
    for (int y = 0; y < ph; ++y) {
        for (int x = 0; x < pw; ++x) {
            if (!padded[static_cast<std::size_t>(y) * pw + x]) {
                continue;
            }
            for (const auto& o : kernel) {
                const int qx = x + o.dx;
                const int qy = y + o.dy;
                if (qx >= 0 && qy >= 0 && qx < pw && qy < ph) {
                    dilated[static_cast<std::size_t>(qy) * pw + qx] = 1;
                }
            }
        }
    }
    GrayImage out(mask.width(), mask.height(), 0);
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            bool keep = true;
            for (const auto& o : kernel) {
                const int qx = x + pad + o.dx;
                const int qy = y + pad + o.dy;
                if (!dilated[static_cast<std::size_t>(qy) * pw + qx]) {
                    keep = false;
                    break;
                }
            }
            out.at(x, y) = keep ? 255 : 0;
        }
    }
    return out;
}

GrayImage fill_holes(const GrayImage& mask) {
    const int w = mask.width();
    const int h = mask.height();
    std::vector<std::uint8_t> outside(static_cast<std::size_t>(w) * h, 0);
    std::deque<std::pair<int, int>> queue;
    auto seed = [&](int x, int y) {
        const auto idx = static_cast<std::size_t>(y) * w + x;
        if (!mask.at(x, y) && !outside[idx]) {
            outside[idx] = 1;
            queue.emplace_back(x, y);
        }
    };
    for (int x = 0; x < w; ++x) {
        seed(x, 0);
        seed(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        seed(0, y);
        seed(w - 1, y);
    }
    while (!queue.empty()) {
        const auto [x, y] = queue.front();
        queue.pop_front();
        if (x > 0) seed(x - 1, y);
        if (x + 1 < w) seed(x + 1, y);
        if (y > 0) seed(x, y - 1);
        if (y + 1 < h) seed(x, y + 1);
    }
    GrayImage out(w, h, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            out.at(x, y) = outside[static_cast<std::size_t>(y) * w + x] ? 0 : 255;
        }
    }
    return out;
}

PointSet trace_largest_boundary(const GrayImage& mask) {
    const int w = mask.width();
    const int h = mask.height();
    std::vector<int> label(static_cast<std::size_t>(w) * h, 0);
    int best_label = 0;
    std::size_t best_size = 0;
    std::pair<int, int> best_start{0, 0};
    int next_label = 0;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y) || label[static_cast<std::size_t>(y) * w + x]) {
                continue;
            }
            ++next_label;
            std::size_t size = 0;
            std::deque<std::pair<int, int>> queue{{x, y}};
            label[static_cast<std::size_t>(y) * w + x] = next_label;
            while (!queue.empty()) {
                const auto [cx, cy] = queue.front();
                queue.pop_front();
                ++size;
                for (int d = 0; d < 8; ++d) {
                    const int qx = cx + kDx[d];
                    const int qy = cy + kDy[d];
                    if (qx < 0 || qy < 0 || qx >= w || qy >= h || !mask.at(qx, qy)) {
                        continue;
                    }
                    auto& l = label[static_cast<std::size_t>(qy) * w + qx];
                    if (!l) {
                        l = next_label;
                        queue.emplace_back(qx, qy);
                    }
                }
            }
            // Raster order makes (x, y) the top-left pixel of its component.
            if (size > best_size) {
                best_size = size;
                best_label = next_label;
                best_start = {x, y};
            }
        }
    }
    if (best_label == 0) {
        return {};
    }

    auto inside = [&](int x, int y) {
        return x >= 0 && y >= 0 && x < w && y < h &&
               label[static_cast<std::size_t>(y) * w + x] == best_label;
    };

    // Moore-neighbour tracing with Jacob's stopping criterion.
    const auto [sx, sy] = best_start;
    PointSet contour{Point2(sx, sy)};
    int cx = sx;
    int cy = sy;
    int back = 0;  // west of the start pixel is background
    const int start_back = back;
    const std::size_t guard = 4 * best_size + 8;
    for (std::size_t step = 0; step < guard; ++step) {
        int found = -1;
        for (int i = 1; i <= 8; ++i) {
            const int d = (back + i) % 8;
            if (inside(cx + kDx[d], cy + kDy[d])) {
                found = d;
                break;
            }
        }
        if (found < 0) {
            break;
        }
        const int prev_d = (found + 7) % 8;
        const int px = cx + kDx[prev_d];
        const int py = cy + kDy[prev_d];
        cx += kDx[found];
        cy += kDy[found];
        back = direction_index(px - cx, py - cy);
        if (cx == sx && cy == sy && back == start_back) {
            break;
        }
        contour.emplace_back(cx, cy);
    }
    // Drop a trailing return to the start and any consecutive repeats.
    PointSet ordered;
    for (const auto& p : contour) {
        if (ordered.empty() || ordered.back() != p) {
            ordered.push_back(p);
        }
    }
    while (ordered.size() > 1 && ordered.back() == ordered.front()) {
        ordered.pop_back();
    }
    return ordered;
}

GroundTruthProjection project_mesh_ground_truth(const TriangleMesh& mesh,
                                                const CameraGeometry& camera, int closing_radius) {
    mesh.validate();
    camera.validate();
    if (closing_radius < 0) {
        throw Error(ErrorCode::InvalidArgument, "closing radius must be >= 0");
    }
    GrayImage raster(camera.width, camera.height, 0);
    PointSet projected;
    for (const auto& v : mesh.vertices) {
        const auto px = project_to_pixel(camera, v);
        if (!px) {
            continue;
        }
        const auto ix = static_cast<long long>(std::floor(px->x() + 0.5));
        const auto iy = static_cast<long long>(std::floor(px->y() + 0.5));
        if (ix < 0 || iy < 0 || ix >= camera.width || iy >= camera.height) {
            continue;
        }
        raster.at(static_cast<int>(ix), static_cast<int>(iy)) = 255;
        projected.push_back(*px);
    }
    if (projected.empty()) {
        throw Error(ErrorCode::EmptyProjection, "no mesh vertex projects into the image");
    }
    GrayImage mask = fill_holes(morphological_close(raster, closing_radius));
    PointSet boundary = trace_largest_boundary(mask);
    if (boundary.size() < 2) {
        throw Error(ErrorCode::EmptyProjection, "projected silhouette is smaller than two pixels");
    }
    return {Polyline(std::move(boundary), true), std::move(mask), std::move(projected)};
}

}  // namespace deepmorph::drr
