#pragma once

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "deepmorph/core.hpp"
#include "deepmorph/image.hpp"

namespace deepmorph::drr {

using Vec3 = Eigen::Vector3d;

inline constexpr double kAirHu = -1024.0;
inline constexpr double kMaxHu = 3071.0;

/// CT numbers on a regular grid; voxel (i,j,k) is centred at origin + (i*sx, j*sy, k*sz) mm.
class CtVolume {
public:
    CtVolume(std::array<int, 3> dims, Vec3 spacing, Vec3 origin, std::vector<float> values);

    static CtVolume filled(std::array<int, 3> dims, Vec3 spacing, Vec3 origin, float hu);

    const std::array<int, 3>& dims() const noexcept { return dims_; }
    const Vec3& spacing() const noexcept { return spacing_; }
    const Vec3& origin() const noexcept { return origin_; }
    const std::vector<float>& values() const noexcept { return values_; }

    float voxel(int i, int j, int k) const { return values_[index(i, j, k)]; }
    void set_voxel(int i, int j, int k, float hu);

    /// Voxel-centre bounding box.
    Vec3 lower_corner() const { return origin_; }
    Vec3 upper_corner() const;
    Vec3 center() const { return 0.5 * (lower_corner() + upper_corner()); }

private:
    std::size_t index(int i, int j, int k) const noexcept {
        return (static_cast<std::size_t>(k) * static_cast<std::size_t>(dims_[1]) +
                static_cast<std::size_t>(j)) *
                   static_cast<std::size_t>(dims_[0]) +
               static_cast<std::size_t>(i);
    }

    std::array<int, 3> dims_;
    Vec3 spacing_;
    Vec3 origin_;
    std::vector<float> values_;
};

/// Pinhole C-arm: rays run from the focal point to detector pixel centres.
/// Pixel (x, y) sits at detector_center + (x - (W-1)/2) * pitch * u + (y - (H-1)/2) * pitch * v.
struct CameraGeometry {
    Vec3 focal_point = Vec3(0.0, 0.0, -600.0);
    Vec3 detector_center = Vec3(0.0, 0.0, 400.0);
    Vec3 detector_u = Vec3::UnitX();
    Vec3 detector_v = Vec3::UnitY();
    double pixel_pitch = 1.0;
    int width = 448;
    int height = 448;
    bool circular_mask = false;

    void validate() const;
    Vec3 detector_normal() const { return detector_u.cross(detector_v); }
    Vec3 pixel_position(double x, double y) const;
    /// Whether pixel (x, y) lies in the inscribed disk (always true without a mask).
    bool pixel_in_mask(int x, int y) const noexcept;
};

struct RenderConfig {
    int n_samples = 2000;
    double mu_water = 0.02;
    double saturation_fraction = 0.025;
    int gray_min = 20;
    int gray_max = 255;

    void validate() const;
};

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;

    void validate() const;
};

/// (CT + 1024) / 1024 * mu_water. Throws OutOfRange outside [-1024, 3071] HU.
double hu_to_attenuation(double ct, double mu_water);

/// Trilinear interpolation in mm; positions outside the voxel-centre box read as air.
double trilinear_sample(const CtVolume& volume, const Vec3& position) noexcept;

/// Midpoint-rule attenuation sum over n_samples points of [start, end].
double cast_ray(const CtVolume& volume, const Vec3& start, const Vec3& end, int n_samples,
                double mu_water);

struct RenderResult {
    GrayImage image;
    /// Raw per-pixel attenuation, row-major; 0 for masked pixels.
    std::vector<double> attenuation;
    /// Lower clamp applied to the attenuation before the intensity law.
    double saturation_threshold = 0.0;
    /// All unmasked attenuations were equal after clamping; every unmasked pixel is gray_max.
    bool degenerate = false;
};

/// Ray-cast DRR. Output is identical for any thread count.
RenderResult render(const CtVolume& volume, const CameraGeometry& camera,
                    const RenderConfig& config = {}, int threads = 1);

/// Intersection of the focal ray through p with the detector plane, in detector
/// millimetres along (u, v) from the detector centre. Empty if p is not in front of the focal point.
std::optional<Eigen::Vector2d> project_to_detector(const CameraGeometry& camera, const Vec3& p);

/// Same as project_to_detector, converted to (fractional) pixel coordinates.
std::optional<Point2> project_to_pixel(const CameraGeometry& camera, const Vec3& p);

struct GroundTruthProjection {
    Polyline outline;
    GrayImage mask;
    /// Projected vertices that land inside the image.
    PointSet projected;
};

/// Vertex projection, rasterization, disk closing, hole filling and an outer boundary trace
/// of the largest component. Throws EmptyProjection if no vertex lands in the image.
GroundTruthProjection project_mesh_ground_truth(const TriangleMesh& mesh,
                                                const CameraGeometry& camera,
                                                int closing_radius = 3);

/// Binary morphology helpers on {0, 255} masks (outside the image counts as background
/// for dilation and is padded away for erosion).
GrayImage morphological_close(const GrayImage& mask, int radius);
GrayImage fill_holes(const GrayImage& mask);
/// Ordered outer boundary of the largest 8-connected component.
PointSet trace_largest_boundary(const GrayImage& mask);

}  // namespace deepmorph::drr
