#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "deepmorph/core.hpp"
#include "deepmorph/drr.hpp"
#include "deepmorph/image.hpp"
#include "deepmorph/pdm.hpp"
#include "deepmorph/synth.hpp"

namespace deepmorph::io {

namespace fs = std::filesystem;

// CMAP v1: "CMAP 1 <W> <H>\n" + W*H little-endian float32, row-major.
void write_cmap(std::ostream& os, const ConfidenceMap& map);
ConfidenceMap read_cmap(std::istream& is);
void write_cmap(const fs::path& path, const ConfidenceMap& map);
ConfidenceMap read_cmap(const fs::path& path);

// Point lists: optional first line "closed", then one "x,y" per line.
void write_polyline(std::ostream& os, const PointSet& points, bool closed);
void write_polyline(const fs::path& path, const PointSet& points, bool closed);
struct PointList {
    PointSet points;
    bool closed = false;
};
PointList read_point_list(std::istream& is);
PointList read_point_list(const fs::path& path);
Polyline read_polyline(const fs::path& path);

// Binary P5 PGM, maxval 255.
void write_pgm(const fs::path& path, const GrayImage& image);
GrayImage read_pgm(const fs::path& path);

// CTVOL v1: "CTVOL 1 nx ny nz sx sy sz ox oy oz\n" + little-endian int16 HU, x-fastest.
void write_ctvol(const fs::path& path, const drr::CtVolume& volume);
drr::CtVolume read_ctvol(const fs::path& path);

// OBJ subset: "v x y z" and "f i j k" (1-based); everything else ignored.
void write_obj(const fs::path& path, const drr::TriangleMesh& mesh);
drr::TriangleMesh read_obj(std::istream& is);
drr::TriangleMesh read_obj(const fs::path& path);

// PDM v1: "PDM 1 <N> <M>", mean, eigenvalues, modes; 17 significant digits.
void write_pdm(std::ostream& os, const pdm::PointDistributionModel& model);
pdm::PointDistributionModel read_pdm(std::istream& is);
void write_pdm(const fs::path& path, const pdm::PointDistributionModel& model);
pdm::PointDistributionModel read_pdm(const fs::path& path);

/// First three fields of a circle record (`cx cy r ...`), optionally prefixed by `circle`.
Circle parse_circle_record(const std::string& line);
Circle read_circle_record(const fs::path& path);
std::string format_circle(const Circle& c);

/// Synthesis sidecar: lines `circle cx cy r`, `closed 0|1`, `vertex x y`, `square x y side`.
struct FixtureTruth {
    std::optional<Circle> circle;
    std::optional<Polyline> outline;
    std::vector<synth::Square> squares;
};
void write_truth(const fs::path& path, const FixtureTruth& truth);
FixtureTruth read_truth(const fs::path& path);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

}  // namespace deepmorph::io
