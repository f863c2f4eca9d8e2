#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "deepmorph/circlefit.hpp"
#include "deepmorph/core.hpp"
#include "deepmorph/morph.hpp"
#include "deepmorph/pdm.hpp"

namespace deepmorph::eval {

namespace fs = std::filesystem;

struct CaseRecord {
    std::string fixture;
    std::string stratum;
    std::string metric;
    double value = 0.0;
};

struct Aggregate {
    std::string stratum;
    std::string metric;
    std::size_t count = 0;
    double mean = 0.0;
    double median = 0.0;
    double max = 0.0;
};

/// Per-case records plus per-(stratum, metric) aggregates derived from them.
struct EvaluationReport {
    std::vector<CaseRecord> records;
    std::vector<Aggregate> aggregates;

    /// Aggregate lookup; throws InvalidArgument when absent.
    const Aggregate& find(const std::string& stratum, const std::string& metric) const;
    bool has(const std::string& stratum, const std::string& metric) const;
};

inline constexpr const char* kClean = "clean";
inline constexpr const char* kOccluded = "occluded";

/// Recomputes aggregates (sorted by stratum, then metric) from the records.
std::vector<Aggregate> aggregate(const std::vector<CaseRecord>& records);

struct CircleFixture {
    std::string id;
    ConfidenceMap map;
    Circle truth;
    bool occluded = false;
};

struct ShapeFixture {
    std::string id;
    ConfidenceMap map;
    Polyline truth;
    bool occluded = false;
};

struct CircleEvalConfig {
    double tau = 0.5;
    std::size_t min_foreground = 100;
    circlefit::GeometricFitConfig geometric;
};

/// Runs both fit methods per fixture. Metrics: rmse_<method> for detections and
/// no_detection_<method> (value 1) for gated or degenerate cases.
EvaluationReport evaluate_circle_suite(const std::vector<CircleFixture>& fixtures,
                                       const CircleEvalConfig& config = {});
EvaluationReport evaluate_circle_suite(const fs::path& dir, const CircleEvalConfig& config = {});

/// Metrics: point_to_curve_rmse, iterations, converged, and fit_failed (value 1) on errors.
EvaluationReport evaluate_shape_suite(const std::vector<ShapeFixture>& fixtures,
                                      const pdm::PointDistributionModel& model,
                                      const morph::MorphConfig& config = {});
EvaluationReport evaluate_shape_suite(const fs::path& dir, const pdm::PointDistributionModel& model,
                                      const morph::MorphConfig& config = {});

/// Fixture directories hold `<id>.cmap` next to a `<id>.truth` sidecar; ids are sorted.
/// A fixture is occluded when its sidecar lists at least one square.
std::vector<CircleFixture> load_circle_fixtures(const fs::path& dir);
std::vector<ShapeFixture> load_shape_fixtures(const fs::path& dir);

/// Lines `fixture stratum metric value` and `stratum metric count mean median max`.
void write_report(const EvaluationReport& report, const fs::path& records_path,
                  const fs::path& summary_path);

}  // namespace deepmorph::eval
