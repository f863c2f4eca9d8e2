#include "deepmorph/eval.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "deepmorph/io.hpp"

namespace deepmorph::eval {

namespace {

std::vector<fs::path> fixture_stems(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw Error(ErrorCode::Io, "not a directory: " + dir.string());
    }
    std::vector<fs::path> stems;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".cmap") {
            stems.push_back(entry.path().parent_path() / entry.path().stem());
        }
    }
    std::sort(stems.begin(), stems.end());
    if (stems.empty()) {
        throw Error(ErrorCode::EmptyFixtureSet, "no .cmap fixtures in " + dir.string());
    }
    return stems;
}

fs::path with_suffix(const fs::path& stem, const char* suffix) {
    return fs::path(stem.string() + suffix);
}

}  // namespace

const Aggregate& EvaluationReport::find(const std::string& stratum, const std::string& metric) const {
    for (const auto& a : aggregates) {
        if (a.stratum == stratum && a.metric == metric) {
            return a;
        }
    }
    throw Error(ErrorCode::InvalidArgument, "no aggregate for " + stratum + "/" + metric);
}

bool EvaluationReport::has(const std::string& stratum, const std::string& metric) const {
    return std::any_of(aggregates.begin(), aggregates.end(), [&](const Aggregate& a) {
        return a.stratum == stratum && a.metric == metric;
    });
}

std::vector<Aggregate> aggregate(const std::vector<CaseRecord>& records) {
    std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
    for (const auto& r : records) {
        groups[{r.stratum, r.metric}].push_back(r.value);
    }
    std::vector<Aggregate> out;
    for (auto& [key, values] : groups) {
        std::sort(values.begin(), values.end());
        Aggregate a;
        a.stratum = key.first;
        a.metric = key.second;
        a.count = values.size();
        double sum = 0.0;
        for (double v : values) {
            sum += v;
        }
        a.mean = sum / static_cast<double>(values.size());
        const std::size_t mid = values.size() / 2;
        a.median = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
        a.max = values.back();
        out.push_back(a);
    }
    return out;
}

EvaluationReport evaluate_circle_suite(const std::vector<CircleFixture>& fixtures,
                                       const CircleEvalConfig& config) {
    if (fixtures.empty()) {
        throw Error(ErrorCode::EmptyFixtureSet, "circle suite has no fixtures");
    }
    EvaluationReport report;
    for (const auto& f : fixtures) {
        const std::string stratum = f.occluded ? kOccluded : kClean;
        for (const auto method : {circlefit::Method::Algebraic, circlefit::Method::Geometric}) {
            const auto det = circlefit::detect_circle(f.map, config.tau, config.min_foreground,
                                                      config.geometric, method);
            const std::string name(circlefit::to_string(method));
            if (det.detected()) {
                report.records.push_back(
                    {f.id, stratum, "rmse_" + name, circle_param_rmse(*det.circle, f.truth)});
            } else {
                report.records.push_back({f.id, stratum, "no_detection_" + name, 1.0});
            }
        }
    }
    report.aggregates = aggregate(report.records);
    return report;
}

EvaluationReport evaluate_circle_suite(const fs::path& dir, const CircleEvalConfig& config) {
    return evaluate_circle_suite(load_circle_fixtures(dir), config);
}

EvaluationReport evaluate_shape_suite(const std::vector<ShapeFixture>& fixtures,
                                      const pdm::PointDistributionModel& model,
                                      const morph::MorphConfig& config) {
    if (fixtures.empty()) {
        throw Error(ErrorCode::EmptyFixtureSet, "shape suite has no fixtures");
    }
    EvaluationReport report;
    for (const auto& f : fixtures) {
        const std::string stratum = f.occluded ? kOccluded : kClean;
        try {
            const auto fit = morph::fit_shape(model, f.map, config);
            report.records.push_back({f.id, stratum, "point_to_curve_rmse",
                                      point_to_curve_rmse(fit.shape.points.to_points(), f.truth)});
            report.records.push_back(
                {f.id, stratum, "iterations", static_cast<double>(fit.iterations_used)});
            report.records.push_back({f.id, stratum, "converged", fit.converged ? 1.0 : 0.0});
        } catch (const Error& e) {
            if (e.code() != ErrorCode::InsufficientForeground &&
                e.code() != ErrorCode::RegistrationFailed) {
                throw;
            }
            report.records.push_back({f.id, stratum, "fit_failed", 1.0});
        }
    }
    report.aggregates = aggregate(report.records);
    return report;
}

EvaluationReport evaluate_shape_suite(const fs::path& dir, const pdm::PointDistributionModel& model,
                                      const morph::MorphConfig& config) {
    return evaluate_shape_suite(load_shape_fixtures(dir), model, config);
}

std::vector<CircleFixture> load_circle_fixtures(const fs::path& dir) {
    std::vector<CircleFixture> out;
    for (const auto& stem : fixture_stems(dir)) {
        const auto truth = io::read_truth(with_suffix(stem, ".truth"));
        if (!truth.circle) {
            throw Error(ErrorCode::Parse, "fixture without a circle: " + stem.string());
        }
        out.push_back({stem.filename().string(), io::read_cmap(with_suffix(stem, ".cmap")),
                       *truth.circle, !truth.squares.empty()});
    }
    return out;
}

std::vector<ShapeFixture> load_shape_fixtures(const fs::path& dir) {
    std::vector<ShapeFixture> out;
    for (const auto& stem : fixture_stems(dir)) {
        const auto truth = io::read_truth(with_suffix(stem, ".truth"));
        if (!truth.outline) {
            throw Error(ErrorCode::Parse, "fixture without an outline: " + stem.string());
        }
        out.push_back({stem.filename().string(), io::read_cmap(with_suffix(stem, ".cmap")),
                       *truth.outline, !truth.squares.empty()});
    }
    return out;
}

void write_report(const EvaluationReport& report, const fs::path& records_path,
                  const fs::path& summary_path) {
    std::ostringstream records;
    records.precision(17);
    for (const auto& r : report.records) {
        records << r.fixture << ' ' << r.stratum << ' ' << r.metric << ' ' << r.value << '\n';
    }
    io::write_text(records_path, records.str());

    std::ostringstream summary;
    summary.precision(17);
    for (const auto& a : report.aggregates) {
        summary << a.stratum << ' ' << a.metric << ' ' << a.count << ' ' << a.mean << ' '
                << a.median << ' ' << a.max << '\n';
    }
    io::write_text(summary_path, summary.str());
}

}  // namespace deepmorph::eval
