#include "deepmorph/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace deepmorph::io {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) {
            std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
        }
        std::memcpy(&v, bytes, sizeof(T));
    }
    return v;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw Error(ErrorCode::Io, "cannot open for writing: " + path.string());
    }
    return os;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw Error(ErrorCode::Io, "cannot open for reading: " + path.string());
    }
    return is;
}

std::string read_header_line(std::istream& is, const char* what) {
    std::string line;
    if (!std::getline(is, line)) {
        throw Error(ErrorCode::Parse, std::string("missing ") + what + " header");
    }
    return line;
}

void check_stream(const std::ostream& os, const fs::path& path) {
    if (!os) {
        throw Error(ErrorCode::Io, "write failed: " + path.string());
    }
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return {};
    }
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

// =============================================================================
// CMAP
// =============================================================================

void write_cmap(std::ostream& os, const ConfidenceMap& map) {
    os << "CMAP 1 " << map.width() << ' ' << map.height() << '\n';
    for (float v : map.values()) {
        const float le = to_little(v);
        os.write(reinterpret_cast<const char*>(&le), sizeof(le));
    }
}

ConfidenceMap read_cmap(std::istream& is) {
    std::istringstream header(read_header_line(is, "CMAP"));
    std::string magic;
    int version = 0;
    int w = 0;
    int h = 0;
    if (!(header >> magic >> version >> w >> h) || magic != "CMAP" || version != 1) {
        throw Error(ErrorCode::Parse, "not a CMAP v1 file");
    }
    if (w < 1 || h < 1) {
        throw Error(ErrorCode::Parse, "CMAP dimensions must be positive");
    }
    std::vector<float> values(static_cast<std::size_t>(w) * h);
    is.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(float)));
    if (is.gcount() != static_cast<std::streamsize>(values.size() * sizeof(float))) {
        throw Error(ErrorCode::Parse, "CMAP payload truncated");
    }
    for (auto& v : values) {
        v = to_little(v);
    }
    return ConfidenceMap(w, h, std::move(values));
}

void write_cmap(const fs::path& path, const ConfidenceMap& map) {
    auto os = open_out(path);
    write_cmap(os, map);
    check_stream(os, path);
}

ConfidenceMap read_cmap(const fs::path& path) {
    auto is = open_in(path);
    return read_cmap(is);
}

// =============================================================================
// Point lists
// =============================================================================

void write_polyline(std::ostream& os, const PointSet& points, bool closed) {
    os.precision(17);
    if (closed) {
        os << "closed\n";
    }
    for (const auto& p : points) {
        os << p.x() << ',' << p.y() << '\n';
    }
}

void write_polyline(const fs::path& path, const PointSet& points, bool closed) {
    auto os = open_out(path);
    write_polyline(os, points, closed);
    check_stream(os, path);
}

PointList read_point_list(std::istream& is) {
    PointList out;
    std::string line;
    bool first = true;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (first && line == "closed") {
            out.closed = true;
            first = false;
            continue;
        }
        first = false;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw Error(ErrorCode::Parse, "expected x,y at line " + std::to_string(line_no));
        }
        try {
            std::size_t used_x = 0;
            std::size_t used_y = 0;
            const std::string xs = trim(line.substr(0, comma));
            const std::string ys = trim(line.substr(comma + 1));
            const double x = std::stod(xs, &used_x);
            const double y = std::stod(ys, &used_y);
            if (used_x != xs.size() || used_y != ys.size()) {
                throw std::invalid_argument("trailing characters");
            }
            out.points.emplace_back(x, y);
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::Parse, "bad coordinate at line " + std::to_string(line_no));
        }
    }
    return out;
}

PointList read_point_list(const fs::path& path) {
    auto is = open_in(path);
    return read_point_list(is);
}

Polyline read_polyline(const fs::path& path) {
    auto list = read_point_list(path);
    return Polyline(std::move(list.points), list.closed);
}

// =============================================================================
// PGM
// =============================================================================

void write_pgm(const fs::path& path, const GrayImage& image) {
    auto os = open_out(path);
    os << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
    os.write(reinterpret_cast<const char*>(image.pixels().data()),
             static_cast<std::streamsize>(image.pixels().size()));
    check_stream(os, path);
}

GrayImage read_pgm(const fs::path& path) {
    auto is = open_in(path);
    std::string magic;
    int w = 0;
    int h = 0;
    int maxval = 0;
    if (!(is >> magic >> w >> h >> maxval) || magic != "P5" || maxval != 255) {
        throw Error(ErrorCode::Parse, "not an 8-bit P5 PGM: " + path.string());
    }
    is.get();
    GrayImage image(w, h);
    is.read(reinterpret_cast<char*>(image.pixels().data()),
            static_cast<std::streamsize>(image.pixels().size()));
    if (is.gcount() != static_cast<std::streamsize>(image.pixels().size())) {
        throw Error(ErrorCode::Parse, "PGM payload truncated");
    }
    return image;
}

// =============================================================================
// CTVOL
// =============================================================================

void write_ctvol(const fs::path& path, const drr::CtVolume& volume) {
    auto os = open_out(path);
    os.precision(17);
    const auto& d = volume.dims();
    const auto& s = volume.spacing();
    const auto& o = volume.origin();
    os << "CTVOL 1 " << d[0] << ' ' << d[1] << ' ' << d[2] << ' ' << s(0) << ' ' << s(1) << ' '
       << s(2) << ' ' << o(0) << ' ' << o(1) << ' ' << o(2) << '\n';
    for (float v : volume.values()) {
        const auto hu = to_little(static_cast<std::int16_t>(std::lround(v)));
        os.write(reinterpret_cast<const char*>(&hu), sizeof(hu));
    }
    check_stream(os, path);
}

drr::CtVolume read_ctvol(const fs::path& path) {
    auto is = open_in(path);
    std::istringstream header(read_header_line(is, "CTVOL"));
    std::string magic;
    int version = 0;
    std::array<int, 3> dims{};
    drr::Vec3 spacing;
    drr::Vec3 origin;
    if (!(header >> magic >> version >> dims[0] >> dims[1] >> dims[2] >> spacing(0) >>
          spacing(1) >> spacing(2) >> origin(0) >> origin(1) >> origin(2)) ||
        magic != "CTVOL" || version != 1) {
        throw Error(ErrorCode::Parse, "not a CTVOL v1 file: " + path.string());
    }
    if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1) {
        throw Error(ErrorCode::Parse, "CTVOL dimensions must be positive");
    }
    const std::size_t n = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    std::vector<std::int16_t> raw(n);
    is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * sizeof(std::int16_t)));
    if (is.gcount() != static_cast<std::streamsize>(n * sizeof(std::int16_t))) {
        throw Error(ErrorCode::Parse, "CTVOL payload truncated");
    }
    std::vector<float> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        values[i] = static_cast<float>(to_little(raw[i]));
    }
    return drr::CtVolume(dims, spacing, origin, std::move(values));
}

// =============================================================================
// OBJ
// =============================================================================

void write_obj(const fs::path& path, const drr::TriangleMesh& mesh) {
    auto os = open_out(path);
    os.precision(17);
    for (const auto& v : mesh.vertices) {
        os << "v " << v(0) << ' ' << v(1) << ' ' << v(2) << '\n';
    }
    for (const auto& f : mesh.faces) {
        os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    }
    check_stream(os, path);
}

drr::TriangleMesh read_obj(std::istream& is) {
    drr::TriangleMesh mesh;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) {
            continue;
        }
        if (tag == "v") {
            drr::Vec3 v;
            if (!(ls >> v(0) >> v(1) >> v(2))) {
                throw Error(ErrorCode::Parse, "bad vertex at line " + std::to_string(line_no));
            }
            mesh.vertices.push_back(v);
        } else if (tag == "f") {
            std::array<int, 3> f{};
            for (auto& idx : f) {
                std::string token;
                if (!(ls >> token)) {
                    throw Error(ErrorCode::Parse, "face needs 3 indices at line " + std::to_string(line_no));
                }
                // Accept "i", "i/t" and "i/t/n" forms.
                try {
                    idx = std::stoi(token.substr(0, token.find('/'))) - 1;
                } catch (const std::logic_error&) {
                    throw Error(ErrorCode::Parse, "bad face index at line " + std::to_string(line_no));
                }
            }
            mesh.faces.push_back(f);
        }
    }
    mesh.validate();
    return mesh;
}

drr::TriangleMesh read_obj(const fs::path& path) {
    auto is = open_in(path);
    return read_obj(is);
}

// =============================================================================
// PDM
// =============================================================================

void write_pdm(std::ostream& os, const pdm::PointDistributionModel& model) {
    os.precision(17);
    const Eigen::Index n = model.point_count();
    const Eigen::Index m = model.mode_count();
    os << "PDM 1 " << n << ' ' << m << '\n';
    const auto& mean = model.mean().coords();
    for (Eigen::Index i = 0; i < mean.size(); ++i) {
        os << mean(i) << (i + 1 == mean.size() ? '\n' : ' ');
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        os << model.eigenvalues()(i) << (i + 1 == m ? '\n' : ' ');
    }
    for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index i = 0; i < 2 * n; ++i) {
            os << model.modes()(i, j) << (i + 1 == 2 * n ? '\n' : ' ');
        }
    }
}

pdm::PointDistributionModel read_pdm(std::istream& is) {
    std::string magic;
    int version = 0;
    Eigen::Index n = 0;
    Eigen::Index m = 0;
    if (!(is >> magic >> version >> n >> m) || magic != "PDM" || version != 1 || n < 2 || m < 1) {
        throw Error(ErrorCode::Parse, "not a PDM v1 stream");
    }
    auto read_values = [&](Eigen::Index count) {
        Eigen::VectorXd v(count);
        for (Eigen::Index i = 0; i < count; ++i) {
            if (!(is >> v(i))) {
                throw Error(ErrorCode::Parse, "PDM payload truncated");
            }
        }
        return v;
    };
    Eigen::VectorXd mean = read_values(2 * n);
    Eigen::VectorXd eig = read_values(m);
    Eigen::MatrixXd modes(2 * n, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        modes.col(j) = read_values(2 * n);
    }
    return pdm::PointDistributionModel(pdm::ShapeVector(std::move(mean)), std::move(modes),
                                       std::move(eig));
}

void write_pdm(const fs::path& path, const pdm::PointDistributionModel& model) {
    auto os = open_out(path);
    write_pdm(os, model);
    check_stream(os, path);
}

pdm::PointDistributionModel read_pdm(const fs::path& path) {
    auto is = open_in(path);
    return read_pdm(is);
}

// =============================================================================
// Records and sidecars
// =============================================================================

Circle parse_circle_record(const std::string& line) {
    std::istringstream is(line);
    // Truth sidecars prefix the record with a "circle" keyword.
    if (trim(line).rfind("circle", 0) == 0) {
        std::string keyword;
        is >> keyword;
    }
    double cx = 0.0;
    double cy = 0.0;
    double r = 0.0;
    if (!(is >> cx >> cy >> r)) {
        throw Error(ErrorCode::Parse, "malformed circle record");
    }
    return Circle(cx, cy, r);
}

Circle read_circle_record(const fs::path& path) {
    auto is = open_in(path);
    std::string line;
    while (std::getline(is, line)) {
        if (!trim(line).empty()) {
            return parse_circle_record(line);
        }
    }
    throw Error(ErrorCode::Parse, "empty circle record file: " + path.string());
}

std::string format_circle(const Circle& c) {
    std::ostringstream os;
    os.precision(17);
    os << c.cx() << ' ' << c.cy() << ' ' << c.r();
    return os.str();
}

void write_truth(const fs::path& path, const FixtureTruth& truth) {
    auto os = open_out(path);
    os.precision(17);
    if (truth.circle) {
        os << "circle " << format_circle(*truth.circle) << '\n';
    }
    if (truth.outline) {
        os << "closed " << (truth.outline->closed() ? 1 : 0) << '\n';
        for (const auto& v : truth.outline->vertices()) {
            os << "vertex " << v.x() << ' ' << v.y() << '\n';
        }
    }
    for (const auto& s : truth.squares) {
        os << "square " << s.x << ' ' << s.y << ' ' << s.side << '\n';
    }
    check_stream(os, path);
}

FixtureTruth read_truth(const fs::path& path) {
    auto is = open_in(path);
    FixtureTruth truth;
    PointSet vertices;
    bool closed = true;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) {
            continue;
        }
        bool ok = true;
        if (tag == "circle") {
            double cx = 0.0;
            double cy = 0.0;
            double r = 0.0;
            ok = static_cast<bool>(ls >> cx >> cy >> r);
            if (ok) truth.circle = Circle(cx, cy, r);
        } else if (tag == "closed") {
            int c = 1;
            ok = static_cast<bool>(ls >> c);
            closed = c != 0;
        } else if (tag == "vertex") {
            double x = 0.0;
            double y = 0.0;
            ok = static_cast<bool>(ls >> x >> y);
            vertices.emplace_back(x, y);
        } else if (tag == "square") {
            synth::Square s;
            ok = static_cast<bool>(ls >> s.x >> s.y >> s.side);
            truth.squares.push_back(s);
        } else {
            ok = false;
        }
        if (!ok) {
            throw Error(ErrorCode::Parse, "bad truth line " + std::to_string(line_no) + " in " +
                                              path.string());
        }
    }
    if (!vertices.empty()) {
        truth.outline = Polyline(std::move(vertices), closed);
    }
    return truth;
}

std::string read_text(const fs::path& path) {
    auto is = open_in(path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    auto os = open_out(path);
    os << text;
    check_stream(os, path);
}

}  // namespace deepmorph::io
