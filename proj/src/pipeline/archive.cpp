#include "shapeopt/pipeline/archive.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "shapeopt/error.hpp"

namespace shapeopt::pipeline {

using nlohmann::json;

void save_samples(const geometry::SdfSampleSet& samples, const std::filesystem::path& path)
{
    if (samples.points.size() != samples.distances.size()) throw DataError("sample set has mismatched points and distances");
    std::vector<double> flat;
    flat.reserve(samples.points.size() * 3);
    for (const Vec3& p : samples.points) flat.insert(flat.end(), {p.x(), p.y(), p.z()});
    const json doc = {
        {"format", samples_format},
        {"version", samples_version},
        {"shape_id", samples.shape_id},
        {"points", {{"rows", samples.points.size()}, {"cols", 3}, {"data", flat}}},
        {"distances", samples.distances},
    };
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write sample archive " + path.string());
    out << doc.dump() << '\n';
    if (!out) throw IoError("write failed for sample archive " + path.string());
}

geometry::SdfSampleSet load_samples(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open sample archive " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError("sample archive " + path.string() + " is not valid JSON: " + e.what());
    }
    if (!doc.is_object() || doc.value("format", std::string{}) != samples_format) {
        throw FormatError(path.string() + " is not a sample archive (missing format header)");
    }
    const std::string version = doc.value("version", std::string{});
    if (version != samples_version) {
        throw VersionError("sample archive version '" + version + "' is not supported (expected '" + samples_version + "')");
    }
    geometry::SdfSampleSet out;
    try {
        out.shape_id = doc.at("shape_id").get<std::string>();
        const json& pts = doc.at("points");
        const auto rows = pts.at("rows").get<std::size_t>();
        const auto cols = pts.at("cols").get<std::size_t>();
        const auto data = pts.at("data").get<std::vector<double>>();
        if (cols != 3 || data.size() != rows * 3) throw FormatError("sample archive point array has the wrong shape");
        out.points.reserve(rows);
        for (std::size_t i = 0; i < rows; ++i) out.points.emplace_back(data[3 * i], data[3 * i + 1], data[3 * i + 2]);
        out.distances = doc.at("distances").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw FormatError("sample archive " + path.string() + " is malformed: " + e.what());
    }
    if (out.distances.size() != out.points.size()) throw FormatError("sample archive has mismatched points and distances");
    return out;
}

std::string format_double(double value)
{
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : path_(path) {}

void CsvWriter::row(const std::vector<std::string>& cells)
{
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) buffer_ += ',';
        buffer_ += cells[i];
    }
    buffer_ += '\n';
}

void CsvWriter::close()
{
    std::ofstream out(path_, std::ios::trunc | std::ios::binary);
    if (!out) throw IoError("cannot write " + path_.string());
    out << buffer_;
    if (!out) throw IoError("write failed for " + path_.string());
}

} // namespace shapeopt::pipeline
