#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "shapeopt/geometry/sdf_sampling.hpp"

namespace shapeopt::pipeline {

inline constexpr const char* samples_format = "shapeopt-samples";
inline constexpr const char* samples_version = "1";

/// JSON with a format/version header, `points` as a row-major n x 3 array and `distances`.
void save_samples(const geometry::SdfSampleSet& samples, const std::filesystem::path& path);
/// Throws VersionError on a version mismatch and FormatError on anything malformed.
[[nodiscard]] geometry::SdfSampleSet load_samples(const std::filesystem::path& path);

/// Shortest text that parses back to the same double.
[[nodiscard]] std::string format_double(double value);

/// Minimal CSV writer; cells are written verbatim, so callers keep them free of commas.
class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path);
    void row(const std::vector<std::string>& cells);
    void close();

private:
    std::filesystem::path path_;
    std::string buffer_;
};

} // namespace shapeopt::pipeline
