#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

#include "shapeopt/geometry/mesh.hpp"
#include "shapeopt/geometry/procedural.hpp"

namespace testing {

using shapeopt::Vec3;
using shapeopt::geometry::TriMesh;

/// Axis-aligned box [lo, hi] with outward winding.
inline TriMesh box(const Vec3& lo, const Vec3& hi)
{
    TriMesh m = shapeopt::geometry::make_box(0.5 * (hi - lo));
    for (Vec3& v : m.vertices) v += 0.5 * (hi + lo);
    return m;
}

inline TriMesh unit_cube()
{
    return box(Vec3::Constant(-0.5), Vec3::Constant(0.5));
}

/// Fresh scratch directory, removed on destruction.
class TempDir {
public:
    TempDir()
    {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("shapeopt-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    out << text;
}

inline std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Pearson chi-square statistic against equal expected counts.
inline double chi_square_uniform(const std::vector<long>& counts)
{
    long total = 0;
    for (long c : counts) total += c;
    const double expected = static_cast<double>(total) / static_cast<double>(counts.size());
    double chi = 0.0;
    for (long c : counts) chi += (c - expected) * (c - expected) / expected;
    return chi;
}

} // namespace testing
