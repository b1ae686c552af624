#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace shapeopt {

using Vec3 = Eigen::Vector3d;
using Rng = std::mt19937_64;

/// Derives an independent stream seed from a base seed (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream)
{
    std::uint64_t x = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline double squared_distance(const Vec3& a, const Vec3& b)
{
    const double dx = a.x() - b.x();
    const double dy = a.y() - b.y();
    const double dz = a.z() - b.z();
    return dx * dx + dy * dy + dz * dz;
}

} // namespace shapeopt
