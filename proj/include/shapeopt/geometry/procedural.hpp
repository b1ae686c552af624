#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "shapeopt/geometry/mesh.hpp"

namespace shapeopt::geometry {

[[nodiscard]] TriMesh make_icosphere(double radius, int subdivisions);
[[nodiscard]] TriMesh make_box(const Vec3& half_extents);
[[nodiscard]] TriMesh make_torus(double major_radius, double minor_radius, int major_segments = 64, int minor_segments = 32);
/// Capsule along z: cylinder of `radius` with half-length `half_length`, closed by hemispheres.
[[nodiscard]] TriMesh make_capsule(double radius, double half_length, int resolution = 64);

struct WheelParams {
    int spokes = 4;
    double rim_outer = 0.85;
    double rim_inner = 0.65;
    double hub_radius = 0.2;
    double spoke_width = 0.12;
    double thickness = 0.25;  // extent along z
};

/// Annulus in the xy plane with a hub and `spokes` radial struts, extracted by marching cubes.
/// The lattice and the field are both invariant under quarter turns about z.
[[nodiscard]] TriMesh make_wheel(const WheelParams& params, int resolution = 64);

/// One shape family with named parameter ranges [lo, hi]; each generated instance draws
/// every parameter uniformly from its range.
struct ProceduralFamilySpec {
    std::string family;  // sphere | box | torus | capsule | wheel
    int count = 1;
    std::map<std::string, std::pair<double, double>> ranges;
};

struct ProceduralShape {
    std::string id;
    TriMesh mesh;
};

/// Parameters not given in `ranges` take family defaults. Throws ConfigError on an unknown
/// family or parameter, or a range with lo > hi or outside the family's valid domain.
[[nodiscard]] std::vector<ProceduralShape> generate_procedural_dataset(const std::vector<ProceduralFamilySpec>& spec,
                                                                       std::uint64_t seed);

} // namespace shapeopt::geometry
