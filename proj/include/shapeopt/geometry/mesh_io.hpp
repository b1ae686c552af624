#pragma once

#include <filesystem>

#include "shapeopt/geometry/mesh.hpp"

namespace shapeopt::geometry {

/// Reads an OBJ (`v`/`f`, polygons fan-split from vertex 0) or binary STL file.
/// STL vertices are welded on exact coordinate equality.
[[nodiscard]] TriMesh load_mesh(const std::filesystem::path& path);

/// Writes OBJ with 17 significant digits so that load_mesh restores coordinates exactly.
void export_mesh(const TriMesh& mesh, const std::filesystem::path& path);

} // namespace shapeopt::geometry
