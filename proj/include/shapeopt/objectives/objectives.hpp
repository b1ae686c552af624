#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shapeopt/evolution/nsga2.hpp"
#include "shapeopt/geometry/mesh.hpp"
#include "shapeopt/neural/decoder.hpp"

namespace shapeopt::objectives {

enum class ObjectiveKind { Mass, Stiffness, Drag, External };
enum class Direction { Minimize, Maximize };

struct ObjectiveSpec {
    std::string name;
    ObjectiveKind kind = ObjectiveKind::Mass;
    Direction direction = Direction::Minimize;
    double density = 1.0;
    geometry::Axis axis = geometry::Axis::Z;  // projection axis for the silhouette measures
    int resolution = 64;                      // marching-cubes lattice for reconstruction
    int raster_resolution = 256;              // silhouette pixels per side
    std::string command;                      // external only; invoked as `command <obj path>`
    int count = 1;                            // external only; scalars read from its stdout

    void validate() const;
};

[[nodiscard]] ObjectiveKind parse_kind(const std::string& text);
[[nodiscard]] std::string to_string(ObjectiveKind kind);
[[nodiscard]] Direction default_direction(ObjectiveKind kind);

/// k = m (2 pi f)^2.
[[nodiscard]] double stiffness_from_frequency(double mass, double frequency);

[[nodiscard]] double mass_of(const geometry::TriMesh& mesh, double density);

/// m (2 pi f)^2 with f = sqrt(J / V), where J is the polar second moment of the silhouette
/// along `axis` and V the enclosed volume. Throws DataError for non-positive volume.
[[nodiscard]] double stiffness_proxy(const geometry::TriMesh& mesh, double density, geometry::Axis axis, int raster_resolution);

[[nodiscard]] double drag_proxy(const geometry::TriMesh& mesh, geometry::Axis axis, int raster_resolution);

/// Writes the mesh to a temporary OBJ, runs `command <path>` and parses `count` scalars, one per
/// line. Returns false (and leaves `values` empty) on nonzero exit or unusable output.
bool run_external(const std::string& command, const geometry::TriMesh& mesh, int count, std::vector<double>& values);

/// Maps latent genomes to minimization objectives through a frozen decoder.
class ObjectiveSet {
public:
    ObjectiveSet(neural::DecoderParams decoder, std::vector<ObjectiveSpec> specs);

    /// One label per objective column; an external spec with count > 1 yields name_0, name_1, ...
    [[nodiscard]] std::vector<std::string> labels() const;
    [[nodiscard]] std::size_t size() const { return labels().size(); }

    /// Reconstructs the genome's shape and measures it. Infeasible when the surface is empty or
    /// not watertight, its volume is not positive, or an external command fails.
    [[nodiscard]] evolution::Evaluation evaluate(const Eigen::VectorXd& genome) const;
    /// Measures an already reconstructed mesh at a given resolution.
    [[nodiscard]] evolution::Evaluation evaluate_mesh(const geometry::TriMesh& mesh) const;

    /// Undoes the negation of maximized objectives.
    [[nodiscard]] std::vector<double> user_facing(const std::vector<double>& internal) const;

    [[nodiscard]] evolution::Evaluator evaluator() const;
    [[nodiscard]] const std::vector<ObjectiveSpec>& specs() const { return specs_; }

private:
    [[nodiscard]] evolution::Evaluation measure(const std::vector<const geometry::TriMesh*>& meshes) const;

    neural::DecoderParams decoder_;
    std::vector<ObjectiveSpec> specs_;
    std::vector<int> resolutions_;  // distinct reconstruction resolutions, ascending
};

} // namespace shapeopt::objectives
