#include "shapeopt/objectives/objectives.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <sstream>
#include <unistd.h>
#include <sys/wait.h>

#include "shapeopt/error.hpp"
#include "shapeopt/geometry/measures.hpp"
#include "shapeopt/geometry/mesh_io.hpp"
#include "shapeopt/training/reconstruct.hpp"

namespace shapeopt::objectives {

using geometry::TriMesh;

void ObjectiveSpec::validate() const
{
    if (name.empty()) throw ConfigError("objective needs a name");
    if (resolution < 8) throw ConfigError("objective '" + name + "': extraction resolution must be >= 8");
    if (raster_resolution < 8) throw ConfigError("objective '" + name + "': raster resolution must be >= 8");
    switch (kind) {
    case ObjectiveKind::Mass:
        if (!(density >= 0.0) || !std::isfinite(density)) throw ConfigError("objective '" + name + "': density must be >= 0");
        break;
    case ObjectiveKind::Stiffness:
        if (!(density > 0.0) || !std::isfinite(density)) throw ConfigError("objective '" + name + "': density must be > 0");
        break;
    case ObjectiveKind::Drag:
        break;
    case ObjectiveKind::External:
        if (command.empty()) throw ConfigError("objective '" + name + "': external evaluator needs a command");
        if (count < 1) throw ConfigError("objective '" + name + "': count must be >= 1");
        break;
    }
}

ObjectiveKind parse_kind(const std::string& text)
{
    if (text == "mass") return ObjectiveKind::Mass;
    if (text == "stiffness") return ObjectiveKind::Stiffness;
    if (text == "drag") return ObjectiveKind::Drag;
    if (text == "external") return ObjectiveKind::External;
    throw ConfigError("unknown objective kind '" + text + "' (expected mass, stiffness, drag or external)");
}

std::string to_string(ObjectiveKind kind)
{
    switch (kind) {
    case ObjectiveKind::Mass: return "mass";
    case ObjectiveKind::Stiffness: return "stiffness";
    case ObjectiveKind::Drag: return "drag";
    case ObjectiveKind::External: return "external";
    }
    return "?";
}

Direction default_direction(ObjectiveKind kind)
{
    return kind == ObjectiveKind::Stiffness ? Direction::Maximize : Direction::Minimize;
}

double stiffness_from_frequency(double mass, double frequency)
{
    if (!(mass > 0.0)) throw DataError("stiffness needs a positive mass");
    if (!(frequency >= 0.0)) throw DataError("stiffness needs a non-negative frequency");
    const double omega = 2.0 * std::numbers::pi * frequency;
    return mass * omega * omega;
}

double mass_of(const TriMesh& mesh, double density)
{
    return density * geometry::mesh_volume(mesh);
}

double stiffness_proxy(const TriMesh& mesh, double density, geometry::Axis axis, int raster_resolution)
{
    const double volume = geometry::mesh_volume(mesh);
    if (!(volume > 0.0)) throw DataError("stiffness proxy needs a positive enclosed volume");
    const double moment = geometry::rasterize_silhouette(mesh, axis, raster_resolution).second_moment();
    return stiffness_from_frequency(density * volume, std::sqrt(moment / volume));
}

double drag_proxy(const TriMesh& mesh, geometry::Axis axis, int raster_resolution)
{
    return geometry::frontal_projected_area(mesh, axis, raster_resolution);
}

namespace {

std::string shell_quote(const std::string& s)
{
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    return out + "'";
}

std::filesystem::path temp_obj_path()
{
    static std::atomic<unsigned long> counter{0};
    const auto n = counter.fetch_add(1);
    return std::filesystem::temp_directory_path() /
           ("shapeopt-candidate-" + std::to_string(::getpid()) + "-" + std::to_string(n) + ".obj");
}

bool parse_scalar(std::string line, double& value)
{
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) return false;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
    return ec == std::errc() && ptr == line.data() + line.size() && std::isfinite(value);
}

} // namespace

bool run_external(const std::string& command, const TriMesh& mesh, int count, std::vector<double>& values)
{
    values.clear();
    const auto path = temp_obj_path();
    geometry::export_mesh(mesh, path);

    std::string output;
    int status = -1;
    {
        FILE* pipe = ::popen((command + " " + shell_quote(path.string())).c_str(), "r");
        if (pipe == nullptr) {
            std::filesystem::remove(path);
            throw IoError("could not start external evaluator: " + command);
        }
        char buf[4096];
        std::size_t got = 0;
        while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, got);
        status = ::pclose(pipe);
    }
    std::error_code ignored;
    std::filesystem::remove(path, ignored);
    if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) return false;

    std::istringstream lines(output);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        double v = 0.0;
        if (!parse_scalar(line, v)) {
            values.clear();
            return false;
        }
        values.push_back(v);
    }
    if (static_cast<int>(values.size()) != count) {
        values.clear();
        return false;
    }
    return true;
}

ObjectiveSet::ObjectiveSet(neural::DecoderParams decoder, std::vector<ObjectiveSpec> specs)
    : decoder_(std::move(decoder)), specs_(std::move(specs))
{
    decoder_.validate();
    if (specs_.empty()) throw ConfigError("at least one objective is required");
    for (const ObjectiveSpec& s : specs_) {
        s.validate();
        resolutions_.push_back(s.resolution);
    }
    std::sort(resolutions_.begin(), resolutions_.end());
    resolutions_.erase(std::unique(resolutions_.begin(), resolutions_.end()), resolutions_.end());
    const auto names = labels();
    for (std::size_t i = 0; i < names.size(); ++i) {
        for (std::size_t j = i + 1; j < names.size(); ++j) {
            if (names[i] == names[j]) throw ConfigError("duplicate objective name '" + names[i] + "'");
        }
    }
}

std::vector<std::string> ObjectiveSet::labels() const
{
    std::vector<std::string> out;
    for (const ObjectiveSpec& s : specs_) {
        if (s.kind == ObjectiveKind::External && s.count > 1) {
            for (int i = 0; i < s.count; ++i) out.push_back(s.name + "_" + std::to_string(i));
        } else {
            out.push_back(s.name);
        }
    }
    return out;
}

evolution::Evaluation ObjectiveSet::measure(const std::vector<const TriMesh*>& meshes) const
{
    evolution::Evaluation result;
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        const ObjectiveSpec& s = specs_[i];
        const TriMesh& mesh = *meshes[i];
        if (!(geometry::mesh_volume(mesh) > 0.0)) return {};
        std::vector<double> values;
        switch (s.kind) {
        case ObjectiveKind::Mass: values = {mass_of(mesh, s.density)}; break;
        case ObjectiveKind::Stiffness: values = {stiffness_proxy(mesh, s.density, s.axis, s.raster_resolution)}; break;
        case ObjectiveKind::Drag: values = {drag_proxy(mesh, s.axis, s.raster_resolution)}; break;
        case ObjectiveKind::External:
            if (!run_external(s.command, mesh, s.count, values)) return {};
            break;
        }
        for (double v : values) {
            if (!std::isfinite(v)) return {};
            result.objectives.push_back(s.direction == Direction::Maximize ? -v : v);
        }
    }
    result.feasible = true;
    return result;
}

evolution::Evaluation ObjectiveSet::evaluate(const Eigen::VectorXd& genome) const
{
    if (genome.size() != decoder_.latent_dim) throw ConfigError("genome length differs from the decoder's latent size");
    std::vector<TriMesh> by_resolution;
    for (int res : resolutions_) {
        try {
            by_resolution.push_back(training::reconstruct(decoder_, genome, res));
        } catch (const EmptySurfaceError&) {
            return {};
        }
        if (!geometry::validate_watertight(by_resolution.back()).is_watertight) return {};
    }
    std::vector<const TriMesh*> meshes;
    for (const ObjectiveSpec& s : specs_) {
        const auto at = std::lower_bound(resolutions_.begin(), resolutions_.end(), s.resolution) - resolutions_.begin();
        meshes.push_back(&by_resolution[static_cast<std::size_t>(at)]);
    }
    return measure(meshes);
}

evolution::Evaluation ObjectiveSet::evaluate_mesh(const TriMesh& mesh) const
{
    if (mesh.empty() || !geometry::validate_watertight(mesh).is_watertight) return {};
    return measure(std::vector<const TriMesh*>(specs_.size(), &mesh));
}

std::vector<double> ObjectiveSet::user_facing(const std::vector<double>& internal) const
{
    std::vector<double> out;
    std::size_t column = 0;
    for (const ObjectiveSpec& s : specs_) {
        const int n = s.kind == ObjectiveKind::External ? s.count : 1;
        for (int i = 0; i < n; ++i, ++column) {
            if (column >= internal.size()) throw ConfigError("objective vector is shorter than the objective set");
            out.push_back(s.direction == Direction::Maximize ? -internal[column] : internal[column]);
        }
    }
    return out;
}

evolution::Evaluator ObjectiveSet::evaluator() const
{
    return [this](const Eigen::VectorXd& genome) { return evaluate(genome); };
}

} // namespace shapeopt::objectives
