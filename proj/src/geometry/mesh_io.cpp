#include "shapeopt/geometry/mesh_io.hpp"

#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>

#include "shapeopt/error.hpp"

namespace shapeopt::geometry {

namespace {

std::string lowercase_extension(const std::filesystem::path& path)
{
    std::string ext = path.extension().string();
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

std::string_view next_token(std::string_view& line)
{
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string_view::npos) {
        line = {};
        return {};
    }
    line.remove_prefix(start);
    const auto end = line.find_first_of(" \t\r");
    std::string_view token = line.substr(0, end);
    line.remove_prefix(end == std::string_view::npos ? line.size() : end);
    return token;
}

double parse_double(std::string_view token, const std::string& where)
{
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw FormatError(where + ": expected a number, got '" + std::string(token) + "'");
    }
    return value;
}

int parse_index(std::string_view token, int vertex_count, const std::string& where)
{
    // only the position index matters: "7", "7/1", "7//3", "7/1/3"
    token = token.substr(0, token.find('/'));
    int value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || value == 0) {
        throw FormatError(where + ": bad face index '" + std::string(token) + "'");
    }
    const int idx = value > 0 ? value - 1 : vertex_count + value;
    if (idx < 0 || idx >= vertex_count) {
        throw FormatError(where + ": face index " + std::to_string(value) + " out of range");
    }
    return idx;
}

TriMesh load_obj(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    TriMesh mesh;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        std::string_view rest(line);
        const std::string_view tag = next_token(rest);
        if (tag == "v") {
            Vec3 p;
            for (int c = 0; c < 3; ++c) {
                const std::string_view tok = next_token(rest);
                if (tok.empty()) throw FormatError(where + ": vertex needs three coordinates");
                p[c] = parse_double(tok, where);
            }
            mesh.vertices.push_back(p);
        } else if (tag == "f") {
            std::vector<int> poly;
            for (std::string_view tok = next_token(rest); !tok.empty(); tok = next_token(rest)) {
                poly.push_back(parse_index(tok, static_cast<int>(mesh.vertices.size()), where));
            }
            if (poly.size() < 3) throw FormatError(where + ": face with fewer than three vertices");
            // fan from the first corner; a quad splits along v0-v2
            for (std::size_t i = 1; i + 1 < poly.size(); ++i) mesh.faces.push_back({poly[0], poly[i], poly[i + 1]});
        }
        // normals, texture coordinates, groups and materials are ignored
    }
    return mesh;
}

TriMesh load_binary_stl(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 84) throw FormatError(path.string() + ": truncated STL header");

    std::uint32_t count = 0;
    std::memcpy(&count, bytes.data() + 80, sizeof(count));
    const std::size_t expected = 84 + static_cast<std::size_t>(count) * 50;
    if (bytes.size() != expected) {
        if (bytes.rfind("solid", 0) == 0) throw FormatError(path.string() + ": ASCII STL is not supported");
        throw FormatError(path.string() + ": STL size does not match its triangle count");
    }

    TriMesh mesh;
    std::map<std::tuple<float, float, float>, int> welded;
    for (std::uint32_t t = 0; t < count; ++t) {
        const char* record = bytes.data() + 84 + static_cast<std::size_t>(t) * 50;
        Face face{};
        for (int c = 0; c < 3; ++c) {
            float xyz[3];
            std::memcpy(xyz, record + 12 + 12 * c, sizeof(xyz));
            const auto key = std::make_tuple(xyz[0], xyz[1], xyz[2]);
            auto [it, inserted] = welded.try_emplace(key, static_cast<int>(mesh.vertices.size()));
            if (inserted) mesh.vertices.emplace_back(xyz[0], xyz[1], xyz[2]);
            face[c] = it->second;
        }
        mesh.faces.push_back(face);
    }
    return mesh;
}

} // namespace

TriMesh load_mesh(const std::filesystem::path& path)
{
    if (!std::filesystem::exists(path)) throw IoError("mesh file not found: " + path.string());
    const std::string ext = lowercase_extension(path);
    TriMesh mesh;
    if (ext == ".obj") {
        mesh = load_obj(path);
    } else if (ext == ".stl") {
        mesh = load_binary_stl(path);
    } else {
        throw FormatError("unsupported mesh format '" + ext + "' (expected .obj or .stl)");
    }
    if (mesh.faces.empty()) throw DataError(path.string() + ": mesh has no faces");
    return mesh;
}

void export_mesh(const TriMesh& mesh, const std::filesystem::path& path)
{
    if (mesh.empty() || mesh.vertices.empty()) throw DataError("refusing to export an empty mesh");
    check_indices(mesh);

    std::string out;
    out.reserve(mesh.vertices.size() * 60 + mesh.faces.size() * 24);
    char buf[64];
    for (const Vec3& v : mesh.vertices) {
        out += 'v';
        for (int c = 0; c < 3; ++c) {
            out += ' ';
            const auto res = std::to_chars(buf, buf + sizeof(buf), v[c]);
            out.append(buf, res.ptr);
        }
        out += '\n';
    }
    for (const Face& f : mesh.faces) {
        out += "f " + std::to_string(f[0] + 1) + ' ' + std::to_string(f[1] + 1) + ' ' + std::to_string(f[2] + 1) + '\n';
    }

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot write " + path.string());
    file << out;
    if (!file) throw IoError("write failed for " + path.string());
}

} // namespace shapeopt::geometry
