#include "shapeopt/geometry/measures.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shapeopt/error.hpp"

namespace shapeopt::geometry {

double Silhouette::area() const
{
    const double h = pixel_size();
    double count = 0.0;
    for (unsigned char o : occupied) count += o;
    return count * h * h;
}

double Silhouette::second_moment() const
{
    const double h = pixel_size();
    double moment = 0.0;
    for (int r = 0; r < resolution; ++r) {
        for (int c = 0; c < resolution; ++c) {
            if (!occupied[static_cast<std::size_t>(r) * resolution + c]) continue;
            const double u = pixel_center(c);
            const double v = pixel_center(r);
            moment += u * u + v * v;
        }
    }
    return moment * h * h;
}

Silhouette rasterize_silhouette(const TriMesh& mesh, Axis axis, int resolution)
{
    if (resolution < 1) throw ConfigError("silhouette resolution must be positive, got " + std::to_string(resolution));
    Silhouette sil;
    sil.axis = axis;
    sil.resolution = resolution;
    sil.occupied.assign(static_cast<std::size_t>(resolution) * resolution, 0);

    // image plane axes: the two coordinates other than `axis`, in cyclic order
    const int a = static_cast<int>(axis);
    const int iu = (a + 1) % 3;
    const int iv = (a + 2) % 3;
    const double h = sil.pixel_size();
    const auto to_pixel = [&](double x) { return (x + 1.0) / h - 0.5; };

    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        double u[3];
        double v[3];
        for (int c = 0; c < 3; ++c) {
            const Vec3 p = mesh.face_vertex(f, c);
            u[c] = p[iu];
            v[c] = p[iv];
        }
        const double area2 = (u[1] - u[0]) * (v[2] - v[0]) - (u[2] - u[0]) * (v[1] - v[0]);
        if (std::abs(area2) < 1e-300) continue;  // edge-on triangle covers no area

        const int c0 = std::max(0, static_cast<int>(std::ceil(to_pixel(*std::min_element(u, u + 3)))));
        const int c1 = std::min(resolution - 1, static_cast<int>(std::floor(to_pixel(*std::max_element(u, u + 3)))));
        const int r0 = std::max(0, static_cast<int>(std::ceil(to_pixel(*std::min_element(v, v + 3)))));
        const int r1 = std::min(resolution - 1, static_cast<int>(std::floor(to_pixel(*std::max_element(v, v + 3)))));
        const double tol = 1e-12 * std::abs(area2);
        for (int r = r0; r <= r1; ++r) {
            const double pv = sil.pixel_center(r);
            for (int c = c0; c <= c1; ++c) {
                const double pu = sil.pixel_center(c);
                double w[3];
                for (int e = 0; e < 3; ++e) {
                    const int s = (e + 1) % 3;
                    const int t = (e + 2) % 3;
                    w[e] = (u[t] - u[s]) * (pv - v[s]) - (pu - u[s]) * (v[t] - v[s]);
                }
                const bool inside = area2 > 0 ? (w[0] >= -tol && w[1] >= -tol && w[2] >= -tol)
                                              : (w[0] <= tol && w[1] <= tol && w[2] <= tol);
                if (inside) sil.occupied[static_cast<std::size_t>(r) * resolution + c] = 1;
            }
        }
    }
    return sil;
}

double frontal_projected_area(const TriMesh& mesh, Axis axis, int resolution)
{
    return rasterize_silhouette(mesh, axis, resolution).area();
}

} // namespace shapeopt::geometry
