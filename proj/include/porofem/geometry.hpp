#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <span>

#include "porofem/error.hpp"

namespace porofem {

using Index = int;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Point = Vec3;

/// Volume, barycentric gradients and vertices of a d-simplex (d = 2, 3).
/// 2D data is embedded in the z = 0 plane; unused slots are zero.
struct SimplexGeometry {
    int dim = 0;
    double volume = 0.0;
    std::array<Point, 4> vertices{Point::Zero(), Point::Zero(), Point::Zero(), Point::Zero()};
    std::array<Vec3, 4> gradients{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};

    [[nodiscard]] int num_vertices() const noexcept { return dim + 1; }

    [[nodiscard]] Point centroid() const
    {
        Point c = Point::Zero();
        for (int a = 0; a <= dim; ++a) c += vertices[a];
        return c / static_cast<double>(dim + 1);
    }

    /// Map reference coordinates (x̂ in the unit simplex) to physical space.
    [[nodiscard]] Point map(const Vec3& ref) const
    {
        Point x = vertices[0];
        for (int k = 0; k < dim; ++k) x += ref[k] * (vertices[k + 1] - vertices[0]);
        return x;
    }

    /// Barycentric coordinates of the reference point.
    [[nodiscard]] std::array<double, 4> barycentric(const Vec3& ref) const
    {
        std::array<double, 4> lam{};
        double sum = 0.0;
        for (int k = 0; k < dim; ++k) {
            lam[k + 1] = ref[k];
            sum += ref[k];
        }
        lam[0] = 1.0 - sum;
        return lam;
    }
};

[[nodiscard]] inline double longest_edge(std::span<const Point> pts)
{
    double h = 0.0;
    for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b) h = std::max(h, (pts[a] - pts[b]).norm());
    return h;
}

/// Signed measure of a d-simplex given its d+1 vertices.
[[nodiscard]] inline double signed_volume(std::span<const Point> pts, int dim)
{
    if (dim == 2) {
        const Vec3 e1 = pts[1] - pts[0];
        const Vec3 e2 = pts[2] - pts[0];
        return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
    }
    Mat3 jac;
    jac.col(0) = pts[1] - pts[0];
    jac.col(1) = pts[2] - pts[0];
    jac.col(2) = pts[3] - pts[0];
    return jac.determinant() / 6.0;
}

/// Length (2 points) or area (3 points) of a facet, any embedding.
[[nodiscard]] inline double facet_measure(std::span<const Point> pts)
{
    if (pts.size() == 2) return (pts[1] - pts[0]).norm();
    return 0.5 * (pts[1] - pts[0]).cross(pts[2] - pts[0]).norm();
}

/// True when |volume| is negligible relative to the cell's edge scale.
[[nodiscard]] inline bool is_degenerate(double volume, double edge, int dim)
{
    return !(std::abs(volume) > 1e-12 * std::pow(edge, dim));
}

/// Geometry of a positively oriented simplex. Throws DegenerateCell when the
/// vertices are (numerically) affinely dependent or negatively oriented.
[[nodiscard]] inline SimplexGeometry simplex_geometry(std::span<const Point> pts, int dim,
                                                      std::ptrdiff_t cell = -1)
{
    if (dim != 2 && dim != 3) throw InvalidArgument("simplex_geometry: dim must be 2 or 3");
    if (static_cast<int>(pts.size()) != dim + 1)
        throw InvalidArgument("simplex_geometry: expected dim+1 vertices");

    SimplexGeometry g;
    g.dim = dim;
    for (int a = 0; a <= dim; ++a) g.vertices[a] = pts[a];

    const double vol = signed_volume(pts, dim);
    if (is_degenerate(vol, longest_edge(pts), dim) || vol < 0.0)
        throw DegenerateCell("degenerate or inverted cell" +
                                 (cell >= 0 ? " " + std::to_string(cell) : std::string{}),
                             cell);
    g.volume = vol;

    if (dim == 2) {
        Eigen::Matrix2d jac;
        jac.col(0) = (pts[1] - pts[0]).head<2>();
        jac.col(1) = (pts[2] - pts[0]).head<2>();
        const Eigen::Matrix2d inv = jac.inverse();
        g.gradients[1] = Vec3(inv(0, 0), inv(0, 1), 0.0);
        g.gradients[2] = Vec3(inv(1, 0), inv(1, 1), 0.0);
        g.gradients[0] = -(g.gradients[1] + g.gradients[2]);
    } else {
        Mat3 jac;
        jac.col(0) = pts[1] - pts[0];
        jac.col(1) = pts[2] - pts[0];
        jac.col(2) = pts[3] - pts[0];
        const Mat3 inv = jac.inverse();
        for (int k = 0; k < 3; ++k) g.gradients[k + 1] = inv.row(k).transpose();
        g.gradients[0] = -(g.gradients[1] + g.gradients[2] + g.gradients[3]);
    }
    return g;
}

}  // namespace porofem
