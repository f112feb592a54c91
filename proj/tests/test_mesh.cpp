#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "porofem/mesh.hpp"

using namespace porofem;

namespace {

int interior_count(const Mesh& m)
{
    int n = 0;
    for (const auto& f : m.facets()) n += f.interior ? 1 : 0;
    return n;
}

void expect_mesh_invariants(const Mesh& m)
{
    for (Index c = 0; c < m.num_cells(); ++c) EXPECT_GT(m.cell_volume(c), 0.0) << "cell " << c;
    Vec3 normal_sum = Vec3::Zero();
    for (Index f = 0; f < m.num_facets(); ++f) {
        const FacetRecord& rec = m.facet(f);
        for (int s = 0; s < rec.num_cells(); ++s) {
            EXPECT_NEAR(rec.normals[s].norm(), 1.0, 1e-12);
            const auto& cf = m.cell_facets(rec.cells[s]);
            EXPECT_NE(std::find(cf.begin(), cf.end(), f), cf.end()) << "facet " << f << " missing from its cell";
        }
        if (rec.interior) {
            EXPECT_NEAR(rec.normals[0].dot(rec.normals[1]), -1.0, 1e-12);
            normal_sum += rec.normals[0] + rec.normals[1];
        }
        EXPECT_GT(rec.measure, 0.0);
    }
    EXPECT_LT(normal_sum.norm(), 1e-12);
    // every boundary facet of a generated mesh carries a marker
    for (Index f = 0; f < m.num_facets(); ++f)
        if (!m.facet(f).interior) EXPECT_TRUE(m.marker_of(f).has_value()) << "facet " << f;
}

}  // namespace

TEST(UnitSquareMesh, CountsForSmallN)
{
    const Mesh m1 = unit_square_mesh(1);
    EXPECT_EQ(m1.num_vertices(), 4);
    EXPECT_EQ(m1.num_cells(), 2);
    EXPECT_EQ(interior_count(m1), 1);

    const Mesh m2 = unit_square_mesh(2);
    EXPECT_EQ(m2.num_vertices(), 9);
    EXPECT_EQ(m2.num_cells(), 8);
    EXPECT_EQ(interior_count(m2), 8);

    const Mesh m4 = unit_square_mesh(4);
    EXPECT_EQ(m4.num_vertices(), 25);
    EXPECT_EQ(m4.num_cells(), 32);
}

TEST(UnitSquareMesh, EulerCharacteristic)
{
    for (int n : {1, 2, 3, 5, 8}) {
        const Mesh m = unit_square_mesh(n);
        EXPECT_EQ(m.num_vertices() - m.num_facets() + m.num_cells(), 1) << "n=" << n;
    }
}

TEST(UnitSquareMesh, RejectsZero) { EXPECT_THROW((void)unit_square_mesh(0), InvalidArgument); }

TEST(UnitSquareMesh, InvariantsAndVolume)
{
    for (int n : {1, 3, 6}) {
        const Mesh m = unit_square_mesh(n);
        expect_mesh_invariants(m);
        EXPECT_NEAR(m.total_volume(), 1.0, 1e-12);
    }
}

TEST(UnitSquareMesh, MarkersBySide)
{
    const int n = 4;
    const Mesh m = unit_square_mesh(n);
    EXPECT_EQ(m.marker_tags(), (std::set<int>{markers::square_left, markers::square_right, markers::square_bottom,
                                              markers::square_top}));
    for (int tag : {markers::square_left, markers::square_right, markers::square_bottom, markers::square_top})
        EXPECT_EQ(m.facets_with_marker(tag).size(), static_cast<std::size_t>(n));
    for (Index f : m.facets_with_marker(markers::square_left)) {
        EXPECT_NEAR(m.facet_centroid(f).x(), 0.0, 1e-15);
        EXPECT_NEAR(m.facet(f).normals[0].x(), -1.0, 1e-12);
    }
    for (Index f : m.facets_with_marker(markers::square_top)) EXPECT_NEAR(m.facet(f).normals[0].y(), 1.0, 1e-12);
}

TEST(UnitSquareMesh, DiameterHalvesUnderRefinement)
{
    for (int n : {2, 4, 8}) {
        const double ratio = unit_square_mesh(n).max_diameter() / unit_square_mesh(2 * n).max_diameter();
        EXPECT_NEAR(ratio, 2.0, 0.1);
    }
}

TEST(UnitCubeMesh, Counts)
{
    const Mesh m1 = unit_cube_mesh(1);
    EXPECT_EQ(m1.num_vertices(), 8);
    EXPECT_EQ(m1.num_cells(), 6);
    EXPECT_EQ(interior_count(m1), 6);
    EXPECT_EQ(m1.num_facets(), 18);

    const Mesh m2 = unit_cube_mesh(2);
    EXPECT_EQ(m2.num_vertices(), 27);
    EXPECT_EQ(m2.num_cells(), 48);
}

TEST(UnitCubeMesh, RejectsZero) { EXPECT_THROW((void)unit_cube_mesh(0), InvalidArgument); }

TEST(UnitCubeMesh, InvariantsAndVolume)
{
    for (int n : {1, 2, 3}) {
        const Mesh m = unit_cube_mesh(n);
        expect_mesh_invariants(m);
        EXPECT_NEAR(m.total_volume(), 1.0, 1e-12);
        EXPECT_EQ(m.marker_tags().size(), 6u);
        for (int tag = markers::cube_x0; tag <= markers::cube_z1; ++tag)
            EXPECT_EQ(m.facets_with_marker(tag).size(), static_cast<std::size_t>(2 * n * n));
    }
}

TEST(UnitCubeMesh, FacetSizeIsLongestEdge)
{
    const Mesh m = unit_cube_mesh(2);
    for (const auto& rec : m.facets()) {
        double longest = 0.0;
        for (int a = 0; a < 3; ++a)
            for (int b = a + 1; b < 3; ++b)
                longest = std::max(longest, (m.vertex(rec.vertices[a]) - m.vertex(rec.vertices[b])).norm());
        EXPECT_DOUBLE_EQ(rec.size, longest);
    }
}

TEST(UnitCubeMesh, DiameterHalvesUnderRefinement)
{
    const double ratio = unit_cube_mesh(2).max_diameter() / unit_cube_mesh(4).max_diameter();
    EXPECT_NEAR(ratio, 2.0, 0.1);
}

TEST(CylinderMesh, LateralVerticesOnCircle)
{
    const double r = 2.5;
    const Mesh m = cylinder_mesh(r, 1.0, 1, 1);
    for (Index f : m.facets_with_marker(markers::cylinder_lateral))
        for (int a = 0; a < 3; ++a) {
            const Point& x = m.vertex(m.facet(f).vertices[a]);
            EXPECT_NEAR(std::hypot(x.x(), x.y()), r, 1e-9);
        }
}

TEST(CylinderMesh, VolumeAndCounts)
{
    // an inscribed hexagon (one ring) is 17% short of the disk; two rings and up stay within 5%
    for (auto [nr, na] : {std::pair{2, 1}, std::pair{2, 3}, std::pair{4, 4}}) {
        const double r = 5.0;
        const double h = 5.0;
        const Mesh m = cylinder_mesh(r, h, nr, na);
        EXPECT_EQ(m.num_cells(), 18 * nr * nr * na);
        const double exact = std::numbers::pi * r * r * h;
        EXPECT_LT(std::abs(m.total_volume() - exact) / exact, 0.05);
        // the disk triangulation covers the regular 6·nr-gon inscribed in the circle
        const double sides = 6.0 * nr;
        const double polygon = 0.5 * sides * r * r * std::sin(2.0 * std::numbers::pi / sides);
        EXPECT_NEAR(m.total_volume(), polygon * h, 1e-12 * exact);
        expect_mesh_invariants(m);
    }
}

TEST(CylinderMesh, RejectsDegenerateDimensions)
{
    EXPECT_THROW((void)cylinder_mesh(0.0, 1.0, 1, 1), InvalidArgument);
    EXPECT_THROW((void)cylinder_mesh(1.0, -1.0, 1, 1), InvalidArgument);
    EXPECT_THROW((void)cylinder_mesh(1.0, 1.0, 0, 1), InvalidArgument);
}

TEST(CylinderMesh, DefaultUnconfinedResolutionNearTwelveHundred)
{
    const Mesh m = cylinder_mesh(5.0, 5.0, 4, 4);
    EXPECT_EQ(m.num_cells(), 1152);
}

TEST(BuildFacets, SingleSquareHasOneInteriorFacet)
{
    const Mesh m = unit_square_mesh(1);
    EXPECT_EQ(interior_count(m), 1);
    EXPECT_EQ(m.num_facets(), 5);
}

TEST(BuildFacets, NonManifoldInputRejected)
{
    // three triangles sharing the edge (0, 1)
    std::vector<Point> pts{Point(0, 0, 0), Point(1, 0, 0), Point(0.5, 1, 0), Point(0.5, -1, 0), Point(0.5, 2, 0)};
    std::vector<Cell> cells{{0, 1, 2, -1}, {0, 1, 3, -1}, {0, 1, 4, -1}};
    EXPECT_THROW((void)build_facets(Mesh(2, pts, cells)), TopologyError);
}

TEST(MeshConstruction, OrientationCanonicalised)
{
    const Mesh m(2, {Point(0, 0, 0), Point(1, 0, 0), Point(0, 1, 0)}, {Cell{0, 2, 1, -1}});
    EXPECT_NEAR(m.cell_volume(0), 0.5, 1e-15);
}

TEST(MeshConstruction, RejectsBadCells)
{
    const std::vector<Point> pts{Point(0, 0, 0), Point(1, 0, 0), Point(0, 1, 0), Point(2, 0, 0)};
    EXPECT_THROW(Mesh(2, pts, {{0, 1, 1, -1}}), DegenerateCell);
    EXPECT_THROW(Mesh(2, pts, {{0, 1, 3, -1}}), DegenerateCell);
    EXPECT_THROW(Mesh(2, pts, {{0, 1, 7, -1}}), InvalidArgument);
    EXPECT_THROW(Mesh(2, pts, {{0, 1, 2, -1}, {2, 1, 0, -1}}), InvalidArgument);
    EXPECT_THROW(Mesh(4, pts, {{0, 1, 2, -1}}), InvalidArgument);
    try {
        Mesh(2, pts, {{0, 1, 2, -1}, {0, 1, 3, -1}});
        FAIL() << "expected DegenerateCell";
    } catch (const DegenerateCell& e) {
        EXPECT_EQ(e.cell(), 1);
    }
}

TEST(MeshIo, RoundTripSquare)
{
    const Mesh m = unit_square_mesh(2);
    std::stringstream ss;
    write_mesh(m, ss);
    const Mesh r = read_mesh(ss);
    ASSERT_EQ(r.num_vertices(), m.num_vertices());
    EXPECT_EQ(r.cells(), m.cells());
    for (Index v = 0; v < m.num_vertices(); ++v) EXPECT_LE((r.vertex(v) - m.vertex(v)).norm(), 1e-15);
    EXPECT_EQ(r.boundary_markers(), m.boundary_markers());
}

TEST(MeshIo, RoundTripCylinder)
{
    const Mesh m = cylinder_mesh(1.3, 0.7, 2, 2);
    std::stringstream ss;
    write_mesh(m, ss);
    const Mesh r = read_mesh(ss);
    EXPECT_EQ(r.cells(), m.cells());
    for (Index v = 0; v < m.num_vertices(); ++v) EXPECT_LE((r.vertex(v) - m.vertex(v)).norm(), 1e-15);
    EXPECT_EQ(r.boundary_markers(), m.boundary_markers());
}

TEST(MeshIo, ParseErrorsCarryLineNumbers)
{
    const auto line_of = [](const std::string& text) -> std::size_t {
        std::istringstream is(text);
        try {
            (void)read_mesh(is);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    EXPECT_EQ(line_of(""), 1u);
    EXPECT_EQ(line_of("nonsense v1 2\n"), 1u);
    EXPECT_EQ(line_of("porofem-mesh v1 2\n3\n0 0\n1 0\n0 1\n1\n0 1 5\n"), 7u);
    EXPECT_EQ(line_of("porofem-mesh v1 2\n3\n0 0\n1 0 2\n"), 4u);
    EXPECT_EQ(line_of("porofem-mesh v1 2\n3\n0 0\n1 0\n0 1\n1\n0 1 2\n1\n0 1 2 9\n"), 9u);
    EXPECT_EQ(line_of("porofem-mesh v1 2\n-1\n"), 2u);
}

TEST(MeshIo, CommentsAndBlankLinesIgnored)
{
    std::istringstream is("# header comment\nporofem-mesh v1 2\n\n3\n0 0 # origin\n1 0\n0 1\n1\n0 1 2\n1\n0 1 7\n");
    const Mesh m = read_mesh(is);
    EXPECT_EQ(m.num_cells(), 1);
    EXPECT_TRUE(m.has_marker(7));
}
