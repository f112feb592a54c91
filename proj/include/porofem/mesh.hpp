#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "porofem/error.hpp"
#include "porofem/geometry.hpp"

namespace porofem {

using Cell = std::array<Index, 4>;
using FacetKey = std::array<Index, 3>;

/// One (d-1)-simplex of the mesh with its adjacency.
struct FacetRecord {
    FacetKey vertices{-1, -1, -1};  ///< sorted ascending; only the first `dim` are used
    std::array<Index, 2> cells{-1, -1};
    std::array<Vec3, 2> normals{Vec3::Zero(), Vec3::Zero()};  ///< outward unit normal w.r.t. cells[i]
    double measure = 0.0;  ///< length (2D) or area (3D)
    double size = 0.0;     ///< h_∂K: edge length in 2D, longest edge of the face in 3D
    bool interior = false;

    [[nodiscard]] int num_cells() const noexcept { return interior ? 2 : 1; }
};

/// Boundary region tags written by the built-in generators.
namespace markers {
inline constexpr int square_left = 1;
inline constexpr int square_right = 2;
inline constexpr int square_bottom = 3;
inline constexpr int square_top = 4;

inline constexpr int cube_x0 = 1;
inline constexpr int cube_x1 = 2;
inline constexpr int cube_y0 = 3;
inline constexpr int cube_y1 = 4;
inline constexpr int cube_z0 = 5;
inline constexpr int cube_z1 = 6;

inline constexpr int cylinder_bottom = 1;
inline constexpr int cylinder_top = 2;
inline constexpr int cylinder_lateral = 3;
}  // namespace markers

/// Conforming simplicial mesh of triangles (dim = 2) or tetrahedra (dim = 3).
///
/// Construction validates connectivity and orients every cell positively.
/// Facets are populated by build_facets(); boundary markers refer to facet
/// indices and are only meaningful once facets exist. Immutable once built.
class Mesh {
public:
    Mesh() = default;

    Mesh(int dim, std::vector<Point> vertices, std::vector<Cell> cells)
        : dim_(dim), vertices_(std::move(vertices)), cells_(std::move(cells))
    {
        if (dim_ != 2 && dim_ != 3) throw InvalidArgument("Mesh: dim must be 2 or 3");
        if (cells_.empty()) throw InvalidArgument("Mesh: no cells");
        const auto nv = static_cast<Index>(vertices_.size());
        std::set<Cell> seen;
        for (std::size_t c = 0; c < cells_.size(); ++c) {
            Cell& cell = cells_[c];
            for (int a = 0; a <= dim_; ++a) {
                if (cell[a] < 0 || cell[a] >= nv)
                    throw InvalidArgument("Mesh: cell " + std::to_string(c) + " has vertex index out of range");
            }
            for (int a = dim_ + 1; a < 4; ++a) cell[a] = -1;
            Cell key = cell;
            std::sort(key.begin(), key.begin() + dim_ + 1);
            if (std::adjacent_find(key.begin(), key.begin() + dim_ + 1) != key.begin() + dim_ + 1)
                throw DegenerateCell("Mesh: cell " + std::to_string(c) + " repeats a vertex",
                                     static_cast<std::ptrdiff_t>(c));
            if (!seen.insert(key).second)
                throw InvalidArgument("Mesh: duplicate cell " + std::to_string(c));

            const auto all = cell_points(static_cast<Index>(c));
            const std::span<const Point> pts(all.data(), static_cast<std::size_t>(dim_ + 1));
            const double vol = signed_volume(pts, dim_);
            if (is_degenerate(vol, longest_edge(pts), dim_))
                throw DegenerateCell("Mesh: zero-volume cell " + std::to_string(c),
                                     static_cast<std::ptrdiff_t>(c));
            if (vol < 0.0) std::swap(cell[1], cell[2]);
        }
    }

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] Index num_vertices() const noexcept { return static_cast<Index>(vertices_.size()); }
    [[nodiscard]] Index num_cells() const noexcept { return static_cast<Index>(cells_.size()); }
    [[nodiscard]] Index num_facets() const noexcept { return static_cast<Index>(facets_.size()); }
    [[nodiscard]] bool has_facets() const noexcept { return !facets_.empty(); }

    [[nodiscard]] const std::vector<Point>& vertices() const noexcept { return vertices_; }
    [[nodiscard]] const Point& vertex(Index v) const { return vertices_.at(static_cast<std::size_t>(v)); }
    [[nodiscard]] const std::vector<Cell>& cells() const noexcept { return cells_; }
    [[nodiscard]] const Cell& cell(Index c) const { return cells_.at(static_cast<std::size_t>(c)); }
    [[nodiscard]] const std::vector<FacetRecord>& facets() const noexcept { return facets_; }
    [[nodiscard]] const FacetRecord& facet(Index f) const { return facets_.at(static_cast<std::size_t>(f)); }

    /// Facet indices of cell c; entry a is the facet opposite local vertex a.
    [[nodiscard]] const std::array<Index, 4>& cell_facets(Index c) const
    {
        require_facets("cell_facets");
        return cell_facets_.at(static_cast<std::size_t>(c));
    }

    [[nodiscard]] std::array<Point, 4> cell_points(Index c) const
    {
        std::array<Point, 4> pts;
        pts.fill(Point::Zero());
        const Cell& cell = cells_[static_cast<std::size_t>(c)];
        for (int a = 0; a <= dim_; ++a) pts[a] = vertices_[static_cast<std::size_t>(cell[a])];
        return pts;
    }

    [[nodiscard]] SimplexGeometry cell_geometry(Index c) const
    {
        const auto pts = cell_points(c);
        return simplex_geometry(std::span<const Point>(pts.data(), dim_ + 1), dim_, c);
    }

    [[nodiscard]] double cell_volume(Index c) const
    {
        const auto pts = cell_points(c);
        return signed_volume(std::span<const Point>(pts.data(), dim_ + 1), dim_);
    }

    [[nodiscard]] double cell_diameter(Index c) const
    {
        const auto pts = cell_points(c);
        return longest_edge(std::span<const Point>(pts.data(), dim_ + 1));
    }

    [[nodiscard]] Point cell_centroid(Index c) const
    {
        const auto pts = cell_points(c);
        Point x = Point::Zero();
        for (int a = 0; a <= dim_; ++a) x += pts[a];
        return x / static_cast<double>(dim_ + 1);
    }

    /// h = max cell diameter.
    [[nodiscard]] double max_diameter() const
    {
        double h = 0.0;
        for (Index c = 0; c < num_cells(); ++c) h = std::max(h, cell_diameter(c));
        return h;
    }

    [[nodiscard]] double total_volume() const
    {
        double v = 0.0;
        for (Index c = 0; c < num_cells(); ++c) v += cell_volume(c);
        return v;
    }

    [[nodiscard]] Point facet_centroid(Index f) const
    {
        const FacetRecord& rec = facet(f);
        Point x = Point::Zero();
        for (int a = 0; a < dim_; ++a) x += vertices_[static_cast<std::size_t>(rec.vertices[a])];
        return x / static_cast<double>(dim_);
    }

    [[nodiscard]] std::optional<Index> find_facet(FacetKey key) const
    {
        std::sort(key.begin(), key.begin() + dim_);
        for (int a = dim_; a < 3; ++a) key[a] = -1;
        const auto it = facet_lookup_.find(key);
        if (it == facet_lookup_.end()) return std::nullopt;
        return it->second;
    }

    [[nodiscard]] const std::map<Index, int>& boundary_markers() const noexcept { return boundary_markers_; }

    [[nodiscard]] std::optional<int> marker_of(Index f) const
    {
        const auto it = boundary_markers_.find(f);
        if (it == boundary_markers_.end()) return std::nullopt;
        return it->second;
    }

    [[nodiscard]] std::set<int> marker_tags() const
    {
        std::set<int> tags;
        for (const auto& [f, tag] : boundary_markers_) tags.insert(tag);
        return tags;
    }

    [[nodiscard]] bool has_marker(int tag) const
    {
        return std::any_of(boundary_markers_.begin(), boundary_markers_.end(),
                           [tag](const auto& kv) { return kv.second == tag; });
    }

    /// Facets carrying `tag`, in increasing facet order.
    [[nodiscard]] std::vector<Index> facets_with_marker(int tag) const
    {
        std::vector<Index> out;
        for (const auto& [f, t] : boundary_markers_)
            if (t == tag) out.push_back(f);
        return out;
    }

    void set_boundary_marker(Index f, int tag)
    {
        require_facets("set_boundary_marker");
        if (f < 0 || f >= num_facets()) throw InvalidArgument("set_boundary_marker: facet out of range");
        if (facets_[static_cast<std::size_t>(f)].interior)
            throw InvalidArgument("set_boundary_marker: facet " + std::to_string(f) + " is interior");
        boundary_markers_[f] = tag;
    }

    /// Tag every boundary facet with classify(facet centroid).
    template <class Classifier>
    void mark_boundary(Classifier&& classify)
    {
        require_facets("mark_boundary");
        for (Index f = 0; f < num_facets(); ++f)
            if (!facets_[static_cast<std::size_t>(f)].interior) boundary_markers_[f] = classify(facet_centroid(f));
    }

    friend Mesh build_facets(Mesh mesh);

private:
    void require_facets(const char* who) const
    {
        if (facets_.empty()) throw InvalidArgument(std::string(who) + ": facets not built");
    }

    int dim_ = 0;
    std::vector<Point> vertices_;
    std::vector<Cell> cells_;
    std::vector<FacetRecord> facets_;
    std::vector<std::array<Index, 4>> cell_facets_;
    std::map<FacetKey, Index> facet_lookup_;
    std::map<Index, int> boundary_markers_;
};

/// Enumerate all (d-1)-subsimplices with adjacency, normals and sizes.
/// Existing boundary markers are dropped. Throws TopologyError when a facet
/// is shared by more than two cells.
[[nodiscard]] inline Mesh build_facets(Mesh mesh)
{
    const int dim = mesh.dim_;
    mesh.facets_.clear();
    mesh.facet_lookup_.clear();
    mesh.boundary_markers_.clear();
    mesh.cell_facets_.assign(mesh.cells_.size(), {-1, -1, -1, -1});

    for (Index c = 0; c < mesh.num_cells(); ++c) {
        const Cell& cell = mesh.cells_[static_cast<std::size_t>(c)];
        const SimplexGeometry geo = mesh.cell_geometry(c);
        for (int opp = 0; opp <= dim; ++opp) {
            FacetKey key{-1, -1, -1};
            int k = 0;
            for (int a = 0; a <= dim; ++a)
                if (a != opp) key[k++] = cell[a];
            std::sort(key.begin(), key.begin() + dim);

            const Vec3 normal = (-geo.gradients[opp]).normalized();
            auto [it, inserted] = mesh.facet_lookup_.try_emplace(key, mesh.num_facets());
            if (inserted) {
                FacetRecord rec;
                rec.vertices = key;
                rec.cells[0] = c;
                rec.normals[0] = normal;
                std::array<Point, 3> pts;
                pts.fill(Point::Zero());
                for (int a = 0; a < dim; ++a) pts[a] = mesh.vertices_[static_cast<std::size_t>(key[a])];
                const std::span<const Point> fp(pts.data(), dim);
                rec.measure = facet_measure(fp);
                rec.size = dim == 2 ? rec.measure : longest_edge(fp);
                mesh.facets_.push_back(rec);
            } else {
                FacetRecord& rec = mesh.facets_[static_cast<std::size_t>(it->second)];
                if (rec.interior)
                    throw TopologyError("build_facets: facet shared by more than two cells (cell " +
                                        std::to_string(c) + ")");
                rec.cells[1] = c;
                rec.normals[1] = normal;
                rec.interior = true;
            }
            mesh.cell_facets_[static_cast<std::size_t>(c)][opp] = it->second;
        }
    }
    return mesh;
}

/// (n+1)^2 vertices, 2n^2 triangles; every square split along its
/// lower-left to upper-right diagonal. Markers: square_left/right/bottom/top.
[[nodiscard]] inline Mesh unit_square_mesh(int n)
{
    if (n < 1) throw InvalidArgument("unit_square_mesh: n must be >= 1");
    const auto id = [n](int i, int j) { return static_cast<Index>(j * (n + 1) + i); };
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            pts.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n, 0.0);
    std::vector<Cell> cells;
    cells.reserve(static_cast<std::size_t>(2 * n * n));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), -1});
            cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1), -1});
        }
    }
    Mesh mesh = build_facets(Mesh(2, std::move(pts), std::move(cells)));
    const double tol = 1e-12;
    mesh.mark_boundary([tol](const Point& x) {
        if (x.x() < tol) return markers::square_left;
        if (x.x() > 1.0 - tol) return markers::square_right;
        if (x.y() < tol) return markers::square_bottom;
        return markers::square_top;
    });
    return mesh;
}

/// (n+1)^3 vertices, 6n^3 tetrahedra (Kuhn split of each subcube along its
/// main diagonal). Markers: cube_x0 ... cube_z1.
[[nodiscard]] inline Mesh unit_cube_mesh(int n)
{
    if (n < 1) throw InvalidArgument("unit_cube_mesh: n must be >= 1");
    const auto id = [n](int i, int j, int k) { return static_cast<Index>((k * (n + 1) + j) * (n + 1) + i); };
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>((n + 1) * (n + 1) * (n + 1)));
    for (int k = 0; k <= n; ++k)
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i)
                pts.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n,
                                 static_cast<double>(k) / n);

    constexpr std::array<std::array<int, 3>, 6> perms{{{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                                       {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    std::vector<Cell> cells;
    cells.reserve(static_cast<std::size_t>(6 * n * n * n));
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                for (const auto& perm : perms) {
                    std::array<int, 3> offset{0, 0, 0};
                    Cell cell{};
                    cell[0] = id(i, j, k);
                    for (int s = 0; s < 3; ++s) {
                        offset[perm[s]] = 1;
                        cell[s + 1] = id(i + offset[0], j + offset[1], k + offset[2]);
                    }
                    cells.push_back(cell);
                }
            }
        }
    }
    Mesh mesh = build_facets(Mesh(3, std::move(pts), std::move(cells)));
    const double tol = 1e-12;
    mesh.mark_boundary([tol](const Point& x) {
        if (x.x() < tol) return markers::cube_x0;
        if (x.x() > 1.0 - tol) return markers::cube_x1;
        if (x.y() < tol) return markers::cube_y0;
        if (x.y() > 1.0 - tol) return markers::cube_y1;
        if (x.z() < tol) return markers::cube_z0;
        return markers::cube_z1;
    });
    return mesh;
}

/// Cylinder of the given radius and height with its axis along z, base at z = 0.
///
/// The disk is triangulated with concentric rings (ring k carries 6k points,
/// adjacent rings are stitched by angle), extruded into n_axial prism layers,
/// and each prism is split into three tetrahedra. The split of each quad face
/// is fixed by global vertex order, so neighbouring prisms conform.
/// Cell count is 18 * n_radial^2 * n_axial.
/// Markers: cylinder_bottom, cylinder_top, cylinder_lateral.
[[nodiscard]] inline Mesh cylinder_mesh(double radius, double height, int n_radial, int n_axial)
{
    if (n_radial < 1 || n_axial < 1) throw InvalidArgument("cylinder_mesh: counts must be >= 1");
    if (!(radius > 0.0) || !(height > 0.0))
        throw InvalidArgument("cylinder_mesh: radius and height must be positive");

    // Disk vertices: centre, then rings outward.
    std::vector<Point> disk{Point::Zero()};
    std::vector<std::vector<Index>> rings{{0}};
    for (int k = 1; k <= n_radial; ++k) {
        const int m = 6 * k;
        const double r = radius * static_cast<double>(k) / n_radial;
        std::vector<Index> ring;
        for (int j = 0; j < m; ++j) {
            const double theta = 2.0 * std::numbers::pi * j / m;
            ring.push_back(static_cast<Index>(disk.size()));
            disk.emplace_back(r * std::cos(theta), r * std::sin(theta), 0.0);
        }
        rings.push_back(std::move(ring));
    }

    std::vector<std::array<Index, 3>> tris;
    for (int k = 1; k <= n_radial; ++k) {
        const auto& inner = rings[static_cast<std::size_t>(k - 1)];
        const auto& outer = rings[static_cast<std::size_t>(k)];
        const auto m_in = static_cast<int>(inner.size());
        const auto m_out = static_cast<int>(outer.size());
        if (m_in == 1) {
            for (int j = 0; j < m_out; ++j) tris.push_back({inner[0], outer[j], outer[(j + 1) % m_out]});
            continue;
        }
        int i = 0;
        int o = 0;
        while (i < m_in || o < m_out) {
            const double next_in = static_cast<double>(i + 1) / m_in;
            const double next_out = static_cast<double>(o + 1) / m_out;
            if (o < m_out && (i == m_in || next_out <= next_in)) {
                tris.push_back({inner[i % m_in], outer[o], outer[(o + 1) % m_out]});
                ++o;
            } else {
                tris.push_back({inner[i], outer[o % m_out], inner[(i + 1) % m_in]});
                ++i;
            }
        }
    }

    const auto n_disk = static_cast<Index>(disk.size());
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(n_disk * (n_axial + 1)));
    for (int l = 0; l <= n_axial; ++l) {
        const double z = height * static_cast<double>(l) / n_axial;
        for (const Point& p : disk) pts.emplace_back(p.x(), p.y(), z);
    }

    std::vector<Cell> cells;
    cells.reserve(tris.size() * 3 * static_cast<std::size_t>(n_axial));
    for (int l = 0; l < n_axial; ++l) {
        const Index base = l * n_disk;
        for (auto tri : tris) {
            std::sort(tri.begin(), tri.end());
            const Index a = base + tri[0];
            const Index b = base + tri[1];
            const Index c = base + tri[2];
            const Index at = a + n_disk;
            const Index bt = b + n_disk;
            const Index ct = c + n_disk;
            // Quad (i, j), i < j, is cut along top(i)-bottom(j).
            cells.push_back({a, b, c, at});
            cells.push_back({b, c, at, bt});
            cells.push_back({c, at, bt, ct});
        }
    }

    Mesh mesh = build_facets(Mesh(3, std::move(pts), std::move(cells)));
    const double tol = 1e-9 * height;
    mesh.mark_boundary([tol, height](const Point& x) {
        if (x.z() < tol) return markers::cylinder_bottom;
        if (x.z() > height - tol) return markers::cylinder_top;
        return markers::cylinder_lateral;
    });
    return mesh;
}

/// ASCII mesh format:
///
///     porofem-mesh v1 <dim>
///     <nv>            then nv lines of dim coordinates
///     <nc>            then nc lines of dim+1 zero-based vertex indices
///     [<nb>           then nb lines of dim facet vertex indices and a tag]
///
/// Coordinates are written with 17 significant digits.
inline void write_mesh(const Mesh& mesh, std::ostream& os)
{
    const int d = mesh.dim();
    os << "porofem-mesh v1 " << d << '\n';
    os << std::setprecision(17);
    os << mesh.num_vertices() << '\n';
    for (const Point& p : mesh.vertices()) {
        for (int k = 0; k < d; ++k) os << (k ? " " : "") << p[k];
        os << '\n';
    }
    os << mesh.num_cells() << '\n';
    for (const Cell& c : mesh.cells()) {
        for (int a = 0; a <= d; ++a) os << (a ? " " : "") << c[a];
        os << '\n';
    }
    const auto& bm = mesh.boundary_markers();
    os << bm.size() << '\n';
    for (const auto& [f, tag] : bm) {
        const FacetRecord& rec = mesh.facet(f);
        for (int a = 0; a < d; ++a) os << rec.vertices[a] << ' ';
        os << tag << '\n';
    }
}

inline void write_mesh(const Mesh& mesh, const std::string& path)
{
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_mesh: cannot open " + path);
    write_mesh(mesh, os);
    if (!os) throw std::runtime_error("write_mesh: write failed for " + path);
}

namespace detail {

class LineReader {
public:
    explicit LineReader(std::istream& is) : is_(is) {}

    /// Next non-blank line, with '#' comments stripped; nullopt at EOF.
    std::optional<std::string> next()
    {
        std::string line;
        while (std::getline(is_, line)) {
            ++line_no_;
            if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            if (line.find_first_not_of(" \t\r") != std::string::npos) return line;
        }
        return std::nullopt;
    }

    std::string require(const char* what)
    {
        auto line = next();
        if (!line) throw ParseError(std::string("unexpected end of file, expected ") + what, line_no_ + 1);
        return *line;
    }

    template <class T>
    std::vector<T> values(const std::string& line, std::size_t count, const char* what) const
    {
        std::istringstream ss(line);
        std::vector<T> out;
        T v{};
        while (ss >> v) out.push_back(v);
        if (!ss.eof() || out.size() != count)
            throw ParseError(std::string("expected ") + std::to_string(count) + " values for " + what, line_no_);
        return out;
    }

    [[nodiscard]] std::size_t line_no() const noexcept { return line_no_; }

private:
    std::istream& is_;
    std::size_t line_no_ = 0;
};

}  // namespace detail

[[nodiscard]] inline Mesh read_mesh(std::istream& is)
{
    detail::LineReader reader(is);
    const auto header = reader.next();
    if (!header) throw ParseError("empty mesh file", 1);
    std::istringstream hs(*header);
    std::string magic;
    std::string version;
    int dim = 0;
    if (!(hs >> magic >> version >> dim) || magic != "porofem-mesh" || version != "v1")
        throw ParseError("bad header, expected 'porofem-mesh v1 <dim>'", reader.line_no());
    if (dim != 2 && dim != 3) throw ParseError("dimension must be 2 or 3", reader.line_no());

    const auto read_count = [&reader](const char* what) {
        const auto v = reader.values<long long>(reader.require(what), 1, what);
        if (v[0] < 0) throw ParseError(std::string("negative count for ") + what, reader.line_no());
        return static_cast<std::size_t>(v[0]);
    };

    const std::size_t nv = read_count("vertex count");
    std::vector<Point> pts;
    pts.reserve(nv);
    for (std::size_t i = 0; i < nv; ++i) {
        const auto v = reader.values<double>(reader.require("vertex"), static_cast<std::size_t>(dim), "vertex");
        pts.emplace_back(v[0], v[1], dim == 3 ? v[2] : 0.0);
    }

    const std::size_t nc = read_count("cell count");
    if (nc == 0) throw ParseError("mesh has no cells", reader.line_no());
    std::vector<Cell> cells;
    cells.reserve(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        const auto v = reader.values<long long>(reader.require("cell"), static_cast<std::size_t>(dim + 1), "cell");
        Cell cell{-1, -1, -1, -1};
        for (int a = 0; a <= dim; ++a) {
            if (v[a] < 0 || v[a] >= static_cast<long long>(nv))
                throw ParseError("vertex index " + std::to_string(v[a]) + " out of range", reader.line_no());
            cell[a] = static_cast<Index>(v[a]);
        }
        cells.push_back(cell);
    }

    Mesh mesh;
    try {
        mesh = build_facets(Mesh(dim, std::move(pts), std::move(cells)));
    } catch (const std::exception& e) {
        throw ParseError(e.what(), reader.line_no());
    }

    if (auto line = reader.next()) {
        const auto nb = reader.values<long long>(*line, 1, "boundary marker count");
        if (nb[0] < 0) throw ParseError("negative boundary marker count", reader.line_no());
        for (long long b = 0; b < nb[0]; ++b) {
            const auto v = reader.values<long long>(reader.require("boundary marker"),
                                                    static_cast<std::size_t>(dim + 1), "boundary marker");
            FacetKey key{-1, -1, -1};
            for (int a = 0; a < dim; ++a) key[a] = static_cast<Index>(v[a]);
            const auto f = mesh.find_facet(key);
            if (!f || mesh.facet(*f).interior)
                throw ParseError("marker does not name a boundary facet", reader.line_no());
            mesh.set_boundary_marker(*f, static_cast<int>(v[dim]));
        }
        if (reader.next()) throw ParseError("trailing content after boundary markers", reader.line_no());
    }
    return mesh;
}

[[nodiscard]] inline Mesh read_mesh(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_mesh: cannot open " + path);
    return read_mesh(is);
}

}  // namespace porofem
