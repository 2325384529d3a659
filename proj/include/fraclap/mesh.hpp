#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fraclap {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// An edge of the triangulation. `cells[1]` is -1 on the boundary.
/// For interior facets cells[0] < cells[1].
struct Facet {
    std::array<int, 2> vertices{};
    std::array<int, 2> cells{-1, -1};

    bool on_boundary() const { return cells[1] < 0; }
};

/// Conforming triangulation of a polygonal domain.
///
/// Cells are counterclockwise vertex triples. Local edge k of a cell is the
/// edge opposite local vertex k; `refinement_edge(c)` is the local index of
/// the edge that the next bisection of c splits.
class Mesh {
public:
    Mesh() = default;

    /// Builds facets and adjacency. When `refinement_edge` is empty every cell
    /// is tagged with its longest edge (ties: lowest opposite vertex index).
    /// Throws DomainError on a cell with nonpositive signed area or an edge
    /// shared by more than two cells.
    Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> cells,
         std::vector<int> refinement_edge = {});

    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_cells() const { return cells_.size(); }
    std::size_t num_facets() const { return facets_.size(); }

    const std::vector<Point>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& cells() const { return cells_; }
    const std::vector<Facet>& facets() const { return facets_; }
    const std::vector<int>& refinement_edges() const { return refinement_edge_; }

    const Point& vertex(int v) const { return vertices_[v]; }
    const std::array<int, 3>& cell(int c) const { return cells_[c]; }
    /// Facet index of local edge k of cell c.
    int cell_facet(int c, int k) const { return cell_facets_[c][k]; }
    int refinement_edge(int c) const { return refinement_edge_[c]; }

    std::vector<bool> boundary_facet_flags() const;
    std::vector<bool> boundary_vertex_flags() const;

    double signed_area(int c) const;
    double diameter(int c) const;
    /// Smallest interior angle over all cells, in radians.
    double min_angle() const;

private:
    std::vector<Point> vertices_;
    std::vector<std::array<int, 3>> cells_;
    std::vector<Facet> facets_;
    std::vector<std::array<int, 3>> cell_facets_;
    std::vector<int> refinement_edge_;
};

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> problems;
};

struct Box {
    Point lower;
    Point upper;
};

/// Checks orientation, facet/cell consistency and boundary closure. When a
/// bounding box is given, every boundary facet must lie on the box boundary
/// (this detects hanging vertices) and the cell areas must sum to the box area.
ValidationReport validate(const Mesh& mesh, std::optional<Box> domain = std::nullopt);

/// Union-jack triangulation of (0, scale)^2 with n x n squares, each cut by
/// one diagonal pointing away from the square's center: 2 n^2 cells, all grid
/// lines i*scale/n are mesh lines.
Mesh unit_square_mesh(int n, double scale = 1.0);

struct MarkedSet {
    std::vector<int> cells;
    double theta = 0.5;
};

/// Dörfler bulk marking: the shortest prefix of cells sorted by decreasing
/// indicator (ties by index) whose squared sum reaches theta^2 of the total.
MarkedSet dorfler_mark(std::span<const double> indicators, double theta);

struct RefinementResult {
    Mesh mesh;
    /// children[old cell] = new cell indices (a single entry if untouched).
    std::vector<std::vector<int>> children;
};

/// Newest-vertex bisection of the marked cells with conforming closure.
RefinementResult refine(const Mesh& mesh, const MarkedSet& marked);

/// Two bisection sweeps over all cells; halves every cell diameter.
RefinementResult uniform_refine(const Mesh& mesh);

} // namespace fraclap
