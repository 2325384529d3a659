#include "fraclap/mesh.hpp"

#include "fraclap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <tuple>

namespace fraclap {

namespace {

double squared_distance(const Point& a, const Point& b)
{
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

double triangle_signed_area(const Point& a, const Point& b, const Point& c)
{
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

} // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> cells, std::vector<int> refinement_edge)
    : vertices_(std::move(vertices)), cells_(std::move(cells)), refinement_edge_(std::move(refinement_edge))
{
    const int nv = static_cast<int>(vertices_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) {
        for (int v : cells_[c])
            if (v < 0 || v >= nv)
                throw DomainError("mesh: cell " + std::to_string(c) + " references a missing vertex");
        if (!(signed_area(static_cast<int>(c)) > 0.0))
            throw DomainError("mesh: cell " + std::to_string(c) + " has nonpositive signed area");
    }

    // Facets are numbered in lexicographic order of their sorted vertex pair.
    struct HalfEdge {
        int a, b, cell, local;
    };
    std::vector<HalfEdge> half_edges;
    half_edges.reserve(3 * cells_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c)
        for (int k = 0; k < 3; ++k) {
            int a = cells_[c][(k + 1) % 3];
            int b = cells_[c][(k + 2) % 3];
            if (a > b)
                std::swap(a, b);
            half_edges.push_back({a, b, static_cast<int>(c), k});
        }
    std::sort(half_edges.begin(), half_edges.end(), [](const HalfEdge& x, const HalfEdge& y) {
        return std::tie(x.a, x.b, x.cell) < std::tie(y.a, y.b, y.cell);
    });

    cell_facets_.assign(cells_.size(), {-1, -1, -1});
    for (std::size_t i = 0; i < half_edges.size();) {
        std::size_t j = i;
        while (j < half_edges.size() && half_edges[j].a == half_edges[i].a && half_edges[j].b == half_edges[i].b)
            ++j;
        if (j - i > 2)
            throw DomainError("mesh: edge shared by more than two cells");
        Facet facet;
        facet.vertices = {half_edges[i].a, half_edges[i].b};
        facet.cells[0] = half_edges[i].cell;
        if (j - i == 2)
            facet.cells[1] = half_edges[i + 1].cell;
        const int index = static_cast<int>(facets_.size());
        for (std::size_t h = i; h < j; ++h)
            cell_facets_[half_edges[h].cell][half_edges[h].local] = index;
        facets_.push_back(facet);
        i = j;
    }

    if (refinement_edge_.empty()) {
        refinement_edge_.resize(cells_.size());
        for (std::size_t c = 0; c < cells_.size(); ++c) {
            int best = 0;
            double best_length = -1.0;
            for (int k = 0; k < 3; ++k) {
                const auto& cell = cells_[c];
                const double length = squared_distance(vertices_[cell[(k + 1) % 3]], vertices_[cell[(k + 2) % 3]]);
                if (length > best_length || (length == best_length && cell[k] < cell[best])) {
                    best = k;
                    best_length = length;
                }
            }
            refinement_edge_[c] = best;
        }
    } else if (refinement_edge_.size() != cells_.size()) {
        throw DomainError("mesh: refinement edge tags do not match the cell count");
    }
}

std::vector<bool> Mesh::boundary_facet_flags() const
{
    std::vector<bool> flags(facets_.size());
    for (std::size_t f = 0; f < facets_.size(); ++f)
        flags[f] = facets_[f].on_boundary();
    return flags;
}

std::vector<bool> Mesh::boundary_vertex_flags() const
{
    std::vector<bool> flags(vertices_.size(), false);
    for (const Facet& facet : facets_)
        if (facet.on_boundary()) {
            flags[facet.vertices[0]] = true;
            flags[facet.vertices[1]] = true;
        }
    return flags;
}

double Mesh::signed_area(int c) const
{
    const auto& cell = cells_[c];
    return triangle_signed_area(vertices_[cell[0]], vertices_[cell[1]], vertices_[cell[2]]);
}

double Mesh::diameter(int c) const
{
    const auto& cell = cells_[c];
    double longest = 0.0;
    for (int k = 0; k < 3; ++k)
        longest = std::max(longest, squared_distance(vertices_[cell[k]], vertices_[cell[(k + 1) % 3]]));
    return std::sqrt(longest);
}

double Mesh::min_angle() const
{
    double smallest = std::numbers::pi;
    for (const auto& cell : cells_)
        for (int k = 0; k < 3; ++k) {
            const Point& p = vertices_[cell[k]];
            const Point& q = vertices_[cell[(k + 1) % 3]];
            const Point& r = vertices_[cell[(k + 2) % 3]];
            const double ux = q.x - p.x, uy = q.y - p.y;
            const double vx = r.x - p.x, vy = r.y - p.y;
            const double angle = std::atan2(std::abs(ux * vy - uy * vx), ux * vx + uy * vy);
            smallest = std::min(smallest, angle);
        }
    return smallest;
}

ValidationReport validate(const Mesh& mesh, std::optional<Box> domain)
{
    ValidationReport report;
    auto fail = [&report](std::string message) {
        report.ok = false;
        report.problems.push_back(std::move(message));
    };

    for (std::size_t c = 0; c < mesh.num_cells(); ++c)
        if (!(mesh.signed_area(static_cast<int>(c)) > 0.0))
            fail("cell " + std::to_string(c) + " is not counterclockwise");

    std::vector<int> incidences(mesh.num_facets(), 0);
    for (std::size_t c = 0; c < mesh.num_cells(); ++c)
        for (int k = 0; k < 3; ++k) {
            const int f = mesh.cell_facet(static_cast<int>(c), k);
            const Facet& facet = mesh.facets()[f];
            if (facet.cells[0] != static_cast<int>(c) && facet.cells[1] != static_cast<int>(c))
                fail("facet " + std::to_string(f) + " does not list incident cell " + std::to_string(c));
            ++incidences[f];
        }
    for (std::size_t f = 0; f < mesh.num_facets(); ++f) {
        const Facet& facet = mesh.facets()[f];
        const int expected = facet.on_boundary() ? 1 : 2;
        if (incidences[f] != expected)
            fail("facet " + std::to_string(f) + " has inconsistent incidence");
        if (!facet.on_boundary() && !(facet.cells[0] < facet.cells[1]))
            fail("facet " + std::to_string(f) + " cell order is not ascending");
    }

    // Euler characteristic of a simply connected triangulated polygon.
    const long euler = static_cast<long>(mesh.num_vertices()) - static_cast<long>(mesh.num_facets())
                       + static_cast<long>(mesh.num_cells());
    if (euler != 1)
        fail("Euler characteristic " + std::to_string(euler) + " != 1");

    std::vector<bool> used(mesh.num_vertices(), false);
    for (const auto& cell : mesh.cells())
        for (int v : cell)
            used[v] = true;
    if (std::find(used.begin(), used.end(), false) != used.end())
        fail("mesh has vertices not used by any cell");

    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const int k = mesh.refinement_edge(static_cast<int>(c));
        if (k < 0 || k > 2)
            fail("cell " + std::to_string(c) + " has an invalid refinement edge tag");
    }

    if (domain) {
        const double width = domain->upper.x - domain->lower.x;
        const double height = domain->upper.y - domain->lower.y;
        const double tol = 1e-12 * std::max(width, height);
        auto on_box = [&](const Point& p, const Point& q) {
            auto same = [tol](double a, double b) { return std::abs(a - b) <= tol; };
            return (same(p.x, domain->lower.x) && same(q.x, domain->lower.x))
                   || (same(p.x, domain->upper.x) && same(q.x, domain->upper.x))
                   || (same(p.y, domain->lower.y) && same(q.y, domain->lower.y))
                   || (same(p.y, domain->upper.y) && same(q.y, domain->upper.y));
        };
        for (std::size_t f = 0; f < mesh.num_facets(); ++f) {
            const Facet& facet = mesh.facets()[f];
            if (facet.on_boundary() && !on_box(mesh.vertex(facet.vertices[0]), mesh.vertex(facet.vertices[1])))
                fail("boundary facet " + std::to_string(f)
                     + " does not lie on the boundary of the box (hanging vertex or wrong domain)");
        }
        double area = 0.0;
        for (std::size_t c = 0; c < mesh.num_cells(); ++c)
            area += mesh.signed_area(static_cast<int>(c));
        if (std::abs(area - width * height) > 1e-10 * width * height)
            fail("cell areas do not sum to the domain area");
    }
    return report;
}

Mesh unit_square_mesh(int n, double scale)
{
    if (n < 1)
        throw DomainError("unit_square_mesh: n must be at least 1");
    if (!(scale > 0.0))
        throw DomainError("unit_square_mesh: scale must be positive");

    std::vector<Point> vertices;
    vertices.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            vertices.push_back({scale * i / n, scale * j / n});

    auto id = [n](int i, int j) { return j * (n + 1) + i; };
    std::vector<std::array<int, 3>> cells;
    cells.reserve(2 * static_cast<std::size_t>(n) * n);
    const double half = 0.5 * n;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const int v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
            const bool rising = (i + 0.5 - half) * (j + 0.5 - half) > 0.0;
            if (rising) {
                cells.push_back({v00, v10, v11});
                cells.push_back({v00, v11, v01});
            } else {
                cells.push_back({v00, v10, v01});
                cells.push_back({v10, v11, v01});
            }
        }
    return Mesh(std::move(vertices), std::move(cells));
}

MarkedSet dorfler_mark(std::span<const double> indicators, double theta)
{
    if (!(theta > 0.0 && theta <= 1.0))
        throw DomainError("dorfler_mark: theta must lie in (0,1]");
    MarkedSet marked;
    marked.theta = theta;

    std::vector<int> order(indicators.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return indicators[a] * indicators[a] > indicators[b] * indicators[b];
    });

    if (theta == 1.0) {
        for (int c : order)
            if (indicators[c] != 0.0)
                marked.cells.push_back(c);
        return marked;
    }

    double total = 0.0;
    for (int c : order)
        total += indicators[c] * indicators[c];
    if (total == 0.0)
        return marked;

    const double target = theta * theta * total;
    double sum = 0.0;
    for (int c : order) {
        if (sum >= target)
            break;
        marked.cells.push_back(c);
        sum += indicators[c] * indicators[c];
    }
    return marked;
}

RefinementResult refine(const Mesh& mesh, const MarkedSet& marked)
{
    const std::size_t num_cells = mesh.num_cells();
    std::vector<char> split(mesh.num_facets(), 0);
    for (int c : marked.cells) {
        if (c < 0 || static_cast<std::size_t>(c) >= num_cells)
            throw DomainError("refine: marked cell " + std::to_string(c) + " is not in the mesh");
        split[mesh.cell_facet(c, mesh.refinement_edge(c))] = 1;
    }

    // Closure: a cell with any split edge must also split its refinement edge.
    std::vector<int> queue;
    queue.reserve(num_cells);
    for (int c : marked.cells) {
        const int f = mesh.cell_facet(c, mesh.refinement_edge(c));
        for (int neighbor : mesh.facets()[f].cells)
            if (neighbor >= 0)
                queue.push_back(neighbor);
    }
    const std::size_t limit = num_cells * 64 + 64;
    std::size_t steps = 0;
    while (!queue.empty()) {
        if (++steps > limit)
            throw DomainError("refine: conformity closure did not terminate");
        const int c = queue.back();
        queue.pop_back();
        const int ref = mesh.cell_facet(c, mesh.refinement_edge(c));
        if (split[ref])
            continue;
        bool any = false;
        for (int k = 0; k < 3; ++k)
            any = any || split[mesh.cell_facet(c, k)];
        if (!any)
            continue;
        split[ref] = 1;
        for (int neighbor : mesh.facets()[ref].cells)
            if (neighbor >= 0)
                queue.push_back(neighbor);
    }

    std::vector<Point> vertices = mesh.vertices();
    std::vector<int> midpoint(mesh.num_facets(), -1);
    for (std::size_t f = 0; f < mesh.num_facets(); ++f)
        if (split[f]) {
            const auto& facet = mesh.facets()[f];
            const Point& a = mesh.vertex(facet.vertices[0]);
            const Point& b = mesh.vertex(facet.vertices[1]);
            midpoint[f] = static_cast<int>(vertices.size());
            vertices.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
        }

    std::vector<std::array<int, 3>> cells;
    std::vector<int> tags;
    cells.reserve(num_cells * 2);
    tags.reserve(num_cells * 2);
    RefinementResult result;
    result.children.resize(num_cells);

    auto emit = [&](std::size_t parent, std::array<int, 3> cell, int tag) {
        result.children[parent].push_back(static_cast<int>(cells.size()));
        cells.push_back(cell);
        tags.push_back(tag);
    };

    for (std::size_t c = 0; c < num_cells; ++c) {
        const int ci = static_cast<int>(c);
        const auto& cell = mesh.cell(ci);
        const int k = mesh.refinement_edge(ci);
        const int ref_facet = mesh.cell_facet(ci, k);
        if (!split[ref_facet]) {
            emit(c, cell, k);
            continue;
        }
        // [n1, n2, n3] with refinement edge n1-n2; children [n3, n1, m] and [n2, n3, m],
        // each tagged with the edge opposite the new vertex m (local index 2).
        const int n1 = cell[(k + 1) % 3];
        const int n2 = cell[(k + 2) % 3];
        const int n3 = cell[k];
        const int m = midpoint[ref_facet];
        const int edge_n3_n1 = mesh.cell_facet(ci, (k + 2) % 3);
        const int edge_n2_n3 = mesh.cell_facet(ci, (k + 1) % 3);

        if (split[edge_n3_n1]) {
            const int m1 = midpoint[edge_n3_n1];
            emit(c, {m, n3, m1}, 2);
            emit(c, {n1, m, m1}, 2);
        } else {
            emit(c, {n3, n1, m}, 2);
        }
        if (split[edge_n2_n3]) {
            const int m2 = midpoint[edge_n2_n3];
            emit(c, {m, n2, m2}, 2);
            emit(c, {n3, m, m2}, 2);
        } else {
            emit(c, {n2, n3, m}, 2);
        }
    }

    result.mesh = Mesh(std::move(vertices), std::move(cells), std::move(tags));
    return result;
}

RefinementResult uniform_refine(const Mesh& mesh)
{
    MarkedSet all;
    all.theta = 1.0;
    all.cells.resize(mesh.num_cells());
    std::iota(all.cells.begin(), all.cells.end(), 0);
    RefinementResult first = refine(mesh, all);

    all.cells.resize(first.mesh.num_cells());
    std::iota(all.cells.begin(), all.cells.end(), 0);
    RefinementResult second = refine(first.mesh, all);

    RefinementResult result;
    result.mesh = std::move(second.mesh);
    result.children.resize(mesh.num_cells());
    for (std::size_t c = 0; c < mesh.num_cells(); ++c)
        for (int mid : first.children[c])
            for (int fine : second.children[mid])
                result.children[c].push_back(fine);
    return result;
}

} // namespace fraclap
