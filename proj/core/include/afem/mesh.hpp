#pragma once

#include "afem/geometry.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace afem {

enum class BoundaryLabel : std::uint8_t { Dirichlet, Neumann };

struct BoundaryFacet {
    std::array<int, 2> vertices;
    BoundaryLabel label;
};

/// Vertex indices of a triangle. Local vertex 0 is the newest vertex; the
/// edge opposite it (vertices 1,2) is the refinement edge.
using Triangle = std::array<int, 3>;

/// Element indices selected for refinement.
using MarkSet = std::vector<int>;

class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Edge {
    std::array<int, 2> vertices; // ascending
    std::array<int, 2> elements; // elements[1] == -1 on the boundary
    int boundary_facet = -1;     // index into boundary_facets(), -1 if interior
};

/// Conforming triangulation of a polygonal domain with labelled boundary and
/// one level of genealogy (the element each element was cut from).
class Mesh {
public:
    Mesh(std::vector<Point> vertices, std::vector<Triangle> elements, std::vector<BoundaryFacet> boundary);

    /// Same as above, with the genealogy of a refinement step: parent[e] is the
    /// index of the element of the coarser mesh that contains e.
    Mesh(std::vector<Point> vertices,
         std::vector<Triangle> elements,
         std::vector<BoundaryFacet> boundary,
         std::vector<int> parent,
         std::vector<int> generation);

    [[nodiscard]] int num_vertices() const { return static_cast<int>(vertices_.size()); }
    [[nodiscard]] int num_elements() const { return static_cast<int>(elements_.size()); }
    [[nodiscard]] int num_edges() const { return static_cast<int>(edges_.size()); }

    [[nodiscard]] const Point& vertex(int v) const { return vertices_[static_cast<std::size_t>(v)]; }
    [[nodiscard]] const Triangle& element(int e) const { return elements_[static_cast<std::size_t>(e)]; }
    [[nodiscard]] const Edge& edge(int k) const { return edges_[static_cast<std::size_t>(k)]; }

    [[nodiscard]] std::span<const Point> vertices() const { return vertices_; }
    [[nodiscard]] std::span<const Triangle> elements() const { return elements_; }
    [[nodiscard]] std::span<const BoundaryFacet> boundary_facets() const { return boundary_; }
    [[nodiscard]] std::span<const Edge> edges() const { return edges_; }

    /// Global edge indices of element e; local edge k is opposite local vertex k.
    [[nodiscard]] const std::array<int, 3>& element_edges(int e) const
    {
        return element_edges_[static_cast<std::size_t>(e)];
    }

    [[nodiscard]] int parent(int e) const { return parent_[static_cast<std::size_t>(e)]; }
    [[nodiscard]] int generation(int e) const { return generation_[static_cast<std::size_t>(e)]; }

    [[nodiscard]] std::array<Point, 3> corners(int e) const;
    [[nodiscard]] AffineMap affine_map(int e) const { return AffineMap(corners(e)); }
    [[nodiscard]] double area(int e) const;
    [[nodiscard]] double diameter(int e) const;

    /// Index of the edge joining vertices a and b, or -1.
    [[nodiscard]] int find_edge(int a, int b) const;

    [[nodiscard]] bool has_dirichlet_boundary() const;

private:
    void build_topology();

    std::vector<Point> vertices_;
    std::vector<Triangle> elements_;
    std::vector<BoundaryFacet> boundary_;
    std::vector<int> parent_;
    std::vector<int> generation_;
    std::vector<Edge> edges_;
    std::vector<std::array<int, 3>> element_edges_;
};

/// Unit normal of edge k pointing out of element e (e must contain k).
[[nodiscard]] Vec2 edge_normal(const Mesh& mesh, int k, int e);
[[nodiscard]] double edge_length(const Mesh& mesh, int k);

/// h_T = |T|^{1/2}.
[[nodiscard]] double element_size(const Mesh& mesh, int e);
[[nodiscard]] double max_element_size(const Mesh& mesh);

/// max_T diam(T) / |T|^{1/2}.
[[nodiscard]] double shape_regularity(const Mesh& mesh);

/// Newest-vertex bisection. Marked elements are bisected three times (four
/// children); other elements are bisected once or twice as required for
/// conformity. The result records parent() links into `mesh`.
[[nodiscard]] Mesh refine(const Mesh& mesh, std::span<const int> marked);
[[nodiscard]] Mesh uniform_refine(const Mesh& mesh);

/// Rotates every element so that its longest edge becomes the refinement
/// edge (ties: lexicographically smallest sorted vertex pair).
[[nodiscard]] Mesh with_longest_edge_refinement(const Mesh& mesh);

/// Checks the conformity predicate; on failure, writes the reason to `why`.
[[nodiscard]] bool is_conforming(const Mesh& mesh, std::string* why = nullptr);

void write_mesh(std::ostream& out, const Mesh& mesh);
[[nodiscard]] Mesh read_mesh(std::istream& in);
void write_mesh_file(const std::string& path, const Mesh& mesh);
[[nodiscard]] Mesh read_mesh_file(const std::string& path);

} // namespace afem
