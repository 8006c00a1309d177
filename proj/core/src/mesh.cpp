#include "afem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace afem {

namespace {

std::uint64_t edge_key(int a, int b)
{
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (lo << 32U) | hi;
}

double signed_area(const Point& a, const Point& b, const Point& c) { return 0.5 * cross(b - a, c - a); }

} // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<Triangle> elements, std::vector<BoundaryFacet> boundary)
    : Mesh(std::move(vertices), std::move(elements), std::move(boundary), {}, {})
{
}

Mesh::Mesh(std::vector<Point> vertices,
           std::vector<Triangle> elements,
           std::vector<BoundaryFacet> boundary,
           std::vector<int> parent,
           std::vector<int> generation)
    : vertices_(std::move(vertices))
    , elements_(std::move(elements))
    , boundary_(std::move(boundary))
    , parent_(std::move(parent))
    , generation_(std::move(generation))
{
    if (elements_.empty()) {
        throw MeshError("mesh has no elements");
    }
    const auto n = elements_.size();
    if (parent_.empty()) {
        parent_.resize(n);
        std::iota(parent_.begin(), parent_.end(), 0);
    }
    if (generation_.empty()) {
        generation_.assign(n, 0);
    }
    if (parent_.size() != n || generation_.size() != n) {
        throw MeshError("genealogy arrays do not match the element count");
    }
    const int nv = num_vertices();
    for (std::size_t e = 0; e < n; ++e) {
        const auto& t = elements_[e];
        for (int v : t) {
            if (v < 0 || v >= nv) {
                throw MeshError("element " + std::to_string(e) + " references vertex " + std::to_string(v));
            }
        }
        if (!(signed_area(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]) > 0.0)) {
            throw MeshError("element " + std::to_string(e) + " has non-positive area");
        }
    }
    for (const auto& f : boundary_) {
        for (int v : f.vertices) {
            if (v < 0 || v >= nv) {
                throw MeshError("boundary facet references vertex " + std::to_string(v));
            }
        }
    }
    build_topology();
}

void Mesh::build_topology()
{
    struct HalfEdge {
        std::uint64_t key;
        int element;
        int local;
    };
    std::vector<HalfEdge> half;
    half.reserve(3 * elements_.size());
    for (int e = 0; e < num_elements(); ++e) {
        const auto& t = element(e);
        for (int k = 0; k < 3; ++k) {
            half.push_back({edge_key(t[(k + 1) % 3], t[(k + 2) % 3]), e, k});
        }
    }
    std::sort(half.begin(), half.end(), [](const HalfEdge& a, const HalfEdge& b) {
        return a.key != b.key ? a.key < b.key : a.element < b.element;
    });

    edges_.clear();
    element_edges_.assign(elements_.size(), {-1, -1, -1});
    for (std::size_t i = 0; i < half.size();) {
        std::size_t j = i;
        while (j < half.size() && half[j].key == half[i].key) {
            ++j;
        }
        if (j - i > 2) {
            throw MeshError("edge shared by more than two elements");
        }
        Edge edge;
        edge.vertices = {static_cast<int>(half[i].key >> 32U), static_cast<int>(half[i].key & 0xffffffffU)};
        edge.elements = {half[i].element, j - i == 2 ? half[i + 1].element : -1};
        const int index = static_cast<int>(edges_.size());
        for (std::size_t k = i; k < j; ++k) {
            element_edges_[static_cast<std::size_t>(half[k].element)][static_cast<std::size_t>(half[k].local)] = index;
        }
        edges_.push_back(edge);
        i = j;
    }

    std::unordered_map<std::uint64_t, int> lookup;
    lookup.reserve(edges_.size() * 2);
    for (int k = 0; k < num_edges(); ++k) {
        lookup.emplace(edge_key(edges_[k].vertices[0], edges_[k].vertices[1]), k);
    }
    for (int b = 0; b < static_cast<int>(boundary_.size()); ++b) {
        const auto& f = boundary_[static_cast<std::size_t>(b)];
        const auto it = lookup.find(edge_key(f.vertices[0], f.vertices[1]));
        if (it == lookup.end()) {
            throw MeshError("boundary facet " + std::to_string(b) + " is not an edge of the mesh");
        }
        auto& edge = edges_[static_cast<std::size_t>(it->second)];
        if (edge.elements[1] >= 0) {
            throw MeshError("boundary facet " + std::to_string(b) + " is an interior edge");
        }
        if (edge.boundary_facet >= 0) {
            throw MeshError("boundary edge labelled twice");
        }
        edge.boundary_facet = b;
    }
    for (const auto& edge : edges_) {
        if (edge.elements[1] < 0 && edge.boundary_facet < 0) {
            throw MeshError("boundary edge (" + std::to_string(edge.vertices[0]) + "," +
                            std::to_string(edge.vertices[1]) + ") carries no label");
        }
    }
}

std::array<Point, 3> Mesh::corners(int e) const
{
    const auto& t = element(e);
    return {vertex(t[0]), vertex(t[1]), vertex(t[2])};
}

double Mesh::area(int e) const
{
    const auto c = corners(e);
    return signed_area(c[0], c[1], c[2]);
}

double Mesh::diameter(int e) const
{
    const auto c = corners(e);
    return std::max({norm(c[1] - c[0]), norm(c[2] - c[1]), norm(c[0] - c[2])});
}

int Mesh::find_edge(int a, int b) const
{
    const auto key = edge_key(a, b);
    const auto it = std::lower_bound(edges_.begin(), edges_.end(), key, [](const Edge& edge, std::uint64_t k) {
        return edge_key(edge.vertices[0], edge.vertices[1]) < k;
    });
    if (it != edges_.end() && edge_key(it->vertices[0], it->vertices[1]) == key) {
        return static_cast<int>(it - edges_.begin());
    }
    return -1;
}

bool Mesh::has_dirichlet_boundary() const
{
    return std::any_of(boundary_.begin(), boundary_.end(),
                       [](const BoundaryFacet& f) { return f.label == BoundaryLabel::Dirichlet; });
}

Vec2 edge_normal(const Mesh& mesh, int k, int e)
{
    const auto& edge = mesh.edge(k);
    const Point a = mesh.vertex(edge.vertices[0]);
    const Point b = mesh.vertex(edge.vertices[1]);
    const Vec2 t = b - a;
    Vec2 n{t.y, -t.x};
    const auto& tri = mesh.element(e);
    int opposite = -1;
    for (int v : tri) {
        if (v != edge.vertices[0] && v != edge.vertices[1]) {
            opposite = v;
        }
    }
    if (dot(n, mesh.vertex(opposite) - a) > 0.0) {
        n = -1.0 * n;
    }
    return (1.0 / norm(n)) * n;
}

double edge_length(const Mesh& mesh, int k)
{
    const auto& edge = mesh.edge(k);
    return norm(mesh.vertex(edge.vertices[1]) - mesh.vertex(edge.vertices[0]));
}

double element_size(const Mesh& mesh, int e) { return std::sqrt(mesh.area(e)); }

double max_element_size(const Mesh& mesh)
{
    double h = 0.0;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        h = std::max(h, element_size(mesh, e));
    }
    return h;
}

double shape_regularity(const Mesh& mesh)
{
    double kappa = 0.0;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        kappa = std::max(kappa, mesh.diameter(e) / element_size(mesh, e));
    }
    return kappa;
}

Mesh refine(const Mesh& mesh, std::span<const int> marked)
{
    const int ne = mesh.num_elements();
    std::vector<char> is_marked(static_cast<std::size_t>(ne), 0);
    for (int e : marked) {
        if (e < 0 || e >= ne) {
            throw MeshError("marked element " + std::to_string(e) + " out of range");
        }
        if (is_marked[static_cast<std::size_t>(e)] != 0) {
            throw MeshError("element " + std::to_string(e) + " marked twice");
        }
        is_marked[static_cast<std::size_t>(e)] = 1;
    }

    std::vector<char> bisect(static_cast<std::size_t>(mesh.num_edges()), 0);
    std::vector<int> work;
    for (int e : marked) {
        for (int k : mesh.element_edges(e)) {
            if (bisect[static_cast<std::size_t>(k)] == 0) {
                bisect[static_cast<std::size_t>(k)] = 1;
                work.push_back(k);
            }
        }
    }
    // Closure: an element with any bisected edge must bisect its refinement edge.
    while (!work.empty()) {
        const int k = work.back();
        work.pop_back();
        for (int e : mesh.edge(k).elements) {
            if (e < 0) {
                continue;
            }
            const int ref = mesh.element_edges(e)[0];
            if (bisect[static_cast<std::size_t>(ref)] == 0) {
                bisect[static_cast<std::size_t>(ref)] = 1;
                work.push_back(ref);
            }
        }
    }

    std::vector<Point> vertices(mesh.vertices().begin(), mesh.vertices().end());
    std::vector<int> midpoint(static_cast<std::size_t>(mesh.num_edges()), -1);
    for (int k = 0; k < mesh.num_edges(); ++k) {
        if (bisect[static_cast<std::size_t>(k)] != 0) {
            const auto& ev = mesh.edge(k).vertices;
            midpoint[static_cast<std::size_t>(k)] = static_cast<int>(vertices.size());
            vertices.push_back(0.5 * (mesh.vertex(ev[0]) + mesh.vertex(ev[1])));
        }
    }

    std::vector<Triangle> elements;
    std::vector<int> parent;
    std::vector<int> generation;
    elements.reserve(static_cast<std::size_t>(ne) * 2);
    auto emit = [&](const Triangle& t, int from, int gen) {
        elements.push_back(t);
        parent.push_back(from);
        generation.push_back(gen);
    };
    for (int e = 0; e < ne; ++e) {
        const auto& [a, b, c] = mesh.element(e);
        const auto& ek = mesh.element_edges(e);
        const int g = mesh.generation(e);
        if (bisect[static_cast<std::size_t>(ek[0])] == 0) {
            emit(mesh.element(e), e, g);
            continue;
        }
        const int m0 = midpoint[static_cast<std::size_t>(ek[0])];
        // children (m0,a,b) and (m0,c,a); their refinement edges are (a,b) and (c,a)
        if (const int m2 = midpoint[static_cast<std::size_t>(ek[2])]; m2 >= 0) {
            emit({m2, m0, a}, e, g + 2);
            emit({m2, b, m0}, e, g + 2);
        } else {
            emit({m0, a, b}, e, g + 1);
        }
        if (const int m1 = midpoint[static_cast<std::size_t>(ek[1])]; m1 >= 0) {
            emit({m1, m0, c}, e, g + 2);
            emit({m1, a, m0}, e, g + 2);
        } else {
            emit({m0, c, a}, e, g + 1);
        }
    }

    std::vector<BoundaryFacet> boundary;
    boundary.reserve(mesh.boundary_facets().size() * 2);
    for (const auto& f : mesh.boundary_facets()) {
        const int k = mesh.find_edge(f.vertices[0], f.vertices[1]);
        if (const int m = midpoint[static_cast<std::size_t>(k)]; m >= 0) {
            boundary.push_back({{f.vertices[0], m}, f.label});
            boundary.push_back({{m, f.vertices[1]}, f.label});
        } else {
            boundary.push_back(f);
        }
    }

    return Mesh(std::move(vertices), std::move(elements), std::move(boundary), std::move(parent),
                std::move(generation));
}

Mesh uniform_refine(const Mesh& mesh)
{
    std::vector<int> all(static_cast<std::size_t>(mesh.num_elements()));
    std::iota(all.begin(), all.end(), 0);
    return refine(mesh, all);
}

Mesh with_longest_edge_refinement(const Mesh& mesh)
{
    std::vector<Triangle> elements(mesh.elements().begin(), mesh.elements().end());
    for (auto& t : elements) {
        int best = 0;
        double best_len = -1.0;
        std::array<int, 2> best_pair{};
        for (int k = 0; k < 3; ++k) {
            const int p = t[(k + 1) % 3];
            const int q = t[(k + 2) % 3];
            const Vec2 d = mesh.vertex(p) - mesh.vertex(q);
            const double len = dot(d, d);
            const std::array<int, 2> pair{std::min(p, q), std::max(p, q)};
            const double tie = 1e-12 * std::max(len, best_len);
            if (len > best_len + tie || (std::abs(len - best_len) <= tie && pair < best_pair)) {
                best = k;
                best_len = len;
                best_pair = pair;
            }
        }
        std::rotate(t.begin(), t.begin() + best, t.end());
    }
    std::vector<BoundaryFacet> boundary(mesh.boundary_facets().begin(), mesh.boundary_facets().end());
    std::vector<Point> vertices(mesh.vertices().begin(), mesh.vertices().end());
    return Mesh(std::move(vertices), std::move(elements), std::move(boundary));
}

bool is_conforming(const Mesh& mesh, std::string* why)
{
    auto fail = [why](std::string msg) {
        if (why != nullptr) {
            *why = std::move(msg);
        }
        return false;
    };
    for (int e = 0; e < mesh.num_elements(); ++e) {
        if (!(mesh.area(e) > 0.0)) {
            return fail("element " + std::to_string(e) + " has non-positive area");
        }
    }
    // Every vertex on the boundary of a conforming 2D mesh touches exactly two
    // boundary edges; a hanging node shows up as a vertex with three.
    std::vector<int> degree(static_cast<std::size_t>(mesh.num_vertices()), 0);
    std::unordered_set<std::uint64_t> vertex_at;
    vertex_at.reserve(static_cast<std::size_t>(mesh.num_vertices()) * 2);
    auto coord_key = [](Point p) {
        const auto qx = static_cast<std::int64_t>(std::llround(p.x * 1e9));
        const auto qy = static_cast<std::int64_t>(std::llround(p.y * 1e9));
        return static_cast<std::uint64_t>(qx) * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint64_t>(qy);
    };
    for (const auto& p : mesh.vertices()) {
        vertex_at.insert(coord_key(p));
    }
    for (const auto& edge : mesh.edges()) {
        if (edge.elements[1] >= 0) {
            continue;
        }
        ++degree[static_cast<std::size_t>(edge.vertices[0])];
        ++degree[static_cast<std::size_t>(edge.vertices[1])];
        const Point mid = 0.5 * (mesh.vertex(edge.vertices[0]) + mesh.vertex(edge.vertices[1]));
        if (vertex_at.count(coord_key(mid)) != 0) {
            return fail("hanging vertex at the midpoint of edge (" + std::to_string(edge.vertices[0]) + "," +
                        std::to_string(edge.vertices[1]) + ")");
        }
    }
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const int d = degree[static_cast<std::size_t>(v)];
        if (d != 0 && d != 2) {
            return fail("vertex " + std::to_string(v) + " lies on " + std::to_string(d) + " boundary edges");
        }
    }
    return true;
}

void write_mesh(std::ostream& out, const Mesh& mesh)
{
    char buf[96];
    out << "VERTICES " << mesh.num_vertices() << '\n';
    for (const auto& p : mesh.vertices()) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x, p.y);
        out << buf;
    }
    out << "ELEMENTS " << mesh.num_elements() << '\n';
    for (const auto& t : mesh.elements()) {
        out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    }
    out << "BOUNDARY " << mesh.boundary_facets().size() << '\n';
    for (const auto& f : mesh.boundary_facets()) {
        out << f.vertices[0] << ' ' << f.vertices[1] << ' ' << (f.label == BoundaryLabel::Dirichlet ? 'D' : 'N')
            << '\n';
    }
}

namespace {

class LineReader {
public:
    explicit LineReader(std::istream& in)
        : in_(in)
    {
    }

    std::istringstream next(const char* what)
    {
        std::string line;
        if (!std::getline(in_, line)) {
            throw MeshError(std::string("unexpected end of mesh file while reading ") + what);
        }
        ++line_no_;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        return std::istringstream(line);
    }

    [[noreturn]] void error(const std::string& msg) const
    {
        throw MeshError("mesh file line " + std::to_string(line_no_) + ": " + msg);
    }

    void expect_end(std::istringstream& ss) const
    {
        std::string rest;
        if (ss >> rest) {
            error("trailing content '" + rest + "'");
        }
    }

    long header(const char* keyword)
    {
        auto ss = next(keyword);
        std::string word;
        long count = -1;
        if (!(ss >> word >> count) || word != keyword || count < 0) {
            error(std::string("expected '") + keyword + " <count>'");
        }
        expect_end(ss);
        return count;
    }

private:
    std::istream& in_;
    int line_no_ = 0;
};

} // namespace

Mesh read_mesh(std::istream& in)
{
    LineReader reader(in);
    const long nv = reader.header("VERTICES");
    std::vector<Point> vertices(static_cast<std::size_t>(nv));
    for (auto& p : vertices) {
        auto ss = reader.next("vertices");
        if (!(ss >> p.x >> p.y)) {
            reader.error("expected 'x y'");
        }
        reader.expect_end(ss);
    }
    const long ne = reader.header("ELEMENTS");
    std::vector<Triangle> elements(static_cast<std::size_t>(ne));
    for (auto& t : elements) {
        auto ss = reader.next("elements");
        if (!(ss >> t[0] >> t[1] >> t[2])) {
            reader.error("expected 'v0 v1 v2'");
        }
        reader.expect_end(ss);
    }
    const long nb = reader.header("BOUNDARY");
    std::vector<BoundaryFacet> boundary(static_cast<std::size_t>(nb));
    for (auto& f : boundary) {
        auto ss = reader.next("boundary");
        std::string label;
        if (!(ss >> f.vertices[0] >> f.vertices[1] >> label) || (label != "D" && label != "N")) {
            reader.error("expected 'va vb D|N'");
        }
        reader.expect_end(ss);
        f.label = label == "D" ? BoundaryLabel::Dirichlet : BoundaryLabel::Neumann;
    }
    std::string extra;
    while (std::getline(in, extra)) {
        if (extra.find_first_not_of(" \t\r") != std::string::npos) {
            throw MeshError("unexpected content after BOUNDARY block");
        }
    }
    return Mesh(std::move(vertices), std::move(elements), std::move(boundary));
}

void write_mesh_file(const std::string& path, const Mesh& mesh)
{
    std::ofstream out(path);
    if (!out) {
        throw MeshError("cannot open '" + path + "' for writing");
    }
    write_mesh(out, mesh);
}

Mesh read_mesh_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw MeshError("cannot open '" + path + "'");
    }
    return read_mesh(in);
}

} // namespace afem
