#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "plastafem/tensor.hpp"

namespace plastafem {

inline constexpr std::size_t kNone = static_cast<std::size_t>(-1);

enum class EdgeTag { Interior, Dirichlet, Neumann };

const char* to_string(EdgeTag tag);

/// Triangle stored as (a, b, peak). The reference edge is (a, b) and the peak
/// is the newest vertex.
struct Element {
    std::array<std::size_t, 3> v{};
    std::uint32_t generation = 0;

    std::size_t a() const { return v[0]; }
    std::size_t b() const { return v[1]; }
    std::size_t peak() const { return v[2]; }
    friend bool operator==(const Element&, const Element&) = default;
};

/// Position of an element in the bisection forest of its root mesh: the root
/// element index plus the branch taken at each bisection (bit i = branch at
/// depth i + 1, 0 for the child containing `a`, 1 for the child containing `b`).
struct ForestKey {
    static constexpr std::uint32_t kMaxDepth = 128;

    std::uint32_t root = 0;
    std::uint32_t depth = 0;
    std::array<std::uint64_t, 2> bits{};

    ForestKey child(int branch) const;
    ForestKey ancestor(std::uint32_t at_depth) const;
    /// True if `*this` is `other` or one of its ancestors.
    bool contains(const ForestKey& other) const;
    friend bool operator==(const ForestKey&, const ForestKey&) = default;
};

struct ForestKeyHash {
    std::size_t operator()(const ForestKey& k) const noexcept;
};

/// Sorted vertex pair identifying an undirected edge.
using EdgeKey = std::pair<std::size_t, std::size_t>;

inline EdgeKey make_edge_key(std::size_t a, std::size_t b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

using BoundaryTags = std::map<EdgeKey, EdgeTag>;

struct Edge {
    EdgeKey v;
    EdgeTag tag = EdgeTag::Interior;
    /// elements[0] < elements[1]; elements[1] == kNone on the boundary.
    std::array<std::size_t, 2> elements{kNone, kNone};

    bool on_boundary() const { return elements[1] == kNone; }
};

/// Geometric root triangulation T0 from which refined meshes descend.
struct MeshRoot {
    std::vector<Vec2> vertices;
    std::vector<Element> elements;
    BoundaryTags tags;
};

/// Conforming triangulation with newest-vertex-bisection bookkeeping.
/// Immutable once built; refinement returns a new mesh.
class Mesh {
public:
    /// Builds a root mesh. Elements keep their given (a, b) reference edge;
    /// clockwise triples are flipped by swapping a and b. Every edge with a
    /// single adjacent element must carry a Dirichlet or Neumann tag, and at
    /// least one edge must be Dirichlet.
    static Mesh from_parts(std::vector<Vec2> vertices, std::vector<Element> elements, BoundaryTags tags);

    /// Like from_parts, but chooses the reference edge of each triangle as its
    /// longest edge (ties: smallest vertex-id pair).
    static Mesh from_triangles(std::vector<Vec2> vertices, const std::vector<std::array<std::size_t, 3>>& triangles,
                               BoundaryTags tags);

    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_elements() const { return elements_.size(); }
    std::size_t num_edges() const { return edges_.size(); }

    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<Element>& elements() const { return elements_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const Vec2& vertex(std::size_t i) const { return vertices_[i]; }
    const Element& element(std::size_t t) const { return elements_[t]; }
    const Edge& edge(std::size_t e) const { return edges_[e]; }

    /// Local edge j of element t joins v[j] and v[(j+1)%3]; local edge 0 is
    /// the reference edge.
    const std::array<std::size_t, 3>& element_edges(std::size_t t) const { return element_edges_[t]; }
    /// Edge index, or kNone.
    std::size_t find_edge(std::size_t a, std::size_t b) const;

    double area(std::size_t t) const { return areas_[t]; }
    double edge_length(std::size_t e) const;
    /// Fixed unit normal: outward on the boundary, from elements[0] towards
    /// elements[1] in the interior.
    Vec2 edge_normal(std::size_t e) const;
    Vec2 centroid(std::size_t t) const;
    double total_area() const;

    const ForestKey& key(std::size_t t) const { return keys_[t]; }
    /// Element index with the given forest key, or kNone.
    std::size_t find_element(const ForestKey& key) const;
    const std::shared_ptr<const MeshRoot>& root() const { return root_; }
    bool same_root(const Mesh& other) const { return root_ == other.root_; }

    BoundaryTags boundary_tags() const;
    bool is_dirichlet_vertex(std::size_t v) const { return dirichlet_vertex_[v]; }

private:
    friend class MeshBuilder;

    Mesh() = default;
    void build_topology();

    std::vector<Vec2> vertices_;
    std::vector<Element> elements_;
    std::vector<ForestKey> keys_;
    BoundaryTags tags_;
    std::shared_ptr<const MeshRoot> root_;

    std::vector<Edge> edges_;
    std::unordered_map<std::uint64_t, std::size_t> edge_index_;
    std::vector<std::array<std::size_t, 3>> element_edges_;
    std::vector<double> areas_;
    std::vector<bool> dirichlet_vertex_;
    std::unordered_map<ForestKey, std::size_t, ForestKeyHash> key_index_;
};

double signed_area(Vec2 a, Vec2 b, Vec2 c);

/// One newest-vertex bisection of `element` through `midpoint_id`, the vertex
/// at the midpoint of its reference edge. Children are (peak, a, m) and
/// (b, peak, m): both positively oriented with m as peak, reference edges
/// (peak, a) and (b, peak).
std::pair<Element, Element> bisect(std::span<const Vec2> vertices, const Element& element, std::size_t midpoint_id);

/// NVB(mesh, marked): bisects every marked element and closes the mesh so it
/// stays conforming.
Mesh refine(const Mesh& mesh, std::span<const std::size_t> marked);
Mesh refine_uniform(const Mesh& mesh, int times = 1);

/// Coarsest common refinement of two meshes of the same root.
Mesh overlay(const Mesh& a, const Mesh& b);

/// A cell of the overlay of two meshes, identified by the element of each
/// mesh that contains it.
struct OverlayCell {
    std::size_t a;
    std::size_t b;
    double area;
};

/// Cells of overlay(a, b) without building the overlay mesh.
std::vector<OverlayCell> overlay_cells(const Mesh& a, const Mesh& b);

/// Elements of `mesh` that are also elements of `other` (same forest key),
/// listed by their index in `mesh`.
std::vector<std::size_t> common_elements(const Mesh& mesh, const Mesh& other);
/// Elements of `mesh` that are not elements of `other`.
std::vector<std::size_t> elements_not_in(const Mesh& mesh, const Mesh& other);

struct Geometry {
    std::vector<double> area;
    std::vector<double> diameter;
    /// Diameter of the inscribed circle, 4|T| / perimeter.
    std::vector<double> inner_diameter;
    std::vector<double> edge_length;
    std::vector<Vec2> edge_normal;
};

Geometry geometry(const Mesh& mesh);
/// Elements adjacent to edge e (one or two).
std::vector<std::size_t> edge_patch(const Mesh& mesh, std::size_t e);
/// Union of the edge patches of the edges of t, sorted.
std::vector<std::size_t> element_patch(const Mesh& mesh, std::size_t t);
double max_shape_ratio(const Mesh& mesh);

struct ConformityReport {
    bool conforming = true;
    std::vector<std::string> problems;
};

/// Independent conformity check on raw triangles: positive orientation, no
/// edge shared by more than two triangles, and no vertex in the open interior
/// of an edge that has a single adjacent triangle.
ConformityReport check_conformity(std::span<const Vec2> vertices, std::span<const std::array<std::size_t, 3>> triangles);
ConformityReport check_conformity(const Mesh& mesh);

/// Reference-edge compatibility of the initial assignment: each interior
/// reference edge is also the reference edge of the neighbour.
bool reference_edges_compatible(const Mesh& mesh);

/// Axis-aligned segment (x0, y0) - (x1, y1) used to tag boundary edges.
struct Segment {
    Vec2 p0;
    Vec2 p1;
    bool contains(Vec2 q, double tol = 1e-12) const;
};

/// Tags every boundary edge: Dirichlet if both end points lie on one of the
/// Dirichlet segments, Neumann otherwise.
BoundaryTags tag_boundary(std::span<const Vec2> vertices, std::span<const std::array<std::size_t, 3>> triangles,
                          std::span<const Segment> dirichlet);

/// (0,1)^2 split into two triangles along the diagonal (0,0)-(1,1).
Mesh unit_square_mesh(std::span<const Segment> dirichlet);
/// (-1,1)^2 \ [0,1)x(-1,0] as six triangles.
Mesh l_shape_mesh(std::span<const Segment> dirichlet);

/// "plastafem-mesh v1" text format.
void write_mesh(std::ostream& out, const Mesh& mesh);
std::string mesh_to_string(const Mesh& mesh);
Mesh read_mesh(std::istream& in);
Mesh mesh_from_string(const std::string& text);

}  // namespace plastafem
