#include "plastafem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "plastafem/error.hpp"

namespace plastafem {

namespace {

std::uint64_t pack(std::size_t a, std::size_t b) {
    const EdgeKey k = make_edge_key(a, b);
    return (static_cast<std::uint64_t>(k.first) << 32) | static_cast<std::uint64_t>(k.second);
}

double dist(Vec2 a, Vec2 b) { return norm(b - a); }

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

const char* to_string(EdgeTag tag) {
    switch (tag) {
        case EdgeTag::Interior: return "interior";
        case EdgeTag::Dirichlet: return "dirichlet";
        case EdgeTag::Neumann: return "neumann";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// ForestKey

ForestKey ForestKey::child(int branch) const {
    if (depth >= kMaxDepth) throw ArgumentError("bisection depth exceeds forest key capacity");
    ForestKey k = *this;
    if (branch) k.bits[depth / 64] |= std::uint64_t{1} << (depth % 64);
    ++k.depth;
    return k;
}

ForestKey ForestKey::ancestor(std::uint32_t at_depth) const {
    ForestKey k;
    k.root = root;
    k.depth = at_depth;
    for (std::uint32_t w = 0; w < 2; ++w) {
        const std::uint32_t lo = w * 64;
        if (at_depth <= lo) {
            k.bits[w] = 0;
        } else if (at_depth >= lo + 64) {
            k.bits[w] = bits[w];
        } else {
            k.bits[w] = bits[w] & ((std::uint64_t{1} << (at_depth - lo)) - 1);
        }
    }
    return k;
}

bool ForestKey::contains(const ForestKey& other) const {
    return other.root == root && other.depth >= depth && other.ancestor(depth) == *this;
}

std::size_t ForestKeyHash::operator()(const ForestKey& k) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ (std::uint64_t{k.root} << 32 | k.depth);
    for (auto w : k.bits) {
        h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
}

// ---------------------------------------------------------------------------

double signed_area(Vec2 a, Vec2 b, Vec2 c) { return 0.5 * cross(b - a, c - a); }

std::pair<Element, Element> bisect(std::span<const Vec2> vertices, const Element& element, std::size_t midpoint_id) {
    const auto [a, b, c] = element.v;
    if (signed_area(vertices[a], vertices[b], vertices[c]) <= 0.0) {
        throw InvalidElement("cannot bisect a degenerate or clockwise element");
    }
    Element first{{c, a, midpoint_id}, element.generation + 1};
    Element second{{b, c, midpoint_id}, element.generation + 1};
    return {first, second};
}

// ---------------------------------------------------------------------------
// Construction

class MeshBuilder {
public:
    static Mesh make(std::vector<Vec2> vertices, std::vector<Element> elements, std::vector<ForestKey> keys,
                     BoundaryTags tags, std::shared_ptr<const MeshRoot> root) {
        Mesh m;
        m.vertices_ = std::move(vertices);
        m.elements_ = std::move(elements);
        m.keys_ = std::move(keys);
        m.tags_ = std::move(tags);
        m.root_ = std::move(root);
        m.build_topology();
        return m;
    }
};

Mesh Mesh::from_parts(std::vector<Vec2> vertices, std::vector<Element> elements, BoundaryTags tags) {
    for (const Vec2& p : vertices) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ArgumentError("non-finite vertex coordinate");
    }
    for (Element& el : elements) {
        for (std::size_t i : el.v) {
            if (i >= vertices.size()) throw ArgumentError("element references unknown vertex " + std::to_string(i));
        }
        if (el.v[0] == el.v[1] || el.v[1] == el.v[2] || el.v[0] == el.v[2]) {
            throw InvalidElement("element with repeated vertices");
        }
        const double s = signed_area(vertices[el.v[0]], vertices[el.v[1]], vertices[el.v[2]]);
        if (s == 0.0) throw InvalidElement("degenerate element");
        if (s < 0.0) std::swap(el.v[0], el.v[1]);
    }
    bool has_dirichlet = false;
    for (const auto& [k, tag] : tags) has_dirichlet |= tag == EdgeTag::Dirichlet;
    if (!has_dirichlet) throw ArgumentError("mesh needs at least one Dirichlet edge");

    std::vector<ForestKey> keys(elements.size());
    for (std::size_t t = 0; t < keys.size(); ++t) keys[t].root = static_cast<std::uint32_t>(t);
    auto root = std::make_shared<MeshRoot>(MeshRoot{vertices, elements, tags});
    return MeshBuilder::make(std::move(vertices), std::move(elements), std::move(keys), std::move(tags),
                             std::move(root));
}

Mesh Mesh::from_triangles(std::vector<Vec2> vertices, const std::vector<std::array<std::size_t, 3>>& triangles,
                          BoundaryTags tags) {
    std::vector<Element> elements;
    elements.reserve(triangles.size());
    for (const auto& tri : triangles) {
        for (std::size_t i : tri) {
            if (i >= vertices.size()) throw ArgumentError("triangle references unknown vertex " + std::to_string(i));
        }
        // Pick the longest edge (ties: smallest sorted vertex pair) as reference edge.
        int best = 0;
        double best_len = -1.0;
        EdgeKey best_key{};
        for (int j = 0; j < 3; ++j) {
            const std::size_t p = tri[j];
            const std::size_t q = tri[(j + 1) % 3];
            const double len = dist(vertices[p], vertices[q]);
            const EdgeKey key = make_edge_key(p, q);
            if (len > best_len || (len == best_len && key < best_key)) {
                best = j;
                best_len = len;
                best_key = key;
            }
        }
        Element el{{tri[best], tri[(best + 1) % 3], tri[(best + 2) % 3]}, 0};
        elements.push_back(el);
    }
    return from_parts(std::move(vertices), std::move(elements), std::move(tags));
}

void Mesh::build_topology() {
    const std::size_t ne = elements_.size();
    edges_.clear();
    edge_index_.clear();
    element_edges_.assign(ne, {kNone, kNone, kNone});
    areas_.resize(ne);

    // Collect (edge key, element, local index) and sort for a deterministic edge order.
    struct Incidence {
        EdgeKey key;
        std::size_t element;
        int local;
    };
    std::vector<Incidence> inc;
    inc.reserve(3 * ne);
    for (std::size_t t = 0; t < ne; ++t) {
        const auto& v = elements_[t].v;
        areas_[t] = signed_area(vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]);
        if (!(areas_[t] > 0.0)) throw InvalidElement("degenerate or clockwise element " + std::to_string(t));
        for (int j = 0; j < 3; ++j) inc.push_back({make_edge_key(v[j], v[(j + 1) % 3]), t, j});
    }
    std::sort(inc.begin(), inc.end(), [](const Incidence& x, const Incidence& y) {
        return x.key != y.key ? x.key < y.key : x.element < y.element;
    });
    edges_.reserve(inc.size() / 2 + 1);
    edge_index_.reserve(inc.size());
    for (std::size_t i = 0; i < inc.size();) {
        std::size_t j = i;
        while (j < inc.size() && inc[j].key == inc[i].key) ++j;
        if (j - i > 2) throw InvalidElement("edge shared by more than two elements");
        Edge e;
        e.v = inc[i].key;
        e.elements[0] = inc[i].element;
        if (j - i == 2) {
            e.elements[1] = inc[i + 1].element;
            e.tag = EdgeTag::Interior;
        } else {
            auto it = tags_.find(e.v);
            if (it == tags_.end() || it->second == EdgeTag::Interior) {
                throw ArgumentError("boundary edge (" + std::to_string(e.v.first) + ", " + std::to_string(e.v.second) +
                                    ") has no Dirichlet/Neumann tag");
            }
            e.tag = it->second;
        }
        const std::size_t idx = edges_.size();
        edge_index_.emplace(pack(e.v.first, e.v.second), idx);
        for (std::size_t k = i; k < j; ++k) element_edges_[inc[k].element][inc[k].local] = idx;
        edges_.push_back(e);
        i = j;
    }
    for (const auto& [k, tag] : tags_) {
        if (edge_index_.find(pack(k.first, k.second)) == edge_index_.end()) {
            throw ArgumentError("boundary tag on a pair that is not a mesh edge");
        }
    }

    dirichlet_vertex_.assign(vertices_.size(), false);
    for (const Edge& e : edges_) {
        if (e.tag == EdgeTag::Dirichlet) {
            dirichlet_vertex_[e.v.first] = true;
            dirichlet_vertex_[e.v.second] = true;
        }
    }

    key_index_.clear();
    key_index_.reserve(ne);
    for (std::size_t t = 0; t < ne; ++t) key_index_.emplace(keys_[t], t);
}

std::size_t Mesh::find_edge(std::size_t a, std::size_t b) const {
    auto it = edge_index_.find(pack(a, b));
    return it == edge_index_.end() ? kNone : it->second;
}

double Mesh::edge_length(std::size_t e) const { return dist(vertices_[edges_[e].v.first], vertices_[edges_[e].v.second]); }

Vec2 Mesh::edge_normal(std::size_t e) const {
    const Edge& ed = edges_[e];
    const Vec2 p = vertices_[ed.v.first];
    const Vec2 q = vertices_[ed.v.second];
    const Vec2 d = q - p;
    const double len = norm(d);
    Vec2 n{d.y / len, -d.x / len};
    // Orient away from elements[0].
    const Vec2 c = centroid(ed.elements[0]);
    if (dot(n, c - p) > 0.0) n = -1.0 * n;
    return n;
}

Vec2 Mesh::centroid(std::size_t t) const {
    const auto& v = elements_[t].v;
    return (1.0 / 3.0) * (vertices_[v[0]] + vertices_[v[1]] + vertices_[v[2]]);
}

double Mesh::total_area() const {
    double s = 0.0;
    for (double a : areas_) s += a;
    return s;
}

std::size_t Mesh::find_element(const ForestKey& key) const {
    auto it = key_index_.find(key);
    return it == key_index_.end() ? kNone : it->second;
}

BoundaryTags Mesh::boundary_tags() const { return tags_; }

// ---------------------------------------------------------------------------
// Refinement

namespace {

/// Splits tagged boundary edges at the given midpoints, recursively.
BoundaryTags split_tags(const BoundaryTags& tags, const std::unordered_map<std::uint64_t, std::size_t>& midpoint) {
    BoundaryTags out;
    std::vector<std::pair<EdgeKey, EdgeTag>> work(tags.begin(), tags.end());
    while (!work.empty()) {
        auto [k, tag] = work.back();
        work.pop_back();
        auto it = midpoint.find(pack(k.first, k.second));
        if (it == midpoint.end()) {
            out.emplace(k, tag);
        } else {
            work.emplace_back(make_edge_key(k.first, it->second), tag);
            work.emplace_back(make_edge_key(it->second, k.second), tag);
        }
    }
    return out;
}

}  // namespace

Mesh refine(const Mesh& mesh, std::span<const std::size_t> marked) {
    for (std::size_t t : marked) {
        if (t >= mesh.num_elements()) throw ArgumentError("marked element id " + std::to_string(t) + " out of range");
    }
    if (marked.empty()) return mesh;

    // Mark reference edges, then close: any element with a marked edge needs
    // its reference edge marked as well.
    std::vector<char> edge_marked(mesh.num_edges(), 0);
    std::vector<std::size_t> work;
    auto mark_edge = [&](std::size_t e) {
        if (edge_marked[e]) return;
        edge_marked[e] = 1;
        for (std::size_t t : mesh.edge(e).elements) {
            if (t != kNone) work.push_back(t);
        }
    };
    for (std::size_t t : marked) mark_edge(mesh.element_edges(t)[0]);
    while (!work.empty()) {
        const std::size_t t = work.back();
        work.pop_back();
        const auto& ee = mesh.element_edges(t);
        if (!edge_marked[ee[0]] && (edge_marked[ee[1]] || edge_marked[ee[2]])) mark_edge(ee[0]);
    }

    std::vector<Vec2> vertices = mesh.vertices();
    std::vector<std::size_t> midpoint(mesh.num_edges(), kNone);
    std::unordered_map<std::uint64_t, std::size_t> midpoint_by_key;
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
        if (!edge_marked[e]) continue;
        const Edge& ed = mesh.edge(e);
        midpoint[e] = vertices.size();
        midpoint_by_key.emplace(pack(ed.v.first, ed.v.second), vertices.size());
        vertices.push_back(0.5 * (mesh.vertex(ed.v.first) + mesh.vertex(ed.v.second)));
    }

    std::vector<Element> elements;
    std::vector<ForestKey> keys;
    elements.reserve(mesh.num_elements() + 3 * marked.size());
    keys.reserve(elements.capacity());
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
        const Element& el = mesh.element(t);
        const auto& ee = mesh.element_edges(t);
        const ForestKey& key = mesh.key(t);
        if (!edge_marked[ee[0]]) {
            elements.push_back(el);
            keys.push_back(key);
            continue;
        }
        auto [c0, c1] = bisect(vertices, el, midpoint[ee[0]]);
        // c0 = (peak, a, m): its reference edge is the parent's local edge 2.
        // c1 = (b, peak, m): its reference edge is the parent's local edge 1.
        const std::array<std::pair<Element, std::size_t>, 2> children{{{c0, ee[2]}, {c1, ee[1]}}};
        for (int branch = 0; branch < 2; ++branch) {
            const auto& [child, ref_edge] = children[branch];
            const ForestKey ck = key.child(branch);
            if (edge_marked[ref_edge]) {
                auto [g0, g1] = bisect(vertices, child, midpoint[ref_edge]);
                elements.push_back(g0);
                keys.push_back(ck.child(0));
                elements.push_back(g1);
                keys.push_back(ck.child(1));
            } else {
                elements.push_back(child);
                keys.push_back(ck);
            }
        }
    }

    BoundaryTags tags = split_tags(mesh.boundary_tags(), midpoint_by_key);
    return MeshBuilder::make(std::move(vertices), std::move(elements), std::move(keys), std::move(tags),
                             mesh.root());
}

Mesh refine_uniform(const Mesh& mesh, int times) {
    Mesh m = mesh;
    for (int i = 0; i < times; ++i) {
        std::vector<std::size_t> all(m.num_elements());
        std::iota(all.begin(), all.end(), std::size_t{0});
        m = refine(m, all);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Overlay

std::vector<OverlayCell> overlay_cells(const Mesh& a, const Mesh& b) {
    if (!a.same_root(b)) throw IncompatibleRoot("meshes do not share a root triangulation");
    std::vector<OverlayCell> cells;
    cells.reserve(std::max(a.num_elements(), b.num_elements()));
    for (std::size_t i = 0; i < a.num_elements(); ++i) {
        const ForestKey& k = a.key(i);
        for (std::int64_t d = k.depth; d >= 0; --d) {
            const std::size_t j = b.find_element(k.ancestor(static_cast<std::uint32_t>(d)));
            if (j != kNone) {
                cells.push_back({i, j, a.area(i)});
                break;
            }
        }
    }
    for (std::size_t j = 0; j < b.num_elements(); ++j) {
        const ForestKey& k = b.key(j);
        for (std::int64_t d = static_cast<std::int64_t>(k.depth) - 1; d >= 0; --d) {
            const std::size_t i = a.find_element(k.ancestor(static_cast<std::uint32_t>(d)));
            if (i != kNone) {
                cells.push_back({i, j, b.area(j)});
                break;
            }
        }
    }
    return cells;
}

Mesh overlay(const Mesh& a, const Mesh& b) {
    if (!a.same_root(b)) throw IncompatibleRoot("meshes do not share a root triangulation");
    std::unordered_set<ForestKey, ForestKeyHash> nodes;
    for (const Mesh* m : {&a, &b}) {
        for (std::size_t t = 0; t < m->num_elements(); ++t) {
            const ForestKey& k = m->key(t);
            for (std::uint32_t d = 0; d <= k.depth; ++d) nodes.insert(k.ancestor(d));
        }
    }

    const MeshRoot& root = *a.root();
    std::vector<Vec2> vertices = root.vertices;
    std::unordered_map<std::uint64_t, std::size_t> midpoint;
    auto midpoint_of = [&](std::size_t p, std::size_t q) {
        auto [it, inserted] = midpoint.try_emplace(pack(p, q), vertices.size());
        if (inserted) vertices.push_back(0.5 * (vertices[p] + vertices[q]));
        return it->second;
    };

    std::vector<Element> elements;
    std::vector<ForestKey> keys;
    std::function<void(const Element&, const ForestKey&)> descend = [&](const Element& el, const ForestKey& key) {
        if (!nodes.contains(key.child(0))) {
            elements.push_back(el);
            keys.push_back(key);
            return;
        }
        const std::size_t m = midpoint_of(el.a(), el.b());
        auto [c0, c1] = bisect(vertices, el, m);
        descend(c0, key.child(0));
        descend(c1, key.child(1));
    };
    for (std::size_t t = 0; t < root.elements.size(); ++t) {
        ForestKey k;
        k.root = static_cast<std::uint32_t>(t);
        descend(root.elements[t], k);
    }
    BoundaryTags tags = split_tags(root.tags, midpoint);
    return MeshBuilder::make(std::move(vertices), std::move(elements), std::move(keys), std::move(tags), a.root());
}

std::vector<std::size_t> common_elements(const Mesh& mesh, const Mesh& other) {
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
        if (other.find_element(mesh.key(t)) != kNone) out.push_back(t);
    }
    return out;
}

std::vector<std::size_t> elements_not_in(const Mesh& mesh, const Mesh& other) {
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
        if (other.find_element(mesh.key(t)) == kNone) out.push_back(t);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Geometry

Geometry geometry(const Mesh& mesh) {
    Geometry g;
    const std::size_t ne = mesh.num_elements();
    g.area.resize(ne);
    g.diameter.resize(ne);
    g.inner_diameter.resize(ne);
    for (std::size_t t = 0; t < ne; ++t) {
        const auto& v = mesh.element(t).v;
        const double l0 = dist(mesh.vertex(v[0]), mesh.vertex(v[1]));
        const double l1 = dist(mesh.vertex(v[1]), mesh.vertex(v[2]));
        const double l2 = dist(mesh.vertex(v[2]), mesh.vertex(v[0]));
        g.area[t] = mesh.area(t);
        g.diameter[t] = std::max({l0, l1, l2});
        g.inner_diameter[t] = 4.0 * mesh.area(t) / (l0 + l1 + l2);
    }
    g.edge_length.resize(mesh.num_edges());
    g.edge_normal.resize(mesh.num_edges());
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
        g.edge_length[e] = mesh.edge_length(e);
        g.edge_normal[e] = mesh.edge_normal(e);
    }
    return g;
}

std::vector<std::size_t> edge_patch(const Mesh& mesh, std::size_t e) {
    if (e >= mesh.num_edges()) throw ArgumentError("edge id out of range");
    std::vector<std::size_t> out;
    for (std::size_t t : mesh.edge(e).elements) {
        if (t != kNone) out.push_back(t);
    }
    return out;
}

std::vector<std::size_t> element_patch(const Mesh& mesh, std::size_t t) {
    if (t >= mesh.num_elements()) throw ArgumentError("element id out of range");
    std::set<std::size_t> s;
    for (std::size_t e : mesh.element_edges(t)) {
        for (std::size_t u : edge_patch(mesh, e)) s.insert(u);
    }
    return {s.begin(), s.end()};
}

double max_shape_ratio(const Mesh& mesh) {
    const Geometry g = geometry(mesh);
    double r = 0.0;
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) r = std::max(r, g.diameter[t] / g.inner_diameter[t]);
    return r;
}

// ---------------------------------------------------------------------------
// Checks

ConformityReport check_conformity(std::span<const Vec2> vertices, std::span<const std::array<std::size_t, 3>> triangles) {
    ConformityReport rep;
    auto fail = [&](std::string msg) {
        rep.conforming = false;
        rep.problems.push_back(std::move(msg));
    };
    std::map<EdgeKey, int> count;
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        const auto& v = triangles[t];
        if (signed_area(vertices[v[0]], vertices[v[1]], vertices[v[2]]) <= 0.0) {
            fail("element " + std::to_string(t) + " is not positively oriented");
        }
        for (int j = 0; j < 3; ++j) ++count[make_edge_key(v[j], v[(j + 1) % 3])];
    }
    for (const auto& [k, c] : count) {
        if (c > 2) fail("edge shared by " + std::to_string(c) + " elements");
        if (c != 1) continue;
        const Vec2 p = vertices[k.first];
        const Vec2 q = vertices[k.second];
        const Vec2 d = q - p;
        const double len2 = dot(d, d);
        const double xmin = std::min(p.x, q.x), xmax = std::max(p.x, q.x);
        const double ymin = std::min(p.y, q.y), ymax = std::max(p.y, q.y);
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            if (i == k.first || i == k.second) continue;
            const Vec2 r = vertices[i];
            if (r.x < xmin || r.x > xmax || r.y < ymin || r.y > ymax) continue;
            const double s = dot(r - p, d) / len2;
            if (s <= 0.0 || s >= 1.0) continue;
            if (std::abs(cross(d, r - p)) <= 1e-12 * len2) {
                fail("hanging node " + std::to_string(i) + " on edge (" + std::to_string(k.first) + ", " +
                     std::to_string(k.second) + ")");
            }
        }
    }
    return rep;
}

ConformityReport check_conformity(const Mesh& mesh) {
    std::vector<std::array<std::size_t, 3>> tris;
    tris.reserve(mesh.num_elements());
    for (const Element& el : mesh.elements()) tris.push_back(el.v);
    ConformityReport rep = check_conformity(mesh.vertices(), tris);
    for (const Edge& e : mesh.edges()) {
        if (e.on_boundary() == (e.tag == EdgeTag::Interior)) {
            rep.conforming = false;
            rep.problems.push_back("edge tag does not match adjacency");
        }
    }
    return rep;
}

bool reference_edges_compatible(const Mesh& mesh) {
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
        const Edge& e = mesh.edge(mesh.element_edges(t)[0]);
        if (e.on_boundary()) continue;
        const std::size_t other = e.elements[0] == t ? e.elements[1] : e.elements[0];
        if (mesh.element_edges(other)[0] != mesh.element_edges(t)[0]) return false;
    }
    return true;
}

bool Segment::contains(Vec2 q, double tol) const {
    const Vec2 d = p1 - p0;
    const double len = norm(d);
    if (len == 0.0) return norm(q - p0) <= tol;
    if (std::abs(cross(d, q - p0)) > tol * len) return false;
    const double s = dot(q - p0, d) / (len * len);
    return s >= -tol && s <= 1.0 + tol;
}

BoundaryTags tag_boundary(std::span<const Vec2> vertices, std::span<const std::array<std::size_t, 3>> triangles,
                          std::span<const Segment> dirichlet) {
    std::map<EdgeKey, int> count;
    for (const auto& v : triangles) {
        for (int j = 0; j < 3; ++j) ++count[make_edge_key(v[j], v[(j + 1) % 3])];
    }
    BoundaryTags tags;
    for (const auto& [k, c] : count) {
        if (c != 1) continue;
        bool on_dirichlet = false;
        for (const Segment& s : dirichlet) {
            if (s.contains(vertices[k.first]) && s.contains(vertices[k.second])) on_dirichlet = true;
        }
        tags.emplace(k, on_dirichlet ? EdgeTag::Dirichlet : EdgeTag::Neumann);
    }
    return tags;
}

Mesh unit_square_mesh(std::span<const Segment> dirichlet) {
    std::vector<Vec2> v{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    std::vector<std::array<std::size_t, 3>> tris{{0, 1, 2}, {0, 2, 3}};
    BoundaryTags tags = tag_boundary(v, tris, dirichlet);
    return Mesh::from_triangles(std::move(v), tris, std::move(tags));
}

Mesh l_shape_mesh(std::span<const Segment> dirichlet) {
    std::vector<Vec2> v{{-1, -1}, {0, -1}, {-1, 0}, {0, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}};
    std::vector<std::array<std::size_t, 3>> tris{{0, 1, 3}, {0, 3, 2}, {2, 3, 5}, {3, 6, 5}, {3, 4, 7}, {3, 7, 6}};
    BoundaryTags tags = tag_boundary(v, tris, dirichlet);
    return Mesh::from_triangles(std::move(v), tris, std::move(tags));
}

// ---------------------------------------------------------------------------
// Text format

void write_mesh(std::ostream& out, const Mesh& mesh) {
    out << "plastafem-mesh v1\n";
    out << "vertices " << mesh.num_vertices() << '\n';
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
        out << i << ' ' << format_double(mesh.vertex(i).x) << ' ' << format_double(mesh.vertex(i).y) << '\n';
    }
    out << "elements " << mesh.num_elements() << '\n';
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
        const auto& v = mesh.element(t).v;
        out << t << ' ' << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
    }
    const BoundaryTags tags = mesh.boundary_tags();
    out << "boundary " << tags.size() << '\n';
    for (const auto& [k, tag] : tags) out << k.first << ' ' << k.second << ' ' << to_string(tag) << '\n';
}

std::string mesh_to_string(const Mesh& mesh) {
    std::ostringstream os;
    write_mesh(os, mesh);
    return os.str();
}

namespace {

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    /// Next non-empty line with comments stripped, split into tokens.
    std::vector<std::string> next() {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
            std::istringstream ss(line);
            std::vector<std::string> tok;
            for (std::string s; ss >> s;) tok.push_back(s);
            if (!tok.empty()) return tok;
        }
        throw ArgumentError("mesh file: unexpected end of input after line " + std::to_string(line_no_));
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ArgumentError("mesh file line " + std::to_string(line_no_) + ": " + msg);
    }

    std::size_t to_index(const std::string& s) const {
        try {
            std::size_t pos = 0;
            const unsigned long long v = std::stoull(s, &pos);
            if (pos != s.size()) fail("bad integer '" + s + "'");
            return static_cast<std::size_t>(v);
        } catch (const std::logic_error&) {
            fail("bad integer '" + s + "'");
        }
    }

    double to_double(const std::string& s) const {
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) fail("bad number '" + s + "'");
            return v;
        } catch (const std::logic_error&) {
            fail("bad number '" + s + "'");
        }
    }

    std::size_t section(const std::string& name) {
        auto tok = next();
        if (tok.size() != 2 || tok[0] != name) fail("expected '" + name + " <count>'");
        return to_index(tok[1]);
    }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
};

}  // namespace

Mesh read_mesh(std::istream& in) {
    LineReader r(in);
    auto header = r.next();
    if (header.size() != 2 || header[0] != "plastafem-mesh" || header[1] != "v1") r.fail("expected header 'plastafem-mesh v1'");

    const std::size_t nv = r.section("vertices");
    std::vector<Vec2> vertices(nv);
    std::vector<char> seen(nv, 0);
    for (std::size_t i = 0; i < nv; ++i) {
        auto tok = r.next();
        if (tok.size() != 3) r.fail("expected 'id x y'");
        const std::size_t id = r.to_index(tok[0]);
        if (id >= nv || seen[id]) r.fail("vertex ids must be dense 0..N-1 without repeats");
        seen[id] = 1;
        vertices[id] = {r.to_double(tok[1]), r.to_double(tok[2])};
    }

    const std::size_t ne = r.section("elements");
    std::vector<Element> elements(ne);
    std::vector<char> eseen(ne, 0);
    for (std::size_t i = 0; i < ne; ++i) {
        auto tok = r.next();
        if (tok.size() != 4) r.fail("expected 'id a b peak'");
        const std::size_t id = r.to_index(tok[0]);
        if (id >= ne || eseen[id]) r.fail("element ids must be dense 0..M-1 without repeats");
        eseen[id] = 1;
        elements[id].v = {r.to_index(tok[1]), r.to_index(tok[2]), r.to_index(tok[3])};
    }

    const std::size_t nb = r.section("boundary");
    BoundaryTags tags;
    for (std::size_t i = 0; i < nb; ++i) {
        auto tok = r.next();
        if (tok.size() != 3) r.fail("expected 'v0 v1 tag'");
        EdgeTag tag;
        if (tok[2] == "dirichlet") {
            tag = EdgeTag::Dirichlet;
        } else if (tok[2] == "neumann") {
            tag = EdgeTag::Neumann;
        } else {
            r.fail("boundary tag must be 'dirichlet' or 'neumann'");
        }
        tags[make_edge_key(r.to_index(tok[0]), r.to_index(tok[1]))] = tag;
    }
    return Mesh::from_parts(std::move(vertices), std::move(elements), std::move(tags));
}

Mesh mesh_from_string(const std::string& text) {
    std::istringstream is(text);
    return read_mesh(is);
}

}  // namespace plastafem
