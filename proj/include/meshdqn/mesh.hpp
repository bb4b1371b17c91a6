#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "meshdqn/geometry.hpp"

namespace meshdqn {

/// Interior is the absence of a boundary tag. Higher values win when a vertex
/// touches facets with different tags (an inlet/wall corner is an inlet vertex).
enum class BoundaryTag : int { Interior = 0, Wall = 1, Outlet = 2, Inlet = 3, Airfoil = 4 };

inline const char* to_string(BoundaryTag t) {
    switch (t) {
        case BoundaryTag::Interior: return "interior";
        case BoundaryTag::Wall: return "wall";
        case BoundaryTag::Outlet: return "outlet";
        case BoundaryTag::Inlet: return "inlet";
        case BoundaryTag::Airfoil: return "airfoil";
    }
    return "?";
}

struct BoundaryFacet {
    int a = -1;
    int b = -1;
    BoundaryTag tag = BoundaryTag::Wall;

    bool operator==(const BoundaryFacet& o) const { return a == o.a && b == o.b && tag == o.tag; }
};

class MeshError : public std::runtime_error {
  public:
    explicit MeshError(const std::string& what) : std::runtime_error(what) {}
};

/// Immutable 2D triangle mesh. All mutating operations return a new mesh.
/// Triangles are CCW; adjacency is derived once at construction.
class TriMesh {
  public:
    TriMesh() = default;

    /// Validates connectivity and orientation (CW triangles are flipped),
    /// derives adjacency and vertex tags. Throws MeshError on a mesh that
    /// violates any invariant.
    static TriMesh build(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
                         std::vector<BoundaryFacet> facets) {
        TriMesh m;
        m.vertices_ = std::move(vertices);
        m.triangles_ = std::move(triangles);
        m.facets_ = std::move(facets);
        // Canonical facet storage: endpoints ordered, list sorted. Keeps the
        // value identical across a write/read round trip.
        for (auto& f : m.facets_)
            if (f.a > f.b) std::swap(f.a, f.b);
        std::sort(m.facets_.begin(), m.facets_.end(),
                  [](const BoundaryFacet& x, const BoundaryFacet& y) {
                      return std::tie(x.a, x.b, x.tag) < std::tie(y.a, y.b, y.tag);
                  });
        m.normalize_orientation();
        m.rebuild_derived();
        m.check_invariants();
        return m;
    }

    int n_vertices() const { return static_cast<int>(vertices_.size()); }
    int n_triangles() const { return static_cast<int>(triangles_.size()); }
    int n_edges() const { return static_cast<int>(edges_.size()); }
    int n_facets() const { return static_cast<int>(facets_.size()); }

    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
    const std::vector<BoundaryFacet>& facets() const { return facets_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::pair<int, int>& edge(int e) const { return edges_[e]; }

    const Vec2& vertex(int v) const { return vertices_[v]; }
    const std::array<int, 3>& triangle(int t) const { return triangles_[t]; }

    BoundaryTag vertex_tag(int v) const { return vertex_tags_[v]; }
    bool is_boundary_vertex(int v) const { return vertex_tags_[v] != BoundaryTag::Interior; }

    const std::vector<int>& vertex_triangles(int v) const { return vertex_tris_[v]; }
    const std::vector<int>& vertex_neighbors(int v) const { return vertex_nbrs_[v]; }

    /// Triangle adjacent to t across local edge k = (corner k, corner k+1), or -1.
    int triangle_neighbor(int t, int k) const { return tri_nbrs_[t][k]; }

    /// Index into edges() of the undirected edge (a, b); -1 if absent.
    int edge_index(int a, int b) const {
        if (a > b) std::swap(a, b);
        auto it = std::lower_bound(edges_.begin(), edges_.end(), std::make_pair(a, b));
        if (it == edges_.end() || *it != std::make_pair(a, b)) return -1;
        return static_cast<int>(it - edges_.begin());
    }

    /// Local edge k of triangle t, as an index into edges().
    int triangle_edge(int t, int k) const { return tri_edges_[t][k]; }

    double triangle_area(int t) const {
        const auto& tri = triangles_[t];
        return signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
    }

    Vec2 triangle_centroid(int t) const {
        const auto& tri = triangles_[t];
        return (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
    }

    const BBox& bbox() const { return bbox_; }

    /// Degenerate-area cutoff: any triangle at or below this is a broken mesh.
    double area_epsilon() const { return 1e-12 * bbox_.area(); }

    int euler_characteristic() const { return n_vertices() - n_edges() + n_triangles(); }

    std::vector<int> interior_vertices() const {
        std::vector<int> out;
        for (int v = 0; v < n_vertices(); ++v)
            if (!is_boundary_vertex(v)) out.push_back(v);
        return out;
    }

    double mean_edge_length() const {
        if (edges_.empty()) return 0.0;
        double s = 0.0;
        for (const auto& [a, b] : edges_) s += distance(vertices_[a], vertices_[b]);
        return s / static_cast<double>(edges_.size());
    }

    bool operator==(const TriMesh& o) const {
        return vertices_ == o.vertices_ && triangles_ == o.triangles_ && facets_ == o.facets_;
    }

    /// Re-derives adjacency from scratch and compares; exposed for tests.
    bool adjacency_consistent() const {
        TriMesh fresh;
        fresh.vertices_ = vertices_;
        fresh.triangles_ = triangles_;
        fresh.facets_ = facets_;
        fresh.rebuild_derived();
        return fresh.vertex_tris_ == vertex_tris_ && fresh.vertex_nbrs_ == vertex_nbrs_ &&
               fresh.edges_ == edges_ && fresh.tri_nbrs_ == tri_nbrs_ &&
               fresh.vertex_tags_ == vertex_tags_;
    }

    void check_invariants() const {
        for (int t = 0; t < n_triangles(); ++t) {
            const auto& tri = triangles_[t];
            for (int k = 0; k < 3; ++k) {
                if (tri[k] < 0 || tri[k] >= n_vertices())
                    throw MeshError("triangle " + std::to_string(t) + " has out-of-range vertex");
                if (tri[k] == tri[(k + 1) % 3])
                    throw MeshError("triangle " + std::to_string(t) + " has repeated vertex");
            }
            if (triangle_area(t) <= 0.0)
                throw MeshError("triangle " + std::to_string(t) + " has non-positive area");
        }
        // Edge incidence: interior edges on exactly two triangles, boundary
        // facets on exactly one, and every single-incidence edge is a facet.
        std::map<std::pair<int, int>, int> incidence;
        for (const auto& tri : triangles_)
            for (int k = 0; k < 3; ++k) {
                int a = tri[k], b = tri[(k + 1) % 3];
                if (a > b) std::swap(a, b);
                incidence[{a, b}]++;
            }
        std::map<std::pair<int, int>, int> facet_count;
        for (const auto& f : facets_) {
            int a = f.a, b = f.b;
            if (a > b) std::swap(a, b);
            facet_count[{a, b}]++;
            if (f.tag == BoundaryTag::Interior) throw MeshError("facet tagged interior");
        }
        for (const auto& [e, c] : incidence) {
            if (c > 2)
                throw MeshError("edge (" + std::to_string(e.first) + "," +
                                std::to_string(e.second) + ") on " + std::to_string(c) +
                                " triangles");
            const auto fit = facet_count.find(e);
            const int fc = fit == facet_count.end() ? 0 : fit->second;
            if (c == 1 && fc != 1)
                throw MeshError("dangling boundary edge (" + std::to_string(e.first) + "," +
                                std::to_string(e.second) + ")");
            if (c == 2 && fc != 0)
                throw MeshError("interior edge tagged as boundary facet");
        }
        for (const auto& [e, c] : facet_count) {
            (void)c;
            auto it = incidence.find(e);
            if (it == incidence.end() || it->second != 1)
                throw MeshError("boundary facet (" + std::to_string(e.first) + "," +
                                std::to_string(e.second) + ") not on exactly one triangle");
        }
    }

  private:
    void normalize_orientation() {
        for (auto& tri : triangles_) {
            if (signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]) < 0.0)
                std::swap(tri[1], tri[2]);
        }
    }

    void rebuild_derived() {
        const int nv = n_vertices();
        vertex_tris_.assign(nv, {});
        vertex_nbrs_.assign(nv, {});
        for (int t = 0; t < n_triangles(); ++t)
            for (int k = 0; k < 3; ++k) vertex_tris_[triangles_[t][k]].push_back(t);

        std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> edge_tris;
        for (int t = 0; t < n_triangles(); ++t)
            for (int k = 0; k < 3; ++k) {
                int a = triangles_[t][k], b = triangles_[t][(k + 1) % 3];
                if (a > b) std::swap(a, b);
                edge_tris[{a, b}].push_back({t, k});
            }
        edges_.clear();
        edges_.reserve(edge_tris.size());
        for (const auto& [e, _] : edge_tris) edges_.push_back(e);

        tri_nbrs_.assign(n_triangles(), {-1, -1, -1});
        tri_edges_.assign(n_triangles(), {-1, -1, -1});
        int ei = 0;
        for (const auto& [e, ts] : edge_tris) {
            for (const auto& [t, k] : ts) tri_edges_[t][k] = ei;
            if (ts.size() == 2) {
                tri_nbrs_[ts[0].first][ts[0].second] = ts[1].first;
                tri_nbrs_[ts[1].first][ts[1].second] = ts[0].first;
            }
            ++ei;
        }

        for (const auto& [a, b] : edges_) {
            vertex_nbrs_[a].push_back(b);
            vertex_nbrs_[b].push_back(a);
        }
        for (auto& nbrs : vertex_nbrs_) std::sort(nbrs.begin(), nbrs.end());

        vertex_tags_.assign(nv, BoundaryTag::Interior);
        for (const auto& f : facets_) {
            vertex_tags_[f.a] = std::max(vertex_tags_[f.a], f.tag);
            vertex_tags_[f.b] = std::max(vertex_tags_[f.b], f.tag);
        }

        bbox_ = bounding_box(vertices_);
    }

    std::vector<Vec2> vertices_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<BoundaryFacet> facets_;

    // derived
    std::vector<std::vector<int>> vertex_tris_;
    std::vector<std::vector<int>> vertex_nbrs_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::array<int, 3>> tri_nbrs_;
    std::vector<std::array<int, 3>> tri_edges_;
    std::vector<BoundaryTag> vertex_tags_;
    BBox bbox_;
};

namespace detail {

/// True when q is inside or on the CCW triangle (a, b, c), with slack eps
/// on the edge tests (in units of doubled area).
inline bool point_in_tri(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& q, double eps) {
    return cross2(a, b, q) >= -eps && cross2(b, c, q) >= -eps && cross2(c, a, q) >= -eps;
}

/// Ear-clips a simple CCW polygon given by coordinates. Returns triangles as
/// index triples into the polygon, or nullopt when numerically stuck.
inline std::optional<std::vector<std::array<int, 3>>> ear_clip(const std::vector<Vec2>& poly,
                                                               double area_eps) {
    const int n = static_cast<int>(poly.size());
    if (n < 3) return std::nullopt;
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;

    double scale = 0.0;
    for (const Vec2& p : poly) scale = std::max(scale, std::max(std::abs(p.x), std::abs(p.y)));
    const double contain_eps = 1e-14 * scale * scale;

    std::vector<std::array<int, 3>> tris;
    while (idx.size() > 3) {
        const int m = static_cast<int>(idx.size());
        int ear = -1;
        for (int i = 0; i < m; ++i) {
            const int ip = idx[(i + m - 1) % m], ic = idx[i], in = idx[(i + 1) % m];
            const Vec2 &a = poly[ip], &b = poly[ic], &c = poly[in];
            if (signed_area(a, b, c) <= area_eps) continue;  // reflex or degenerate
            bool blocked = false;
            for (int j = 0; j < m && !blocked; ++j) {
                const int q = idx[j];
                if (q == ip || q == ic || q == in) continue;
                if (point_in_tri(a, b, c, poly[q], contain_eps)) blocked = true;
            }
            if (!blocked) {
                ear = i;
                break;
            }
        }
        if (ear < 0) return std::nullopt;
        const int m2 = static_cast<int>(idx.size());
        tris.push_back({idx[(ear + m2 - 1) % m2], idx[ear], idx[(ear + 1) % m2]});
        idx.erase(idx.begin() + ear);
    }
    if (signed_area(poly[idx[0]], poly[idx[1]], poly[idx[2]]) <= area_eps) return std::nullopt;
    tris.push_back({idx[0], idx[1], idx[2]});
    return tris;
}

/// Lawson edge flips toward the local Delaunay triangulation of a cavity.
/// Operates on triangle triples indexing into poly; flips only diagonals
/// (edges shared by two cavity triangles).
inline void delaunay_flips(const std::vector<Vec2>& poly, std::vector<std::array<int, 3>>& tris) {
    const int n = static_cast<int>(tris.size());
    if (n < 2) return;
    double scale = 0.0;
    for (const Vec2& p : poly) scale = std::max(scale, std::max(std::abs(p.x), std::abs(p.y)));
    const double circ_eps = 1e-12 * scale * scale * scale * scale;

    int budget = 16 * n * n + 64;
    bool flipped = true;
    while (flipped && budget-- > 0) {
        flipped = false;
        for (size_t t1 = 0; t1 < tris.size() && !flipped; ++t1) {
            for (size_t t2 = t1 + 1; t2 < tris.size() && !flipped; ++t2) {
                // find shared edge
                int shared[2], s = 0;
                for (int v1 : tris[t1])
                    for (int v2 : tris[t2])
                        if (v1 == v2 && s < 2) shared[s++] = v1;
                if (s != 2) continue;
                int apex1 = -1, apex2 = -1;
                for (int v : tris[t1])
                    if (v != shared[0] && v != shared[1]) apex1 = v;
                for (int v : tris[t2])
                    if (v != shared[0] && v != shared[1]) apex2 = v;
                if (in_circumcircle(poly[tris[t1][0]], poly[tris[t1][1]], poly[tris[t1][2]],
                                    poly[apex2]) <= circ_eps)
                    continue;
                // flip to diagonal apex1-apex2 when the quad is strictly convex
                const std::array<int, 3> na = {apex1, shared[0], apex2};
                const std::array<int, 3> nb = {apex2, shared[1], apex1};
                auto area_of = [&](const std::array<int, 3>& tr) {
                    return signed_area(poly[tr[0]], poly[tr[1]], poly[tr[2]]);
                };
                std::array<int, 3> ca = na, cb = nb;
                if (area_of(ca) < 0.0) std::swap(ca[1], ca[2]);
                if (area_of(cb) < 0.0) std::swap(cb[1], cb[2]);
                if (area_of(ca) <= 0.0 || area_of(cb) <= 0.0) continue;
                tris[t1] = ca;
                tris[t2] = cb;
                flipped = true;
            }
        }
    }
}

}  // namespace detail

/// Removes interior vertex v and retriangulates its star polygon (ear clipping
/// followed by Delaunay flips). Returns nullopt when the cavity cannot be
/// filled with positive-area triangles, i.e. the mesh would break.
/// Removing a boundary vertex is a contract violation and throws.
inline std::optional<TriMesh> remove_vertex(const TriMesh& mesh, int v) {
    if (v < 0 || v >= mesh.n_vertices()) throw std::invalid_argument("remove_vertex: bad index");
    if (mesh.is_boundary_vertex(v))
        throw std::invalid_argument("remove_vertex: vertex " + std::to_string(v) + " is " +
                                    to_string(mesh.vertex_tag(v)) + ", not removable");

    const auto& star = mesh.vertex_triangles(v);

    // Chain the edges opposite v into the CCW link polygon.
    std::map<int, int> next;  // directed edge a->b along the link
    for (int t : star) {
        const auto& tri = mesh.triangle(t);
        int i = 0;
        while (tri[i] != v) ++i;
        next[tri[(i + 1) % 3]] = tri[(i + 2) % 3];
    }
    std::vector<int> ring;
    ring.reserve(next.size());
    int start = next.begin()->first, cur = start;
    do {
        ring.push_back(cur);
        auto it = next.find(cur);
        if (it == next.end()) return std::nullopt;  // link is not a single cycle
        cur = it->second;
    } while (cur != start && ring.size() <= next.size());
    if (cur != start || ring.size() != next.size()) return std::nullopt;

    std::vector<Vec2> poly(ring.size());
    for (size_t i = 0; i < ring.size(); ++i) poly[i] = mesh.vertex(ring[i]);

    auto cavity = detail::ear_clip(poly, mesh.area_epsilon());
    if (!cavity) return std::nullopt;
    detail::delaunay_flips(poly, *cavity);
    for (const auto& tr : *cavity) {
        if (signed_area(poly[tr[0]], poly[tr[1]], poly[tr[2]]) <= mesh.area_epsilon())
            return std::nullopt;
    }

    // Splice: drop v and its star, remap indices above v down by one.
    auto remap = [v](int u) { return u > v ? u - 1 : u; };
    std::vector<Vec2> verts;
    verts.reserve(mesh.n_vertices() - 1);
    for (int u = 0; u < mesh.n_vertices(); ++u)
        if (u != v) verts.push_back(mesh.vertex(u));

    std::vector<std::array<int, 3>> tris;
    tris.reserve(mesh.n_triangles() - 2);
    std::vector<char> dead(mesh.n_triangles(), 0);
    for (int t : star) dead[t] = 1;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        if (dead[t]) continue;
        const auto& tr = mesh.triangle(t);
        tris.push_back({remap(tr[0]), remap(tr[1]), remap(tr[2])});
    }
    for (const auto& tr : *cavity)
        tris.push_back({remap(ring[tr[0]]), remap(ring[tr[1]]), remap(ring[tr[2]])});

    std::vector<BoundaryFacet> facets = mesh.facets();
    for (auto& f : facets) {
        f.a = remap(f.a);
        f.b = remap(f.b);
    }

    try {
        return TriMesh::build(std::move(verts), std::move(tris), std::move(facets));
    } catch (const MeshError&) {
        return std::nullopt;
    }
}

/// Jacobi local-averaging smoothing: every interior vertex moves to the mean
/// of its 1-ring neighbors, all vertices updated simultaneously, `iterations`
/// times. Boundary vertices are never touched. Returns nullopt when the result
/// contains a degenerate or inverted triangle.
inline std::optional<TriMesh> smooth(const TriMesh& mesh, int iterations) {
    std::vector<Vec2> pos = mesh.vertices();
    std::vector<Vec2> nxt = pos;
    for (int it = 0; it < iterations; ++it) {
        for (int v = 0; v < mesh.n_vertices(); ++v) {
            if (mesh.is_boundary_vertex(v)) continue;
            const auto& nbrs = mesh.vertex_neighbors(v);
            Vec2 acc{0, 0};
            for (int u : nbrs) acc = acc + pos[u];
            nxt[v] = acc / static_cast<double>(nbrs.size());
        }
        std::swap(pos, nxt);
    }
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tr = mesh.triangle(t);
        if (signed_area(pos[tr[0]], pos[tr[1]], pos[tr[2]]) <= mesh.area_epsilon())
            return std::nullopt;
    }
    try {
        return TriMesh::build(std::move(pos), mesh.triangles(), mesh.facets());
    } catch (const MeshError&) {
        return std::nullopt;
    }
}

/// Structured crossed-triangle rectangle mesh: an (nx x ny) grid of nodes plus
/// one center node per cell, every cell split into four triangles. Tags:
/// Inlet at x=0, Outlet at x=length, Wall at y=0 and y=height.
/// nx, ny count grid nodes per side, so vertices = nx*ny + (nx-1)*(ny-1).
inline TriMesh gen_channel_mesh(int nx, int ny, double length, double height) {
    if (nx < 2 || ny < 2) throw std::invalid_argument("gen_channel_mesh: nx, ny must be >= 2");
    const int cx = nx - 1, cy = ny - 1;
    std::vector<Vec2> verts;
    verts.reserve(static_cast<size_t>(nx) * ny + static_cast<size_t>(cx) * cy);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            verts.push_back({length * i / cx, height * j / cy});
    auto grid = [nx](int i, int j) { return j * nx + i; };
    const int center0 = nx * ny;
    auto center = [&](int i, int j) { return center0 + j * cx + i; };
    for (int j = 0; j < cy; ++j)
        for (int i = 0; i < cx; ++i)
            verts.push_back({length * (i + 0.5) / cx, height * (j + 0.5) / cy});

    std::vector<std::array<int, 3>> tris;
    tris.reserve(static_cast<size_t>(4) * cx * cy);
    for (int j = 0; j < cy; ++j)
        for (int i = 0; i < cx; ++i) {
            const int bl = grid(i, j), br = grid(i + 1, j);
            const int tr = grid(i + 1, j + 1), tl = grid(i, j + 1);
            const int c = center(i, j);
            tris.push_back({bl, br, c});
            tris.push_back({br, tr, c});
            tris.push_back({tr, tl, c});
            tris.push_back({tl, bl, c});
        }

    std::vector<BoundaryFacet> facets;
    for (int i = 0; i < cx; ++i) {
        facets.push_back({grid(i, 0), grid(i + 1, 0), BoundaryTag::Wall});
        facets.push_back({grid(i, cy), grid(i + 1, cy), BoundaryTag::Wall});
    }
    for (int j = 0; j < cy; ++j) {
        facets.push_back({grid(0, j), grid(0, j + 1), BoundaryTag::Inlet});
        facets.push_back({grid(nx - 1, j), grid(nx - 1, j + 1), BoundaryTag::Outlet});
    }
    return TriMesh::build(std::move(verts), std::move(tris), std::move(facets));
}

/// Channel mesh with a rectangular block of cells carved out and the resulting
/// interior boundary tagged Airfoil. The hole is the set of cells whose center
/// falls inside the axis-aligned box hole_center +- hole_half; it must stay
/// clear of the outer boundary.
inline TriMesh gen_channel_with_obstacle(int nx, int ny, double length, double height,
                                         Vec2 hole_center, Vec2 hole_half) {
    if (nx < 4 || ny < 4)
        throw std::invalid_argument("gen_channel_with_obstacle: nx, ny must be >= 4");
    const int cx = nx - 1, cy = ny - 1;
    auto cell_center = [&](int i, int j) {
        return Vec2{length * (i + 0.5) / cx, height * (j + 0.5) / cy};
    };
    std::vector<char> hole(static_cast<size_t>(cx) * cy, 0);
    int n_hole = 0;
    for (int j = 0; j < cy; ++j)
        for (int i = 0; i < cx; ++i) {
            const Vec2 c = cell_center(i, j);
            if (std::abs(c.x - hole_center.x) <= hole_half.x &&
                std::abs(c.y - hole_center.y) <= hole_half.y) {
                if (i == 0 || j == 0 || i == cx - 1 || j == cy - 1)
                    throw std::invalid_argument("obstacle touches the outer boundary");
                hole[j * cx + i] = 1;
                ++n_hole;
            }
        }
    if (n_hole == 0) throw std::invalid_argument("obstacle contains no cells");

    TriMesh full = gen_channel_mesh(nx, ny, length, height);
    std::vector<std::array<int, 3>> kept;
    for (int j = 0; j < cy; ++j)
        for (int i = 0; i < cx; ++i) {
            if (hole[j * cx + i]) continue;
            for (int k = 0; k < 4; ++k) kept.push_back(full.triangle(4 * (j * cx + i) + k));
        }

    // Drop vertices no longer referenced (hole centers and interior grid nodes).
    std::vector<int> new_id(full.n_vertices(), -1);
    std::vector<Vec2> verts;
    for (const auto& tr : kept)
        for (int v : tr)
            if (new_id[v] < 0) {
                new_id[v] = static_cast<int>(verts.size());
                verts.push_back(full.vertex(v));
            }
    for (auto& tr : kept)
        for (int& v : tr) v = new_id[v];

    std::vector<BoundaryFacet> facets;
    for (const auto& f : full.facets())
        facets.push_back({new_id[f.a], new_id[f.b], f.tag});

    // Newly exposed edges (single incidence, not already outer boundary).
    std::map<std::pair<int, int>, int> incidence;
    for (const auto& tr : kept)
        for (int k = 0; k < 3; ++k) {
            int a = tr[k], b = tr[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            incidence[{a, b}]++;
        }
    std::map<std::pair<int, int>, char> outer;
    for (const auto& f : facets) {
        int a = f.a, b = f.b;
        if (a > b) std::swap(a, b);
        outer[{a, b}] = 1;
    }
    for (const auto& [e, c] : incidence)
        if (c == 1 && !outer.count(e))
            facets.push_back({e.first, e.second, BoundaryTag::Airfoil});

    return TriMesh::build(std::move(verts), std::move(kept), std::move(facets));
}

}  // namespace meshdqn
