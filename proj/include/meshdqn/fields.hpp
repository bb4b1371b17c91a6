#pragma once

#include <array>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <vector>

#include "meshdqn/log.hpp"
#include "meshdqn/mesh.hpp"

namespace meshdqn {

/// One flow snapshot: velocity DOFs (vertex values, plus edge-midpoint values
/// for order 2) and one pressure value per vertex.
struct FlowSnapshot {
    std::vector<double> vx;
    std::vector<double> vy;
    std::vector<double> p;
};

class SnapshotSet {
  public:
    static SnapshotSet build(std::shared_ptr<const TriMesh> mesh, int velocity_order,
                             std::vector<FlowSnapshot> snapshots) {
        if (!mesh) throw std::invalid_argument("SnapshotSet: null mesh");
        if (velocity_order != 1 && velocity_order != 2)
            throw std::invalid_argument("SnapshotSet: velocity order must be 1 or 2");
        if (snapshots.empty()) throw std::invalid_argument("SnapshotSet: need at least one snapshot");
        const size_t nv = velocity_order == 1
                              ? static_cast<size_t>(mesh->n_vertices())
                              : static_cast<size_t>(mesh->n_vertices() + mesh->n_edges());
        const size_t np = static_cast<size_t>(mesh->n_vertices());
        for (const FlowSnapshot& s : snapshots) {
            if (s.vx.size() != nv || s.vy.size() != nv) {
                std::ostringstream msg;
                msg << "SnapshotSet: velocity DOF count " << s.vx.size() << "/" << s.vy.size()
                    << " does not match mesh (" << nv << " expected)";
                throw std::invalid_argument(msg.str());
            }
            if (s.p.size() != np)
                throw std::invalid_argument("SnapshotSet: pressure DOF count mismatch");
        }
        SnapshotSet out;
        out.mesh_ = std::move(mesh);
        out.velocity_order_ = velocity_order;
        out.snapshots_ = std::move(snapshots);
        return out;
    }

    const TriMesh& mesh() const { return *mesh_; }
    const std::shared_ptr<const TriMesh>& mesh_ptr() const { return mesh_; }
    int velocity_order() const { return velocity_order_; }
    int n_snapshots() const { return static_cast<int>(snapshots_.size()); }
    const FlowSnapshot& snapshot(int i) const { return snapshots_.at(i); }
    const std::vector<FlowSnapshot>& snapshots() const { return snapshots_; }

    int n_velocity_dofs() const {
        return velocity_order_ == 1 ? mesh_->n_vertices() : mesh_->n_vertices() + mesh_->n_edges();
    }
    int n_pressure_dofs() const { return mesh_->n_vertices(); }

    /// Coordinate of velocity DOF d: vertex, or edge midpoint for d >= V.
    Vec2 velocity_dof_point(int d) const {
        if (d < mesh_->n_vertices()) return mesh_->vertex(d);
        const auto [a, b] = mesh_->edge(d - mesh_->n_vertices());
        return (mesh_->vertex(a) + mesh_->vertex(b)) / 2.0;
    }

  private:
    std::shared_ptr<const TriMesh> mesh_;
    int velocity_order_ = 1;
    std::vector<FlowSnapshot> snapshots_;
};

struct PointLocation {
    int tri = -1;
    std::array<double, 3> bary{};
};

inline double loc_epsilon(const TriMesh& mesh) { return 1e-9 * mesh.bbox().diagonal(); }

namespace detail {

/// Signed edge distances scaled by edge length; fills barycentrics when inside.
inline bool tri_contains(const TriMesh& m, int t, Vec2 p, double eps, std::array<double, 3>& bary,
                         int* worst_edge = nullptr) {
    const auto& tri = m.triangle(t);
    const Vec2 a = m.vertex(tri[0]), b = m.vertex(tri[1]), c = m.vertex(tri[2]);
    const double s0 = (b - a).cross(p - a);
    const double s1 = (c - b).cross(p - b);
    const double s2 = (a - c).cross(p - c);
    const double l0 = distance(a, b), l1 = distance(b, c), l2 = distance(c, a);
    bool inside = true;
    double worst = 0.0;
    int wk = 0;
    const double s[3] = {s0, s1, s2};
    const double l[3] = {l0, l1, l2};
    for (int k = 0; k < 3; ++k) {
        const double d = s[k] / std::max(l[k], 1e-300);
        if (s[k] < -eps * l[k]) inside = false;
        if (d < worst) {
            worst = d;
            wk = k;
        }
    }
    if (worst_edge) *worst_edge = wk;
    if (!inside) return false;
    const double sum = s0 + s1 + s2;
    if (sum <= 0.0) return false;
    double b0 = std::max(s1 / sum, 0.0);
    double b1 = std::max(s2 / sum, 0.0);
    double b2 = std::max(s0 / sum, 0.0);
    const double n = b0 + b1 + b2;
    bary = {b0 / n, b1 / n, b2 / n};
    return true;
}

inline std::optional<PointLocation> locate_brute(const TriMesh& m, Vec2 p, double eps) {
    std::array<double, 3> bary;
    for (int t = 0; t < m.n_triangles(); ++t)
        if (tri_contains(m, t, p, eps, bary)) return PointLocation{t, bary};
    return std::nullopt;
}

/// Among triangles touching t (shared vertex), return the lowest-index one
/// containing p; matches the exhaustive scan when the point sits on an edge.
inline PointLocation lowest_index_refine(const TriMesh& m, int t, Vec2 p, double eps,
                                         const std::array<double, 3>& bary) {
    bool near_edge = false;
    for (double b : bary)
        if (b < 1e-7) near_edge = true;
    if (!near_edge) return PointLocation{t, bary};
    int best = t;
    std::array<double, 3> best_bary = bary;
    for (int corner : m.triangle(t))
        for (int u : m.vertex_triangles(corner)) {
            if (u >= best) continue;
            std::array<double, 3> ub;
            if (tri_contains(m, u, p, eps, ub)) {
                best = u;
                best_bary = ub;
            }
        }
    return PointLocation{best, best_bary};
}

}  // namespace detail

/// Find the triangle containing p (walk from seed, exhaustive fallback).
/// Points within loc_epsilon of an edge resolve to the lowest triangle index.
/// Points marginally outside the boundary are snapped to the nearest facet.
inline std::optional<PointLocation> locate(const TriMesh& mesh, Vec2 p, int seed_tri = 0) {
    if (mesh.n_triangles() == 0) return std::nullopt;
    const double eps = loc_epsilon(mesh);
    int t = (seed_tri >= 0 && seed_tri < mesh.n_triangles()) ? seed_tri : 0;
    std::array<double, 3> bary;
    const int budget = 2 * mesh.n_triangles() + 8;
    for (int step = 0; step < budget; ++step) {
        int worst = 0;
        if (detail::tri_contains(mesh, t, p, eps, bary, &worst))
            return detail::lowest_index_refine(mesh, t, p, eps, bary);
        const int nbr = mesh.triangle_neighbor(t, worst);
        if (nbr < 0) break;
        t = nbr;
    }
    if (auto hit = detail::locate_brute(mesh, p, eps)) return hit;

    // Nearest-facet snap for points pushed just outside by rounding.
    double best_d = std::numeric_limits<double>::infinity();
    Vec2 best_q{};
    for (const BoundaryFacet& f : mesh.facets()) {
        const Vec2 q = closest_point_on_segment(p, mesh.vertex(f.a), mesh.vertex(f.b));
        const double d = distance(p, q);
        if (d < best_d) {
            best_d = d;
            best_q = q;
        }
    }
    if (best_d <= eps) {
        std::ostringstream msg;
        msg << "locate: snapped point (" << p.x << ", " << p.y << ") to boundary, distance "
            << best_d;
        log_debug(msg.str());
        return detail::locate_brute(mesh, best_q, eps);
    }
    return std::nullopt;
}

namespace detail {

/// Quadratic Lagrange values at barycentric l, ordered: 3 vertices then the
/// midpoints of local edges (0,1), (1,2), (2,0).
inline std::array<double, 6> p2_shape(const std::array<double, 3>& l) {
    return {l[0] * (2 * l[0] - 1), l[1] * (2 * l[1] - 1), l[2] * (2 * l[2] - 1),
            4 * l[0] * l[1],       4 * l[1] * l[2],       4 * l[2] * l[0]};
}

/// Constant gradients of the barycentric coordinates on triangle t.
inline std::array<Vec2, 3> bary_gradients(const TriMesh& m, int t) {
    const auto& tri = m.triangle(t);
    const Vec2 a = m.vertex(tri[0]), b = m.vertex(tri[1]), c = m.vertex(tri[2]);
    const double inv2A = 1.0 / (2.0 * m.triangle_area(t));
    auto perp = [](Vec2 u) { return Vec2{-u.y, u.x}; };
    return {perp(c - b) * inv2A, perp(a - c) * inv2A, perp(b - a) * inv2A};
}

/// Global DOF indices matching p2_shape's ordering.
inline std::array<int, 6> p2_dofs(const TriMesh& m, int t) {
    const auto& tri = m.triangle(t);
    const int V = m.n_vertices();
    return {tri[0], tri[1], tri[2],
            V + m.triangle_edge(t, 0), V + m.triangle_edge(t, 1), V + m.triangle_edge(t, 2)};
}

inline double eval_component(const TriMesh& m, const std::vector<double>& dofs, int order,
                             const PointLocation& loc) {
    const auto& tri = m.triangle(loc.tri);
    if (order == 1)
        return dofs[tri[0]] * loc.bary[0] + dofs[tri[1]] * loc.bary[1] + dofs[tri[2]] * loc.bary[2];
    const auto shape = p2_shape(loc.bary);
    const auto idx = p2_dofs(m, loc.tri);
    double v = 0.0;
    for (int k = 0; k < 6; ++k) v += dofs[idx[k]] * shape[k];
    return v;
}

/// Gradient of a scalar FE component at a barycentric point of triangle t.
inline Vec2 grad_component(const TriMesh& m, const std::vector<double>& dofs, int order, int t,
                           const std::array<double, 3>& l) {
    const auto g = bary_gradients(m, t);
    const auto& tri = m.triangle(t);
    if (order == 1)
        return g[0] * dofs[tri[0]] + g[1] * dofs[tri[1]] + g[2] * dofs[tri[2]];
    const auto idx = p2_dofs(m, t);
    Vec2 out{0, 0};
    for (int i = 0; i < 3; ++i) out = out + g[i] * ((4 * l[i] - 1) * dofs[idx[i]]);
    for (int k = 0; k < 3; ++k) {
        const int i = k, j = (k + 1) % 3;
        out = out + (g[i] * l[j] + g[j] * l[i]) * (4.0 * dofs[idx[3 + k]]);
    }
    return out;
}

}  // namespace detail

enum class FieldComponent { VelocityX, VelocityY, Pressure };

/// Evaluate one snapshot component at an arbitrary point; nullopt if outside.
inline std::optional<double> evaluate(const SnapshotSet& s, int snapshot, FieldComponent comp,
                                      Vec2 point) {
    const auto loc = locate(s.mesh(), point);
    if (!loc) return std::nullopt;
    const FlowSnapshot& snap = s.snapshot(snapshot);
    switch (comp) {
        case FieldComponent::VelocityX:
            return detail::eval_component(s.mesh(), snap.vx, s.velocity_order(), *loc);
        case FieldComponent::VelocityY:
            return detail::eval_component(s.mesh(), snap.vy, s.velocity_order(), *loc);
        case FieldComponent::Pressure:
            return detail::eval_component(s.mesh(), snap.p, 1, *loc);
    }
    return std::nullopt;
}

/// Velocity gradient [dux/dx, dux/dy, duy/dx, duy/dy] inside triangle t.
inline std::array<double, 4> velocity_gradient(const SnapshotSet& s, int snapshot, int tri,
                                               const std::array<double, 3>& bary) {
    const FlowSnapshot& snap = s.snapshot(snapshot);
    const Vec2 gx = detail::grad_component(s.mesh(), snap.vx, s.velocity_order(), tri, bary);
    const Vec2 gy = detail::grad_component(s.mesh(), snap.vy, s.velocity_order(), tri, bary);
    return {gx.x, gx.y, gy.x, gy.y};
}

inline double pressure_at(const SnapshotSet& s, int snapshot, int tri,
                          const std::array<double, 3>& bary) {
    PointLocation loc{tri, bary};
    return detail::eval_component(s.mesh(), s.snapshot(snapshot).p, 1, loc);
}

/// Re-express src's snapshots on dst_mesh by pointwise FE evaluation at every
/// dst DOF. nullopt when a DOF point falls outside the src mesh.
inline std::optional<SnapshotSet> interpolate(const SnapshotSet& src,
                                              std::shared_ptr<const TriMesh> dst_mesh) {
    if (!dst_mesh) throw std::invalid_argument("interpolate: null destination mesh");
    const TriMesh& dst = *dst_mesh;
    const TriMesh& sm = src.mesh();
    const int order = src.velocity_order();
    const int nv_dofs = order == 1 ? dst.n_vertices() : dst.n_vertices() + dst.n_edges();

    std::vector<PointLocation> vel_loc(nv_dofs);
    int seed = 0;
    for (int d = 0; d < nv_dofs; ++d) {
        Vec2 p;
        if (d < dst.n_vertices()) {
            p = dst.vertex(d);
        } else {
            const auto [a, b] = dst.edge(d - dst.n_vertices());
            p = (dst.vertex(a) + dst.vertex(b)) / 2.0;
        }
        const auto loc = locate(sm, p, seed);
        if (!loc) {
            std::ostringstream msg;
            msg << "interpolate: DOF point (" << p.x << ", " << p.y << ") outside source mesh";
            log_warn(msg.str());
            return std::nullopt;
        }
        vel_loc[d] = *loc;
        seed = loc->tri;
    }

    std::vector<FlowSnapshot> out(src.n_snapshots());
    for (int s = 0; s < src.n_snapshots(); ++s) {
        const FlowSnapshot& in = src.snapshot(s);
        FlowSnapshot& o = out[s];
        o.vx.resize(nv_dofs);
        o.vy.resize(nv_dofs);
        o.p.resize(dst.n_vertices());
        for (int d = 0; d < nv_dofs; ++d) {
            o.vx[d] = detail::eval_component(sm, in.vx, order, vel_loc[d]);
            o.vy[d] = detail::eval_component(sm, in.vy, order, vel_loc[d]);
        }
        for (int v = 0; v < dst.n_vertices(); ++v)
            o.p[v] = detail::eval_component(sm, in.p, 1, vel_loc[v]);
    }
    return SnapshotSet::build(std::move(dst_mesh), order, std::move(out));
}

}  // namespace meshdqn
