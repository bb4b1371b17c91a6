#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "meshdqn/fields.hpp"
#include "meshdqn/mesh.hpp"

namespace meshdqn {

struct FluidConstants {
    double density = 1.0;
    double viscosity = 0.001;

    void validate() const {
        if (!(density > 0.0) || !(viscosity > 0.0))
            throw std::invalid_argument("fluid constants must be positive");
    }
};

enum class PropertyKind { Drag, Lift };

struct PropertyVector {
    PropertyKind kind = PropertyKind::Drag;
    std::vector<double> values;
};

/// Row-major 2x2 matrix [xx, xy, yx, yy].
using Mat2 = std::array<double, 4>;

/// Cauchy stress for incompressible flow: -p I + mu (grad u + grad u^T).
inline Mat2 stress_tensor(const Mat2& grad_u, double p, const FluidConstants& fluid) {
    const double mu = fluid.viscosity;
    return {-p + 2.0 * mu * grad_u[0], mu * (grad_u[1] + grad_u[2]),
            mu * (grad_u[2] + grad_u[1]), -p + 2.0 * mu * grad_u[3]};
}

namespace detail {

/// The single triangle containing boundary edge (a, b).
inline int facet_triangle(const TriMesh& m, int a, int b) {
    for (int t : m.vertex_triangles(a)) {
        const auto& tr = m.triangle(t);
        bool has_b = false;
        for (int v : tr) has_b = has_b || v == b;
        if (has_b) return t;
    }
    return -1;
}

}  // namespace detail

/// Integrate (sigma . n) . direction over all facets carrying `tag`, per
/// snapshot. n points away from the fluid (outward through the facet, into
/// the body); direction e_x gives drag, e_y lift. Midpoint quadrature for
/// order-1 velocity, two-point Gauss for order 2.
inline PropertyVector compute_property(const SnapshotSet& snaps, const TriMesh& mesh,
                                       BoundaryTag tag, Vec2 direction,
                                       const FluidConstants& fluid) {
    fluid.validate();
    if (std::abs(direction.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("direction must be a unit vector");
    if (&mesh != &snaps.mesh() && !(mesh == snaps.mesh()))
        throw std::invalid_argument("mesh does not match the snapshot set");

    PropertyVector out;
    out.kind = std::abs(direction.x) >= std::abs(direction.y) ? PropertyKind::Drag
                                                              : PropertyKind::Lift;
    out.values.assign(snaps.n_snapshots(), 0.0);

    struct QPoint {
        int tri;
        std::array<double, 3> bary;
        double weight;  // includes facet length
        Vec2 normal;
    };
    std::vector<QPoint> qpoints;
    const bool two_point = snaps.velocity_order() == 2;
    const double off = 1.0 / (2.0 * std::sqrt(3.0));

    for (const BoundaryFacet& f : mesh.facets()) {
        if (f.tag != tag) continue;
        const int t = detail::facet_triangle(mesh, f.a, f.b);
        if (t < 0) throw std::runtime_error("boundary facet has no adjacent triangle");
        const Vec2 pa = mesh.vertex(f.a), pb = mesh.vertex(f.b);
        const double len = distance(pa, pb);
        const Vec2 tangent = (pb - pa) / len;
        Vec2 n{tangent.y, -tangent.x};
        const Vec2 mid = (pa + pb) / 2.0;
        if (n.dot(mid - mesh.triangle_centroid(t)) < 0.0) n = n * -1.0;

        const auto& tr = mesh.triangle(t);
        const Vec2 v0 = mesh.vertex(tr[0]), v1 = mesh.vertex(tr[1]), v2 = mesh.vertex(tr[2]);
        auto push = [&](double s, double w) {
            const Vec2 x = pa + (pb - pa) * s;
            qpoints.push_back({t, barycentric(v0, v1, v2, x), w * len, n});
        };
        if (two_point) {
            push(0.5 - off, 0.5);
            push(0.5 + off, 0.5);
        } else {
            push(0.5, 1.0);
        }
    }

    for (int s = 0; s < snaps.n_snapshots(); ++s) {
        double acc = 0.0;
        for (const QPoint& q : qpoints) {
            const Mat2 grad = velocity_gradient(snaps, s, q.tri, q.bary);
            const double p = pressure_at(snaps, s, q.tri, q.bary);
            const Mat2 sig = stress_tensor(grad, p, fluid);
            const Vec2 traction{sig[0] * q.normal.x + sig[1] * q.normal.y,
                                sig[2] * q.normal.x + sig[3] * q.normal.y};
            acc += traction.dot(direction) * q.weight;
        }
        out.values[s] = acc;
    }
    return out;
}

inline PropertyVector compute_drag(const SnapshotSet& snaps, BoundaryTag tag,
                                   const FluidConstants& fluid) {
    return compute_property(snaps, snaps.mesh(), tag, {1.0, 0.0}, fluid);
}

inline PropertyVector compute_lift(const SnapshotSet& snaps, BoundaryTag tag,
                                   const FluidConstants& fluid) {
    return compute_property(snaps, snaps.mesh(), tag, {0.0, 1.0}, fluid);
}

enum class AnalyticKind { Uniform, Poiseuille, LinearShear, ShearPressure };

struct AnalyticParams {
    double u_max = 1.0;      // peak (poiseuille) or x-velocity (uniform)
    double height = 1.0;     // channel height, poiseuille
    double length = 1.0;     // channel length, sets the pressure drop extent
    double p0 = 0.0;         // pressure at x = 0
    double shear_rate = 1.0; // du_x/dy, linear-shear
    int n_snapshots = 1;
    int velocity_order = 2;
    FluidConstants fluid;
};

/// Fill snapshot DOFs from a closed-form field; steady flow, so all
/// snapshots are identical.
inline SnapshotSet analytic_snapshots(AnalyticKind kind, std::shared_ptr<const TriMesh> mesh,
                                      const AnalyticParams& params) {
    params.fluid.validate();
    if (params.n_snapshots < 1) throw std::invalid_argument("need at least one snapshot");

    auto field = [&](Vec2 pt) -> std::array<double, 3> {
        switch (kind) {
            case AnalyticKind::Uniform:
                return {params.u_max, 0.0, params.p0};
            case AnalyticKind::Poiseuille: {
                const double H = params.height;
                const double ux = 4.0 * params.u_max * pt.y * (H - pt.y) / (H * H);
                const double dpdx = -8.0 * params.fluid.viscosity * params.u_max / (H * H);
                return {ux, 0.0, params.p0 + dpdx * pt.x};
            }
            case AnalyticKind::LinearShear:
                return {params.shear_rate * pt.y, 0.0, params.p0};
            case AnalyticKind::ShearPressure: {
                // parabolic shear with a unit pressure gradient; the stress
                // divergence does not cancel, so closed bodies feel an O(1)
                // net force (unlike any Stokes-consistent channel field)
                const double H = params.height;
                const double ux = 4.0 * params.u_max * pt.y * (H - pt.y) / (H * H);
                return {ux, 0.0, params.p0 + pt.x};
            }
        }
        throw std::invalid_argument("unknown analytic field kind");
    };

    const TriMesh& m = *mesh;
    const int nv = params.velocity_order == 1 ? m.n_vertices() : m.n_vertices() + m.n_edges();
    FlowSnapshot snap;
    snap.vx.resize(nv);
    snap.vy.resize(nv);
    snap.p.resize(m.n_vertices());
    for (int d = 0; d < nv; ++d) {
        Vec2 pt;
        if (d < m.n_vertices()) {
            pt = m.vertex(d);
        } else {
            const auto [a, b] = m.edge(d - m.n_vertices());
            pt = (m.vertex(a) + m.vertex(b)) / 2.0;
        }
        const auto f = field(pt);
        snap.vx[d] = f[0];
        snap.vy[d] = f[1];
        if (d < m.n_vertices()) snap.p[d] = f[2];
    }
    std::vector<FlowSnapshot> snaps(params.n_snapshots, snap);
    return SnapshotSet::build(std::move(mesh), params.velocity_order, std::move(snaps));
}

}  // namespace meshdqn
