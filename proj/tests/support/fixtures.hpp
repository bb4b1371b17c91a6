#pragma once

// Shared mesh fixtures and small geometric oracles used across the suites.

#include <cmath>
#include <random>
#include <vector>

#include "meshdqn/mesh.hpp"

namespace fixtures {

using meshdqn::BoundaryFacet;
using meshdqn::BoundaryTag;
using meshdqn::TriMesh;
using meshdqn::Vec2;

/// Square annulus: three concentric square rings of 8 points each at
/// half-sizes r, 2r, 3r around `center`. Inner ring tagged Airfoil, outer
/// Wall; the middle ring is interior. 24 vertices, 32 triangles.
inline TriMesh square_ring_mesh(Vec2 center = {0, 0}, double r = 1.0) {
    auto ring = [&](double s) {
        return std::vector<Vec2>{{center.x + s, center.y},     {center.x + s, center.y + s},
                                 {center.x, center.y + s},     {center.x - s, center.y + s},
                                 {center.x - s, center.y},     {center.x - s, center.y - s},
                                 {center.x, center.y - s},     {center.x + s, center.y - s}};
    };
    std::vector<Vec2> verts;
    for (double s : {r, 2 * r, 3 * r})
        for (const Vec2& p : ring(s)) verts.push_back(p);

    std::vector<std::array<int, 3>> tris;
    for (int layer = 0; layer < 2; ++layer) {
        const int a0 = 8 * layer, b0 = 8 * (layer + 1);
        for (int i = 0; i < 8; ++i) {
            const int j = (i + 1) % 8;
            tris.push_back({a0 + i, a0 + j, b0 + i});
            tris.push_back({a0 + j, b0 + j, b0 + i});
        }
    }
    std::vector<BoundaryFacet> facets;
    for (int i = 0; i < 8; ++i) {
        const int j = (i + 1) % 8;
        facets.push_back({i, j, BoundaryTag::Airfoil});
        facets.push_back({16 + i, 16 + j, BoundaryTag::Wall});
    }
    return TriMesh::build(std::move(verts), std::move(tris), std::move(facets));
}

/// Fan around one interior vertex inside a simple polygon (all polygon
/// vertices boundary, tagged Wall). The interior vertex is index 0.
inline TriMesh fan_mesh(const std::vector<Vec2>& polygon, Vec2 interior) {
    std::vector<Vec2> verts{interior};
    verts.insert(verts.end(), polygon.begin(), polygon.end());
    const int n = static_cast<int>(polygon.size());
    std::vector<std::array<int, 3>> tris;
    std::vector<BoundaryFacet> facets;
    for (int i = 0; i < n; ++i) {
        const int j = (i + 1) % n;
        tris.push_back({0, 1 + i, 1 + j});
        facets.push_back({1 + i, 1 + j, BoundaryTag::Wall});
    }
    return TriMesh::build(std::move(verts), std::move(tris), std::move(facets));
}

/// Dart-shaped domain whose interior vertex has a neighbor centroid outside
/// the domain: one smoothing pass inverts a triangle.
inline TriMesh smoothing_breaker_mesh() {
    return fan_mesh({{0, 0}, {2, 0}, {2, 2}, {1, 0.2}, {0, 2}}, {1, 0.1});
}

/// Pentagon with a reflex vertex; removing vertex 0 leaves a non-convex cavity.
inline TriMesh nonconvex_cavity_mesh() {
    return fan_mesh({{0, 0}, {2, 0}, {2, 2}, {1, 0.8}, {0, 2}}, {1, 0.4});
}

inline double shoelace_area(const std::vector<Vec2>& poly) {
    double a = 0.0;
    const int n = static_cast<int>(poly.size());
    for (int i = 0; i < n; ++i) a += poly[i].cross(poly[(i + 1) % n]);
    return 0.5 * a;
}

inline bool point_in_polygon(const std::vector<Vec2>& poly, Vec2 p) {
    bool in = false;
    const int n = static_cast<int>(poly.size());
    for (int i = 0, j = n - 1; i < n; j = i++) {
        if ((poly[i].y > p.y) != (poly[j].y > p.y) &&
            p.x < (poly[j].x - poly[i].x) * (p.y - poly[i].y) / (poly[j].y - poly[i].y) +
                      poly[i].x)
            in = !in;
    }
    return in;
}

/// Proper (interior) intersection of open segments ab and cd.
inline bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const double d1 = meshdqn::cross2(c, d, a);
    const double d2 = meshdqn::cross2(c, d, b);
    const double d3 = meshdqn::cross2(a, b, c);
    const double d4 = meshdqn::cross2(a, b, d);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
           ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

}  // namespace fixtures
