#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "meshdqn/mesh.hpp"
#include "support/fixtures.hpp"

using namespace meshdqn;

TEST_CASE("channel mesh vertex and triangle counts follow the crossed pattern") {
    // grid nodes nx*ny plus one center per cell
    const TriMesh m = gen_channel_mesh(2, 2, 1.0, 1.0);
    CHECK(m.n_vertices() == 5);
    CHECK(m.n_triangles() == 4);
    CHECK(m.n_facets() == 4);

    for (auto [nx, ny] : {std::pair{3, 3}, {5, 4}, {10, 10}}) {
        const TriMesh c = gen_channel_mesh(nx, ny, 3.0, 1.0);
        CHECK(c.n_vertices() == nx * ny + (nx - 1) * (ny - 1));
        CHECK(c.n_triangles() == 4 * (nx - 1) * (ny - 1));
        CHECK_NOTHROW(c.check_invariants());
        CHECK(c.adjacency_consistent());
    }

    CHECK_THROWS_AS(gen_channel_mesh(1, 5, 1, 1), std::invalid_argument);
}

TEST_CASE("channel mesh boundary tags sit on the right sides") {
    const TriMesh m = gen_channel_mesh(4, 3, 2.0, 1.0);
    for (const auto& f : m.facets()) {
        const Vec2 a = m.vertex(f.a), b = m.vertex(f.b);
        if (f.tag == BoundaryTag::Inlet) CHECK((a.x == 0.0 && b.x == 0.0));
        if (f.tag == BoundaryTag::Outlet) CHECK((a.x == 2.0 && b.x == 2.0));
        if (f.tag == BoundaryTag::Wall) CHECK(((a.y == 0 && b.y == 0) || (a.y == 1 && b.y == 1)));
    }
    // tags partition vertices: every facet endpoint is non-interior
    for (const auto& f : m.facets()) {
        CHECK(m.vertex_tag(f.a) != BoundaryTag::Interior);
        CHECK(m.vertex_tag(f.b) != BoundaryTag::Interior);
    }
}

TEST_CASE("removing an interior vertex drops V by 1, E by 3, F by 2") {
    const TriMesh m = gen_channel_mesh(5, 5, 1.0, 1.0);
    for (int v : m.interior_vertices()) {
        auto r = remove_vertex(m, v);
        REQUIRE(r.has_value());
        CHECK(r->n_vertices() == m.n_vertices() - 1);
        CHECK(r->n_edges() == m.n_edges() - 3);
        CHECK(r->n_triangles() == m.n_triangles() - 2);
        CHECK(r->euler_characteristic() == m.euler_characteristic());
        CHECK_NOTHROW(r->check_invariants());
    }
}

TEST_CASE("valence-k cavity is filled with k-2 triangles") {
    const TriMesh m = gen_channel_mesh(4, 4, 1.0, 1.0);
    // a grid-interior vertex of the crossed pattern has valence 8
    int v8 = -1;
    for (int v : m.interior_vertices())
        if (m.vertex_neighbors(v).size() == 8) v8 = v;
    REQUIRE(v8 >= 0);
    auto r = remove_vertex(m, v8);
    REQUIRE(r.has_value());
    CHECK(r->n_triangles() == m.n_triangles() - 2);  // 8 gone, 6 added
}

TEST_CASE("boundary vertices are not removable") {
    const TriMesh ring = fixtures::square_ring_mesh();
    for (int v = 0; v < ring.n_vertices(); ++v)
        if (ring.is_boundary_vertex(v)) CHECK_THROWS_AS(remove_vertex(ring, v), std::invalid_argument);
    CHECK_THROWS_AS(remove_vertex(ring, -1), std::invalid_argument);
    CHECK_THROWS_AS(remove_vertex(ring, ring.n_vertices()), std::invalid_argument);
}

TEST_CASE("exhaustive removal sweep preserves all invariants on three fixtures") {
    const TriMesh fixtures_[] = {
        gen_channel_mesh(6, 5, 3.0, 1.0),
        gen_channel_with_obstacle(9, 7, 3.0, 1.0, {1.5, 0.5}, {0.4, 0.2}),
        fixtures::square_ring_mesh(),
    };
    for (const TriMesh& m : fixtures_) {
        REQUIRE(!m.interior_vertices().empty());
        for (int v : m.interior_vertices()) {
            auto r = remove_vertex(m, v);
            REQUIRE(r.has_value());
            CHECK_NOTHROW(r->check_invariants());
            CHECK(r->adjacency_consistent());
            CHECK(r->n_vertices() == m.n_vertices() - 1);
            CHECK(r->n_edges() == m.n_edges() - 3);
            CHECK(r->n_triangles() == m.n_triangles() - 2);
            CHECK(r->euler_characteristic() == m.euler_characteristic());
        }
    }
}

TEST_CASE("non-convex cavity is retriangulated validly") {
    const TriMesh m = fixtures::nonconvex_cavity_mesh();
    REQUIRE(m.vertex_tag(0) == BoundaryTag::Interior);
    auto r = remove_vertex(m, 0);
    REQUIRE(r.has_value());
    CHECK_NOTHROW(r->check_invariants());

    // Brute-force oracle on the instance: the new triangles must tile the
    // cavity polygon exactly, with every diagonal interior to it.
    const std::vector<Vec2> poly = {{0, 0}, {2, 0}, {2, 2}, {1, 0.8}, {0, 2}};
    CHECK(r->n_triangles() == 3);
    double area = 0.0;
    for (int t = 0; t < r->n_triangles(); ++t) {
        area += r->triangle_area(t);
        CHECK(r->triangle_area(t) > 0.0);
    }
    CHECK_THAT(area, Catch::Matchers::WithinAbs(fixtures::shoelace_area(poly), 1e-12));
    const int n = static_cast<int>(poly.size());
    for (int t = 0; t < r->n_triangles(); ++t) {
        const auto& tr = r->triangle(t);
        for (int k = 0; k < 3; ++k) {
            const int a = tr[k], b = tr[(k + 1) % 3];
            const bool is_poly_edge = (std::abs(a - b) == 1 || std::abs(a - b) == n - 1);
            if (is_poly_edge) continue;
            // diagonal: midpoint inside, crosses no polygon edge
            const Vec2 mid = (r->vertex(a) + r->vertex(b)) / 2.0;
            CHECK(fixtures::point_in_polygon(poly, mid));
            for (int i = 0; i < n; ++i)
                CHECK(!fixtures::segments_cross(r->vertex(a), r->vertex(b), poly[i],
                                                poly[(i + 1) % n]));
        }
    }
}

TEST_CASE("smoothing keeps a centered star fixed and is idempotent there") {
    std::vector<Vec2> hex;
    for (int i = 0; i < 6; ++i) {
        const double a = M_PI * i / 3.0;
        hex.push_back({std::cos(a), std::sin(a)});
    }
    Vec2 centroid{0, 0};
    for (const Vec2& p : hex) centroid = centroid + p;
    centroid = centroid / 6.0;  // exact fixed point by construction

    const TriMesh star = fixtures::fan_mesh(hex, centroid);
    auto s = smooth(star, 50);
    REQUIRE(s.has_value());
    CHECK(s->vertex(0) == star.vertex(0));
    auto s2 = smooth(*s, 7);
    REQUIRE(s2.has_value());
    CHECK(*s2 == *s);
}

TEST_CASE("a displaced single interior vertex lands on the neighbor centroid") {
    std::vector<Vec2> hex;
    for (int i = 0; i < 6; ++i) {
        const double a = M_PI * i / 3.0;
        hex.push_back({std::cos(a), std::sin(a)});
    }
    const TriMesh star = fixtures::fan_mesh(hex, {0.31, -0.12});
    auto s = smooth(star, 50);
    REQUIRE(s.has_value());
    Vec2 centroid{0, 0};
    for (const Vec2& p : hex) centroid = centroid + p;
    centroid = centroid / 6.0;
    CHECK_THAT(distance(s->vertex(0), centroid), Catch::Matchers::WithinAbs(0.0, 1e-10));
}

TEST_CASE("channel smoothing converges and never moves boundary vertices") {
    const TriMesh m = gen_channel_mesh(10, 10, 3.0, 1.0);
    auto a = smooth(m, 49);
    auto b = smooth(m, 50);
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    double max_disp = 0.0;
    for (int v = 0; v < m.n_vertices(); ++v)
        max_disp = std::max(max_disp, distance(a->vertex(v), b->vertex(v)));
    CHECK(max_disp < 1e-6 * m.mean_edge_length());

    for (int v = 0; v < m.n_vertices(); ++v)
        if (m.is_boundary_vertex(v)) {
            CHECK(b->vertex(v).x == m.vertex(v).x);  // bit-identical
            CHECK(b->vertex(v).y == m.vertex(v).y);
        }
}

TEST_CASE("smoothing a dart-shaped domain breaks the mesh") {
    const TriMesh m = fixtures::smoothing_breaker_mesh();
    CHECK_NOTHROW(m.check_invariants());
    CHECK(!smooth(m, 1).has_value());
}

TEST_CASE("obstacle channel mesh carves an airfoil-tagged hole") {
    const TriMesh m = gen_channel_with_obstacle(13, 9, 3.0, 1.0, {1.5, 0.5}, {0.3, 0.15});
    CHECK_NOTHROW(m.check_invariants());
    bool has_airfoil = false;
    for (const auto& f : m.facets())
        if (f.tag == BoundaryTag::Airfoil) has_airfoil = true;
    CHECK(has_airfoil);
    // hole removes vertices relative to the plain channel
    CHECK(m.n_vertices() < gen_channel_mesh(13, 9, 3.0, 1.0).n_vertices());
    CHECK_THROWS_AS(gen_channel_with_obstacle(13, 9, 3.0, 1.0, {0.1, 0.5}, {0.3, 0.15}),
                    std::invalid_argument);
}

TEST_CASE("meshes with dangling facets or bad triangles are rejected") {
    std::vector<Vec2> v = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    std::vector<std::array<int, 3>> t = {{0, 1, 2}, {1, 3, 2}};
    // facet on an interior edge
    CHECK_THROWS_AS(TriMesh::build(v, t, {{1, 2, BoundaryTag::Wall}}), MeshError);
    // facet on a non-edge
    CHECK_THROWS_AS(TriMesh::build(v, t,
                                   {{0, 1, BoundaryTag::Wall},
                                    {1, 3, BoundaryTag::Wall},
                                    {3, 2, BoundaryTag::Wall},
                                    {2, 0, BoundaryTag::Wall},
                                    {0, 3, BoundaryTag::Wall}}),
                    MeshError);
    // degenerate triangle
    std::vector<Vec2> vd = {{0, 0}, {1, 0}, {2, 0}};
    CHECK_THROWS_AS(TriMesh::build(vd, {{0, 1, 2}}, {}), MeshError);
}
