#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "meshdqn/fields.hpp"
#include "meshdqn/flow.hpp"
#include "meshdqn/snapshot_io.hpp"
#include "support/fixtures.hpp"

using namespace meshdqn;

namespace {

std::shared_ptr<const TriMesh> shared(TriMesh m) {
    return std::make_shared<const TriMesh>(std::move(m));
}

/// Independent location oracle: scan triangles in index order, first one
/// whose plain barycentric coordinates are all non-negative wins.
int brute_locate(const TriMesh& m, Vec2 p, double slack = 0.0) {
    for (int t = 0; t < m.n_triangles(); ++t) {
        const auto& tr = m.triangle(t);
        const auto b = barycentric(m.vertex(tr[0]), m.vertex(tr[1]), m.vertex(tr[2]), p);
        if (b[0] >= -slack && b[1] >= -slack && b[2] >= -slack) return t;
    }
    return -1;
}

SnapshotSet fill_p1(std::shared_ptr<const TriMesh> mesh, auto fx, auto fy, auto fp, int count = 1) {
    FlowSnapshot s;
    for (int v = 0; v < mesh->n_vertices(); ++v) {
        const Vec2 pt = mesh->vertex(v);
        s.vx.push_back(fx(pt));
        s.vy.push_back(fy(pt));
        s.p.push_back(fp(pt));
    }
    return SnapshotSet::build(std::move(mesh), 1, std::vector<FlowSnapshot>(count, s));
}

SnapshotSet fill_p2(std::shared_ptr<const TriMesh> mesh, auto fx, auto fy, auto fp, int count = 1) {
    const TriMesh& m = *mesh;
    FlowSnapshot s;
    for (int v = 0; v < m.n_vertices(); ++v) {
        s.vx.push_back(fx(m.vertex(v)));
        s.vy.push_back(fy(m.vertex(v)));
        s.p.push_back(fp(m.vertex(v)));
    }
    for (int e = 0; e < m.n_edges(); ++e) {
        const auto [a, b] = m.edge(e);
        const Vec2 mid = (m.vertex(a) + m.vertex(b)) / 2.0;
        s.vx.push_back(fx(mid));
        s.vy.push_back(fy(mid));
    }
    return SnapshotSet::build(std::move(mesh), 2, std::vector<FlowSnapshot>(count, s));
}

}  // namespace

TEST_CASE("snapshot sets validate DOF counts against the mesh") {
    auto mesh = shared(gen_channel_mesh(3, 3, 1.0, 1.0));
    const int V = mesh->n_vertices(), E = mesh->n_edges();

    FlowSnapshot ok1{std::vector<double>(V), std::vector<double>(V), std::vector<double>(V)};
    CHECK_NOTHROW(SnapshotSet::build(mesh, 1, {ok1}));
    FlowSnapshot ok2{std::vector<double>(V + E), std::vector<double>(V + E),
                     std::vector<double>(V)};
    CHECK_NOTHROW(SnapshotSet::build(mesh, 2, {ok2}));

    CHECK_THROWS_AS(SnapshotSet::build(mesh, 1, {ok2}), std::invalid_argument);
    CHECK_THROWS_AS(SnapshotSet::build(mesh, 2, {ok1}), std::invalid_argument);
    CHECK_THROWS_AS(SnapshotSet::build(mesh, 1, {}), std::invalid_argument);
    CHECK_THROWS_AS(SnapshotSet::build(mesh, 3, {ok1}), std::invalid_argument);
    FlowSnapshot bad_p{std::vector<double>(V), std::vector<double>(V),
                       std::vector<double>(V - 1)};
    CHECK_THROWS_AS(SnapshotSet::build(mesh, 1, {bad_p}), std::invalid_argument);
}

TEST_CASE("locate finds centroids with symmetric barycentrics") {
    const TriMesh m = gen_channel_mesh(5, 4, 2.0, 1.0);
    for (int t = 0; t < m.n_triangles(); ++t) {
        const auto loc = locate(m, m.triangle_centroid(t), /*seed=*/t % 3);
        REQUIRE(loc.has_value());
        CHECK(loc->tri == t);
        for (double b : loc->bary) CHECK_THAT(b, Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));
    }
}

TEST_CASE("locate at a mesh vertex returns an incident triangle, one weight = 1") {
    const TriMesh m = gen_channel_mesh(4, 4, 1.0, 1.0);
    for (int v = 0; v < m.n_vertices(); ++v) {
        const auto loc = locate(m, m.vertex(v));
        REQUIRE(loc.has_value());
        const auto& tr = m.triangle(loc->tri);
        bool incident = false;
        for (int k = 0; k < 3; ++k)
            if (tr[k] == v) {
                incident = true;
                CHECK(loc->bary[k] == 1.0);
            }
        CHECK(incident);
    }
}

TEST_CASE("walk location agrees with the exhaustive scan on random points") {
    const TriMesh meshes[] = {gen_channel_mesh(9, 6, 3.0, 1.0),
                              *smooth(gen_channel_mesh(9, 6, 3.0, 1.0), 50)};
    std::mt19937_64 rng(12345);
    for (const TriMesh& m : meshes) {
        std::uniform_real_distribution<double> ux(0.0, 3.0), uy(0.0, 1.0);
        int seed = 0;
        for (int i = 0; i < 1000; ++i) {
            const Vec2 p{ux(rng), uy(rng)};
            const int expect = brute_locate(m, p, 1e-12);
            const auto loc = locate(m, p, seed);
            REQUIRE(loc.has_value());
            CHECK(loc->tri == expect);
            double sum = 0.0;
            for (double b : loc->bary) {
                CHECK(b >= 0.0);
                sum += b;
            }
            CHECK_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-12));
            seed = loc->tri;
        }
    }
}

TEST_CASE("points on a shared edge resolve to the lower triangle index") {
    const TriMesh m = gen_channel_mesh(5, 5, 1.0, 1.0);
    int checked = 0;
    for (int e = 0; e < m.n_edges() && checked < 20; ++e) {
        const auto [a, b] = m.edge(e);
        // interior edge: exactly two adjacent triangles
        std::vector<int> adj;
        for (int t : m.vertex_triangles(a)) {
            const auto& tr = m.triangle(t);
            for (int v : tr)
                if (v == b) adj.push_back(t);
        }
        if (adj.size() != 2) continue;
        const int lo = std::min(adj[0], adj[1]), hi = std::max(adj[0], adj[1]);
        const Vec2 mid = (m.vertex(a) + m.vertex(b)) / 2.0;
        for (int seed : {0, lo, hi, m.n_triangles() - 1}) {
            const auto loc = locate(m, mid, seed);
            REQUIRE(loc.has_value());
            CHECK(loc->tri == lo);
        }
        ++checked;
    }
    CHECK(checked == 20);
}

TEST_CASE("locate rejects far-away points but snaps marginal boundary drift") {
    const TriMesh m = gen_channel_mesh(4, 4, 2.0, 1.0);
    CHECK(!locate(m, {5.0, 0.5}).has_value());
    CHECK(!locate(m, {1.0, -0.1}).has_value());

    const double eps = loc_epsilon(m);
    const Vec2 nudged{1.0, -0.25 * eps};  // just outside the bottom wall
    const auto loc = locate(m, nudged);
    REQUIRE(loc.has_value());
    CHECK(!locate(m, {1.0, -3.0 * eps}).has_value());
}

TEST_CASE("quadratic shape functions form a partition of unity") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        double l0 = u(rng), l1 = u(rng) * (1.0 - l0);
        const std::array<double, 3> l{l0, l1, 1.0 - l0 - l1};
        const auto n = detail::p2_shape(l);
        double sum = 0.0;
        for (double v : n) sum += v;
        CHECK_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("evaluate reproduces constants, vertex values, and midpoint values") {
    auto mesh = shared(gen_channel_mesh(4, 3, 2.0, 1.0));
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-2.0, 2.0);

    SECTION("constant field evaluates to the constant anywhere") {
        auto s = fill_p1(mesh, [](Vec2) { return 3.25; }, [](Vec2) { return -1.5; },
                         [](Vec2) { return 0.5; });
        for (const Vec2 p : {Vec2{0.1, 0.2}, Vec2{1.7, 0.9}, Vec2{1.0, 0.5}}) {
            CHECK_THAT(*evaluate(s, 0, FieldComponent::VelocityX, p),
                       Catch::Matchers::WithinAbs(3.25, 1e-13));
            CHECK_THAT(*evaluate(s, 0, FieldComponent::Pressure, p),
                       Catch::Matchers::WithinAbs(0.5, 1e-13));
        }
        CHECK(!evaluate(s, 0, FieldComponent::VelocityX, {9.0, 9.0}).has_value());
    }

    SECTION("order-1 field hits stored vertex values exactly") {
        auto s = fill_p1(mesh, [&](Vec2) { return u(rng); }, [&](Vec2) { return u(rng); },
                         [&](Vec2) { return u(rng); });
        for (int v = 0; v < mesh->n_vertices(); ++v)
            CHECK(*evaluate(s, 0, FieldComponent::VelocityX, mesh->vertex(v)) ==
                  s.snapshot(0).vx[v]);
    }

    SECTION("order-2 field hits stored edge-midpoint values") {
        auto s = fill_p2(mesh, [&](Vec2) { return u(rng); }, [&](Vec2) { return u(rng); },
                         [&](Vec2) { return u(rng); });
        const int V = mesh->n_vertices();
        for (int e = 0; e < mesh->n_edges(); ++e) {
            const auto [a, b] = mesh->edge(e);
            const Vec2 mid = (mesh->vertex(a) + mesh->vertex(b)) / 2.0;
            CHECK_THAT(*evaluate(s, 0, FieldComponent::VelocityY, mid),
                       Catch::Matchers::WithinAbs(s.snapshot(0).vy[V + e], 1e-12));
        }
    }
}

TEST_CASE("interpolating onto the same mesh reproduces every DOF") {
    auto mesh = shared(*smooth(gen_channel_mesh(6, 5, 3.0, 1.0), 50));
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    auto s = fill_p2(mesh, [&](Vec2) { return u(rng); }, [&](Vec2) { return u(rng); },
                     [&](Vec2) { return u(rng); }, 3);
    auto r = interpolate(s, mesh);
    REQUIRE(r.has_value());
    CHECK(r->n_snapshots() == 3);
    CHECK(r->velocity_order() == 2);
    for (int i = 0; i < 3; ++i) {
        for (int d = 0; d < s.n_velocity_dofs(); ++d) {
            CHECK_THAT(r->snapshot(i).vx[d],
                       Catch::Matchers::WithinAbs(s.snapshot(i).vx[d], 1e-12));
            CHECK_THAT(r->snapshot(i).vy[d],
                       Catch::Matchers::WithinAbs(s.snapshot(i).vy[d], 1e-12));
        }
        for (int v = 0; v < s.n_pressure_dofs(); ++v)
            CHECK_THAT(r->snapshot(i).p[v], Catch::Matchers::WithinAbs(s.snapshot(i).p[v], 1e-12));
    }
}

TEST_CASE("linear fields survive order-1 transfer between unrelated meshes") {
    auto fine = shared(gen_channel_mesh(9, 9, 2.0, 1.0));
    auto coarse = shared(*smooth(gen_channel_mesh(4, 5, 2.0, 1.0), 50));
    auto lin = [](Vec2 p) { return 2.0 * p.x + 3.0 * p.y - 1.0; };
    auto s = fill_p1(fine, lin, [](Vec2 p) { return p.x - p.y; }, lin);
    auto r = interpolate(s, coarse);
    REQUIRE(r.has_value());
    for (int v = 0; v < coarse->n_vertices(); ++v) {
        CHECK_THAT(r->snapshot(0).vx[v], Catch::Matchers::WithinAbs(lin(coarse->vertex(v)), 1e-10));
        CHECK_THAT(r->snapshot(0).p[v], Catch::Matchers::WithinAbs(lin(coarse->vertex(v)), 1e-10));
    }
}

TEST_CASE("quadratic fields survive order-2 transfer between meshes") {
    auto fine = shared(gen_channel_mesh(7, 7, 2.0, 1.0));
    auto coarse = shared(gen_channel_mesh(3, 4, 2.0, 1.0));
    auto quad = [](Vec2 p) { return p.x * p.x + p.y; };
    auto s = fill_p2(fine, quad, [](Vec2 p) { return p.x * p.y; }, [](Vec2 p) { return p.x; });
    auto r = interpolate(s, coarse);
    REQUIRE(r.has_value());
    const int V = coarse->n_vertices();
    for (int d = 0; d < r->n_velocity_dofs(); ++d) {
        Vec2 pt = d < V ? coarse->vertex(d)
                        : (coarse->vertex(coarse->edge(d - V).first) +
                           coarse->vertex(coarse->edge(d - V).second)) /
                              2.0;
        CHECK_THAT(r->snapshot(0).vx[d], Catch::Matchers::WithinAbs(quad(pt), 1e-10));
        CHECK_THAT(r->snapshot(0).vy[d], Catch::Matchers::WithinAbs(pt.x * pt.y, 1e-10));
    }
}

TEST_CASE("order-1 channel-profile transfer error stays under the h^2 bound") {
    auto fine = shared(gen_channel_mesh(21, 21, 1.0, 1.0));
    AnalyticParams params;
    params.u_max = 1.0;
    params.height = 1.0;
    params.velocity_order = 1;
    auto s = analytic_snapshots(AnalyticKind::Poiseuille, fine, params);

    auto removed = remove_vertex(*fine, fine->interior_vertices()[10]);
    REQUIRE(removed.has_value());
    auto dst = shared(*smooth(*removed, 50));
    auto r = interpolate(s, dst);
    REQUIRE(r.has_value());

    double h_max = 0.0;
    for (const auto& [a, b] : dst->edges())
        h_max = std::max(h_max, distance(dst->vertex(a), dst->vertex(b)));
    const double bound = 8.0 * h_max * h_max;  // C = max |u''| = 8 u_max / H^2

    double err = 0.0;
    for (int v = 0; v < dst->n_vertices(); ++v) {
        const double exact = 4.0 * dst->vertex(v).y * (1.0 - dst->vertex(v).y);
        err = std::max(err, std::abs(r->snapshot(0).vx[v] - exact));
    }
    CHECK(err > 0.0);  // order-1 cannot represent the parabola exactly
    CHECK(err < bound);
}

TEST_CASE("transfer onto a mesh leaving the source domain reports failure") {
    auto src = shared(gen_channel_mesh(5, 5, 1.0, 1.0));
    auto bigger = shared(gen_channel_mesh(5, 5, 2.0, 1.0));
    auto s = fill_p1(src, [](Vec2 p) { return p.x; }, [](Vec2) { return 0.0; },
                     [](Vec2) { return 0.0; });
    CHECK(!interpolate(s, bigger).has_value());
    CHECK(interpolate(s, src).has_value());
}

TEST_CASE("binary snapshot files round-trip exactly") {
    auto mesh = shared(gen_channel_mesh(4, 4, 1.0, 1.0));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    auto s = fill_p2(mesh, [&](Vec2) { return u(rng); }, [&](Vec2) { return u(rng); },
                     [&](Vec2) { return u(rng); }, 4);

    std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
    write_snapshots(buf, s);
    auto r = read_snapshots(buf, mesh);
    CHECK(r.n_snapshots() == 4);
    CHECK(r.velocity_order() == 2);
    for (int i = 0; i < 4; ++i) {
        CHECK(r.snapshot(i).vx == s.snapshot(i).vx);
        CHECK(r.snapshot(i).vy == s.snapshot(i).vy);
        CHECK(r.snapshot(i).p == s.snapshot(i).p);
    }

    SECTION("header is the documented fixed layout") {
        const std::string bytes = buf.str();
        CHECK(bytes.substr(0, 4) == "MDQS");
        CHECK(bytes.size() == 4 + 4 + 4 + 4 + 8 + 8 +
                                  4 * 8 * (2 * s.n_velocity_dofs() + s.n_pressure_dofs()));
        // little-endian u32 fields: version 1, count 4, order 2
        CHECK(static_cast<unsigned char>(bytes[4]) == 1);
        CHECK(static_cast<unsigned char>(bytes[8]) == 4);
        CHECK(static_cast<unsigned char>(bytes[12]) == 2);
    }

    SECTION("corrupt inputs are rejected") {
        std::stringstream bad(std::ios::in | std::ios::out | std::ios::binary);
        bad << "NOPE" << std::string(28, '\0');
        CHECK_THROWS_AS(read_snapshots(bad, mesh), SnapshotIoError);

        std::string truncated = buf.str().substr(0, 40);
        std::stringstream tr(std::ios::in | std::ios::out | std::ios::binary);
        tr << truncated;
        CHECK_THROWS_AS(read_snapshots(tr, mesh), SnapshotIoError);

        auto other = shared(gen_channel_mesh(5, 5, 1.0, 1.0));
        std::stringstream again(buf.str(),
                                std::ios::in | std::ios::out | std::ios::binary);
        CHECK_THROWS_AS(read_snapshots(again, other), SnapshotIoError);
    }
}

TEST_CASE("csv snapshot import reads per-vertex blocks") {
    auto mesh = shared(TriMesh::build({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}},
                                      {{0, 1, BoundaryTag::Wall},
                                       {1, 2, BoundaryTag::Wall},
                                       {0, 2, BoundaryTag::Wall}}));
    std::istringstream in(
        "# fixture\n"
        "0, 1.0, 2.0, 3.0\n"
        "2, 7.0, 8.0, 9.0\n"
        "1, 4.0, 5.0, 6.0\n"
        "\n"
        "0, -1.0, 0.0, 0.0\n"
        "1, -2.0, 0.0, 0.0\n"
        "2, -3.0, 0.0, 0.0\n");
    auto s = read_snapshots_csv(in, mesh);
    CHECK(s.n_snapshots() == 2);
    CHECK(s.velocity_order() == 1);
    CHECK(s.snapshot(0).vx == std::vector<double>{1.0, 4.0, 7.0});
    CHECK(s.snapshot(0).p == std::vector<double>{3.0, 6.0, 9.0});
    CHECK(s.snapshot(1).vx == std::vector<double>{-1.0, -2.0, -3.0});

    std::istringstream missing("0, 1, 1, 1\n1, 2, 2, 2\n");
    CHECK_THROWS_AS(read_snapshots_csv(missing, mesh), SnapshotIoError);
    std::istringstream dup("0, 1, 1, 1\n0, 2, 2, 2\n2, 3, 3, 3\n");
    CHECK_THROWS_AS(read_snapshots_csv(dup, mesh), SnapshotIoError);
    std::istringstream bad_id("0, 1, 1, 1\n1, 2, 2, 2\n5, 3, 3, 3\n");
    CHECK_THROWS_AS(read_snapshots_csv(bad_id, mesh), SnapshotIoError);
    std::istringstream garbled("0, 1, 1\n");
    CHECK_THROWS_AS(read_snapshots_csv(garbled, mesh), SnapshotIoError);
}
