#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "meshdqn/fields.hpp"

namespace meshdqn {

class SnapshotIoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

inline void put_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

inline std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw SnapshotIoError("unexpected end of file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

inline std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw SnapshotIoError("unexpected end of file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline double get_f64(std::istream& in) {
    const std::uint64_t bits = get_u64(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace detail

constexpr std::uint32_t kSnapshotFormatVersion = 1;

inline void write_snapshots(std::ostream& out, const SnapshotSet& s) {
    out.write("MDQS", 4);
    detail::put_u32(out, kSnapshotFormatVersion);
    detail::put_u32(out, static_cast<std::uint32_t>(s.n_snapshots()));
    detail::put_u32(out, static_cast<std::uint32_t>(s.velocity_order()));
    detail::put_u64(out, static_cast<std::uint64_t>(s.n_velocity_dofs()));
    detail::put_u64(out, static_cast<std::uint64_t>(s.n_pressure_dofs()));
    for (int i = 0; i < s.n_snapshots(); ++i) {
        const FlowSnapshot& snap = s.snapshot(i);
        for (double v : snap.vx) detail::put_f64(out, v);
        for (double v : snap.vy) detail::put_f64(out, v);
        for (double v : snap.p) detail::put_f64(out, v);
    }
    if (!out) throw SnapshotIoError("write failed");
}

inline void write_snapshots(const std::string& path, const SnapshotSet& s) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SnapshotIoError("cannot open " + path + " for writing");
    write_snapshots(out, s);
}

inline SnapshotSet read_snapshots(std::istream& in, std::shared_ptr<const TriMesh> mesh) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "MDQS", 4) != 0)
        throw SnapshotIoError("bad magic, not a snapshot file");
    const std::uint32_t version = detail::get_u32(in);
    if (version != kSnapshotFormatVersion) {
        std::ostringstream msg;
        msg << "unsupported snapshot format version " << version;
        throw SnapshotIoError(msg.str());
    }
    const std::uint32_t n_snaps = detail::get_u32(in);
    const std::uint32_t order = detail::get_u32(in);
    const std::uint64_t nv = detail::get_u64(in);
    const std::uint64_t np = detail::get_u64(in);
    if (order != 1 && order != 2) throw SnapshotIoError("velocity order must be 1 or 2");
    if (n_snaps == 0) throw SnapshotIoError("file contains no snapshots");

    const std::uint64_t want_nv = order == 1
                                      ? static_cast<std::uint64_t>(mesh->n_vertices())
                                      : static_cast<std::uint64_t>(mesh->n_vertices()) +
                                            static_cast<std::uint64_t>(mesh->n_edges());
    if (nv != want_nv || np != static_cast<std::uint64_t>(mesh->n_vertices())) {
        std::ostringstream msg;
        msg << "snapshot DOF counts (" << nv << " velocity, " << np
            << " pressure) do not match the mesh (" << want_nv << ", " << mesh->n_vertices()
            << ")";
        throw SnapshotIoError(msg.str());
    }

    std::vector<FlowSnapshot> snaps(n_snaps);
    for (std::uint32_t i = 0; i < n_snaps; ++i) {
        snaps[i].vx.resize(nv);
        snaps[i].vy.resize(nv);
        snaps[i].p.resize(np);
        for (auto& v : snaps[i].vx) v = detail::get_f64(in);
        for (auto& v : snaps[i].vy) v = detail::get_f64(in);
        for (auto& v : snaps[i].p) v = detail::get_f64(in);
    }
    return SnapshotSet::build(std::move(mesh), static_cast<int>(order), std::move(snaps));
}

inline SnapshotSet read_snapshots(const std::string& path, std::shared_ptr<const TriMesh> mesh) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SnapshotIoError("cannot open " + path);
    return read_snapshots(in, std::move(mesh));
}

/// CSV fixture import: lines "vertex_id,ux,uy,p", one block per snapshot,
/// blocks separated by blank lines, '#' comments skipped. Order-1 velocity.
inline SnapshotSet read_snapshots_csv(std::istream& in, std::shared_ptr<const TriMesh> mesh) {
    const int V = mesh->n_vertices();
    std::vector<FlowSnapshot> snaps;
    FlowSnapshot cur;
    std::vector<bool> seen;
    int filled = 0;

    auto open_block = [&] {
        cur.vx.assign(V, 0.0);
        cur.vy.assign(V, 0.0);
        cur.p.assign(V, 0.0);
        seen.assign(V, false);
        filled = 0;
    };
    auto close_block = [&](int line_no) {
        if (filled == 0) return;
        if (filled != V) {
            std::ostringstream msg;
            msg << "csv line " << line_no << ": snapshot block covers " << filled << " of " << V
                << " vertices";
            throw SnapshotIoError(msg.str());
        }
        snaps.push_back(std::move(cur));
        open_block();
    };

    open_block();
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) {
            close_block(line_no);
            continue;
        }
        if (line[first] == '#') continue;
        int id;
        double ux, uy, p;
        if (std::sscanf(line.c_str(), "%d , %lf , %lf , %lf", &id, &ux, &uy, &p) != 4) {
            std::ostringstream msg;
            msg << "csv line " << line_no << ": expected vertex_id,ux,uy,p";
            throw SnapshotIoError(msg.str());
        }
        if (id < 0 || id >= V) {
            std::ostringstream msg;
            msg << "csv line " << line_no << ": vertex id " << id << " out of range";
            throw SnapshotIoError(msg.str());
        }
        if (seen[id]) {
            std::ostringstream msg;
            msg << "csv line " << line_no << ": duplicate vertex id " << id;
            throw SnapshotIoError(msg.str());
        }
        seen[id] = true;
        cur.vx[id] = ux;
        cur.vy[id] = uy;
        cur.p[id] = p;
        ++filled;
    }
    close_block(line_no + 1);
    if (snaps.empty()) throw SnapshotIoError("csv contains no snapshot data");
    return SnapshotSet::build(std::move(mesh), 1, std::move(snaps));
}

inline SnapshotSet read_snapshots_csv(const std::string& path,
                                      std::shared_ptr<const TriMesh> mesh) {
    std::ifstream in(path);
    if (!in) throw SnapshotIoError("cannot open " + path);
    return read_snapshots_csv(in, std::move(mesh));
}

}  // namespace meshdqn
