#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "meshdqn/mesh.hpp"

namespace meshdqn {

class MshParseError : public MeshError {
  public:
    MshParseError(const std::string& what, int line)
        : MeshError("msh parse error at line " + std::to_string(line) + ": " + what),
          line_(line) {}
    int line() const { return line_; }

  private:
    int line_;
};

/// Physical-tag integers <-> BoundaryTag. The defaults match the fixture
/// generators; readers of foreign files can override per config.
struct MshTagTable {
    std::map<int, BoundaryTag> to_tag = {{1, BoundaryTag::Airfoil},
                                         {2, BoundaryTag::Inlet},
                                         {3, BoundaryTag::Outlet},
                                         {4, BoundaryTag::Wall}};

    int to_int(BoundaryTag t) const {
        for (const auto& [k, v] : to_tag)
            if (v == t) return k;
        throw MeshError("no physical tag configured for " + std::string(to_string(t)));
    }
};

namespace detail {

class LineReader {
  public:
    explicit LineReader(std::istream& in) : in_(in) {}

    bool next(std::string& out) {
        while (std::getline(in_, out)) {
            ++line_;
            // strip \r and trailing blanks
            while (!out.empty() && (out.back() == '\r' || out.back() == ' ' || out.back() == '\t'))
                out.pop_back();
            if (!out.empty()) return true;
        }
        return false;
    }

    std::string expect() {
        std::string s;
        if (!next(s)) throw MshParseError("unexpected end of file", line_);
        return s;
    }

    int line() const { return line_; }

  private:
    std::istream& in_;
    int line_ = 0;
};

}  // namespace detail

/// Reads the ASCII MSH v2.2 subset: $MeshFormat, $Nodes, $Elements with
/// 2-node lines (type 1, physical tag -> BoundaryTag) and 3-node triangles
/// (type 2). Any other element type is rejected. Node z coordinates must be 0.
inline TriMesh read_msh(std::istream& in, const MshTagTable& tags = {}) {
    detail::LineReader rd(in);
    if (rd.expect() != "$MeshFormat") throw MshParseError("expected $MeshFormat", rd.line());
    {
        std::istringstream ls(rd.expect());
        std::string ver;
        int ftype = -1, dsize = -1;
        ls >> ver >> ftype >> dsize;
        if (ver != "2.2" || ftype != 0)
            throw MshParseError("unsupported format '" + ver + "' (need ASCII 2.2)", rd.line());
    }
    if (rd.expect() != "$EndMeshFormat") throw MshParseError("expected $EndMeshFormat", rd.line());

    std::string section = rd.expect();
    // $PhysicalNames is legal but carries nothing we use.
    if (section == "$PhysicalNames") {
        std::string s;
        while ((s = rd.expect()) != "$EndPhysicalNames") {
        }
        section = rd.expect();
    }
    if (section != "$Nodes") throw MshParseError("expected $Nodes", rd.line());

    int n_nodes = 0;
    {
        std::istringstream ls(rd.expect());
        if (!(ls >> n_nodes) || n_nodes < 0) throw MshParseError("bad node count", rd.line());
    }
    std::vector<Vec2> verts(n_nodes);
    std::vector<char> seen(n_nodes, 0);
    for (int k = 0; k < n_nodes; ++k) {
        std::istringstream ls(rd.expect());
        int id;
        double x, y, z;
        if (!(ls >> id >> x >> y >> z)) throw MshParseError("bad node line", rd.line());
        if (id < 1 || id > n_nodes) throw MshParseError("node id out of range", rd.line());
        if (seen[id - 1]) throw MshParseError("duplicate node id", rd.line());
        if (z != 0.0) throw MshParseError("non-zero z coordinate (2D meshes only)", rd.line());
        seen[id - 1] = 1;
        verts[id - 1] = {x, y};
    }
    if (rd.expect() != "$EndNodes") throw MshParseError("expected $EndNodes", rd.line());

    if (rd.expect() != "$Elements") throw MshParseError("expected $Elements", rd.line());
    int n_elems = 0;
    {
        std::istringstream ls(rd.expect());
        if (!(ls >> n_elems) || n_elems < 0) throw MshParseError("bad element count", rd.line());
    }
    std::vector<std::array<int, 3>> tris;
    std::vector<BoundaryFacet> facets;
    for (int k = 0; k < n_elems; ++k) {
        std::istringstream ls(rd.expect());
        int id, etype, ntags;
        if (!(ls >> id >> etype >> ntags)) throw MshParseError("bad element line", rd.line());
        std::vector<int> etags(ntags);
        for (int& t : etags)
            if (!(ls >> t)) throw MshParseError("missing element tag", rd.line());
        if (etype == 1) {
            int a, b;
            if (!(ls >> a >> b)) throw MshParseError("bad line element", rd.line());
            if (a < 1 || a > n_nodes || b < 1 || b > n_nodes)
                throw MshParseError("line element references unknown node", rd.line());
            if (etags.empty()) throw MshParseError("line element without physical tag", rd.line());
            auto it = tags.to_tag.find(etags[0]);
            if (it == tags.to_tag.end())
                throw MshParseError("unmapped physical tag " + std::to_string(etags[0]),
                                    rd.line());
            facets.push_back({a - 1, b - 1, it->second});
        } else if (etype == 2) {
            int a, b, c;
            if (!(ls >> a >> b >> c)) throw MshParseError("bad triangle element", rd.line());
            for (int v : {a, b, c})
                if (v < 1 || v > n_nodes)
                    throw MshParseError("triangle references unknown node", rd.line());
            if (signed_area(verts[a - 1], verts[b - 1], verts[c - 1]) == 0.0)
                throw MshParseError("degenerate (zero-area) triangle", rd.line());
            tris.push_back({a - 1, b - 1, c - 1});
        } else {
            throw MshParseError("unsupported element type " + std::to_string(etype), rd.line());
        }
    }
    if (rd.expect() != "$EndElements") throw MshParseError("expected $EndElements", rd.line());

    try {
        return TriMesh::build(std::move(verts), std::move(tris), std::move(facets));
    } catch (const MeshError& e) {
        throw MshParseError(e.what(), rd.line());
    }
}

inline TriMesh read_msh(const std::string& path, const MshTagTable& tags = {}) {
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open mesh file: " + path);
    return read_msh(in, tags);
}

/// Deterministic writer: 1-based sequential node ids, line elements first
/// (sorted by endpoints) then triangles, coordinates at 17 significant digits
/// so read_msh(write_msh(m)) == m exactly.
inline void write_msh(std::ostream& out, const TriMesh& mesh, const MshTagTable& tags = {}) {
    out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
    out << "$Nodes\n" << mesh.n_vertices() << "\n";
    char buf[80];
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        const Vec2& p = mesh.vertex(v);
        std::snprintf(buf, sizeof(buf), "%d %.17g %.17g 0\n", v + 1, p.x, p.y);
        out << buf;
    }
    out << "$EndNodes\n";

    std::vector<BoundaryFacet> facets = mesh.facets();
    std::sort(facets.begin(), facets.end(), [](const BoundaryFacet& x, const BoundaryFacet& y) {
        return std::tie(x.a, x.b) < std::tie(y.a, y.b);
    });
    out << "$Elements\n" << facets.size() + mesh.triangles().size() << "\n";
    int id = 1;
    for (const auto& f : facets)
        out << id++ << " 1 2 " << tags.to_int(f.tag) << " 0 " << f.a + 1 << " " << f.b + 1
            << "\n";
    for (const auto& t : mesh.triangles())
        out << id++ << " 2 2 0 0 " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
    out << "$EndElements\n";
}

inline void write_msh(const std::string& path, const TriMesh& mesh, const MshTagTable& tags = {}) {
    std::ofstream out(path);
    if (!out) throw MeshError("cannot open mesh file for writing: " + path);
    write_msh(out, mesh, tags);
}

}  // namespace meshdqn
