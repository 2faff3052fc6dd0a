#include "divfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "divfem/errors.hpp"

namespace divfem {

int Triangulation::n_interior_vertices() const {
  int n = 0;
  for (bool b : vertex_is_boundary) n += b ? 0 : 1;
  return n;
}

int Triangulation::n_interior_edges() const {
  int n = 0;
  for (bool b : edge_is_boundary) n += b ? 0 : 1;
  return n;
}

int Triangulation::n_interior_cells() const {
  int n = 0;
  for (bool b : cell_is_interior) n += b ? 1 : 0;
  return n;
}

double Triangulation::max_edge_length() const {
  double h = 0.0;
  for (double l : edge_length) h = std::max(h, l);
  return h;
}

double Triangulation::total_area() const {
  double s = 0.0;
  for (double a : cell_area) s += a;
  return s;
}

int Triangulation::find_edge(int a, int b) const {
  std::array<int, 2> key{std::min(a, b), std::max(a, b)};
  auto it = std::lower_bound(edges.begin(), edges.end(), key);
  if (it != edges.end() && *it == key) return static_cast<int>(it - edges.begin());
  return -1;
}

int Triangulation::local_vertex_index(int c, int v) const {
  for (int l = 0; l < 3; ++l)
    if (cells[c][l] == v) return l;
  return -1;
}

int Triangulation::neighbor(int c, int le) const {
  int e = cell_edges[c][le];
  const auto& inc = edge_cells[e];
  if (inc[0] == c) return inc[1];
  return inc[0];
}

Triangulation build_triangulation(std::vector<Point2> vertices,
                                  std::vector<std::array<int, 3>> cells) {
  if (cells.empty()) throw MeshError("build_triangulation: at least one cell required");
  const int nv = static_cast<int>(vertices.size());
  for (const auto& p : vertices)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw MeshError("build_triangulation: non-finite vertex coordinate");

  for (auto& c : cells) {
    for (int v : c)
      if (v < 0 || v >= nv) throw MeshError("build_triangulation: vertex index out of range");
    if (c[0] == c[1] || c[1] == c[2] || c[0] == c[2])
      throw MeshError("build_triangulation: repeated vertex in cell");
    double a = signed_area(vertices[c[0]], vertices[c[1]], vertices[c[2]]);
    if (a < 0.0) {
      std::swap(c[1], c[2]);
      a = -a;
    }
    if (!(a > 0.0)) throw MeshError("build_triangulation: degenerate (zero-area) cell");
  }

  {
    std::vector<std::array<int, 3>> keys(cells);
    for (auto& k : keys) std::sort(k.begin(), k.end());
    std::sort(keys.begin(), keys.end());
    if (std::adjacent_find(keys.begin(), keys.end()) != keys.end())
      throw MeshError("build_triangulation: duplicate cell");
  }

  Triangulation tri;
  tri.vertices = std::move(vertices);
  tri.cells = std::move(cells);

  // Lexicographic edge numbering.
  std::vector<std::array<int, 2>> all;
  all.reserve(tri.cells.size() * 3);
  for (const auto& c : tri.cells)
    for (int i = 0; i < 3; ++i) {
      int a = c[(i + 1) % 3], b = c[(i + 2) % 3];
      all.push_back({std::min(a, b), std::max(a, b)});
    }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  tri.edges = std::move(all);

  const int ne = tri.n_edges();
  tri.edge_cells.assign(ne, {-1, -1});
  tri.cell_edges.resize(tri.cells.size());
  tri.cell_edge_sign.resize(tri.cells.size());

  for (int c = 0; c < tri.n_cells(); ++c) {
    for (int i = 0; i < 3; ++i) {
      int a = tri.cells[c][(i + 1) % 3], b = tri.cells[c][(i + 2) % 3];
      int e = tri.find_edge(a, b);
      tri.cell_edges[c][i] = e;
      tri.cell_edge_sign[c][i] = (a < b) ? +1 : -1;
      auto& inc = tri.edge_cells[e];
      if (inc[0] < 0)
        inc[0] = c;
      else if (inc[1] < 0)
        inc[1] = c;
      else
        throw MeshError("build_triangulation: non-manifold edge (more than two cells)");
    }
  }

  // Two counterclockwise cells must traverse a shared edge in opposite
  // directions.
  for (int e = 0; e < ne; ++e) {
    const auto& inc = tri.edge_cells[e];
    if (inc[0] >= 0 && inc[1] >= 0) {
      int s0 = 0, s1 = 0;
      for (int i = 0; i < 3; ++i) {
        if (tri.cell_edges[inc[0]][i] == e) s0 = tri.cell_edge_sign[inc[0]][i];
        if (tri.cell_edges[inc[1]][i] == e) s1 = tri.cell_edge_sign[inc[1]][i];
      }
      if (s0 == s1) throw MeshError("build_triangulation: inconsistent orientation across edge");
    }
  }

  tri.edge_is_boundary.resize(ne);
  tri.edge_length.resize(ne);
  for (int e = 0; e < ne; ++e) {
    tri.edge_is_boundary[e] = tri.edge_cells[e][1] < 0;
    tri.edge_length[e] = norm(tri.vertices[tri.edges[e][1]] - tri.vertices[tri.edges[e][0]]);
  }

  tri.vertex_is_boundary.assign(nv, false);
  for (int e = 0; e < ne; ++e)
    if (tri.edge_is_boundary[e]) {
      tri.vertex_is_boundary[tri.edges[e][0]] = true;
      tri.vertex_is_boundary[tri.edges[e][1]] = true;
    }

  tri.cell_is_interior.resize(tri.cells.size());
  tri.cell_area.resize(tri.cells.size());
  for (int c = 0; c < tri.n_cells(); ++c) {
    const auto& v = tri.cells[c];
    tri.cell_area[c] = signed_area(tri.vertices[v[0]], tri.vertices[v[1]], tri.vertices[v[2]]);
    bool interior = true;
    for (int i = 0; i < 3; ++i) interior = interior && !tri.edge_is_boundary[tri.cell_edges[c][i]];
    tri.cell_is_interior[c] = interior;
  }

  tri.vertex_cells.assign(nv, {});
  for (int c = 0; c < tri.n_cells(); ++c)
    for (int v : tri.cells[c]) tri.vertex_cells[v].push_back(c);

  return tri;
}

Triangulation uniform_refine(const Triangulation& tri) {
  std::vector<Point2> verts = tri.vertices;
  verts.reserve(verts.size() + tri.edges.size());
  const int nv = tri.n_vertices();
  for (const auto& e : tri.edges)
    verts.push_back((tri.vertices[e[0]] + tri.vertices[e[1]]) * 0.5);

  std::vector<std::array<int, 3>> cells;
  cells.reserve(tri.cells.size() * 4);
  for (int c = 0; c < tri.n_cells(); ++c) {
    const auto& v = tri.cells[c];
    // m[i] = midpoint of local edge i (opposite local vertex i)
    std::array<int, 3> m;
    for (int i = 0; i < 3; ++i) m[i] = nv + tri.cell_edges[c][i];
    cells.push_back({v[0], m[2], m[1]});
    cells.push_back({v[1], m[0], m[2]});
    cells.push_back({v[2], m[1], m[0]});
    cells.push_back({m[0], m[1], m[2]});
  }
  return build_triangulation(std::move(verts), std::move(cells));
}

Triangulation refine_times(Triangulation tri, int times) {
  for (int i = 0; i < times; ++i) tri = uniform_refine(tri);
  return tri;
}

VertexPatch vertex_patch(const Triangulation& tri, int v) {
  if (v < 0 || v >= tri.n_vertices()) throw MeshError("vertex_patch: vertex index out of range");
  if (tri.vertex_is_boundary[v]) throw MeshError("vertex_patch: vertex is on the boundary");

  VertexPatch p;
  p.center = v;
  const auto& incident = tri.vertex_cells[v];
  p.m = static_cast<int>(incident.size());
  if (p.m < 3) throw MeshError("vertex_patch: fewer than three incident cells");

  int start = *std::min_element(incident.begin(), incident.end());
  int c = start;
  for (int step = 0; step < p.m; ++step) {
    int l = tri.local_vertex_index(c, v);
    // Counterclockwise around v: exit through local edge l+1.
    int exit_edge = tri.cell_edges[c][(l + 1) % 3];
    p.cells.push_back(c);
    p.spoke_edges.push_back(exit_edge);
    p.rim_edges.push_back(tri.cell_edges[c][l]);
    const auto& ev = tri.edges[exit_edge];
    p.rim_vertices.push_back(ev[0] == v ? ev[1] : ev[0]);
    int next = tri.neighbor(c, (l + 1) % 3);
    if (next < 0) throw MeshError("vertex_patch: open fan around supposedly interior vertex");
    c = next;
  }
  if (c != start) throw MeshError("vertex_patch: cells do not close a cycle");
  return p;
}

CellPatch cell_patch(const Triangulation& tri, int c) {
  if (c < 0 || c >= tri.n_cells()) throw MeshError("cell_patch: cell index out of range");
  if (!tri.cell_is_interior[c])
    throw MeshError("cell_patch: cell has a boundary edge (not in T_h^i)");
  CellPatch p;
  p.center_cell = c;
  for (int j = 0; j < 3; ++j) p.neighbors[j] = tri.neighbor(c, j);
  return p;
}

MeshCounts counts_and_layers(const Triangulation& tri) {
  MeshCounts mc;
  mc.n_vertices = tri.n_vertices();
  mc.n_interior_vertices = tri.n_interior_vertices();
  mc.n_boundary_vertices = mc.n_vertices - mc.n_interior_vertices;
  mc.n_edges = tri.n_edges();
  mc.n_interior_edges = tri.n_interior_edges();
  mc.n_boundary_edges = mc.n_edges - mc.n_interior_edges;
  mc.n_cells = tri.n_cells();
  mc.n_interior_cells = tri.n_interior_cells();
  mc.euler = mc.n_vertices - mc.n_edges + mc.n_cells;
  mc.interior_cell_identity = (mc.n_interior_cells == 2 * mc.n_interior_vertices - 2);

  // Vertex adjacency over edges (all edges touching an interior vertex are
  // interior, so plain adjacency is adjacency over interior edges here).
  std::vector<std::vector<int>> adj(tri.n_vertices());
  for (const auto& e : tri.edges) {
    adj[e[0]].push_back(e[1]);
    adj[e[1]].push_back(e[0]);
  }

  mc.assumption1 = true;
  for (int v = 0; v < tri.n_vertices(); ++v) {
    if (!tri.vertex_is_boundary[v]) continue;
    bool ok = false;
    for (int w : adj[v]) ok = ok || !tri.vertex_is_boundary[w];
    if (!ok) mc.assumption1 = false;
  }

  // Breadth-first layers over interior edges, seeded from boundary vertices.
  mc.vertex_layer.assign(tri.n_vertices(), 0);
  std::vector<int> frontier;
  for (int v = 0; v < tri.n_vertices(); ++v)
    if (tri.vertex_is_boundary[v]) frontier.push_back(v);
  int layer = 0;
  while (!frontier.empty()) {
    ++layer;
    std::vector<int> next;
    for (int v : frontier)
      for (int w : adj[v]) {
        if (tri.vertex_is_boundary[w] || mc.vertex_layer[w] != 0) continue;
        mc.vertex_layer[w] = layer;
        next.push_back(w);
      }
    if (next.empty()) break;
    mc.number_of_layers = layer;
    frontier = std::move(next);
  }
  return mc;
}

double patch_geometry(const Triangulation& tri, const VertexPatch& patch, int i) {
  const int m = patch.m;
  if (i < 0 || i >= m) throw MeshError("patch_geometry: rim index out of range");
  const Point2& prev = tri.vertices[patch.rim_vertices[(i + m - 1) % m]];
  const Point2& cur = tri.vertices[patch.rim_vertices[i]];
  const Point2& next = tri.vertices[patch.rim_vertices[(i + 1) % m]];
  double s = tri.cell_area[patch.cells[i]] + tri.cell_area[patch.cells[(i + 1) % m]];
  return signed_area(prev, cur, next) / s;
}

Triangulation make_appendix_hexagon() {
  std::vector<Point2> v = {{0.0, 0.0},  {0.5, 0.0}, {1.0, 0.5}, {1.0, 1.0},
                           {0.5, 1.0},  {0.0, 0.5}, {0.5, 0.5}};
  std::vector<std::array<int, 3>> c;
  for (int i = 0; i < 6; ++i) c.push_back({i, (i + 1) % 6, 6});
  return build_triangulation(std::move(v), std::move(c));
}

Triangulation make_square_crisscross(int n) {
  if (n < 1) throw MeshError("make_square_crisscross: n must be >= 1");
  std::vector<Point2> v;
  auto grid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) v.push_back({double(i) / n, double(j) / n});
  const int base = (n + 1) * (n + 1);
  std::vector<std::array<int, 3>> c;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      int ctr = base + j * n + i;
      v.push_back({(i + 0.5) / n, (j + 0.5) / n});
      int p00 = grid(i, j), p10 = grid(i + 1, j), p11 = grid(i + 1, j + 1), p01 = grid(i, j + 1);
      c.push_back({p00, p10, ctr});
      c.push_back({p10, p11, ctr});
      c.push_back({p11, p01, ctr});
      c.push_back({p01, p00, ctr});
    }
  return build_triangulation(std::move(v), std::move(c));
}

Triangulation make_perturbed(const Triangulation& base, double magnitude, std::uint64_t seed) {
  if (magnitude < 0.0 || magnitude >= 0.3)
    throw MeshError("make_perturbed: magnitude must lie in [0, 0.3)");

  // Shortest incident edge per vertex.
  std::vector<double> min_len(base.n_vertices(), std::numeric_limits<double>::max());
  for (int e = 0; e < base.n_edges(); ++e) {
    for (int v : base.edges[e]) min_len[v] = std::min(min_len[v], base.edge_length[e]);
  }

  std::mt19937_64 rng(seed);
  auto uniform01 = [&rng]() { return double(rng() >> 11) * 0x1.0p-53; };

  const int max_attempts = 50;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::vector<Point2> v = base.vertices;
    for (int i = 0; i < base.n_vertices(); ++i) {
      if (base.vertex_is_boundary[i]) continue;
      double r = magnitude * min_len[i] * std::sqrt(uniform01());
      double theta = 2.0 * 3.14159265358979323846 * uniform01();
      v[i] += Vec2{r * std::cos(theta), r * std::sin(theta)};
    }
    bool ok = true;
    for (const auto& c : base.cells)
      ok = ok && signed_area(v[c[0]], v[c[1]], v[c[2]]) > 0.0;
    if (ok) return build_triangulation(std::move(v), base.cells);
  }
  throw MeshError("make_perturbed: could not produce a valid mesh (inverted cell)");
}

Triangulation make_eig_square_grid() {
  // 4x4 blocks on the unit square; every block carries its SW-NE diagonal
  // except the top-left and bottom-right corner blocks, which carry the
  // NW-SE diagonal.
  std::vector<Point2> v;
  auto id = [](int i, int j) { return j * 5 + i; };
  for (int j = 0; j <= 4; ++j)
    for (int i = 0; i <= 4; ++i) v.push_back({0.25 * i, 0.25 * j});
  std::vector<std::array<int, 3>> c;
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) {
      int p00 = id(i, j), p10 = id(i + 1, j), p11 = id(i + 1, j + 1), p01 = id(i, j + 1);
      bool anti = (i == 0 && j == 3) || (i == 3 && j == 0);
      if (anti) {
        // NW-SE diagonal
        c.push_back({p00, p10, p01});
        c.push_back({p10, p11, p01});
      } else {
        // SW-NE diagonal
        c.push_back({p00, p10, p11});
        c.push_back({p00, p11, p01});
      }
    }
  return build_triangulation(std::move(v), std::move(c));
}

Triangulation make_eig_hexagon_grid() {
  // The 6-cell hexagon fan refined once (the star-of-David pattern).
  return uniform_refine(make_appendix_hexagon());
}

void write_mesh(std::ostream& os, const Triangulation& tri) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d %d\n", tri.n_vertices(), tri.n_cells());
  os << buf;
  for (const auto& p : tri.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x, p.y);
    os << buf;
  }
  for (const auto& c : tri.cells) {
    std::snprintf(buf, sizeof buf, "%d %d %d\n", c[0], c[1], c[2]);
    os << buf;
  }
}

namespace {
// Next non-comment, non-blank line tokenized into a stream.
bool next_data_line(std::istream& is, std::istringstream& out) {
  std::string line;
  while (std::getline(is, line)) {
    auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    out.clear();
    out.str(line);
    out.imbue(std::locale::classic());
    return true;
  }
  return false;
}
} // namespace

Triangulation read_mesh(std::istream& is) {
  std::istringstream ls;
  if (!next_data_line(is, ls)) throw MeshError("read_mesh: missing header line");
  int nv = 0, nc = 0;
  if (!(ls >> nv >> nc) || nv < 3 || nc < 1) throw MeshError("read_mesh: bad header");
  std::vector<Point2> v(nv);
  for (int i = 0; i < nv; ++i) {
    if (!next_data_line(is, ls) || !(ls >> v[i].x >> v[i].y))
      throw MeshError("read_mesh: bad vertex line");
  }
  std::vector<std::array<int, 3>> c(nc);
  for (int i = 0; i < nc; ++i) {
    if (!next_data_line(is, ls) || !(ls >> c[i][0] >> c[i][1] >> c[i][2]))
      throw MeshError("read_mesh: bad cell line");
  }
  return build_triangulation(std::move(v), std::move(c));
}

void write_mesh_file(const std::string& path, const Triangulation& tri) {
  std::ofstream f(path);
  if (!f) throw MeshError("write_mesh_file: cannot open " + path);
  write_mesh(f, tri);
}

Triangulation read_mesh_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw MeshError("read_mesh_file: cannot open " + path);
  return read_mesh(f);
}

} // namespace divfem
