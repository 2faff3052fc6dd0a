#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "divfem/errors.hpp"
#include "divfem/mesh.hpp"

using namespace divfem;

namespace {

Triangulation single_cell() {
  return build_triangulation({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}});
}

void check_basic_invariants(const Triangulation& tri) {
  MeshCounts mc = counts_and_layers(tri);
  CHECK(mc.euler == 1);
  // closed polygonal boundary: as many boundary edges as boundary vertices
  CHECK(mc.n_boundary_edges == mc.n_boundary_vertices);
  for (int e = 0; e < tri.n_edges(); ++e)
    CHECK(tri.edge_is_boundary[e] == (tri.edge_cells[e][1] < 0));
  for (double a : tri.cell_area) CHECK(a > 0.0);
}

} // namespace

TEST_CASE("single cell topology") {
  Triangulation tri = single_cell();
  CHECK(tri.n_edges() == 3);
  CHECK(tri.n_interior_edges() == 0);
  CHECK(tri.n_interior_vertices() == 0);
  CHECK(tri.n_interior_cells() == 0);
  check_basic_invariants(tri);
}

TEST_CASE("clockwise cell is reoriented") {
  Triangulation tri = build_triangulation({{0, 0}, {1, 0}, {0, 1}}, {{{0, 2, 1}}});
  CHECK(tri.cell_area[0] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("builder rejects invalid input") {
  CHECK_THROWS_AS(build_triangulation({{0, 0}, {1, 0}, {0, 1}}, {}), MeshError);
  CHECK_THROWS_AS(build_triangulation({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 3}}}), MeshError);
  CHECK_THROWS_AS(build_triangulation({{0, 0}, {1, 0}, {2, 0}}, {{{0, 1, 2}}}), MeshError);
  CHECK_THROWS_AS(
      build_triangulation({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}, {0, 2, 1}}}), MeshError);
  // non-manifold: three cells on the edge (0,1)
  CHECK_THROWS_AS(build_triangulation({{0, 0}, {1, 0}, {0, 1}, {1, 1}, {0.5, -1}},
                                      {{{0, 1, 2}, {0, 1, 3}, {0, 1, 4}}}),
                  MeshError);
}

TEST_CASE("appendix hexagon counts") {
  Triangulation tri = make_appendix_hexagon();
  CHECK(tri.n_edges() == 12);
  CHECK(tri.n_interior_edges() == 6);
  CHECK(tri.n_interior_vertices() == 1);
  CHECK(tri.n_interior_cells() == 0);
  // the unique interior vertex is the center (1/2, 1/2)
  for (int v = 0; v < tri.n_vertices(); ++v)
    if (!tri.vertex_is_boundary[v]) {
      CHECK(tri.vertices[v].x == doctest::Approx(0.5));
      CHECK(tri.vertices[v].y == doctest::Approx(0.5));
    }
  CHECK(tri.total_area() == doctest::Approx(0.75).epsilon(1e-14));
  check_basic_invariants(tri);
}

TEST_CASE("uniform refinement counts and area") {
  Triangulation hex = make_appendix_hexagon();
  Triangulation r1 = uniform_refine(hex);
  CHECK(r1.n_cells() == 24);
  CHECK(r1.n_vertices() == 19);
  CHECK(r1.n_interior_vertices() == 7);
  CHECK(r1.n_interior_edges() == 30);
  CHECK(r1.n_interior_cells() == 12);
  CHECK(r1.n_interior_cells() == 2 * r1.n_interior_vertices() - 2);
  CHECK(r1.total_area() == doctest::Approx(hex.total_area()).epsilon(1e-13));
  check_basic_invariants(r1);

  Triangulation r2 = uniform_refine(r1);
  CHECK(r2.n_cells() == 96);
  CHECK(r2.total_area() == doctest::Approx(hex.total_area()).epsilon(1e-13));
  check_basic_invariants(r2);

  Triangulation s1 = uniform_refine(single_cell());
  CHECK(s1.n_cells() == 4);
  CHECK(s1.n_vertices() == 6);
  CHECK(s1.n_edges() == 9);
}

TEST_CASE("vertex patch structure") {
  Triangulation tri = make_appendix_hexagon();
  VertexPatch p = vertex_patch(tri, 6);
  CHECK(p.m == 6);
  std::set<int> covered(p.cells.begin(), p.cells.end());
  CHECK(int(covered.size()) == 6);

  // cyclic order: consecutive cells share exactly the spoke between them, the
  // rim edge is the cell edge not containing the center, and rim vertex i is
  // shared by rim edges i and i+1
  for (int i = 0; i < p.m; ++i) {
    int c = p.cells[i], cn = p.cells[(i + 1) % p.m];
    int shared = 0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (tri.cell_edges[c][a] == tri.cell_edges[cn][b]) {
          ++shared;
          CHECK(tri.cell_edges[c][a] == p.spoke_edges[i]);
        }
    CHECK(shared == 1);
    const auto& rim = tri.edges[p.rim_edges[i]];
    CHECK(rim[0] != p.center);
    CHECK(rim[1] != p.center);
    int prev = p.rim_vertices[(i + p.m - 1) % p.m], cur = p.rim_vertices[i];
    CHECK(((rim[0] == prev && rim[1] == cur) || (rim[0] == cur && rim[1] == prev)));
  }
  CHECK_THROWS_AS(vertex_patch(tri, 0), MeshError);
}

TEST_CASE("spoke midpoint patch size matches incidence oracle") {
  // Under red refinement the midpoint of an interior edge is incident to three
  // children of each parent cell.
  Triangulation r1 = uniform_refine(make_appendix_hexagon());
  for (int v = 7; v < r1.n_vertices(); ++v) { // midpoint vertices come after originals
    if (r1.vertex_is_boundary[v]) continue;
    int incident = 0;
    for (int c = 0; c < r1.n_cells(); ++c)
      if (r1.local_vertex_index(c, v) >= 0) ++incident;
    CHECK(incident == 6);
    VertexPatch p = vertex_patch(r1, v);
    CHECK(p.m == incident);
  }
}

TEST_CASE("counts and layers") {
  Triangulation hex = make_appendix_hexagon();
  MeshCounts mc = counts_and_layers(hex);
  CHECK(mc.assumption1);
  CHECK(mc.number_of_layers == 1);
  CHECK(mc.vertex_layer[6] == 1);

  // once refined: the original center is surrounded by interior vertices only
  Triangulation r1 = uniform_refine(hex);
  MeshCounts mc1 = counts_and_layers(r1);
  CHECK(mc1.assumption1);
  CHECK(mc1.interior_cell_identity);
  CHECK(mc1.number_of_layers == 2);
  CHECK(mc1.vertex_layer[6] == 2);
  for (int v = 7; v < r1.n_vertices(); ++v)
    if (!r1.vertex_is_boundary[v]) CHECK(mc1.vertex_layer[v] == 1);
}

TEST_CASE("crisscross generator") {
  Triangulation t1 = make_square_crisscross(1);
  CHECK(t1.n_cells() == 4);
  CHECK(t1.n_vertices() == 5);
  CHECK(t1.n_interior_vertices() == 1);
  CHECK(t1.total_area() == doctest::Approx(1.0).epsilon(1e-14));
  check_basic_invariants(t1);
  Triangulation t3 = make_square_crisscross(3);
  CHECK(t3.n_cells() == 36);
  CHECK(t3.total_area() == doctest::Approx(1.0).epsilon(1e-13));
  check_basic_invariants(t3);
}

TEST_CASE("perturbed generator is deterministic and bounded") {
  Triangulation base = refine_times(make_appendix_hexagon(), 2);
  Triangulation a = make_perturbed(base, 0.1, 1);
  Triangulation b = make_perturbed(base, 0.1, 1);
  for (int v = 0; v < base.n_vertices(); ++v) {
    CHECK(a.vertices[v].x == b.vertices[v].x);
    CHECK(a.vertices[v].y == b.vertices[v].y);
    if (base.vertex_is_boundary[v]) {
      CHECK(a.vertices[v].x == base.vertices[v].x);
      CHECK(a.vertices[v].y == base.vertices[v].y);
    } else {
      double moved = norm(a.vertices[v] - base.vertices[v]);
      double min_len = 1e300;
      for (int e = 0; e < base.n_edges(); ++e)
        if (base.edges[e][0] == v || base.edges[e][1] == v)
          min_len = std::min(min_len, base.edge_length[e]);
      CHECK(moved <= 0.1 * min_len * (1 + 1e-12));
    }
  }
  check_basic_invariants(a);
  CHECK_THROWS_AS(make_perturbed(base, 0.3, 1), MeshError);
}

TEST_CASE("patch geometry coefficient") {
  // regular hexagon fan: all six coefficients coincide and equal
  // area(A_{i-1}, A_i, A_{i+1}) / (2 cell area)
  std::vector<Point2> v;
  for (int i = 0; i < 6; ++i)
    v.push_back({std::cos(i * 3.14159265358979323846 / 3.0),
                 std::sin(i * 3.14159265358979323846 / 3.0)});
  v.push_back({0, 0});
  std::vector<std::array<int, 3>> c;
  for (int i = 0; i < 6; ++i) c.push_back({i, (i + 1) % 6, 6});
  Triangulation reg = build_triangulation(v, c);
  VertexPatch p = vertex_patch(reg, 6);
  double cell_area = reg.cell_area[p.cells[0]];
  double expect =
      signed_area(reg.vertices[p.rim_vertices[5]], reg.vertices[p.rim_vertices[0]],
                  reg.vertices[p.rim_vertices[1]]) /
      (2.0 * cell_area);
  for (int i = 0; i < 6; ++i)
    CHECK(patch_geometry(reg, p, i) == doctest::Approx(expect).epsilon(1e-13));

  // collinear rim triple: the grid vertex (1/2, 1/2) of crisscross(2) has
  // block centers and edge midpoints alternating along straight lines
  Triangulation cc = make_square_crisscross(2);
  int mid = -1;
  for (int i = 0; i < cc.n_vertices(); ++i)
    if (!cc.vertex_is_boundary[i] && std::abs(cc.vertices[i].x - 0.5) < 1e-14 &&
        std::abs(cc.vertices[i].y - 0.5) < 1e-14)
      mid = i;
  REQUIRE(mid >= 0);
  VertexPatch pc = vertex_patch(cc, mid);
  CHECK(pc.m == 8);
  int zeros = 0;
  for (int i = 0; i < pc.m; ++i)
    if (std::abs(patch_geometry(cc, pc, i)) < 1e-14) ++zeros;
  CHECK(zeros == 4);
}

TEST_CASE("patch geometry equals trigonometric formula") {
  // oracle: d_{m+i} d_{m+i+1} sin(alpha_i + beta_i) via explicit angles
  Triangulation tri = make_perturbed(refine_times(make_appendix_hexagon(), 2), 0.2, 11);
  int tested = 0;
  for (int vv = 0; vv < tri.n_vertices(); ++vv) {
    if (tri.vertex_is_boundary[vv]) continue;
    VertexPatch p = vertex_patch(tri, vv);
    for (int i = 0; i < p.m; ++i) {
      const Point2& prev = tri.vertices[p.rim_vertices[(i + p.m - 1) % p.m]];
      const Point2& cur = tri.vertices[p.rim_vertices[i]];
      const Point2& next = tri.vertices[p.rim_vertices[i + 1 == p.m ? 0 : i + 1]];
      const Point2& ctr = tri.vertices[vv];
      double d1 = norm(prev - cur), d2 = norm(next - cur);
      double alpha = std::acos(dot(prev - cur, ctr - cur) / (d1 * norm(ctr - cur)));
      double beta = std::acos(dot(next - cur, ctr - cur) / (d2 * norm(ctr - cur)));
      double s = tri.cell_area[p.cells[i]] + tri.cell_area[p.cells[(i + 1) % p.m]];
      double trig = d1 * d2 * std::sin(alpha + beta) / (2.0 * s);
      CHECK(patch_geometry(tri, p, i) == doctest::Approx(trig).epsilon(1e-12));
      ++tested;
    }
  }
  CHECK(tested > 100);
}

TEST_CASE("cell patch requires interior cell") {
  Triangulation r1 = uniform_refine(make_appendix_hexagon());
  int done = 0;
  for (int c = 0; c < r1.n_cells(); ++c) {
    if (!r1.cell_is_interior[c]) {
      CHECK_THROWS_AS(cell_patch(r1, c), MeshError);
      continue;
    }
    CellPatch cp = cell_patch(r1, c);
    for (int j = 0; j < 3; ++j) {
      CHECK(cp.neighbors[j] >= 0);
      CHECK(cp.neighbors[j] != c);
    }
    ++done;
  }
  CHECK(done == 12);
}

TEST_CASE("mesh text format round trip") {
  Triangulation tri = make_perturbed(uniform_refine(make_appendix_hexagon()), 0.1, 5);
  std::ostringstream os;
  write_mesh(os, tri);
  std::istringstream is("# a comment line\n" + os.str());
  Triangulation back = read_mesh(is);
  std::ostringstream os2;
  write_mesh(os2, back);
  CHECK(os.str() == os2.str());

  std::istringstream bad("3 1\n0 0\n1 0\n");
  CHECK_THROWS_AS(read_mesh(bad), MeshError);
}

TEST_CASE("eigenvalue-study grids are valid") {
  Triangulation sq = make_eig_square_grid();
  CHECK(sq.n_cells() == 32);
  CHECK(sq.total_area() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(counts_and_layers(sq).assumption1);
  check_basic_invariants(sq);
  Triangulation hx = make_eig_hexagon_grid();
  CHECK(hx.n_cells() == 24);
  CHECK(counts_and_layers(hx).assumption1);
  check_basic_invariants(hx);
}
