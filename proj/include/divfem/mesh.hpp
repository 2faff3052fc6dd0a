#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "divfem/geometry.hpp"

namespace divfem {

/// Immutable 2D simplicial mesh with derived edge topology.
///
/// Conventions:
///  - cells are stored counterclockwise (input cells are reoriented if needed);
///  - edges are vertex pairs (lo, hi) with lo < hi, numbered lexicographically;
///  - local edge i of a cell is opposite local vertex i and connects local
///    vertices i+1, i+2 (mod 3);
///  - the sign sigma of a (cell, local edge) is +1 iff the cell's
///    counterclockwise traversal runs lo -> hi along that edge;
///  - the global edge tangent runs lo -> hi, the global edge normal is the
///    tangent rotated by -90 degrees, so that n x t = 1 > 0.
class Triangulation {
public:
  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> cells;
  std::vector<std::array<int, 2>> edges;

  std::vector<std::array<int, 3>> cell_edges;     // edge index per local edge
  std::vector<std::array<int, 3>> cell_edge_sign; // sigma per local edge
  std::vector<std::array<int, 2>> edge_cells;     // incident cells, -1 if none

  std::vector<bool> vertex_is_boundary;
  std::vector<bool> edge_is_boundary;
  std::vector<bool> cell_is_interior; // all three edges interior (T_h^i)

  std::vector<double> cell_area;  // positive
  std::vector<double> edge_length;

  // vertex -> incident cells, in cell-index order
  std::vector<std::vector<int>> vertex_cells;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }

  int n_interior_vertices() const;
  int n_interior_edges() const;
  int n_interior_cells() const;

  double max_edge_length() const;
  double total_area() const;

  /// Index of the edge between two vertices, or -1.
  int find_edge(int a, int b) const;

  /// Local index of vertex v within cell c; -1 if absent.
  int local_vertex_index(int c, int v) const;

  /// The cell adjacent to `c` across its local edge `le`, or -1.
  int neighbor(int c, int le) const;
};

/// Interior vertex patch around a center vertex O, with the cyclic labeling
/// used by the basis coefficient formulas: cells[i] sits between spokes
/// spoke_edges[i-1] and spoke_edges[i]; rim_vertices[i] is the far endpoint of
/// spoke_edges[i]; rim_edges[i] (opposite O in cells[i]) connects
/// rim_vertices[i-1] and rim_vertices[i] (indices mod m).
struct VertexPatch {
  int center = -1;
  int m = 0;
  std::vector<int> cells;        // CCW, starting at the lowest incident cell index
  std::vector<int> spoke_edges;  // spoke_edges[i] shared by cells[i], cells[(i+1)%m]
  std::vector<int> rim_edges;
  std::vector<int> rim_vertices; // far endpoint of spoke_edges[i]
};

/// Interior cell patch: an interior cell plus its three neighbors.
struct CellPatch {
  int center_cell = -1;
  std::array<int, 3> neighbors{}; // neighbors[j] across local edge j
};

struct MeshCounts {
  int n_vertices = 0, n_interior_vertices = 0, n_boundary_vertices = 0;
  int n_edges = 0, n_interior_edges = 0, n_boundary_edges = 0;
  int n_cells = 0, n_interior_cells = 0;
  int euler = 0; // #X - #E + #T
  bool assumption1 = false;            // every boundary vertex touches an interior vertex
  bool interior_cell_identity = false; // #T^i == 2 #X^i - 2
  std::vector<int> vertex_layer;       // k for X^{b,+k}; 0 for boundary vertices
  int number_of_layers = 0;
};

Triangulation build_triangulation(std::vector<Point2> vertices,
                                  std::vector<std::array<int, 3>> cells);

/// Red refinement: each cell split into 4 congruent children via edge
/// midpoints. Vertex order: originals first, then midpoints in edge order.
/// Child order per parent: corner 0, corner 1, corner 2, center.
Triangulation uniform_refine(const Triangulation& tri);

Triangulation refine_times(Triangulation tri, int times);

VertexPatch vertex_patch(const Triangulation& tri, int v);
CellPatch cell_patch(const Triangulation& tri, int c);

MeshCounts counts_and_layers(const Triangulation& tri);

/// Signed coefficient c_i = area(A_{i-1}, A_i, A_{i+1}) / (S_i + S_{i+1})
/// attached to rim vertex `i` (0-based) of a vertex patch. Equals
/// d_{m+i} d_{m+i+1} sin(alpha_i + beta_i) / (2 (S_i + S_{i+1})) but is
/// computed from cross products only.
double patch_geometry(const Triangulation& tri, const VertexPatch& patch, int i);

// Generators ---------------------------------------------------------------

/// The 6-cell fan on the hexagon (0,0),(1/2,0),(1,1/2),(1,1),(1/2,1),(0,1/2)
/// around the center (1/2,1/2).
Triangulation make_appendix_hexagon();

/// Unit square cut into n x n blocks, each block split into 4 triangles by
/// its center point.
Triangulation make_square_crisscross(int n);

/// Deterministically perturb interior vertices of `base`; each moves by at
/// most `magnitude` times its shortest incident edge. 0 <= magnitude < 0.3.
Triangulation make_perturbed(const Triangulation& base, double magnitude,
                             std::uint64_t seed);

/// Reconstructed initial grids of the two vector-figure eigenvalue studies:
/// a 4x4-block triangulated square on (-2,2)^2 and the hexagon on (-2,2)^2.
Triangulation make_eig_square_grid();
Triangulation make_eig_hexagon_grid();

// Text format --------------------------------------------------------------
//
// Line 1: "nv nc"; nv lines "x y"; nc lines "i j k" (0-based). Lines starting
// with '#' are comments.

void write_mesh(std::ostream& os, const Triangulation& tri);
Triangulation read_mesh(std::istream& is);
void write_mesh_file(const std::string& path, const Triangulation& tri);
Triangulation read_mesh_file(const std::string& path);

} // namespace divfem
