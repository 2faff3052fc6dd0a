#include "divfem/spaces.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "divfem/errors.hpp"

namespace divfem {

std::array<int, 9> DofMap::cell_dofs(const Triangulation& tri, int c) const {
  std::array<int, 9> d;
  for (int i = 0; i < 3; ++i) {
    const auto& ed = edge_dofs[tri.cell_edges[c][i]];
    d[3 * i + 0] = ed[0];
    d[3 * i + 1] = ed[1];
    d[3 * i + 2] = ed[2];
  }
  return d;
}

DofMap build_sbdfm_space(const Triangulation& tri) {
  DofMap dm;
  dm.edge_dofs.assign(tri.n_edges(), {-1, -1, -1});
  int next = 0;
  for (int e = 0; e < tri.n_edges(); ++e) {
    if (tri.edge_is_boundary[e]) continue;
    dm.edge_dofs[e] = {next, next + 1, next + 2};
    next += 3;
  }
  dm.dim = next;
  return dm;
}

namespace {

/// Accumulates the cellwise polynomial pieces of one derived basis function,
/// then emits its sBDFM DOF column. Interface DOFs are extracted from both
/// incident cells and must agree; boundary DOFs must vanish.
class ColumnAccumulator {
public:
  ColumnAccumulator(const Triangulation& tri, const DofMap& dm) : tri_(tri), dm_(dm) {}

  void add(int cell, const VecPoly& piece) {
    auto it = pieces_.find(cell);
    if (it == pieces_.end())
      pieces_.emplace(cell, piece);
    else
      it->second += piece;
  }

  int support_cells() const { return static_cast<int>(pieces_.size()); }
  const std::map<int, VecPoly>& pieces() const { return pieces_; }

  /// Appends (row, col, value) triplets for column `col`.
  void emit(int col, std::vector<Eigen::Triplet<double>>& out, const char* what) const {
    std::vector<std::pair<std::array<int, 9>, std::array<double, 9>>> per_cell;
    double scale = 0.0;
    for (const auto& [c, poly] : pieces_) {
      CellDofFrame cf = cell_dof_frame(tri_, c);
      std::array<double, 9> d = sbdfm_dof_values(cf, poly);
      for (double x : d) scale = std::max(scale, std::abs(x));
      per_cell.emplace_back(dm_.cell_dofs(tri_, c), d);
    }
    const double tol = 1e-8 * std::max(1.0, scale);
    std::map<int, double> values;
    for (const auto& [g, d] : per_cell) {
      for (int s = 0; s < 9; ++s) {
        if (g[s] < 0) {
          if (std::abs(d[s]) > tol)
            throw MeshError(std::string("basis construction: nonzero boundary DOF in ") + what);
          continue;
        }
        auto it = values.find(g[s]);
        if (it == values.end())
          values.emplace(g[s], d[s]);
        else if (std::abs(it->second - d[s]) > tol)
          throw MeshError(std::string("basis construction: interface DOF mismatch in ") + what);
      }
    }
    for (const auto& [row, v] : values)
      if (v != 0.0) out.emplace_back(row, col, v);
  }

private:
  const Triangulation& tri_;
  const DofMap& dm_;
  std::map<int, VecPoly> pieces_;
};

int local_of_vertex(const Triangulation& tri, int c, int v) {
  int l = tri.local_vertex_index(c, v);
  if (l < 0) throw MeshError("internal: vertex not in cell");
  return l;
}

int local_of_edge(const Triangulation& tri, int c, int e) {
  for (int i = 0; i < 3; ++i)
    if (tri.cell_edges[c][i] == e) return i;
  throw MeshError("internal: edge not in cell");
}

/// psi_T pieces on the patch of interior cell t0 (shared by the kernel and
/// el bases).
void accumulate_psi_T(const Triangulation& tri, int t0, ColumnAccumulator& acc,
                      std::vector<std::pair<int, ScalarPoly>>* potentials) {
  CellPatch cp = cell_patch(tri, t0);
  CellFrame f0 = cell_frame(tri, t0);
  double s0 = tri.cell_area[t0];
  std::array<double, 3> rho;
  VecPoly center;
  for (int j = 0; j < 3; ++j) {
    int tj = cp.neighbors[j];
    double sj = tri.cell_area[tj];
    rho[j] = sj / (sj + s0);
    center += gen_w_edge(f0, j) * ((sj - 2.0 * s0) / (3.0 * (sj + s0)));
    center += gen_w_pair(f0, j) * (1.0 / 3.0);
  }
  acc.add(t0, center);
  if (potentials) potentials->emplace_back(t0, zeta_cell_center_piece(rho));

  for (int j = 0; j < 3; ++j) {
    int tj = cp.neighbors[j];
    int e = tri.cell_edges[t0][j];
    CellFrame fj = cell_frame(tri, tj);
    int le = local_of_edge(tri, tj, e);
    acc.add(tj, gen_w_edge(fj, le) * rho[j]);
    if (potentials) {
      int la = local_of_vertex(tri, tj, tri.edges[e][0]);
      int lb = local_of_vertex(tri, tj, tri.edges[e][1]);
      potentials->emplace_back(tj, zeta_cell_neighbor_piece(la, lb, le, rho[j]));
    }
  }
}

} // namespace

KernelBasis build_kernel_basis(const Triangulation& tri, const DofMap& dm) {
  MeshCounts mc = counts_and_layers(tri);
  if (!mc.assumption1)
    throw MeshError("build_kernel_basis: Assumption 1 violated (a boundary vertex "
                    "has no interior neighbor)");

  KernelBasis kb;
  std::vector<Eigen::Triplet<double>> trips;
  int col = 0;

  for (int v = 0; v < tri.n_vertices(); ++v) {
    if (tri.vertex_is_boundary[v]) continue;
    VertexPatch p = vertex_patch(tri, v);
    std::vector<double> c(p.m);
    for (int i = 0; i < p.m; ++i) c[i] = patch_geometry(tri, p, i);

    ColumnAccumulator acc(tri, dm);
    std::vector<std::pair<int, ScalarPoly>> pot;
    for (int i = 0; i < p.m; ++i) {
      int cell = p.cells[i];
      int im1 = (i + p.m - 1) % p.m;
      CellFrame f = cell_frame(tri, cell);
      int lc = local_of_vertex(tri, cell, v);
      VecPoly piece = gen_w_pair(f, lc);
      piece += gen_w_edge(f, local_of_edge(tri, cell, p.spoke_edges[i])) * c[i];
      piece += gen_w_edge(f, local_of_edge(tri, cell, p.spoke_edges[im1])) * c[im1];
      acc.add(cell, piece);
      pot.emplace_back(cell,
                       zeta_vertex_piece(lc, local_of_vertex(tri, cell, p.rim_vertices[im1]),
                                         local_of_vertex(tri, cell, p.rim_vertices[i]), c[i],
                                         c[im1]));
    }
    acc.emit(col, trips, "psi^A");
    kb.basis.labels.push_back({ColumnLabel::Kind::KernelVertex, v, acc.support_cells()});
    kb.potentials.pieces.push_back(std::move(pot));
    ++col;
  }
  kb.n_vertex_columns = col;

  for (int t = 0; t < tri.n_cells(); ++t) {
    if (!tri.cell_is_interior[t]) continue;
    ColumnAccumulator acc(tri, dm);
    std::vector<std::pair<int, ScalarPoly>> pot;
    accumulate_psi_T(tri, t, acc, &pot);
    acc.emit(col, trips, "psi_T");
    kb.basis.labels.push_back({ColumnLabel::Kind::KernelCell, t, acc.support_cells()});
    kb.potentials.pieces.push_back(std::move(pot));
    ++col;
  }

  kb.basis.mat.resize(dm.dim, col);
  kb.basis.mat.setFromTriplets(trips.begin(), trips.end());
  kb.basis.mat.makeCompressed();
  return kb;
}

namespace {

/// Geometry of the 4- or 6-cell configuration around an interior edge e with
/// endpoints a1 (interior, or the lower interior index) and a3.
struct EdgeConfig {
  int a1, a2, a3, a4;     // vertices: a2 third vertex of t1, a4 of t2
  int t1, t2;             // t1 right of a1->a3, t2 left
  int e1, e2, e3, e4;     // e1=(a1,a2), e2=(a2,a3), e3=(a3,a4), e4=(a1,a4)
  int t3, t4;             // across e1 from t1, across e4 from t2
  int t5 = -1, t6 = -1;   // across e3 from t2, across e2 from t1 (both-interior case)
  bool a3_boundary = false;
};

EdgeConfig edge_config(const Triangulation& tri, int e) {
  const auto& ev = tri.edges[e];
  bool b0 = tri.vertex_is_boundary[ev[0]];
  bool b1 = tri.vertex_is_boundary[ev[1]];
  if (b0 && b1)
    throw MeshError("build_el_basis: interior edge with two boundary endpoints is "
                    "unsupported; refine the mesh once");

  EdgeConfig cfg;
  if (b1) {
    cfg.a1 = ev[0];
    cfg.a3 = ev[1];
  } else if (b0) {
    cfg.a1 = ev[1];
    cfg.a3 = ev[0];
  } else {
    cfg.a1 = ev[0];
    cfg.a3 = ev[1];
  }
  cfg.a3_boundary = b0 || b1;

  // t2 is the cell whose CCW traversal runs a1 -> a3 (interior lies left).
  int delta = (cfg.a1 == ev[0]) ? +1 : -1;
  cfg.t1 = cfg.t2 = -1;
  for (int c : tri.edge_cells[e]) {
    if (c < 0) continue;
    int le = local_of_edge(tri, c, e);
    if (tri.cell_edge_sign[c][le] * delta > 0)
      cfg.t2 = c;
    else
      cfg.t1 = c;
  }
  if (cfg.t1 < 0 || cfg.t2 < 0) throw MeshError("build_el_basis: edge is not interior");

  cfg.a2 = tri.cells[cfg.t1][local_of_edge(tri, cfg.t1, e)];
  cfg.a4 = tri.cells[cfg.t2][local_of_edge(tri, cfg.t2, e)];
  cfg.e1 = tri.find_edge(cfg.a1, cfg.a2);
  cfg.e2 = tri.find_edge(cfg.a2, cfg.a3);
  cfg.e3 = tri.find_edge(cfg.a3, cfg.a4);
  cfg.e4 = tri.find_edge(cfg.a1, cfg.a4);
  auto other = [&tri](int edge, int cell) {
    const auto& inc = tri.edge_cells[edge];
    return inc[0] == cell ? inc[1] : inc[0];
  };
  cfg.t3 = other(cfg.e1, cfg.t1);
  cfg.t4 = other(cfg.e4, cfg.t2);
  if (cfg.t3 < 0 || cfg.t4 < 0)
    throw MeshError("build_el_basis: missing neighbor around interior endpoint");
  if (!cfg.a3_boundary) {
    cfg.t5 = other(cfg.e3, cfg.t2);
    cfg.t6 = other(cfg.e2, cfg.t1);
    if (cfg.t5 < 0 || cfg.t6 < 0)
      throw MeshError("build_el_basis: missing neighbor around interior endpoint");
  }
  return cfg;
}

void accumulate_psi_e(const Triangulation& tri, int e, ColumnAccumulator& acc) {
  EdgeConfig cfg = edge_config(tri, e);
  const Point2& A1 = tri.vertices[cfg.a1];
  const Point2& A2 = tri.vertices[cfg.a2];
  const Point2& A3 = tri.vertices[cfg.a3];
  const Point2& A4 = tri.vertices[cfg.a4];
  double S1 = tri.cell_area[cfg.t1], S2 = tri.cell_area[cfg.t2];
  double S3 = tri.cell_area[cfg.t3], S4 = tri.cell_area[cfg.t4];

  CellFrame f1 = cell_frame(tri, cfg.t1);
  CellFrame f2 = cell_frame(tri, cfg.t2);
  CellFrame f3 = cell_frame(tri, cfg.t3);
  CellFrame f4 = cell_frame(tri, cfg.t4);

  // Local vertex indices inside t1/t2 (edge k is opposite vertex k).
  int l1_a1 = local_of_vertex(tri, cfg.t1, cfg.a1);
  int l1_a2 = local_of_vertex(tri, cfg.t1, cfg.a2);
  int l1_a3 = local_of_vertex(tri, cfg.t1, cfg.a3);
  int l2_a1 = local_of_vertex(tri, cfg.t2, cfg.a1);
  int l2_a3 = local_of_vertex(tri, cfg.t2, cfg.a3);
  int l2_a4 = local_of_vertex(tri, cfg.t2, cfg.a4);

  // d_{m+i} d_{m+i+1} sin-type factors as signed areas.
  double qA3 = 0.5 * cross(A4 - A3, A2 - A3);
  double d2sq = dot(A2 - A3, A2 - A3), d3sq = dot(A4 - A3, A4 - A3);
  double dsq = dot(A3 - A1, A3 - A1);

  if (cfg.a3_boundary) {
    double cw = (qA3 - (S1 + S2)) / (S1 + S2);
    VecPoly p1 = gen_y_pair(f1, l1_a1);                                  // y_{T1,e1,e}
    p1 += gen_w_pair(f1, l1_a1) * (dot(A1 - A2, A3 - A2) / d2sq);        // d1 cos(a2)/d2
    p1 += gen_w_edge(f1, l1_a3) * (S3 / (S3 + S1));                      // w_{T1,e1}
    p1 += gen_w_edge(f1, l1_a2) * cw;                                    // w_{T1,e}
    acc.add(cfg.t1, p1);

    VecPoly p2 = gen_y_pair(f2, l2_a1) * -1.0;                           // -y_{T2,e4,e}
    p2 += gen_w_pair(f2, l2_a1) * (dot(A1 - A4, A3 - A4) / d3sq);        // d4 cos(a4)/d3
    p2 += gen_w_edge(f2, l2_a3) * (S4 / (S4 + S2));                      // w_{T2,e4}
    p2 += gen_w_edge(f2, l2_a4) * cw;                                    // w_{T2,e}
    acc.add(cfg.t2, p2);

    acc.add(cfg.t3, gen_w_edge(f3, local_of_edge(tri, cfg.t3, cfg.e1)) * (S3 / (S3 + S1)));
    acc.add(cfg.t4, gen_w_edge(f4, local_of_edge(tri, cfg.t4, cfg.e4)) * (S4 / (S4 + S2)));
    return;
  }

  double S5 = tri.cell_area[cfg.t5], S6 = tri.cell_area[cfg.t6];
  double qA1 = 0.5 * cross(A2 - A1, A4 - A1);
  double cw = (qA3 - qA1) / (2.0 * (S1 + S2));

  VecPoly p1 = gen_w_edge(f1, l1_a3) * (S3 / (2.0 * (S3 + S1)) - 1.0);   // w_{T1,e1}
  p1 += gen_w_edge(f1, l1_a1) * (1.0 - S6 / (2.0 * (S6 + S1)));          // w_{T1,e2}
  p1 += gen_w_edge(f1, l1_a2) * cw;                                      // w_{T1,e}
  p1 += gen_w_pair(f1, l1_a2) * (dot(A1 - A3, A2 - A3) / dsq - 0.5);     // w_{T1,e1,e2}
  p1 += gen_w_pair(f1, l1_a1) * 0.5;                                     // w_{T1,e1,e}
  p1 += gen_w_pair(f1, l1_a3) * -0.5;                                    // w_{T1,e2,e}
  p1 += gen_y_pair(f1, l1_a2);                                           // y_{T1,e1,e2}
  acc.add(cfg.t1, p1);

  VecPoly p2 = gen_w_edge(f2, l2_a3) * (S4 / (2.0 * (S4 + S2)) - 1.0);   // w_{T2,e4}
  p2 += gen_w_edge(f2, l2_a1) * (1.0 - S5 / (2.0 * (S5 + S2)));          // w_{T2,e3}
  p2 += gen_w_edge(f2, l2_a4) * cw;                                      // w_{T2,e}
  p2 += gen_w_pair(f2, l2_a4) * (0.5 - dot(A3 - A1, A4 - A1) / dsq);     // w_{T2,e3,e4}
  p2 += gen_w_pair(f2, l2_a1) * 0.5;                                     // w_{T2,e4,e}
  p2 += gen_w_pair(f2, l2_a3) * -0.5;                                    // w_{T2,e3,e}
  p2 += gen_y_pair(f2, l2_a4) * -1.0;                                    // -y_{T2,e3,e4}
  acc.add(cfg.t2, p2);

  acc.add(cfg.t3, gen_w_edge(f3, local_of_edge(tri, cfg.t3, cfg.e1)) * (S3 / (2.0 * (S3 + S1))));
  acc.add(cfg.t4, gen_w_edge(f4, local_of_edge(tri, cfg.t4, cfg.e4)) * (S4 / (2.0 * (S4 + S2))));
  CellFrame f5 = cell_frame(tri, cfg.t5);
  CellFrame f6 = cell_frame(tri, cfg.t6);
  acc.add(cfg.t5, gen_w_edge(f5, local_of_edge(tri, cfg.t5, cfg.e3)) * (-S5 / (2.0 * (S5 + S2))));
  acc.add(cfg.t6, gen_w_edge(f6, local_of_edge(tri, cfg.t6, cfg.e2)) * (-S6 / (2.0 * (S6 + S1))));
}

} // namespace

CombinationMatrix build_el_basis(const Triangulation& tri, const DofMap& dm) {
  MeshCounts mc = counts_and_layers(tri);
  if (!mc.assumption1)
    throw MeshError("build_el_basis: Assumption 1 violated (a boundary vertex has "
                    "no interior neighbor)");

  CombinationMatrix cm;
  std::vector<Eigen::Triplet<double>> trips;
  int col = 0;
  for (int e = 0; e < tri.n_edges(); ++e) {
    if (tri.edge_is_boundary[e]) continue;
    ColumnAccumulator acc(tri, dm);
    accumulate_psi_e(tri, e, acc);
    acc.emit(col, trips, "psi_e");
    cm.labels.push_back({ColumnLabel::Kind::ElEdge, e, acc.support_cells()});
    ++col;
  }
  for (int t = 0; t < tri.n_cells(); ++t) {
    if (!tri.cell_is_interior[t]) continue;
    ColumnAccumulator acc(tri, dm);
    accumulate_psi_T(tri, t, acc, nullptr);
    acc.emit(col, trips, "psi_T");
    cm.labels.push_back({ColumnLabel::Kind::ElCell, t, acc.support_cells()});
    ++col;
  }
  cm.mat.resize(dm.dim, col);
  cm.mat.setFromTriplets(trips.begin(), trips.end());
  cm.mat.makeCompressed();
  return cm;
}

SpMat kernel_in_el_coordinates(const Triangulation& tri) {
  // Column index of psi_e / psi_T within the el basis.
  std::vector<int> edge_col(tri.n_edges(), -1), cell_col(tri.n_cells(), -1);
  int col = 0;
  for (int e = 0; e < tri.n_edges(); ++e)
    if (!tri.edge_is_boundary[e]) edge_col[e] = col++;
  for (int t = 0; t < tri.n_cells(); ++t)
    if (tri.cell_is_interior[t]) cell_col[t] = col++;
  const int n_el = col;

  std::vector<Eigen::Triplet<double>> trips;
  int kcol = 0;
  for (int v = 0; v < tri.n_vertices(); ++v) {
    if (tri.vertex_is_boundary[v]) continue;
    VertexPatch p = vertex_patch(tri, v);
    std::map<int, double> entries;
    for (int i = 0; i < p.m; ++i) {
      int e = p.spoke_edges[i];
      int a = p.rim_vertices[i];
      // psi_e as stored is oriented with A1 = the interior endpoint, or the
      // lower index when both are interior.
      double s = (tri.vertex_is_boundary[a] || v < a) ? 1.0 : -1.0;
      entries[edge_col[e]] += s;
      if (!tri.vertex_is_boundary[a]) {
        entries[cell_col[p.cells[i]]] += 0.5;
        entries[cell_col[p.cells[(i + 1) % p.m]]] += 0.5;
      }
    }
    for (const auto& [r, val] : entries) trips.emplace_back(r, kcol, val);
    ++kcol;
  }
  for (int t = 0; t < tri.n_cells(); ++t) {
    if (!tri.cell_is_interior[t]) continue;
    trips.emplace_back(cell_col[t], kcol, 1.0);
    ++kcol;
  }
  SpMat r(n_el, kcol);
  r.setFromTriplets(trips.begin(), trips.end());
  r.makeCompressed();
  return r;
}

CombinationMatrix build_p1div_space(const Triangulation& tri, const DofMap& dm) {
  CombinationMatrix cm;
  std::vector<Eigen::Triplet<double>> trips;
  int col = 0;

  for (int v = 0; v < tri.n_vertices(); ++v) {
    if (tri.vertex_is_boundary[v]) continue;
    VertexPatch p = vertex_patch(tri, v);
    const int m = p.m;
    const int n = 6 * m; // per cell: 3 vertices x 2 components

    // Unknown layout: cell q, local vertex lv, component comp: q*6 + lv*2 + comp.
    auto unknown = [](int q, int lv, int comp) { return q * 6 + lv * 2 + comp; };

    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
    int row = 0;
    auto add_vertex_normal = [&](int q, int vert, const Vec2& nrm, double w) {
      int lv = local_of_vertex(tri, p.cells[q], vert);
      C(row, unknown(q, lv, 0)) += w * nrm.x;
      C(row, unknown(q, lv, 1)) += w * nrm.y;
    };
    auto add_edge_tangent_mean = [&](int q, int va, int vb, const Vec2& t, double w) {
      for (int vert : {va, vb}) {
        int lv = local_of_vertex(tri, p.cells[q], vert);
        C(row, unknown(q, lv, 0)) += 0.5 * w * t.x;
        C(row, unknown(q, lv, 1)) += 0.5 * w * t.y;
      }
    };

    for (int i = 0; i < m; ++i) {
      int qL = i, qR = (i + 1) % m;
      int e = p.spoke_edges[i];
      Vec2 te = (tri.vertices[tri.edges[e][1]] - tri.vertices[tri.edges[e][0]]) /
                tri.edge_length[e];
      Vec2 ne = rot90cw(te);
      for (int vert : {v, p.rim_vertices[i]}) {
        add_vertex_normal(qL, vert, ne, 1.0);
        add_vertex_normal(qR, vert, ne, -1.0);
        ++row;
      }
      add_edge_tangent_mean(qL, v, p.rim_vertices[i], te, 1.0);
      add_edge_tangent_mean(qR, v, p.rim_vertices[i], te, -1.0);
      ++row;
    }
    for (int i = 0; i < m; ++i) {
      int e = p.rim_edges[i];
      int va = tri.edges[e][0], vb = tri.edges[e][1];
      Vec2 te = (tri.vertices[vb] - tri.vertices[va]) / tri.edge_length[e];
      Vec2 ne = rot90cw(te);
      for (int vert : {va, vb}) {
        add_vertex_normal(i, vert, ne, 1.0);
        ++row;
      }
      add_edge_tangent_mean(i, va, vb, te, 1.0);
      ++row;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double thresh = 1e-10 * sv(0);
    int nullity = 0;
    for (int i = 0; i < n; ++i)
      if (sv(i) < thresh) ++nullity;
    if (nullity != 3)
      throw MeshError("build_p1div_space: patch nullspace dimension is " +
                      std::to_string(nullity) + " (expected 3) at vertex " + std::to_string(v));
    Eigen::MatrixXd N = svd.matrixV().rightCols(3);

    // Hats in the same parameterization: lambda_v times each unit vector.
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, 2);
    for (int q = 0; q < m; ++q) {
      int lv = local_of_vertex(tri, p.cells[q], v);
      H(unknown(q, lv, 0), 0) = 1.0;
      H(unknown(q, lv, 1), 1) = 1.0;
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(H);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, 2);
    Eigen::MatrixXd resid = N - Q * (Q.transpose() * N);
    Eigen::JacobiSVD<Eigen::MatrixXd> rsvd(resid, Eigen::ComputeFullU);
    if (rsvd.singularValues()(0) < 1e-8 ||
        (rsvd.singularValues().size() > 1 && rsvd.singularValues()(1) > 1e-8 * rsvd.singularValues()(0)))
      throw MeshError("build_p1div_space: third mode extraction failed at vertex " +
                      std::to_string(v));
    Eigen::VectorXd third = rsvd.matrixU().col(0);

    // Emit the three columns: hat_x, hat_y, third mode.
    auto emit_mode = [&](const Eigen::VectorXd& u, ColumnLabel::Kind kind, bool normalize) {
      ColumnAccumulator acc(tri, dm);
      for (int q = 0; q < m; ++q) {
        VecPoly field;
        for (int lv = 0; lv < 3; ++lv) {
          field.x += ScalarPoly::lambda(lv) * u(unknown(q, lv, 0));
          field.y += ScalarPoly::lambda(lv) * u(unknown(q, lv, 1));
        }
        acc.add(p.cells[q], field);
      }
      // Collect the column, optionally rescaled so the largest entry is +1.
      std::vector<Eigen::Triplet<double>> local;
      acc.emit(col, local, "p1div mode");
      double scale = 1.0;
      if (normalize) {
        double best = 0.0;
        for (const auto& t : local)
          if (std::abs(t.value()) > std::abs(best)) best = t.value();
        if (best == 0.0) throw MeshError("build_p1div_space: zero third mode");
        scale = 1.0 / best;
      }
      for (const auto& t : local) trips.emplace_back(t.row(), t.col(), t.value() * scale);
      cm.labels.push_back({kind, v, acc.support_cells()});
      ++col;
    };
    emit_mode(H.col(0), ColumnLabel::Kind::HatX, false);
    emit_mode(H.col(1), ColumnLabel::Kind::HatY, false);
    emit_mode(third, ColumnLabel::Kind::P1Third, true);
  }

  cm.mat.resize(dm.dim, col);
  cm.mat.setFromTriplets(trips.begin(), trips.end());
  cm.mat.makeCompressed();
  return cm;
}

Vector interpolate(const Triangulation& tri, const DofMap& dm, const VectorField& field) {
  Vector x = Vector::Zero(dm.dim);
  for (int e = 0; e < tri.n_edges(); ++e) {
    const auto& d = dm.edge_dofs[e];
    if (d[0] < 0) continue;
    const Point2& lo = tri.vertices[tri.edges[e][0]];
    const Point2& hi = tri.vertices[tri.edges[e][1]];
    Vec2 t = (hi - lo) / tri.edge_length[e];
    Vec2 n = rot90cw(t);
    double n0 = 0.0, n1 = 0.0, tm = 0.0;
    for (const auto& q : edge_rule_degree5()) {
      Vec2 val = field(lo + q.s * (hi - lo));
      double vn = dot(val, n);
      n0 += q.w * vn;
      n1 += q.w * vn * (2.0 * q.s - 1.0);
      tm += q.w * dot(val, t);
    }
    x(d[0]) = n0;
    x(d[1]) = 3.0 * n1;
    x(d[2]) = tm;
  }
  return x;
}

VecPoly cell_field(const Triangulation& tri, const DofMap& dm, const Vector& coeffs, int c) {
  CellDofFrame cf = cell_dof_frame(tri, c);
  std::array<VecPoly, 9> phi = sbdfm_global_nodal_basis(cf);
  std::array<int, 9> g = dm.cell_dofs(tri, c);
  VecPoly r;
  for (int s = 0; s < 9; ++s)
    if (g[s] >= 0 && coeffs(g[s]) != 0.0) r += phi[s] * coeffs(g[s]);
  return r;
}

FieldSample evaluate_field(const Triangulation& tri, const DofMap& dm, const Vector& coeffs,
                           const Point2& x) {
  const double tol = 1e-12;
  for (int c = 0; c < tri.n_cells(); ++c) {
    CellFrame f = cell_frame(tri, c);
    Bary b = f.barycentric(x);
    if (b.l1 < -tol || b.l2 < -tol || b.l3 < -tol) continue;
    VecPoly v = cell_field(tri, dm, coeffs, c);
    FieldSample s;
    s.value = v.eval(b);
    s.div = div_of(v, f).eval(b);
    s.cell = c;
    return s;
  }
  throw MeshError("evaluate_field: point outside the mesh");
}

ElMembershipReport verify_el_membership(const Triangulation& tri, const DofMap& dm,
                                        const Vector& coeffs) {
  ElMembershipReport rep;
  rep.field_scale = coeffs.size() ? coeffs.cwiseAbs().maxCoeff() : 0.0;

  std::vector<std::array<double, 9>> cell_dof_values(tri.n_cells());
  for (int c = 0; c < tri.n_cells(); ++c) {
    CellFrame f = cell_frame(tri, c);
    CellDofFrame cf = cell_dof_frame(tri, c);
    VecPoly v = cell_field(tri, dm, coeffs, c);

    // (a) elementwise divergence constancy
    ScalarPoly dv = div_of(v, f);
    double dc = dv.eval({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    for (const auto& q : tri_rule_degree6())
      rep.max_div_deviation = std::max(rep.max_div_deviation, std::abs(dv.eval(q.b) - dc));

    // (b) normal-trace linearity: second difference at symmetric Gauss points
    const auto& er = edge_rule_degree5();
    for (int i = 0; i < 3; ++i) {
      auto vn = [&](double sparam) {
        Point2 xx = cf.edge_lo[i] + sparam * (cf.edge_hi[i] - cf.edge_lo[i]);
        return dot(v.eval(f.barycentric(xx)), cf.n_glob[i]);
      };
      double second = vn(er[0].s) + vn(er[2].s) - 2.0 * vn(0.5);
      rep.max_normal_nonlinearity = std::max(rep.max_normal_nonlinearity, std::abs(second));
    }

    cell_dof_values[c] = sbdfm_dof_values(cf, v);
  }

  // (c) interface continuity and (d) boundary vanishing of the edge moments.
  for (int e = 0; e < tri.n_edges(); ++e) {
    const auto& inc = tri.edge_cells[e];
    if (tri.edge_is_boundary[e]) {
      int c = inc[0];
      int le = local_of_edge(tri, c, e);
      for (int s = 0; s < 3; ++s)
        rep.max_boundary_dof =
            std::max(rep.max_boundary_dof, std::abs(cell_dof_values[c][3 * le + s]));
    } else {
      int l0 = local_of_edge(tri, inc[0], e);
      int l1 = local_of_edge(tri, inc[1], e);
      for (int s = 0; s < 3; ++s)
        rep.max_interface_jump =
            std::max(rep.max_interface_jump, std::abs(cell_dof_values[inc[0]][3 * l0 + s] -
                                                      cell_dof_values[inc[1]][3 * l1 + s]));
    }
  }
  return rep;
}

void write_coordinate_format(std::ostream& os, const SpMat& m) {
  char buf[128];
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%ld %ld %.17g\n", long(it.row()), long(it.col()),
                    it.value());
      os << buf;
    }
}

} // namespace divfem
