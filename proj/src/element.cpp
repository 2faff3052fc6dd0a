#include "divfem/element.hpp"

#include "divfem/errors.hpp"

namespace divfem {

VecPoly gen_w_edge(const CellFrame& f, int i) {
  int j = (i + 1) % 3, k = (i + 2) % 3;
  ScalarPoly q = ScalarPoly::lambda(j) * ScalarPoly::lambda(k) *
                 (ScalarPoly::lambda(i) * 3.0 - ScalarPoly::constant(1.0));
  return curl_of(q, f);
}

VecPoly gen_w_pair(const CellFrame& f, int i) {
  ScalarPoly q = ScalarPoly::lambda(i) * ScalarPoly::lambda(i);
  return curl_of(q, f);
}

VecPoly gen_y_pair(const CellFrame& f, int i) {
  return ScalarPoly::lambda(i) * (f.normal[i] * (-2.0 / f.edge_len[i]));
}

std::array<VecPoly, 9> sbdfm_local_nodal_basis(const CellFrame& f) {
  std::array<VecPoly, 9> phi;
  for (int i = 0; i < 3; ++i) {
    int j = (i + 1) % 3, k = (i + 2) % 3;
    const Vec2& ni = f.normal[i];
    ScalarPoly qj = ScalarPoly::lambda(j) * (ScalarPoly::lambda(j) * 3.0 - ScalarPoly::constant(2.0));
    ScalarPoly qk = ScalarPoly::lambda(k) * (ScalarPoly::lambda(k) * 3.0 - ScalarPoly::constant(2.0));
    VecPoly a = qj * (f.tangent[k] / dot(ni, f.tangent[k]));
    VecPoly b = qk * (f.tangent[j] / dot(ni, f.tangent[j]));
    ScalarPoly bubble = ScalarPoly::lambda(j) * ScalarPoly::lambda(k) * 6.0;

    phi[3 * i + 0] = a + b + bubble * ni;         // mean normal moment
    phi[3 * i + 1] = (a - b) * 3.0;               // first normal moment, weight (l_j - l_k)
    phi[3 * i + 2] = bubble * f.tangent[i];       // mean tangential moment
  }
  return phi;
}

CellDofFrame cell_dof_frame(const Triangulation& tri, int c) {
  CellDofFrame cf;
  cf.frame = cell_frame(tri, c);
  for (int i = 0; i < 3; ++i) {
    int e = tri.cell_edges[c][i];
    const auto& ev = tri.edges[e];
    cf.edge_lo[i] = tri.vertices[ev[0]];
    cf.edge_hi[i] = tri.vertices[ev[1]];
    Vec2 t = (cf.edge_hi[i] - cf.edge_lo[i]) / tri.edge_length[e];
    cf.t_glob[i] = t;
    cf.n_glob[i] = rot90cw(t);
    cf.sigma[i] = tri.cell_edge_sign[c][i];
  }
  return cf;
}

namespace {

template <typename Eval>
std::array<double, 9> dof_values_impl(const CellDofFrame& cf, const Eval& value_at) {
  std::array<double, 9> d{};
  for (int i = 0; i < 3; ++i) {
    double n0 = 0.0, n1 = 0.0, tm = 0.0;
    for (const auto& q : edge_rule_degree5()) {
      Point2 x = cf.edge_lo[i] + q.s * (cf.edge_hi[i] - cf.edge_lo[i]);
      Vec2 v = value_at(x);
      double vn = dot(v, cf.n_glob[i]);
      double s = 2.0 * q.s - 1.0;
      n0 += q.w * vn;
      n1 += q.w * vn * s;
      tm += q.w * dot(v, cf.t_glob[i]);
    }
    d[3 * i + 0] = n0;
    d[3 * i + 1] = 3.0 * n1;
    d[3 * i + 2] = tm;
  }
  return d;
}

} // namespace

std::array<double, 9> sbdfm_dof_values(const CellDofFrame& cf, const VecPoly& v) {
  return dof_values_impl(cf, [&](const Point2& x) { return v.eval(cf.frame.barycentric(x)); });
}

std::array<double, 9> sbdfm_dof_values(const CellDofFrame& cf, const VectorField& v) {
  return dof_values_impl(cf, v);
}

std::array<VecPoly, 9> sbdfm_global_nodal_basis(const CellDofFrame& cf) {
  // Local DOFs (outward normal, weight l_j - l_k, CCW tangent) relate to the
  // global ones by D0_g = sigma D0_l, D1_g = -3 D1_l, Dt_g = sigma Dt_l;
  // dual bases transform by the inverse.
  std::array<VecPoly, 9> phi = sbdfm_local_nodal_basis(cf.frame);
  for (int i = 0; i < 3; ++i) {
    phi[3 * i + 0] = phi[3 * i + 0] * cf.sigma[i];
    phi[3 * i + 1] = phi[3 * i + 1] * (-1.0 / 3.0);
    phi[3 * i + 2] = phi[3 * i + 2] * cf.sigma[i];
  }
  return phi;
}

ScalarPoly zeta_vertex_piece(int lc, int lprev, int lcur, double ci, double cim1) {
  if (lc == lprev || lc == lcur || lprev == lcur)
    throw MeshError("zeta_vertex_piece: local indices must be distinct");
  ScalarPoly l0 = ScalarPoly::lambda(lc);
  ScalarPoly lp = ScalarPoly::lambda(lprev);
  ScalarPoly lu = ScalarPoly::lambda(lcur);
  ScalarPoly one = ScalarPoly::constant(1.0);
  return l0 * l0 + (l0 * lu * (lp * 3.0 - one)) * ci + (l0 * lp * (lu * 3.0 - one)) * cim1;
}

ScalarPoly zeta_cell_center_piece(const std::array<double, 3>& rho) {
  ScalarPoly one = ScalarPoly::constant(1.0);
  ScalarPoly l[3] = {ScalarPoly::lambda(0), ScalarPoly::lambda(1), ScalarPoly::lambda(2)};
  ScalarPoly r;
  for (int j = 0; j < 3; ++j) {
    int a = (j + 1) % 3, b = (j + 2) % 3;
    r += (l[a] * l[b] * (l[j] * 3.0 - one)) * rho[j];
  }
  r += l[0] * l[1] * l[2] * (-6.0);
  return r;
}

ScalarPoly zeta_cell_neighbor_piece(int la, int lb, int lfar, double rho) {
  ScalarPoly one = ScalarPoly::constant(1.0);
  return (ScalarPoly::lambda(la) * ScalarPoly::lambda(lb) *
          (ScalarPoly::lambda(lfar) * 3.0 - one)) *
         rho;
}

} // namespace divfem
