#pragma once

#include <array>
#include <functional>

#include "divfem/poly.hpp"
#include "divfem/quadrature.hpp"

namespace divfem {

using VectorField = std::function<Vec2(const Point2&)>;

// Local generators of P~1+(T) (all on a given cell frame; i = 0,1,2):
//   w_edge(i) = curl(l_j l_k (3 l_i - 1))     div = 0; DOFs live on edge i only
//   w_pair(i) = curl(l_i^2)                   div = 0; DOFs vanish on edge i
//   y_pair(i) = -(2/d_i) l_i n_i              div = 1/S; DOFs vanish on edge i
// w_pair(i)/y_pair(i) correspond to the edge pair (e_j, e_k) meeting at
// vertex i.
VecPoly gen_w_edge(const CellFrame& f, int i);
VecPoly gen_w_pair(const CellFrame& f, int i);
VecPoly gen_y_pair(const CellFrame& f, int i);

/// Nodal basis of the 9-dimensional local space
/// P~2-(T) = {v in P~2 : v.n linear on each edge}, dual to the cell-local
/// nodal parameters (per edge i: mean normal moment against the outward
/// normal, first normal moment with weight (l_j - l_k), mean tangential
/// moment along t_i). Order: [phi_n0, phi_n1, phi_t] for edges 0,1,2.
std::array<VecPoly, 9> sbdfm_local_nodal_basis(const CellFrame& f);

/// Per-cell data needed to evaluate DOFs against GLOBAL edge orientations.
struct CellDofFrame {
  CellFrame frame;
  std::array<Point2, 3> edge_lo; // global-orientation endpoints of local edge i
  std::array<Point2, 3> edge_hi;
  std::array<Vec2, 3> n_glob; // rot90cw of the unit lo->hi tangent
  std::array<Vec2, 3> t_glob;
  std::array<double, 3> sigma; // +1 iff CCW traversal runs lo->hi
};

CellDofFrame cell_dof_frame(const Triangulation& tri, int c);

/// The 9 global-orientation DOF values of a field on one cell, ordered
/// [edge0: n-mean, n-first-moment, t-mean; edge1: ...; edge2: ...] with
///   DOF_e^0 = (1/|e|) int_e v.n_e
///   DOF_e^1 = (3/|e|) int_e v.n_e s,  s affine in [-1,1] along lo->hi
///   DOF_e^t = (1/|e|) int_e v.t_e
std::array<double, 9> sbdfm_dof_values(const CellDofFrame& cf, const VecPoly& v);
std::array<double, 9> sbdfm_dof_values(const CellDofFrame& cf, const VectorField& v);

/// Nodal basis dual to the global-orientation DOFs above (sign/scale
/// conversion of the local nodal basis).
std::array<VecPoly, 9> sbdfm_global_nodal_basis(const CellDofFrame& cf);

// Potentials (P2+ pieces whose curl reproduces kernel basis pieces) --------

/// Piece of zeta^O on one patch cell: the cell sees the patch center at local
/// index lc, the previous rim vertex at lprev and the current rim vertex at
/// lcur; ci/cim1 are the patch-geometry coefficients at those rim vertices.
ScalarPoly zeta_vertex_piece(int lc, int lprev, int lcur, double ci, double cim1);

/// Piece of zeta_T on the center cell T_0; rho[j] = S_j / (S_j + S_0).
ScalarPoly zeta_cell_center_piece(const std::array<double, 3>& rho);

/// Piece of zeta_T on neighbor T_j across the shared edge: the neighbor sees
/// the shared edge's endpoints at local indices la, lb and its far vertex at
/// lfar; rho = S_j / (S_j + S_0).
ScalarPoly zeta_cell_neighbor_piece(int la, int lb, int lfar, double rho);

} // namespace divfem
