#pragma once

#include <Eigen/Sparse>
#include <array>
#include <string>
#include <utility>
#include <vector>

#include "divfem/element.hpp"
#include "divfem/mesh.hpp"

namespace divfem {

using SpMat = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Global DOF layout of the homogeneous sBDFM space: 3 DOFs per interior
/// edge (n-mean, n-first-moment, t-mean against the global edge orientation),
/// numbered edge-major over interior edges. Boundary-edge DOFs are
/// constrained to zero and carry index -1.
struct DofMap {
  int dim = 0;
  std::vector<std::array<int, 3>> edge_dofs;

  /// Global index per local DOF slot of a cell (-1 for boundary slots).
  std::array<int, 9> cell_dofs(const Triangulation& tri, int c) const;
};

DofMap build_sbdfm_space(const Triangulation& tri);

/// Sparse change of basis: columns express derived basis functions in sBDFM
/// DOF coordinates.
struct ColumnLabel {
  enum class Kind { KernelVertex, KernelCell, ElEdge, ElCell, HatX, HatY, P1Third };
  Kind kind;
  int entity = -1;       // vertex / cell / edge index
  int support_cells = 0; // number of cells in the support
};

struct CombinationMatrix {
  SpMat mat; // dim(sBDFM) x n_columns
  std::vector<ColumnLabel> labels;

  int cols() const { return static_cast<int>(mat.cols()); }
};

/// Cellwise polynomial pieces of the V^{2+} potentials, one list per kernel
/// basis function: curl of the piece reproduces the kernel function on that
/// cell.
struct KernelPotentials {
  std::vector<std::vector<std::pair<int, ScalarPoly>>> pieces; // (cell, zeta piece)
};

struct KernelBasis {
  CombinationMatrix basis;
  KernelPotentials potentials;
  int n_vertex_columns = 0; // followed by cell columns
};

/// Divergence-free basis {psi^A : A interior vertex} + {psi_T : T interior
/// cell}. Requires Assumption 1.
KernelBasis build_kernel_basis(const Triangulation& tri, const DofMap& dm);

/// Enriched-linear basis {psi_e : e interior edge} + {psi_T : T interior
/// cell}. Rejects interior edges whose endpoints are both boundary vertices.
CombinationMatrix build_el_basis(const Triangulation& tri, const DofMap& dm);

/// The kernel basis expressed in el-basis coordinates (rows = el columns,
/// cols = kernel columns); each vertex column encodes
/// psi^A = sum_i s_i psi_{e_i} + 1/2 sum_{A_i interior} (psi_{T_i} + psi_{T_{i+1}}).
SpMat kernel_in_el_coordinates(const Triangulation& tri);

/// Per interior vertex: two hat columns (lambda_A times each unit vector) and
/// one third mode obtained from the local patch nullspace, normalized so its
/// largest-magnitude DOF entry is +1.
CombinationMatrix build_p1div_space(const Triangulation& tri, const DofMap& dm);

/// Nodal interpolation: DOF values of the field by edge quadrature, boundary
/// DOFs dropped.
Vector interpolate(const Triangulation& tri, const DofMap& dm, const VectorField& field);

/// Local representative of an sBDFM coefficient vector on one cell.
VecPoly cell_field(const Triangulation& tri, const DofMap& dm, const Vector& coeffs, int c);

struct FieldSample {
  Vec2 value;
  double div = 0.0;
  int cell = -1;
};

/// Point evaluation (brute-force point location).
FieldSample evaluate_field(const Triangulation& tri, const DofMap& dm, const Vector& coeffs,
                           const Point2& x);

/// Membership report for V^el viewed inside the sBDFM space: elementwise
/// divergence constancy, normal-trace linearity, interface continuity of the
/// three edge moments, boundary vanishing. All residuals are absolute;
/// field_scale is the largest DOF magnitude for normalization.
struct ElMembershipReport {
  double max_div_deviation = 0.0;
  double max_normal_nonlinearity = 0.0;
  double max_interface_jump = 0.0;
  double max_boundary_dof = 0.0;
  double field_scale = 0.0;
};

ElMembershipReport verify_el_membership(const Triangulation& tri, const DofMap& dm,
                                        const Vector& coeffs);

/// Coordinate text export: one "row col value" line per stored entry.
void write_coordinate_format(std::ostream& os, const SpMat& m);

} // namespace divfem
