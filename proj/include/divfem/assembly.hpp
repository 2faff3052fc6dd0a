#pragma once

#include <functional>

#include "divfem/spaces.hpp"

namespace divfem {

using ScalarField = std::function<double(const Point2&)>;
/// Gradient of a vector field as rows (dvx/dx, dvx/dy, dvy/dx, dvy/dy).
using MatrixField = std::function<std::array<double, 4>(const Point2&)>;

enum class OperatorKind { GradGrad, Mass, DivP1, DivP0, PressureMassP1, PressureMassP0 };

struct SparseOperator {
  SpMat mat;
  OperatorKind kind;
  bool symmetric = false;
};

/// Cellwise assembly on the homogeneous sBDFM space. Divergence matrices have
/// pressure-DOF rows (P1: 3 per cell, cell-major; P0: 1 per cell) and velocity
/// columns; entry order is deterministic (cell order, local DOF order).
SparseOperator assemble(const Triangulation& tri, const DofMap& dm, OperatorKind kind);

/// (f, phi_a) against the global nodal basis.
Vector assemble_load(const Triangulation& tri, const DofMap& dm, const VectorField& f);

/// <g, zeta_col> against the kernel potentials (biharmonic right-hand side).
Vector assemble_biharmonic_load(const Triangulation& tri, const KernelBasis& kb,
                                const ScalarField& g);

/// Integral of each pressure basis function (for the mean-zero constraint).
Vector pressure_integrals(const Triangulation& tri, bool p1);

SpMat reduce(const SpMat& op, const CombinationMatrix& c);                 // C^T op C
SpMat reduce_rect(const SpMat& op, const CombinationMatrix& ccol);         // op C (pressure rows)
Vector reduce_load(const Vector& v, const CombinationMatrix& c);           // C^T v

struct ErrorReport {
  double l2 = 0.0;
  double h1_semi = 0.0; // broken H1 seminorm
  double div_l2 = 0.0;  // ||div u_h||_0
};

/// Broken-norm errors of an sBDFM coefficient vector against an exact field.
ErrorReport error_norms(const Triangulation& tri, const DofMap& dm, const Vector& coeffs,
                        const VectorField& exact, const MatrixField& exact_grad);

/// L2 pressure error; coeffs are cell-major (P1: vertex values per cell).
double pressure_error_l2(const Triangulation& tri, bool p1, const Vector& coeffs,
                         const ScalarField& exact);

/// Cellwise L2 projection of a scalar field onto the pressure space.
Vector project_pressure(const Triangulation& tri, bool p1, const ScalarField& p);

struct ScalarErrorReport {
  double l2 = 0.0;
  double h1_semi = 0.0;
  double h2_semi = 0.0; // |u - u_h|_{2,h} via the curl identity
  double h2_norm = 0.0; // sqrt(l2^2 + h1^2 + h2^2)
};

struct ScalarExact {
  ScalarField value;
  std::function<Vec2(const Point2&)> grad;
  std::function<std::array<double, 3>(const Point2&)> hess; // (uxx, uxy, uyy)
};

/// Errors of a potential expansion u_h = sum_i x_i zeta_i against an exact
/// scalar field.
ScalarErrorReport scalar_error_norms(const Triangulation& tri, const KernelBasis& kb,
                                     const Vector& x, const ScalarExact& exact);

} // namespace divfem
