#pragma once

#include <Eigen/Dense>
#include <functional>

#include "divfem/spaces.hpp"

namespace divfem {

struct SaddleSolution {
  Vector u;
  Vector p;
  double residual_momentum = 0.0;   // relative
  double residual_divergence = 0.0; // relative
  double pressure_mean = 0.0;
};

/// Solves  eps^2 A u - B^T p = f,  B u = 0,  m^T p = 0  (m = pressure
/// integrals) by one sparse LU factorization of the augmented symmetric
/// indefinite system plus iterative refinement.
SaddleSolution solve_stokes(const SpMat& A, const SpMat& B, const Vector& m, const Vector& f,
                            double epsilon);

struct EigenResult {
  Vector values; // ascending
  Eigen::MatrixXd vectors;
  Vector residuals;
  bool dense_path = false;
};

/// Smallest k eigenpairs of the SPD pencil  eps^2 A x = lambda M x.
/// Dense below `dense_threshold` unknowns, shift-invert Lanczos above.
EigenResult smallest_eigenpairs(const SpMat& A, const SpMat& M, int k, double epsilon,
                                int dense_threshold = 2000);

struct InfSupReport {
  double lambda_min_plus = 0.0;
  double lambda_max = 0.0;
  double beta = 0.0;     // sqrt(lambda_min_plus) = the inf-sup constant
  double beta_max = 0.0; // sqrt(lambda_max)
  int deflated = 0;      // zero modes removed (dense path)
  bool dense_path = false;
  double residual = 0.0; // worst relative eigen residual (operator path)
};

/// Extreme eigenvalues of  B A^{-1} B^T v = lambda M_p v  with the zero modes
/// (pressures invisible to the velocity space) deflated. Below
/// `dense_threshold` pressure unknowns the Schur complement is formed
/// explicitly; above, the equivalent velocity-side pencil
/// (B^T M_p^{-1} B) u = lambda A u is solved by shift-invert Lanczos.
/// `sigma_hint` (if positive) must lie below lambda_min_plus; it is validated
/// and lowered automatically if not.
InfSupReport infsup_constant(const SpMat& A, const SpMat& B, const SpMat& Mp,
                             double sigma_hint = -1.0, int dense_threshold = 2000);

/// SPD solve (simplicial LDLT).
Vector solve_spd(const SpMat& A, const Vector& rhs);

} // namespace divfem
