#pragma once

#include <optional>
#include <string>
#include <vector>

#include "divfem/assembly.hpp"
#include "divfem/solvers.hpp"

namespace divfem {

enum class Pair { SbdfmP1, ElP0, P1P0 };

std::string pair_name(Pair p);
std::optional<Pair> pair_from_name(const std::string& s);

// Manufactured data on the unit square ---------------------------------------

/// Divergence-free velocity u = curl(x^2(1-x)^2 y^2(1-y)^2) with pressure
/// p = x^3 + y^3 - 1/2 and f = -eps^2 Laplacian(u) + grad(p).
struct StokesManufactured {
  double epsilon = 1.0;
  Vec2 velocity(const Point2& p) const;
  std::array<double, 4> velocity_grad(const Point2& p) const;
  double pressure(const Point2& p) const;
  Vec2 force(const Point2& p) const;
};

/// u = x^2(1-x)^2 y^2(1-y)^2 in H^2_0 of the unit square; g = Laplacian^2 u.
ScalarExact biharmonic_manufactured();
double biharmonic_rhs(const Point2& p);

// Studies ---------------------------------------------------------------------

struct InfSupRow {
  int level = 0;
  double h = 0.0;
  InfSupReport report;
  double rate = 0.0; // log2(previous / current), 0 on the first level
};

std::vector<InfSupRow> infsup_study(const Triangulation& base, int levels, Pair pair);

struct EigRow {
  int level = 0;
  double h = 0.0;
  std::vector<double> lambda;
};

/// Kernel-reduced Stokes eigenvalues. For SbdfmP1 the kernel basis is used
/// directly; for ElP0 the same kernel is re-expressed in el coordinates and
/// the reduction runs through the el-space matrices.
std::vector<EigRow> stokes_eig_study(const Triangulation& base, int levels, Pair pair, int k,
                                     double epsilon);

struct ConvRow {
  int level = 0;
  double h = 0.0;
  double vel_h1 = 0.0, vel_rate = 0.0;
  double p_l2 = 0.0, p_rate = 0.0;
  double div_l2 = 0.0;
};

std::vector<ConvRow> stokes_convergence_study(const Triangulation& base, int levels, Pair pair,
                                              double epsilon);

struct BihRow {
  int level = 0;
  double h = 0.0;
  double err_h2 = 0.0; // ||u - u_h||_{2,h}
  double rate = 0.0;
};

std::vector<BihRow> biharmonic_study(const Triangulation& base, int levels);

/// Single manufactured-solution solve on one mesh (used by the CLI).
struct StokesSolveResult {
  double vel_h1 = 0.0, p_l2 = 0.0, div_l2 = 0.0;
  double residual_momentum = 0.0, residual_divergence = 0.0;
  Vector velocity_sbdfm; // solution expanded in sBDFM DOF coordinates
};

StokesSolveResult stokes_manufactured_solve(const Triangulation& tri, Pair pair, double epsilon);

} // namespace divfem
