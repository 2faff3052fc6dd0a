#include "divfem/studies.hpp"

#include <cmath>

#include "divfem/errors.hpp"

namespace divfem {

std::string pair_name(Pair p) {
  switch (p) {
  case Pair::SbdfmP1: return "sbdfm-p1";
  case Pair::ElP0: return "el-p0";
  case Pair::P1P0: return "p1-p0";
  }
  return "?";
}

std::optional<Pair> pair_from_name(const std::string& s) {
  if (s == "sbdfm-p1") return Pair::SbdfmP1;
  if (s == "el-p0") return Pair::ElP0;
  if (s == "p1-p0") return Pair::P1P0;
  return std::nullopt;
}

namespace {

// 1D factors of the quartic bubble x^2 (1-x)^2 and derivatives.
double bub(double x) { return x * x * (1 - x) * (1 - x); }
double bub1(double x) { return 2 * x - 6 * x * x + 4 * x * x * x; }
double bub2(double x) { return 2 - 12 * x + 12 * x * x; }
double bub3(double x) { return -12 + 24 * x; }
constexpr double bub4 = 24.0;

} // namespace

Vec2 StokesManufactured::velocity(const Point2& p) const {
  return {bub(p.x) * bub1(p.y), -bub1(p.x) * bub(p.y)};
}

std::array<double, 4> StokesManufactured::velocity_grad(const Point2& p) const {
  // rows (du1/dx, du1/dy, du2/dx, du2/dy)
  return {bub1(p.x) * bub1(p.y), bub(p.x) * bub2(p.y), -bub2(p.x) * bub(p.y),
          -bub1(p.x) * bub1(p.y)};
}

double StokesManufactured::pressure(const Point2& p) const {
  return p.x * p.x * p.x + p.y * p.y * p.y - 0.5;
}

Vec2 StokesManufactured::force(const Point2& p) const {
  double lap_u1 = bub2(p.x) * bub1(p.y) + bub(p.x) * bub3(p.y);
  double lap_u2 = -(bub3(p.x) * bub(p.y) + bub1(p.x) * bub2(p.y));
  double e2 = epsilon * epsilon;
  return {-e2 * lap_u1 + 3.0 * p.x * p.x, -e2 * lap_u2 + 3.0 * p.y * p.y};
}

ScalarExact biharmonic_manufactured() {
  ScalarExact ex;
  ex.value = [](const Point2& p) { return bub(p.x) * bub(p.y); };
  ex.grad = [](const Point2& p) { return Vec2{bub1(p.x) * bub(p.y), bub(p.x) * bub1(p.y)}; };
  ex.hess = [](const Point2& p) {
    return std::array<double, 3>{bub2(p.x) * bub(p.y), bub1(p.x) * bub1(p.y),
                                 bub(p.x) * bub2(p.y)};
  };
  return ex;
}

double biharmonic_rhs(const Point2& p) {
  return bub4 * bub(p.y) + 2.0 * bub2(p.x) * bub2(p.y) + bub(p.x) * bub4;
}

std::vector<InfSupRow> infsup_study(const Triangulation& base, int levels, Pair pair) {
  if (levels < 1) throw MeshError("infsup_study: levels must be >= 1");
  std::vector<InfSupRow> rows;
  Triangulation tri = base;
  double sigma_hint = -1.0;
  for (int lvl = 0; lvl < levels; ++lvl) {
    if (lvl > 0) tri = uniform_refine(tri);
    DofMap dm = build_sbdfm_space(tri);
    SparseOperator A = assemble(tri, dm, OperatorKind::GradGrad);

    SpMat Ar, Br, Mp;
    if (pair == Pair::SbdfmP1) {
      Ar = A.mat;
      Br = assemble(tri, dm, OperatorKind::DivP1).mat;
      Mp = assemble(tri, dm, OperatorKind::PressureMassP1).mat;
    } else {
      SparseOperator B0 = assemble(tri, dm, OperatorKind::DivP0);
      CombinationMatrix C =
          pair == Pair::ElP0 ? build_el_basis(tri, dm) : build_p1div_space(tri, dm);
      Ar = reduce(A.mat, C);
      Br = reduce_rect(B0.mat, C);
      Mp = assemble(tri, dm, OperatorKind::PressureMassP0).mat;
    }

    InfSupRow row;
    row.level = lvl;
    row.h = tri.max_edge_length();
    row.report = infsup_constant(Ar, Br, Mp, sigma_hint);
    if (lvl > 0 && row.report.beta > 0.0)
      row.rate = std::log2(rows.back().report.beta / row.report.beta);
    sigma_hint = 0.25 * row.report.lambda_min_plus;
    rows.push_back(row);
  }
  return rows;
}

std::vector<EigRow> stokes_eig_study(const Triangulation& base, int levels, Pair pair, int k,
                                     double epsilon) {
  if (levels < 1) throw MeshError("stokes_eig_study: levels must be >= 1");
  if (pair == Pair::P1P0) throw MeshError("stokes_eig_study: pair p1-p0 is not supported");
  std::vector<EigRow> rows;
  Triangulation tri = base;
  for (int lvl = 0; lvl < levels; ++lvl) {
    if (lvl > 0) tri = uniform_refine(tri);
    DofMap dm = build_sbdfm_space(tri);
    SpMat A = assemble(tri, dm, OperatorKind::GradGrad).mat;
    SpMat M = assemble(tri, dm, OperatorKind::Mass).mat;
    KernelBasis kb = build_kernel_basis(tri, dm);

    SpMat Ar, Mr;
    if (pair == Pair::SbdfmP1) {
      Ar = reduce(A, kb.basis);
      Mr = reduce(M, kb.basis);
    } else {
      // Same kernel, routed through the el space.
      CombinationMatrix el = build_el_basis(tri, dm);
      SpMat R = kernel_in_el_coordinates(tri);
      SpMat Ael = reduce(A, el), Mel = reduce(M, el);
      Ar = R.transpose() * Ael * R;
      Mr = R.transpose() * Mel * R;
    }

    int kk = std::min<int>(k, int(Ar.rows()));
    EigenResult er = smallest_eigenpairs(Ar, Mr, kk, epsilon);
    EigRow row;
    row.level = lvl;
    row.h = tri.max_edge_length();
    row.lambda.assign(er.values.data(), er.values.data() + kk);
    rows.push_back(row);
  }
  return rows;
}

StokesSolveResult stokes_manufactured_solve(const Triangulation& tri, Pair pair, double epsilon) {
  if (pair == Pair::P1P0)
    throw MeshError("stokes_manufactured_solve: pair p1-p0 is not a working scheme "
                    "(inf-sup deficient); use el-p0 or sbdfm-p1");
  StokesManufactured mf;
  mf.epsilon = epsilon;
  DofMap dm = build_sbdfm_space(tri);
  SpMat A = assemble(tri, dm, OperatorKind::GradGrad).mat;
  Vector f = assemble_load(tri, dm, [&](const Point2& p) { return mf.force(p); });

  SaddleSolution sol;
  Vector u_sbdfm;
  bool p1 = pair == Pair::SbdfmP1;
  if (p1) {
    SpMat B = assemble(tri, dm, OperatorKind::DivP1).mat;
    sol = solve_stokes(A, B, pressure_integrals(tri, true), f, epsilon);
    u_sbdfm = sol.u;
  } else {
    CombinationMatrix C = build_el_basis(tri, dm);
    SpMat Ar = reduce(A, C);
    SpMat Br = reduce_rect(assemble(tri, dm, OperatorKind::DivP0).mat, C);
    sol = solve_stokes(Ar, Br, pressure_integrals(tri, false), reduce_load(f, C), epsilon);
    u_sbdfm = C.mat * sol.u;
  }

  StokesSolveResult res;
  ErrorReport er = error_norms(
      tri, dm, u_sbdfm, [&](const Point2& p) { return mf.velocity(p); },
      [&](const Point2& p) { return mf.velocity_grad(p); });
  res.vel_h1 = er.h1_semi;
  res.div_l2 = er.div_l2;
  res.p_l2 =
      pressure_error_l2(tri, p1, sol.p, [&](const Point2& p) { return mf.pressure(p); });
  res.residual_momentum = sol.residual_momentum;
  res.residual_divergence = sol.residual_divergence;
  res.velocity_sbdfm = std::move(u_sbdfm);
  return res;
}

std::vector<ConvRow> stokes_convergence_study(const Triangulation& base, int levels, Pair pair,
                                              double epsilon) {
  if (levels < 1) throw MeshError("stokes_convergence_study: levels must be >= 1");
  std::vector<ConvRow> rows;
  Triangulation tri = base;
  for (int lvl = 0; lvl < levels; ++lvl) {
    if (lvl > 0) tri = uniform_refine(tri);
    StokesSolveResult r = stokes_manufactured_solve(tri, pair, epsilon);
    ConvRow row;
    row.level = lvl;
    row.h = tri.max_edge_length();
    row.vel_h1 = r.vel_h1;
    row.p_l2 = r.p_l2;
    row.div_l2 = r.div_l2;
    if (lvl > 0) {
      row.vel_rate = std::log2(rows.back().vel_h1 / row.vel_h1);
      row.p_rate = std::log2(rows.back().p_l2 / row.p_l2);
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<BihRow> biharmonic_study(const Triangulation& base, int levels) {
  if (levels < 1) throw MeshError("biharmonic_study: levels must be >= 1");
  std::vector<BihRow> rows;
  ScalarExact exact = biharmonic_manufactured();
  Triangulation tri = base;
  for (int lvl = 0; lvl < levels; ++lvl) {
    if (lvl > 0) tri = uniform_refine(tri);
    DofMap dm = build_sbdfm_space(tri);
    SpMat A = assemble(tri, dm, OperatorKind::GradGrad).mat;
    KernelBasis kb = build_kernel_basis(tri, dm);
    SpMat Ar = reduce(A, kb.basis);
    Vector rhs = assemble_biharmonic_load(tri, kb, biharmonic_rhs);
    Vector x = solve_spd(Ar, rhs);
    ScalarErrorReport er = scalar_error_norms(tri, kb, x, exact);
    BihRow row;
    row.level = lvl;
    row.h = tri.max_edge_length();
    row.err_h2 = er.h2_norm;
    if (lvl > 0) row.rate = std::log2(rows.back().err_h2 / row.err_h2);
    rows.push_back(row);
  }
  return rows;
}

} // namespace divfem
