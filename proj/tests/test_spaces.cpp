#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "divfem/assembly.hpp"
#include "divfem/errors.hpp"
#include "divfem/spaces.hpp"

using namespace divfem;

namespace {

// triangle with its barycenter: the smallest closed fan (m = 3)
Triangulation wagon_wheel() {
  return build_triangulation({{0, 0}, {1, 0}, {0.5, 1}, {0.5, 1.0 / 3.0}},
                             {{{0, 1, 3}, {1, 2, 3}, {2, 0, 3}}});
}

// two crisscross squares stacked vertically: satisfies Assumption 1 but the
// shared horizontal edge has two boundary endpoints
Triangulation stacked_crisscross() {
  std::vector<Point2> v = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5},
                           {0, -1}, {1, -1}, {0.5, -0.5}};
  std::vector<std::array<int, 3>> c = {{{0, 1, 4}}, {{1, 2, 4}}, {{2, 3, 4}}, {{3, 0, 4}},
                                       {{5, 6, 7}}, {{6, 1, 7}}, {{1, 0, 7}}, {{0, 5, 7}}};
  return build_triangulation(v, c);
}

double max_abs(const SpMat& m) {
  double w = 0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) w = std::max(w, std::abs(it.value()));
  return w;
}

int column_index(const CombinationMatrix& cm, ColumnLabel::Kind kind, int entity) {
  for (int i = 0; i < int(cm.labels.size()); ++i)
    if (cm.labels[i].kind == kind && cm.labels[i].entity == entity) return i;
  return -1;
}

} // namespace

TEST_CASE("sBDFM DOF map dimensions") {
  Triangulation hex = make_appendix_hexagon();
  CHECK(build_sbdfm_space(hex).dim == 18);

  Triangulation r1 = uniform_refine(hex);
  DofMap dm = build_sbdfm_space(r1);
  CHECK(dm.dim == 90);
  // dim(Z_h0) = dim(V) - dim(P1_h0) = 90 - (3*24 - 1) = 19
  CHECK(dm.dim - (3 * r1.n_cells() - 1) == 19);

  Triangulation one = build_triangulation({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}});
  CHECK(build_sbdfm_space(one).dim == 0);
}

TEST_CASE("kernel basis: counts, divergence, gamma relations") {
  Triangulation hex = make_appendix_hexagon();
  DofMap dmh = build_sbdfm_space(hex);
  KernelBasis kbh = build_kernel_basis(hex, dmh);
  CHECK(kbh.basis.cols() == 1); // dim(Z_O) = 1 on one interior patch

  Triangulation tri = make_perturbed(refine_times(make_appendix_hexagon(), 2), 0.15, 2);
  DofMap dm = build_sbdfm_space(tri);
  KernelBasis kb = build_kernel_basis(tri, dm);
  CHECK(kb.basis.cols() == tri.n_interior_vertices() + tri.n_interior_cells());

  SpMat B1 = assemble(tri, dm, OperatorKind::DivP1).mat;
  SpMat BK = B1 * kb.basis.mat;
  CHECK(max_abs(BK) < 1e-12 * std::max(1.0, max_abs(B1) * max_abs(kb.basis.mat)));

  // gamma relations: on each patch cell the w_{T,e_i} coefficient of psi^A is
  // the patch-geometry coefficient c_i and the spoke-pair coefficient is 1.
  // Recover the local combination by least squares on the nine generators.
  int vcount = 0;
  for (int v = 0; v < tri.n_vertices() && vcount < 3; ++v) {
    if (tri.vertex_is_boundary[v]) continue;
    ++vcount;
    int col = column_index(kb.basis, ColumnLabel::Kind::KernelVertex, v);
    REQUIRE(col >= 0);
    Vector psi = Vector(kb.basis.mat.col(col));
    VertexPatch p = vertex_patch(tri, v);
    for (int i = 0; i < p.m; ++i) {
      int c = p.cells[i];
      CellDofFrame cf = cell_dof_frame(tri, c);
      CellFrame f = cf.frame;
      // the six w generators are a basis of the local divergence-free space,
      // so the decomposition of a kernel function on one cell is unique
      Eigen::MatrixXd G(9, 6);
      auto put = [&](int gcol, const VecPoly& w) {
        auto d = sbdfm_dof_values(cf, w);
        for (int s = 0; s < 9; ++s) G(s, gcol) = d[s];
      };
      for (int e = 0; e < 3; ++e) put(e, gen_w_edge(f, e));
      for (int e = 0; e < 3; ++e) put(3 + e, gen_w_pair(f, e));
      Eigen::VectorXd rhs(9);
      auto g = dm.cell_dofs(tri, c);
      for (int s = 0; s < 9; ++s) rhs(s) = g[s] >= 0 ? psi(g[s]) : 0.0;
      Eigen::VectorXd x = G.colPivHouseholderQr().solve(rhs);
      CHECK((G * x - rhs).norm() < 1e-11);

      int le_i = -1, le_im1 = -1, lc = tri.local_vertex_index(c, v);
      for (int e = 0; e < 3; ++e) {
        if (tri.cell_edges[c][e] == p.spoke_edges[i]) le_i = e;
        if (tri.cell_edges[c][e] == p.spoke_edges[(i + p.m - 1) % p.m]) le_im1 = e;
      }
      CHECK(x(le_i) == doctest::Approx(patch_geometry(tri, p, i)).epsilon(1e-10));
      CHECK(x(le_im1) ==
            doctest::Approx(patch_geometry(tri, p, (i + p.m - 1) % p.m)).epsilon(1e-10));
      CHECK(x(3 + lc) == doctest::Approx(1.0).epsilon(1e-10)); // spoke-pair generator
    }
  }
  CHECK(vcount == 3);
}

TEST_CASE("kernel potentials: curl of zeta reproduces psi") {
  Triangulation tri = make_perturbed(uniform_refine(make_appendix_hexagon()), 0.1, 9);
  DofMap dm = build_sbdfm_space(tri);
  KernelBasis kb = build_kernel_basis(tri, dm);
  for (int col = 0; col < kb.basis.cols(); ++col) {
    Vector psi = Vector(kb.basis.mat.col(col));
    for (const auto& [c, zeta] : kb.potentials.pieces[col]) {
      CellFrame f = cell_frame(tri, c);
      VecPoly curlz = curl_of(zeta, f);
      VecPoly direct = cell_field(tri, dm, psi, c);
      for (const auto& q : tri_rule_degree6()) {
        Vec2 a = curlz.eval(q.b), b = direct.eval(q.b);
        CHECK(std::abs(a.x - b.x) < 1e-12);
        CHECK(std::abs(a.y - b.y) < 1e-12);
      }
    }
  }
}

TEST_CASE("kernel requires Assumption 1") {
  // square split by one diagonal: both boundary vertices of the diagonal have
  // no interior neighbor (there are no interior vertices at all)
  Triangulation bad =
      build_triangulation({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{{0, 1, 2}, {0, 2, 3}}});
  DofMap dm = build_sbdfm_space(bad);
  CHECK_THROWS_AS(build_kernel_basis(bad, dm), MeshError);
}

TEST_CASE("el basis: counts, divergence pattern, membership") {
  Triangulation hex = make_appendix_hexagon();
  DofMap dm = build_sbdfm_space(hex);
  CombinationMatrix el = build_el_basis(hex, dm);
  CHECK(el.cols() == 6); // #E^i + #T^i = 6 + 0

  SpMat B0 = assemble(hex, dm, OperatorKind::DivP0).mat;
  SpMat D = B0 * el.mat; // rows cells, cols basis functions
  // each psi_e integrates div to exactly +1 on T1 and -1 on T2
  Eigen::MatrixXd Dd(D);
  for (int c = 0; c < el.cols(); ++c) {
    int plus = 0, minus = 0, zero = 0;
    for (int r = 0; r < Dd.rows(); ++r) {
      if (std::abs(Dd(r, c) - 1.0) < 1e-12)
        ++plus;
      else if (std::abs(Dd(r, c) + 1.0) < 1e-12)
        ++minus;
      else if (std::abs(Dd(r, c)) < 1e-12)
        ++zero;
    }
    CHECK(plus == 1);
    CHECK(minus == 1);
    CHECK(zero == Dd.rows() - 2);
  }

  // pointwise: div psi_e = 1/S1 on T1, -1/S2 on T2, 0 elsewhere
  for (int col = 0; col < el.cols(); ++col) {
    Vector psi = Vector(el.mat.col(col));
    int nonzero_cells = 0;
    for (int c = 0; c < hex.n_cells(); ++c) {
      CellFrame f = cell_frame(hex, c);
      VecPoly v = cell_field(hex, dm, psi, c);
      double d = div_of(v, f).eval({1.0 / 3, 1.0 / 3, 1.0 / 3});
      if (std::abs(d) > 1e-10) {
        ++nonzero_cells;
        CHECK(std::abs(std::abs(d) - 1.0 / f.area) < 1e-10);
      }
    }
    CHECK(nonzero_cells == 2);
  }

  // membership criteria
  for (int col : {0, 3, 5}) {
    Vector psi = Vector(el.mat.col(col));
    ElMembershipReport rep = verify_el_membership(hex, dm, psi);
    double tol = 1e-12 * std::max(1.0, rep.field_scale);
    CHECK(rep.max_div_deviation < tol * 10);
    CHECK(rep.max_normal_nonlinearity < tol * 10);
    CHECK(rep.max_interface_jump < tol * 10);
    CHECK(rep.max_boundary_dof < tol * 10);
  }
  // sum of all columns still passes (linearity)
  Vector sum = Vector::Zero(dm.dim);
  for (int col = 0; col < el.cols(); ++col) sum += Vector(el.mat.col(col));
  CHECK(verify_el_membership(hex, dm, sum).max_div_deviation < 1e-11);

  // a raw nodal basis function is not in V^el: divergence is not constant
  Vector raw = Vector::Zero(dm.dim);
  raw(0) = 1.0;
  CHECK(verify_el_membership(hex, dm, raw).max_div_deviation > 1e-3);
}

TEST_CASE("el basis column rank and support sizes") {
  Triangulation r1 = uniform_refine(make_appendix_hexagon());
  DofMap dm = build_sbdfm_space(r1);
  CombinationMatrix el = build_el_basis(r1, dm);
  CHECK(el.cols() == r1.n_interior_edges() + r1.n_interior_cells());
  Eigen::MatrixXd dense(el.mat);
  CHECK(dense.colPivHouseholderQr().rank() == el.cols());

  // supports: psi_e covers 4 cells (one boundary endpoint) or 6 (none);
  // psi_T covers 4
  for (const auto& l : el.labels) {
    if (l.kind == ColumnLabel::Kind::ElCell) {
      CHECK(l.support_cells == 4);
    } else {
      const auto& ev = r1.edges[l.entity];
      bool bdry = r1.vertex_is_boundary[ev[0]] || r1.vertex_is_boundary[ev[1]];
      CHECK(l.support_cells == (bdry ? 4 : 6));
    }
  }
}

TEST_CASE("el basis degenerations (coinciding outer neighbors)") {
  // m=3 fan: every psi_e support degenerates from 4 to 3 cells
  Triangulation wheel = wagon_wheel();
  DofMap dmw = build_sbdfm_space(wheel);
  CombinationMatrix elw = build_el_basis(wheel, dmw);
  CHECK(elw.cols() == 3);
  for (const auto& l : elw.labels) CHECK(l.support_cells == 3);
  // still a valid basis: full rank, membership holds
  Eigen::MatrixXd dw(elw.mat);
  CHECK(dw.colPivHouseholderQr().rank() == 3);
  for (int col = 0; col < 3; ++col) {
    ElMembershipReport rep = verify_el_membership(wheel, dmw, Vector(elw.mat.col(col)));
    CHECK(rep.max_div_deviation < 1e-11 * std::max(1.0, rep.field_scale));
    CHECK(rep.max_interface_jump < 1e-11 * std::max(1.0, rep.field_scale));
    CHECK(rep.max_boundary_dof < 1e-11 * std::max(1.0, rep.field_scale));
  }

  // refined wheel: the center keeps m=3, so interior-interior spokes produce
  // the five-cell degeneration
  Triangulation rw = uniform_refine(wheel);
  DofMap dmr = build_sbdfm_space(rw);
  CombinationMatrix elr = build_el_basis(rw, dmr);
  CHECK(elr.cols() == rw.n_interior_edges() + rw.n_interior_cells());
  int five = 0;
  for (const auto& l : elr.labels)
    if (l.kind == ColumnLabel::Kind::ElEdge && l.support_cells == 5) ++five;
  CHECK(five == 3);
  Eigen::MatrixXd dr(elr.mat);
  CHECK(dr.colPivHouseholderQr().rank() == elr.cols());
  SpMat B1 = assemble(rw, dmr, OperatorKind::DivP1).mat;
  KernelBasis kb = build_kernel_basis(rw, dmr);
  CHECK(max_abs(SpMat(B1 * kb.basis.mat)) < 1e-13);
}

TEST_CASE("el basis rejects interior edges with two boundary endpoints") {
  Triangulation bad = stacked_crisscross();
  CHECK(counts_and_layers(bad).assumption1);
  DofMap dm = build_sbdfm_space(bad);
  try {
    build_el_basis(bad, dm);
    FAIL("expected MeshError");
  } catch (const MeshError& e) {
    CHECK(std::string(e.what()).find("refine") != std::string::npos);
  }
  // one refinement removes the offending configuration here
  Triangulation fixed = uniform_refine(bad);
  DofMap dmf = build_sbdfm_space(fixed);
  CombinationMatrix el = build_el_basis(fixed, dmf);
  CHECK(el.cols() == fixed.n_interior_edges() + fixed.n_interior_cells());
}

TEST_CASE("representation identity on the hexagon (second sum empty)") {
  Triangulation hex = make_appendix_hexagon();
  DofMap dm = build_sbdfm_space(hex);
  KernelBasis kb = build_kernel_basis(hex, dm);
  CombinationMatrix el = build_el_basis(hex, dm);
  SpMat R = kernel_in_el_coordinates(hex);
  // all rim vertices lie on the boundary: psi^O = sum of the six psi_e
  Eigen::MatrixXd Rd(R);
  for (int r = 0; r < 6; ++r) CHECK(Rd(r, 0) == doctest::Approx(1.0));
  SpMat D = kb.basis.mat - el.mat * R;
  CHECK(max_abs(D) < 1e-13);
}

TEST_CASE("p1div space: counts and third-mode structure") {
  Triangulation hex = make_appendix_hexagon();
  DofMap dm = build_sbdfm_space(hex);
  CombinationMatrix p1 = build_p1div_space(hex, dm);
  CHECK(p1.cols() == 3);

  // hat columns equal the interpolation of lambda_A times the unit vectors
  VertexPatch p = vertex_patch(hex, 6);
  for (int comp = 0; comp < 2; ++comp) {
    VectorField hat = [&](const Point2& x) {
      // lambda of the center within its patch; 0 outside
      for (int i = 0; i < p.m; ++i) {
        CellFrame f = cell_frame(hex, p.cells[i]);
        Bary b = f.barycentric(x);
        if (b.l1 >= -1e-12 && b.l2 >= -1e-12 && b.l3 >= -1e-12) {
          double l = comp == 0 ? 0 : 0; // placeholder
          (void)l;
          int lc = hex.local_vertex_index(p.cells[i], 6);
          double lam = lc == 0 ? b.l1 : (lc == 1 ? b.l2 : b.l3);
          return comp == 0 ? Vec2{lam, 0} : Vec2{0, lam};
        }
      }
      return Vec2{0, 0};
    };
    Vector direct = interpolate(hex, dm, hat);
    Vector col = Vector(p1.mat.col(comp));
    CHECK((direct - col).cwiseAbs().maxCoeff() < 1e-12);
  }

  // third mode: piecewise P1 combination of (lambda_O e_x, lambda_O e_y,
  // phi3_T) with the same phi3 coefficient on every cell, where phi3_T is the
  // rim-difference field (lambda_prev - lambda_cur) times the cell's fixed
  // direction
  Vector third = Vector(p1.mat.col(2));
  double common = 0.0;
  for (int i = 0; i < p.m; ++i) {
    int cell = p.cells[i];
    VecPoly v = cell_field(hex, dm, third, cell);
    int lc = hex.local_vertex_index(cell, 6);
    int lprev = hex.local_vertex_index(cell, p.rim_vertices[(i + p.m - 1) % p.m]);
    int lcur = hex.local_vertex_index(cell, p.rim_vertices[i]);
    // directions of phi3 on the appendix patch cycle as e_x, e_x+e_y, e_y and
    // the middle one of each triple enters with a flipped sign
    Vec2 dir = (i % 3 == 0) ? Vec2{1, 0} : ((i % 3 == 1) ? Vec2{-1, -1} : Vec2{0, 1});
    Eigen::MatrixXd M(12, 3);
    Eigen::VectorXd rhs(12);
    std::array<Bary, 6> pts = {Bary{1, 0, 0},        Bary{0, 1, 0},         Bary{0, 0, 1},
                               Bary{0.5, 0.5, 0},    Bary{0.5, 0, 0.5},     Bary{1. / 3, 1. / 3, 1. / 3}};
    for (int q = 0; q < 6; ++q) {
      double l[3] = {pts[q].l1, pts[q].l2, pts[q].l3};
      Vec2 val = v.eval(pts[q]);
      rhs(2 * q) = val.x;
      rhs(2 * q + 1) = val.y;
      M(2 * q, 0) = l[lc];
      M(2 * q + 1, 0) = 0;
      M(2 * q, 1) = 0;
      M(2 * q + 1, 1) = l[lc];
      M(2 * q, 2) = (l[lprev] - l[lcur]) * dir.x;
      M(2 * q + 1, 2) = (l[lprev] - l[lcur]) * dir.y;
    }
    Eigen::Vector3d c = (M.transpose() * M).ldlt().solve(M.transpose() * rhs);
    CHECK((M * c - rhs).norm() < 1e-12); // exactly representable
    if (i == 0)
      common = c(2);
    else
      CHECK(c(2) == doctest::Approx(common).epsilon(1e-10));
  }
  CHECK(std::abs(common) > 0.1);

  // appendix dimension count after refinements
  for (int lvl = 1; lvl <= 2; ++lvl) {
    Triangulation r = refine_times(make_appendix_hexagon(), lvl);
    DofMap dmr = build_sbdfm_space(r);
    CombinationMatrix cm = build_p1div_space(r, dmr);
    CHECK(cm.cols() == 3 * r.n_interior_vertices());
  }
}

TEST_CASE("interpolation") {
  Triangulation tri = make_perturbed(uniform_refine(make_square_crisscross(2)), 0.1, 3);
  DofMap dm = build_sbdfm_space(tri);

  // linear fields are reproduced exactly
  VectorField lin = [](const Point2& p) { return Vec2{p.x + p.y, 2 * p.x - p.y}; };
  Vector x = interpolate(tri, dm, lin);
  for (int c = 0; c < tri.n_cells(); ++c) {
    CellFrame f = cell_frame(tri, c);
    VecPoly v = cell_field(tri, dm, x, c);
    for (const auto& q : tri_rule_degree6()) {
      Point2 pt = f.point(q.b);
      Vec2 got = v.eval(q.b), want = lin(pt);
      // boundary DOFs are zeroed, so only fully interior cells reproduce
      if (tri.cell_is_interior[c]) {
        CHECK(std::abs(got.x - want.x) < 1e-12);
        CHECK(std::abs(got.y - want.y) < 1e-12);
      }
    }
  }

  // zero field
  Vector z = interpolate(tri, dm, [](const Point2&) { return Vec2{0, 0}; });
  CHECK(z.cwiseAbs().maxCoeff() == 0.0);

  // smooth boundary-vanishing field: broken H1 interpolation error decays at
  // rate about 1 under refinement
  const double pi = 3.14159265358979323846;
  VectorField smooth = [pi](const Point2& p) {
    double s = std::sin(pi * p.x) * std::sin(pi * p.y);
    return Vec2{s, s};
  };
  MatrixField smooth_grad = [pi](const Point2& p) {
    double cx = std::cos(pi * p.x), sx = std::sin(pi * p.x);
    double cy = std::cos(pi * p.y), sy = std::sin(pi * p.y);
    double gx = pi * cx * sy, gy = pi * sx * cy;
    return std::array<double, 4>{gx, gy, gx, gy};
  };
  Triangulation lv = make_square_crisscross(2);
  double prev_h1 = 0;
  for (int lvl = 0; lvl < 3; ++lvl) {
    if (lvl > 0) lv = uniform_refine(lv);
    DofMap dml = build_sbdfm_space(lv);
    Vector xi = interpolate(lv, dml, smooth);
    ErrorReport er = error_norms(lv, dml, xi, smooth, smooth_grad);
    if (lvl > 0) {
      double rate = std::log2(prev_h1 / er.h1_semi);
      CHECK(rate > 0.8);
      CHECK(rate < 1.3);
    }
    prev_h1 = er.h1_semi;
  }
}

TEST_CASE("field evaluation") {
  Triangulation r1 = uniform_refine(make_appendix_hexagon());
  DofMap dm = build_sbdfm_space(r1);
  KernelBasis kb = build_kernel_basis(r1, dm);

  // psi^O of the original center: zero outside its patch
  int col = column_index(kb.basis, ColumnLabel::Kind::KernelVertex, 6);
  REQUIRE(col >= 0);
  Vector psi = Vector(kb.basis.mat.col(col));
  VertexPatch p = vertex_patch(r1, 6);
  FieldSample inside = evaluate_field(r1, dm, psi, r1.vertices[6] + Vec2{0.01, 0.005});
  CHECK(std::abs(inside.value.x) + std::abs(inside.value.y) > 1e-3);
  CHECK(std::abs(inside.div) < 1e-12);
  // a point near the far corner is outside the patch
  FieldSample outside = evaluate_field(r1, dm, psi, {0.05, 0.05});
  CHECK(std::abs(outside.value.x) + std::abs(outside.value.y) < 1e-13);
  CHECK_THROWS_AS(evaluate_field(r1, dm, psi, {2.0, 2.0}), MeshError);
}

TEST_CASE("patch kernel dimension via SVD (macroelement condition)") {
  Triangulation tri = make_perturbed(refine_times(make_appendix_hexagon(), 2), 0.18, 17);
  DofMap dm = build_sbdfm_space(tri);
  KernelBasis kb = build_kernel_basis(tri, dm);
  SpMat B1 = assemble(tri, dm, OperatorKind::DivP1).mat;
  Eigen::MatrixXd B1d(B1);

  int tested = 0;
  for (int v = 0; v < tri.n_vertices() && tested < 4; ++v) {
    if (tri.vertex_is_boundary[v]) continue;
    ++tested;
    VertexPatch p = vertex_patch(tri, v);
    std::vector<int> cols, rows;
    for (int e : p.spoke_edges)
      for (int d : dm.edge_dofs[e]) cols.push_back(d);
    for (int c : p.cells)
      for (int r = 0; r < 3; ++r) rows.push_back(3 * c + r);
    Eigen::MatrixXd Bp(rows.size(), cols.size());
    for (size_t r = 0; r < rows.size(); ++r)
      for (size_t c = 0; c < cols.size(); ++c) Bp(r, c) = B1d(rows[r], cols[c]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Bp, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int nullity = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) < 1e-10 * sv(0)) ++nullity;
    CHECK(nullity == 1);

    // the null vector is psi^O up to scale
    Eigen::VectorXd null = svd.matrixV().col(int(cols.size()) - 1);
    int kcol = column_index(kb.basis, ColumnLabel::Kind::KernelVertex, v);
    Eigen::VectorXd psi(cols.size());
    for (size_t c = 0; c < cols.size(); ++c) psi(c) = kb.basis.mat.coeff(cols[c], kcol);
    double cosang = std::abs(null.dot(psi)) / (null.norm() * psi.norm());
    CHECK(std::acos(std::min(1.0, cosang)) < 1e-8);
  }
  CHECK(tested == 4);
}

TEST_CASE("sweeping solvency: kernel columns span the divergence-free subspace") {
  Triangulation tri = uniform_refine(make_appendix_hexagon());
  DofMap dm = build_sbdfm_space(tri);
  KernelBasis kb = build_kernel_basis(tri, dm);
  SpMat B1 = assemble(tri, dm, OperatorKind::DivP1).mat;
  Eigen::MatrixXd Bd(B1);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Bd, Eigen::ComputeFullV);
  // null space of B has dimension 19 here; mix its basis with fixed weights
  int n = int(Bd.cols());
  int nullity = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) < 1e-10 * svd.singularValues()(0)) ++nullity;
  nullity += n - int(svd.singularValues().size());
  CHECK(nullity == kb.basis.cols());
  Eigen::VectorXd mix = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < nullity; ++i) mix += (1.0 + 0.1 * i) * svd.matrixV().col(n - 1 - i);
  Eigen::MatrixXd K(kb.basis.mat);
  Eigen::VectorXd coef = K.colPivHouseholderQr().solve(mix);
  CHECK((K * coef - mix).norm() < 1e-10 * mix.norm());
}

TEST_CASE("coordinate export format") {
  Triangulation hex = make_appendix_hexagon();
  DofMap dm = build_sbdfm_space(hex);
  KernelBasis kb = build_kernel_basis(hex, dm);
  std::ostringstream os;
  write_coordinate_format(os, kb.basis.mat);
  std::istringstream is(os.str());
  int r, c, lines = 0;
  double val;
  while (is >> r >> c >> val) {
    CHECK(r >= 0);
    CHECK(r < dm.dim);
    CHECK(c == 0);
    ++lines;
  }
  CHECK(lines == kb.basis.mat.nonZeros());
}
