#include "divfem/assembly.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "divfem/errors.hpp"

namespace divfem {

namespace {

// Values of the 9 global nodal basis functions and their derivatives at the
// triangle quadrature points of one cell.
struct CellBasisEval {
  CellFrame frame;
  std::array<int, 9> gdof;
  std::array<VecPoly, 9> phi;
  std::array<ScalarPoly, 9> div;
};

CellBasisEval cell_basis(const Triangulation& tri, const DofMap& dm, int c) {
  CellBasisEval cb;
  CellDofFrame cf = cell_dof_frame(tri, c);
  cb.frame = cf.frame;
  cb.gdof = dm.cell_dofs(tri, c);
  cb.phi = sbdfm_global_nodal_basis(cf);
  for (int s = 0; s < 9; ++s) cb.div[s] = div_of(cb.phi[s], cb.frame);
  return cb;
}

} // namespace

SparseOperator assemble(const Triangulation& tri, const DofMap& dm, OperatorKind kind) {
  SparseOperator op;
  op.kind = kind;
  std::vector<Eigen::Triplet<double>> trips;
  const auto& rule = tri_rule_degree6();

  switch (kind) {
  case OperatorKind::PressureMassP0: {
    for (int c = 0; c < tri.n_cells(); ++c) trips.emplace_back(c, c, tri.cell_area[c]);
    op.mat.resize(tri.n_cells(), tri.n_cells());
    op.symmetric = true;
    break;
  }
  case OperatorKind::PressureMassP1: {
    for (int c = 0; c < tri.n_cells(); ++c) {
      CellFrame f = cell_frame(tri, c);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          double v = (ScalarPoly::lambda(a) * ScalarPoly::lambda(b)).integral(f);
          trips.emplace_back(3 * c + a, 3 * c + b, v);
        }
    }
    op.mat.resize(3 * tri.n_cells(), 3 * tri.n_cells());
    op.symmetric = true;
    break;
  }
  case OperatorKind::GradGrad:
  case OperatorKind::Mass: {
    const bool grad = kind == OperatorKind::GradGrad;
    for (int c = 0; c < tri.n_cells(); ++c) {
      CellBasisEval cb = cell_basis(tri, dm, c);
      std::array<GradPoly, 9> g;
      if (grad)
        for (int s = 0; s < 9; ++s) g[s] = grad_of(cb.phi[s], cb.frame);
      for (int a = 0; a < 9; ++a) {
        if (cb.gdof[a] < 0) continue;
        for (int b = 0; b < 9; ++b) {
          if (cb.gdof[b] < 0) continue;
          double v = 0.0;
          for (const auto& q : rule) {
            if (grad) {
              v += q.w * (g[a].xx.eval(q.b) * g[b].xx.eval(q.b) +
                          g[a].xy.eval(q.b) * g[b].xy.eval(q.b) +
                          g[a].yx.eval(q.b) * g[b].yx.eval(q.b) +
                          g[a].yy.eval(q.b) * g[b].yy.eval(q.b));
            } else {
              v += q.w * dot(cb.phi[a].eval(q.b), cb.phi[b].eval(q.b));
            }
          }
          trips.emplace_back(cb.gdof[a], cb.gdof[b], v * cb.frame.area);
        }
      }
    }
    op.mat.resize(dm.dim, dm.dim);
    op.symmetric = true;
    break;
  }
  case OperatorKind::DivP1:
  case OperatorKind::DivP0: {
    const bool p1 = kind == OperatorKind::DivP1;
    for (int c = 0; c < tri.n_cells(); ++c) {
      CellBasisEval cb = cell_basis(tri, dm, c);
      for (int b = 0; b < 9; ++b) {
        if (cb.gdof[b] < 0) continue;
        if (p1) {
          for (int r = 0; r < 3; ++r) {
            double v = (cb.div[b] * ScalarPoly::lambda(r)).integral(cb.frame);
            trips.emplace_back(3 * c + r, cb.gdof[b], v);
          }
        } else {
          trips.emplace_back(c, cb.gdof[b], cb.div[b].integral(cb.frame));
        }
      }
    }
    op.mat.resize(p1 ? 3 * tri.n_cells() : tri.n_cells(), dm.dim);
    op.symmetric = false;
    break;
  }
  }

  op.mat.setFromTriplets(trips.begin(), trips.end());
  op.mat.makeCompressed();
  return op;
}

Vector assemble_load(const Triangulation& tri, const DofMap& dm, const VectorField& f) {
  Vector rhs = Vector::Zero(dm.dim);
  const auto& rule = tri_rule_degree6();
  for (int c = 0; c < tri.n_cells(); ++c) {
    CellBasisEval cb = cell_basis(tri, dm, c);
    for (const auto& q : rule) {
      Vec2 fv = f(cb.frame.point(q.b));
      double w = q.w * cb.frame.area;
      for (int s = 0; s < 9; ++s) {
        if (cb.gdof[s] < 0) continue;
        rhs(cb.gdof[s]) += w * dot(fv, cb.phi[s].eval(q.b));
      }
    }
  }
  return rhs;
}

Vector assemble_biharmonic_load(const Triangulation& tri, const KernelBasis& kb,
                                const ScalarField& g) {
  Vector rhs = Vector::Zero(kb.basis.cols());
  const auto& rule = tri_rule_degree6();
  for (int col = 0; col < kb.basis.cols(); ++col) {
    double v = 0.0;
    for (const auto& [c, zeta] : kb.potentials.pieces[col]) {
      CellFrame f = cell_frame(tri, c);
      for (const auto& q : rule) v += q.w * f.area * g(f.point(q.b)) * zeta.eval(q.b);
    }
    rhs(col) = v;
  }
  return rhs;
}

Vector pressure_integrals(const Triangulation& tri, bool p1) {
  if (!p1) {
    Vector m(tri.n_cells());
    for (int c = 0; c < tri.n_cells(); ++c) m(c) = tri.cell_area[c];
    return m;
  }
  Vector m(3 * tri.n_cells());
  for (int c = 0; c < tri.n_cells(); ++c)
    for (int r = 0; r < 3; ++r) m(3 * c + r) = tri.cell_area[c] / 3.0;
  return m;
}

SpMat reduce(const SpMat& op, const CombinationMatrix& c) {
  if (op.rows() != c.mat.rows() || op.cols() != c.mat.rows())
    throw MeshError("reduce: dimension mismatch");
  SpMat r = c.mat.transpose() * op * c.mat;
  r.makeCompressed();
  return r;
}

SpMat reduce_rect(const SpMat& op, const CombinationMatrix& ccol) {
  if (op.cols() != ccol.mat.rows()) throw MeshError("reduce_rect: dimension mismatch");
  SpMat r = op * ccol.mat;
  r.makeCompressed();
  return r;
}

Vector reduce_load(const Vector& v, const CombinationMatrix& c) {
  if (v.size() != c.mat.rows()) throw MeshError("reduce_load: dimension mismatch");
  return c.mat.transpose() * v;
}

ErrorReport error_norms(const Triangulation& tri, const DofMap& dm, const Vector& coeffs,
                        const VectorField& exact, const MatrixField& exact_grad) {
  ErrorReport rep;
  double l2 = 0.0, h1 = 0.0, dl2 = 0.0;
  const auto& rule = tri_rule_degree6();
  for (int c = 0; c < tri.n_cells(); ++c) {
    CellFrame f = cell_frame(tri, c);
    VecPoly v = cell_field(tri, dm, coeffs, c);
    GradPoly g = grad_of(v, f);
    ScalarPoly dv = div_of(v, f);
    for (const auto& q : rule) {
      Point2 x = f.point(q.b);
      double w = q.w * f.area;
      Vec2 dvec = v.eval(q.b) - exact(x);
      l2 += w * dot(dvec, dvec);
      auto eg = exact_grad(x);
      double d0 = g.xx.eval(q.b) - eg[0];
      double d1 = g.xy.eval(q.b) - eg[1];
      double d2 = g.yx.eval(q.b) - eg[2];
      double d3 = g.yy.eval(q.b) - eg[3];
      h1 += w * (d0 * d0 + d1 * d1 + d2 * d2 + d3 * d3);
      double dd = dv.eval(q.b);
      dl2 += w * dd * dd;
    }
  }
  rep.l2 = std::sqrt(l2);
  rep.h1_semi = std::sqrt(h1);
  rep.div_l2 = std::sqrt(dl2);
  return rep;
}

double pressure_error_l2(const Triangulation& tri, bool p1, const Vector& coeffs,
                         const ScalarField& exact) {
  double acc = 0.0;
  const auto& rule = tri_rule_degree6();
  for (int c = 0; c < tri.n_cells(); ++c) {
    CellFrame f = cell_frame(tri, c);
    for (const auto& q : rule) {
      double ph = p1 ? coeffs(3 * c) * q.b.l1 + coeffs(3 * c + 1) * q.b.l2 +
                           coeffs(3 * c + 2) * q.b.l3
                     : coeffs(c);
      double d = ph - exact(f.point(q.b));
      acc += q.w * f.area * d * d;
    }
  }
  return std::sqrt(acc);
}

Vector project_pressure(const Triangulation& tri, bool p1, const ScalarField& p) {
  if (!p1) {
    Vector x(tri.n_cells());
    for (int c = 0; c < tri.n_cells(); ++c) {
      CellFrame f = cell_frame(tri, c);
      x(c) = integrate_cell(f, p) / f.area;
    }
    return x;
  }
  Vector x(3 * tri.n_cells());
  for (int c = 0; c < tri.n_cells(); ++c) {
    CellFrame f = cell_frame(tri, c);
    Eigen::Matrix3d m;
    Eigen::Vector3d b;
    for (int a = 0; a < 3; ++a) {
      b(a) = integrate_cell(f, [&](const Point2& xx) {
        return p(xx) * ScalarPoly::lambda(a).eval(f.barycentric(xx));
      });
      for (int bb = 0; bb < 3; ++bb)
        m(a, bb) = (ScalarPoly::lambda(a) * ScalarPoly::lambda(bb)).integral(f);
    }
    Eigen::Vector3d sol = m.ldlt().solve(b);
    for (int a = 0; a < 3; ++a) x(3 * c + a) = sol(a);
  }
  return x;
}

ScalarErrorReport scalar_error_norms(const Triangulation& tri, const KernelBasis& kb,
                                     const Vector& x, const ScalarExact& exact) {
  // Gather the potential expansion per cell.
  std::vector<ScalarPoly> u(tri.n_cells());
  for (int col = 0; col < kb.basis.cols(); ++col) {
    if (x(col) == 0.0) continue;
    for (const auto& [c, zeta] : kb.potentials.pieces[col]) u[c] += zeta * x(col);
  }

  ScalarErrorReport rep;
  double l2 = 0.0, h1 = 0.0, h2 = 0.0;
  const auto& rule = tri_rule_degree6();
  for (int c = 0; c < tri.n_cells(); ++c) {
    CellFrame f = cell_frame(tri, c);
    ScalarPoly ux = u[c].dx(f), uy = u[c].dy(f);
    ScalarPoly uxx = ux.dx(f), uxy = ux.dy(f), uyy = uy.dy(f);
    for (const auto& q : rule) {
      Point2 p = f.point(q.b);
      double w = q.w * f.area;
      double d = u[c].eval(q.b) - exact.value(p);
      l2 += w * d * d;
      Vec2 dg = Vec2{ux.eval(q.b), uy.eval(q.b)} - exact.grad(p);
      h1 += w * dot(dg, dg);
      auto hh = exact.hess(p);
      double e0 = uxx.eval(q.b) - hh[0];
      double e1 = uxy.eval(q.b) - hh[1];
      double e2 = uyy.eval(q.b) - hh[2];
      h2 += w * (e0 * e0 + 2.0 * e1 * e1 + e2 * e2);
    }
  }
  rep.l2 = std::sqrt(l2);
  rep.h1_semi = std::sqrt(h1);
  rep.h2_semi = std::sqrt(h2);
  rep.h2_norm = std::sqrt(l2 + h1 + h2);
  return rep;
}

} // namespace divfem
