#include "divfem/poly.hpp"

#include <cassert>

#include "divfem/errors.hpp"

namespace divfem {

Bary CellFrame::barycentric(const Point2& x) const {
  double l1 = signed_area(x, p[1], p[2]) / area;
  double l2 = signed_area(p[0], x, p[2]) / area;
  return {l1, l2, 1.0 - l1 - l2};
}

Point2 CellFrame::point(const Bary& b) const {
  return b.l1 * p[0] + b.l2 * p[1] + b.l3 * p[2];
}

CellFrame cell_frame(const std::array<Point2, 3>& pts) {
  CellFrame f;
  f.p = pts;
  f.area = signed_area(pts[0], pts[1], pts[2]);
  if (!(f.area > 0.0)) throw MeshError("cell_frame: cell not counterclockwise / degenerate");
  for (int i = 0; i < 3; ++i) {
    const Point2& a = pts[(i + 1) % 3];
    const Point2& b = pts[(i + 2) % 3];
    Vec2 t = b - a; // CCW traversal direction of edge i
    f.edge_len[i] = norm(t);
    t = t / f.edge_len[i];
    f.tangent[i] = t;
    f.normal[i] = rot90cw(t); // outward for a CCW cell, n x t = 1
    // grad lambda_i: lambda_i = cross(b - a, x - a) / (2 area)
    f.grad_lambda[i] = rot90ccw(b - a) / (2.0 * f.area);
  }
  return f;
}

CellFrame cell_frame(const Triangulation& tri, int c) {
  const auto& v = tri.cells[c];
  return cell_frame({tri.vertices[v[0]], tri.vertices[v[1]], tri.vertices[v[2]]});
}

namespace {

struct MonoTables {
  std::array<std::array<int, 3>, ScalarPoly::kCount> expo;
  int lookup[4][4][4];
  // integral of l1^a l2^b l3^c over a unit-area cell
  std::array<double, ScalarPoly::kCount> unit_integral;

  MonoTables() {
    for (auto& a : lookup)
      for (auto& b : a)
        for (auto& c : b) c = -1;
    auto fact = [](int n) {
      double f = 1.0;
      for (int k = 2; k <= n; ++k) f *= k;
      return f;
    };
    int idx = 0;
    for (int d = 0; d <= 3; ++d)
      for (int a = d; a >= 0; --a)
        for (int b = d - a; b >= 0; --b) {
          int c = d - a - b;
          expo[idx] = {a, b, c};
          lookup[a][b][c] = idx;
          double f = 2.0 * fact(a) * fact(b) * fact(c);
          double denom = 1.0;
          for (int k = 2; k <= a + b + c + 2; ++k) denom *= k;
          unit_integral[idx] = f / denom;
          ++idx;
        }
  }
};

const MonoTables& tables() {
  static const MonoTables t;
  return t;
}

} // namespace

int ScalarPoly::index(int a, int b, int c) {
  assert(a >= 0 && b >= 0 && c >= 0 && a + b + c <= 3);
  return tables().lookup[a][b][c];
}

std::array<int, 3> ScalarPoly::exponents(int idx) { return tables().expo[idx]; }

ScalarPoly ScalarPoly::monomial(int a, int b, int c, double coef) {
  ScalarPoly p;
  p.coef_[index(a, b, c)] = coef;
  return p;
}

ScalarPoly ScalarPoly::lambda(int i) {
  return monomial(i == 0, i == 1, i == 2, 1.0);
}

ScalarPoly ScalarPoly::constant(double v) { return monomial(0, 0, 0, v); }

ScalarPoly ScalarPoly::operator+(const ScalarPoly& o) const {
  ScalarPoly r;
  for (int i = 0; i < kCount; ++i) r.coef_[i] = coef_[i] + o.coef_[i];
  return r;
}

ScalarPoly ScalarPoly::operator-(const ScalarPoly& o) const {
  ScalarPoly r;
  for (int i = 0; i < kCount; ++i) r.coef_[i] = coef_[i] - o.coef_[i];
  return r;
}

ScalarPoly ScalarPoly::operator*(double s) const {
  ScalarPoly r;
  for (int i = 0; i < kCount; ++i) r.coef_[i] = coef_[i] * s;
  return r;
}

ScalarPoly& ScalarPoly::operator+=(const ScalarPoly& o) {
  for (int i = 0; i < kCount; ++i) coef_[i] += o.coef_[i];
  return *this;
}

ScalarPoly ScalarPoly::operator*(const ScalarPoly& o) const {
  ScalarPoly r;
  const auto& t = tables();
  for (int i = 0; i < kCount; ++i) {
    if (coef_[i] == 0.0) continue;
    const auto& ei = t.expo[i];
    for (int j = 0; j < kCount; ++j) {
      if (o.coef_[j] == 0.0) continue;
      const auto& ej = t.expo[j];
      int a = ei[0] + ej[0], b = ei[1] + ej[1], c = ei[2] + ej[2];
      if (a + b + c > 3) throw MeshError("ScalarPoly: product exceeds degree 3");
      r.coef_[t.lookup[a][b][c]] += coef_[i] * o.coef_[j];
    }
  }
  return r;
}

double ScalarPoly::eval(const Bary& b) const {
  // Powers of the three coordinates up to 3.
  double p1[4] = {1, b.l1, b.l1 * b.l1, b.l1 * b.l1 * b.l1};
  double p2[4] = {1, b.l2, b.l2 * b.l2, b.l2 * b.l2 * b.l2};
  double p3[4] = {1, b.l3, b.l3 * b.l3, b.l3 * b.l3 * b.l3};
  const auto& t = tables();
  double s = 0.0;
  for (int i = 0; i < kCount; ++i) {
    if (coef_[i] == 0.0) continue;
    const auto& e = t.expo[i];
    s += coef_[i] * p1[e[0]] * p2[e[1]] * p3[e[2]];
  }
  return s;
}

namespace {
ScalarPoly directional_derivative(const ScalarPoly& q, const CellFrame& f, bool ycomp) {
  ScalarPoly r;
  const auto& t = tables();
  for (int i = 0; i < ScalarPoly::kCount; ++i) {
    double c = q[i];
    if (c == 0.0) continue;
    const auto& e = t.expo[i];
    for (int k = 0; k < 3; ++k) {
      if (e[k] == 0) continue;
      double g = ycomp ? f.grad_lambda[k].y : f.grad_lambda[k].x;
      if (g == 0.0) continue;
      std::array<int, 3> d = e;
      d[k] -= 1;
      r[t.lookup[d[0]][d[1]][d[2]]] += c * e[k] * g;
    }
  }
  return r;
}
} // namespace

ScalarPoly ScalarPoly::dx(const CellFrame& f) const { return directional_derivative(*this, f, false); }
ScalarPoly ScalarPoly::dy(const CellFrame& f) const { return directional_derivative(*this, f, true); }

double ScalarPoly::integral(const CellFrame& f) const {
  const auto& t = tables();
  double s = 0.0;
  for (int i = 0; i < kCount; ++i) s += coef_[i] * t.unit_integral[i];
  return s * f.area;
}

VecPoly curl_of(const ScalarPoly& q, const CellFrame& f) {
  return {q.dy(f), q.dx(f) * -1.0};
}

ScalarPoly div_of(const VecPoly& v, const CellFrame& f) {
  return v.x.dx(f) + v.y.dy(f);
}

ScalarPoly rot_of(const VecPoly& v, const CellFrame& f) {
  return v.y.dx(f) - v.x.dy(f);
}

GradPoly grad_of(const VecPoly& v, const CellFrame& f) {
  return {v.x.dx(f), v.x.dy(f), v.y.dx(f), v.y.dy(f)};
}

} // namespace divfem
