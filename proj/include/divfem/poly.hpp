#pragma once

#include <array>

#include "divfem/geometry.hpp"
#include "divfem/mesh.hpp"

namespace divfem {

/// Barycentric coordinates of a point in a cell.
struct Bary {
  double l1 = 0.0, l2 = 0.0, l3 = 0.0;
  double operator[](int i) const { return i == 0 ? l1 : (i == 1 ? l2 : l3); }
};

/// Geometric data of one triangle: vertices (CCW), area, barycentric
/// gradients, and per local edge the length d_i, outward unit normal n_i and
/// unit tangent t_i with n_i x t_i > 0 (t_i points along the CCW traversal).
struct CellFrame {
  std::array<Point2, 3> p;
  double area = 0.0;
  std::array<Vec2, 3> grad_lambda;
  std::array<double, 3> edge_len;
  std::array<Vec2, 3> normal;
  std::array<Vec2, 3> tangent;

  Bary barycentric(const Point2& x) const;
  Point2 point(const Bary& b) const;
};

CellFrame cell_frame(const std::array<Point2, 3>& pts);
CellFrame cell_frame(const Triangulation& tri, int c);

/// Scalar polynomial of total degree <= 3 in barycentric coordinates,
/// stored as coefficients over the 20 monomials l1^a l2^b l3^c, a+b+c <= 3.
/// The representation is not unique (l1+l2+l3 = 1); all operations used here
/// (evaluation, differentiation, integration) are well defined on any
/// representative.
class ScalarPoly {
public:
  static constexpr int kCount = 20;

  ScalarPoly() { coef_.fill(0.0); }

  static int index(int a, int b, int c);
  static std::array<int, 3> exponents(int idx);

  static ScalarPoly monomial(int a, int b, int c, double coef = 1.0);
  static ScalarPoly lambda(int i); // barycentric coordinate i = 0,1,2
  static ScalarPoly constant(double v);

  double& operator[](int idx) { return coef_[idx]; }
  double operator[](int idx) const { return coef_[idx]; }

  ScalarPoly operator+(const ScalarPoly& o) const;
  ScalarPoly operator-(const ScalarPoly& o) const;
  ScalarPoly operator*(double s) const;
  ScalarPoly& operator+=(const ScalarPoly& o);

  /// Product, valid while total degree stays <= 3 (asserted).
  ScalarPoly operator*(const ScalarPoly& o) const;

  double eval(const Bary& b) const;

  /// d/dx and d/dy via the chain rule with the frame's constant grad lambda.
  ScalarPoly dx(const CellFrame& f) const;
  ScalarPoly dy(const CellFrame& f) const;

  /// Exact integral over the frame's cell:
  /// int_T l1^a l2^b l3^c = 2*area * a! b! c! / (a+b+c+2)!.
  double integral(const CellFrame& f) const;

private:
  std::array<double, kCount> coef_;
};

/// Vector polynomial (Cartesian components).
struct VecPoly {
  ScalarPoly x, y;

  VecPoly() = default;
  VecPoly(ScalarPoly px, ScalarPoly py) : x(std::move(px)), y(std::move(py)) {}

  VecPoly operator+(const VecPoly& o) const { return {x + o.x, y + o.y}; }
  VecPoly operator-(const VecPoly& o) const { return {x - o.x, y - o.y}; }
  VecPoly operator*(double s) const { return {x * s, y * s}; }
  VecPoly& operator+=(const VecPoly& o) {
    x += o.x;
    y += o.y;
    return *this;
  }

  Vec2 eval(const Bary& b) const { return {x.eval(b), y.eval(b)}; }
};

inline VecPoly operator*(double s, const VecPoly& v) { return v * s; }
inline VecPoly operator*(const ScalarPoly& s, const Vec2& dir) {
  return {s * dir.x, s * dir.y};
}

/// curl q = (dq/dy, -dq/dx)
VecPoly curl_of(const ScalarPoly& q, const CellFrame& f);
/// div v = dvx/dx + dvy/dy
ScalarPoly div_of(const VecPoly& v, const CellFrame& f);
/// rot v = dvy/dx - dvx/dy
ScalarPoly rot_of(const VecPoly& v, const CellFrame& f);

/// Gradient rows of a vector polynomial: (dvx/dx, dvx/dy, dvy/dx, dvy/dy).
struct GradPoly {
  ScalarPoly xx, xy, yx, yy;
};
GradPoly grad_of(const VecPoly& v, const CellFrame& f);

} // namespace divfem
