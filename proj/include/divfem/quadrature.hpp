#pragma once

#include <array>
#include <functional>
#include <vector>

#include "divfem/geometry.hpp"
#include "divfem/poly.hpp"

namespace divfem {

/// Symmetric triangle rule, exact for total degree <= 6 (12 points).
/// Weights are normalized to sum to 1; multiply by the cell area.
struct TriQuadPoint {
  Bary b;
  double w;
};
const std::vector<TriQuadPoint>& tri_rule_degree6();

/// Gauss rule on [0,1], exact for degree <= 5 (3 points). Weights sum to 1.
struct EdgeQuadPoint {
  double s; // parameter in [0,1]
  double w;
};
const std::array<EdgeQuadPoint, 3>& edge_rule_degree5();

/// Quadrature of a callable over a cell.
double integrate_cell(const CellFrame& f, const std::function<double(const Point2&)>& g);

/// Quadrature of a callable over the segment a -> b.
double integrate_edge(const Point2& a, const Point2& b,
                      const std::function<double(const Point2&)>& g);

} // namespace divfem
