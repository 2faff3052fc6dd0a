#include "divfem/quadrature.hpp"

#include <cmath>

namespace divfem {

const std::vector<TriQuadPoint>& tri_rule_degree6() {
  static const std::vector<TriQuadPoint> rule = [] {
    std::vector<TriQuadPoint> r;
    auto orbit3 = [&r](double a, double b, double w) {
      r.push_back({{a, b, b}, w});
      r.push_back({{b, a, b}, w});
      r.push_back({{b, b, a}, w});
    };
    auto orbit6 = [&r](double a, double b, double c, double w) {
      r.push_back({{a, b, c}, w});
      r.push_back({{a, c, b}, w});
      r.push_back({{b, a, c}, w});
      r.push_back({{b, c, a}, w});
      r.push_back({{c, a, b}, w});
      r.push_back({{c, b, a}, w});
    };
    orbit3(0.873821971016996, 0.063089014491502, 0.050844906370207);
    orbit3(0.501426509658179, 0.249286745170910, 0.116786275726379);
    orbit6(0.636502499121399, 0.310352451033785, 0.053145049844816, 0.082851075618374);
    return r;
  }();
  return rule;
}

const std::array<EdgeQuadPoint, 3>& edge_rule_degree5() {
  static const std::array<EdgeQuadPoint, 3> rule = [] {
    const double g = std::sqrt(3.0 / 5.0);
    // Gauss-Legendre on [-1,1]: nodes (-g, 0, g), weights (5/9, 8/9, 5/9),
    // mapped to [0,1] with weights summing to 1.
    return std::array<EdgeQuadPoint, 3>{{{0.5 * (1.0 - g), 5.0 / 18.0},
                                         {0.5, 8.0 / 18.0},
                                         {0.5 * (1.0 + g), 5.0 / 18.0}}};
  }();
  return rule;
}

double integrate_cell(const CellFrame& f, const std::function<double(const Point2&)>& g) {
  double s = 0.0;
  for (const auto& q : tri_rule_degree6()) s += q.w * g(f.point(q.b));
  return s * f.area;
}

double integrate_edge(const Point2& a, const Point2& b,
                      const std::function<double(const Point2&)>& g) {
  double s = 0.0;
  for (const auto& q : edge_rule_degree5()) s += q.w * g(a + q.s * (b - a));
  return s * norm(b - a);
}

} // namespace divfem
