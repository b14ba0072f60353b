#include "fsi/femcore/p2.hpp"

#include <cmath>

namespace fsi::femcore {

namespace {

std::array<QuadPoint, 7> make_rule() {
  const double s15 = std::sqrt(15.0);
  const double a1 = (6.0 - s15) / 21.0, b1 = (9.0 + 2.0 * s15) / 21.0, w1 = (155.0 - s15) / 1200.0;
  const double a2 = (6.0 + s15) / 21.0, b2 = (9.0 - 2.0 * s15) / 21.0, w2 = (155.0 + s15) / 1200.0;
  return {{{1.0 / 3.0, 1.0 / 3.0, 9.0 / 40.0},
           {a1, a1, w1},
           {b1, a1, w1},
           {a1, b1, w1},
           {a2, a2, w2},
           {b2, a2, w2},
           {a2, b2, w2}}};
}

}  // namespace

std::span<const QuadPoint> triangle_rule() {
  static const std::array<QuadPoint, 7> rule = make_rule();
  return rule;
}

std::array<double, 6> p2_values(double xi, double eta) {
  const double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
  return {l0 * (2.0 * l0 - 1.0), l1 * (2.0 * l1 - 1.0), l2 * (2.0 * l2 - 1.0), 4.0 * l1 * l2, 4.0 * l2 * l0,
          4.0 * l0 * l1};
}

std::array<std::array<double, 2>, 6> p2_gradients(double xi, double eta) {
  const double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
  // d(l0) = (-1,-1), d(l1) = (1,0), d(l2) = (0,1)
  return {{{-(4.0 * l0 - 1.0), -(4.0 * l0 - 1.0)},
           {4.0 * l1 - 1.0, 0.0},
           {0.0, 4.0 * l2 - 1.0},
           {4.0 * l2, 4.0 * l1},
           {-4.0 * l2, 4.0 * (l0 - l2)},
           {4.0 * (l0 - l1), -4.0 * l1}}};
}

}  // namespace fsi::femcore
