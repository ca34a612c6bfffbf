#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "fairrec/rules/grounding.hpp"

namespace fairrec::testing {

struct GridMin {
  double value;
  std::vector<double> point;
};

inline double eval_at(std::span<const GroundPotential> pots,
                      std::span<const double> y) {
  double sum = 0.0;
  for (const GroundPotential& p : pots) sum += p.evaluate(y);
  return sum;
}

// Brute-force minimum of the weighted hinge sum over the `res`-grid on
// [0,1]^n. Exhaustive for n <= 2. For n == 3 a full sweep is ~1e9
// points, so a 0.02 coarse pass prunes cells first: a cell whose
// center value exceeds the coarse minimum by more than L*h*sqrt(3)/2
// (L a Lipschitz bound for the objective on the box) cannot contain
// any grid point below the coarse minimum, and the coarse centers are
// themselves grid points. Surviving cells are swept at full
// resolution, so the result equals the exhaustive grid minimum.
inline GridMin grid_min(std::span<const GroundPotential> pots, int n,
                        double res = 1e-3) {
  GridMin best{std::numeric_limits<double>::infinity(), std::vector<double>(n, 0.0)};
  auto consider = [&](std::span<const double> y) {
    double v = eval_at(pots, y);
    if (v < best.value) {
      best.value = v;
      best.point.assign(y.begin(), y.end());
    }
  };

  if (n == 0) {
    best.value = eval_at(pots, {});
    return best;
  }

  const int steps = static_cast<int>(std::lround(1.0 / res));
  if (n <= 2) {
    std::vector<double> y(n);
    for (int i = 0; i <= steps; ++i) {
      y[0] = i * res;
      if (n == 1) {
        consider(y);
        continue;
      }
      for (int j = 0; j <= steps; ++j) {
        y[1] = j * res;
        consider(y);
      }
    }
    return best;
  }

  // n == 3: coarse pass computing, per cell, the value at the center
  // and a lower bound over the whole cell: l_j(x) >= l_j(center) -
  // (h/2) * sum |a_j| within the cell, and max(0,.)^p is monotone.
  const double h = 0.02;
  const int coarseSteps = static_cast<int>(std::lround(1.0 / h));

  std::vector<double> slack(pots.size());
  for (size_t j = 0; j < pots.size(); ++j) {
    double l1 = 0.0;
    for (auto [idx, c] : pots[j].coefficients) l1 += std::abs(c);
    slack[j] = l1 * h / 2.0;
  }
  auto cell_lower_bound = [&](std::span<const double> center) {
    double lb = 0.0;
    for (size_t j = 0; j < pots.size(); ++j) {
      double l = pots[j].constant;
      for (auto [idx, c] : pots[j].coefficients) l += c * center[idx];
      double d = std::max(0.0, l - slack[j]);
      lb += pots[j].weight * (pots[j].exponent == 2 ? d * d : d);
    }
    return lb;
  };

  std::vector<double> lowerBound((coarseSteps + 1) * (coarseSteps + 1) *
                                 (coarseSteps + 1));
  std::vector<double> y(3);
  size_t at = 0;
  for (int i = 0; i <= coarseSteps; ++i)
    for (int j = 0; j <= coarseSteps; ++j)
      for (int k = 0; k <= coarseSteps; ++k) {
        y = {i * h, j * h, k * h};
        double v = eval_at(pots, y);
        lowerBound[at++] = cell_lower_bound(y);
        if (v < best.value) {
          best.value = v;
          best.point = y;
        }
      }

  // Coarse centers are grid points, so the refined minimum is at most
  // the coarse minimum; cells whose bound exceeds it cannot help.
  const double coarseMin = best.value;
  const int half = static_cast<int>(std::lround(h / res)) / 2;
  at = 0;
  for (int i = 0; i <= coarseSteps; ++i)
    for (int j = 0; j <= coarseSteps; ++j)
      for (int k = 0; k <= coarseSteps; ++k) {
        if (lowerBound[at++] >= coarseMin) continue;  // cannot strictly improve
        const double cx = i * h, cy = j * h, cz = k * h;
        for (int a = -half; a <= half; ++a) {
          y[0] = cx + a * res;
          if (y[0] < 0.0 || y[0] > 1.0) continue;
          for (int b = -half; b <= half; ++b) {
            y[1] = cy + b * res;
            if (y[1] < 0.0 || y[1] > 1.0) continue;
            for (int c = -half; c <= half; ++c) {
              y[2] = cz + c * res;
              if (y[2] < 0.0 || y[2] > 1.0) continue;
              consider(y);
            }
          }
        }
      }
  return best;
}

}  // namespace fairrec::testing
