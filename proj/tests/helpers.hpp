#pragma once

#include "simclust/rng.hpp"
#include "simclust/types.hpp"

#include <initializer_list>
#include <vector>

namespace testing {

inline simclust::PointSet points_1d(std::initializer_list<double> xs) {
  simclust::PointSet p;
  p.coords.resize(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) p.coords(i++, 0) = x;
  return p;
}

inline simclust::PointSet points_2d(std::initializer_list<std::pair<double, double>> xs) {
  simclust::PointSet p;
  p.coords.resize(static_cast<Eigen::Index>(xs.size()), 2);
  Eigen::Index i = 0;
  for (auto [x, y] : xs) {
    p.coords(i, 0) = x;
    p.coords(i, 1) = y;
    ++i;
  }
  return p;
}

inline simclust::PointSet random_points(simclust::Rng& rng, int n, int d = 2) {
  simclust::PointSet p;
  p.coords.resize(n, d);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) p.coords(i, k) = rng.uniform();
  }
  return p;
}

// Two parallel chains of five unit-spaced points, 20 apart.
inline simclust::PointSet two_chains() {
  simclust::PointSet p;
  p.coords.resize(10, 2);
  for (int i = 0; i < 10; ++i) {
    p.coords(i, 0) = i % 5;
    p.coords(i, 1) = i < 5 ? 0.0 : 20.0;
  }
  p.labels = std::vector<int>{1, 1, 1, 1, 1, 2, 2, 2, 2, 2};
  return p;
}

}  // namespace testing
