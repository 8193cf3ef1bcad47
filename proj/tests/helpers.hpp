#pragma once

#include <random>
#include <vector>

#include "topo/assembly.hpp"
#include "topo/grid.hpp"

namespace testutil {

struct Fixture {
  topo::StructuredGrid grid;
  topo::DofMap dofmap;
  topo::LoadCase loads;
};

// Left edge fully fixed, unit downward tip load at mid height.
inline Fixture cantilever2d(int nelx, int nely) {
  auto grid = topo::StructuredGrid::make2d(nelx, nely);
  std::vector<int> fixed;
  for (int iy = 0; iy <= nely; ++iy) {
    const int n = grid.node_index(0, iy);
    fixed.push_back(2 * n);
    fixed.push_back(2 * n + 1);
  }
  topo::LoadCase loads;
  loads.entries.push_back({grid.node_index(nelx, nely / 2), 1, -1.0});
  return {grid, topo::DofMap(grid, fixed), loads};
}

// Left face fully fixed, unit downward load at the free-end face center.
inline Fixture cantilever3d(int nelx, int nely, int nelz) {
  auto grid = topo::StructuredGrid::make3d(nelx, nely, nelz);
  std::vector<int> fixed;
  for (int iz = 0; iz <= nelz; ++iz)
    for (int iy = 0; iy <= nely; ++iy) {
      const int n = grid.node_index(0, iy, iz);
      for (int a = 0; a < 3; ++a) fixed.push_back(3 * n + a);
    }
  topo::LoadCase loads;
  loads.entries.push_back({grid.node_index(nelx, nely / 2, nelz / 2), 2, -1.0});
  return {grid, topo::DofMap(grid, fixed), loads};
}

inline std::vector<double> random_moduli(int count, unsigned seed,
                                         double lo = 1e-3, double hi = 1.0) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> m(count);
  for (double& v : m) v = dist(gen);
  return m;
}

inline std::vector<double> random_densities(int count, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(0.05, 0.95);
  std::vector<double> r(count);
  for (double& v : r) v = dist(gen);
  return r;
}

inline Eigen::VectorXd random_vector(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(gen);
  return v;
}

}  // namespace testutil
