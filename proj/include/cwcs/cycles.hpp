#pragma once

#include <string>
#include <vector>

#include "cwcs/form.hpp"

namespace cwcs {

/// One quadrature term of a discrete k-chain: weight * (coefficient of the
/// k-form component `mask` at `node`).
struct CycleTerm {
  std::size_t node;
  IndexMask mask;
  double weight;
};

/// Discrete representative of a homology class.
struct Cycle {
  std::string label;
  int dim = 0;
  std::vector<CycleTerm> terms;
};

struct CycleBasis {
  std::vector<Cycle> cycles;

  std::vector<const Cycle*> of_dimension(int k) const;
};

/// Pairing of a scalar k-form with a k-cycle.
Complex period(const MatrixForm& form, const Cycle& cycle);

/// Coordinate sub-torus/sub-chart cycle: integrates over `axes` with every
/// other axis pinned to node index `pinned[axis]` (ignored for integrated axes).
Cycle coordinate_cycle(const ChartGrid& grid, IndexMask axes, std::vector<int> pinned,
                       std::string label, double orientation = 1.0);

}  // namespace cwcs
