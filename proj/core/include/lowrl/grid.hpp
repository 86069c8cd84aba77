#pragma once

#include <vector>

#include "lowrl/envs.hpp"
#include "lowrl/linalg.hpp"

namespace lowrl {

// Uniform lattice of cell centers over a box, optionally augmented with
// anchor points appended after the lattice block. Covering radius (beta) is
// the half-diagonal of a cell. Immutable after construction.
struct GridNet {
  BoxSpace space;
  double beta = 0.0;
  std::vector<int> per_dim_counts;
  Matrix points;  // one point per row; lattice rows first, then anchors
  std::vector<Index> anchor_indices;
  Index lattice_count = 0;

  Index size() const { return points.rows(); }
  int dims() const { return static_cast<int>(points.cols()); }
  Vector point(Index i) const { return points.row(i).transpose(); }
  double spacing(int dim) const {
    return space.range(dim) / per_dim_counts[static_cast<std::size_t>(dim)];
  }
};

// beta-net: cell centers with per-dim spacing <= 2*beta/sqrt(d), so the l2
// covering radius of the lattice is at most beta. beta larger than the
// space diameter yields a single center.
GridNet build_net(const BoxSpace& space, double beta);

// Same lattice construction from explicit per-dim counts; beta is set to
// the implied half-diagonal of a cell.
GridNet build_net_from_counts(const BoxSpace& space,
                              const std::vector<int>& counts);

// Append anchors, deduplicating against existing points at 1e-12; records
// anchor indices either way.
GridNet augment(const GridNet& grid, const std::vector<Vector>& anchors);

// Index of the l2-closest grid point; ties resolved to the lowest index.
Index nearest_index(const GridNet& grid, const Vector& point);

}  // namespace lowrl
