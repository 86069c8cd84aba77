#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "lowrl/grid.hpp"
#include "lowrl/rng.hpp"

namespace lowrl {

// Anchor states S# and actions A#, fixed across iterations. The rank
// certificate sigma_r of the explored anchor block is recorded once
// measured.
struct AnchorSet {
  std::vector<Vector> states;
  std::vector<Vector> actions;
  std::optional<double> rank_certificate;
};

// r points per space, one drawn uniformly from each of r equal-volume slabs
// along the longest axis. Deterministic given the seed.
AnchorSet select_anchors(const BoxSpace& state_space,
                         const BoxSpace& action_space, int r,
                         std::uint64_t seed);

// Anchors for a finite space embedded as integer points: r distinct indices,
// one from each of r contiguous index blocks.
std::vector<Vector> select_anchor_indices(int n, int r, RngStream& rng);

// Exploration set: the anchor row/column cross in the augmented grids.
struct ExplorationSet {
  std::vector<std::pair<Index, Index>> pairs;  // (state idx, action idx)
  std::size_t size() const { return pairs.size(); }
};

// Exact anchor cross; |omega| = |S#|*|A_bar| + |A#|*|S_bar| - |S#|*|A#|.
// Both grids must carry anchor indices.
ExplorationSet build_omega(const GridNet& s_grid, const GridNet& a_grid);

}  // namespace lowrl
