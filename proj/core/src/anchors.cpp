#include "lowrl/anchors.hpp"

#include <algorithm>

namespace lowrl {

namespace {

int longest_axis(const BoxSpace& space) {
  int axis = 0;
  for (int i = 1; i < space.dims(); ++i)
    if (space.range(i) > space.range(axis)) axis = i;
  return axis;
}

std::vector<Vector> draw_partitioned(const BoxSpace& space, int r,
                                     RngStream& rng) {
  const int axis = longest_axis(space);
  const double width = space.range(axis) / r;
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(r));
  for (int k = 0; k < r; ++k) {
    Vector p(space.dims());
    for (int i = 0; i < space.dims(); ++i) {
      if (i == axis) {
        const double lo = space.lower(axis) + k * width;
        p(i) = rng.uniform(lo, lo + width);
      } else {
        p(i) = rng.uniform(space.lower(i), space.upper(i));
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

AnchorSet select_anchors(const BoxSpace& state_space,
                         const BoxSpace& action_space, int r,
                         std::uint64_t seed) {
  if (r < 1) throw InputError("select_anchors: r must be >= 1");
  AnchorSet set;
  RngStream s_rng(seed, {0x616e63686f722dull, 0x73ull});
  RngStream a_rng(seed, {0x616e63686f722dull, 0x61ull});
  set.states = draw_partitioned(state_space, r, s_rng);
  set.actions = draw_partitioned(action_space, r, a_rng);
  return set;
}

std::vector<Vector> select_anchor_indices(int n, int r, RngStream& rng) {
  if (r < 1 || r > n)
    throw InputError("select_anchor_indices: need 1 <= r <= n");
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(r));
  for (int k = 0; k < r; ++k) {
    const int lo = static_cast<int>(static_cast<std::int64_t>(k) * n / r);
    const int hi = static_cast<int>(static_cast<std::int64_t>(k + 1) * n / r);
    const int pick = lo + static_cast<int>(rng.below(
                              static_cast<std::uint64_t>(hi - lo)));
    out.push_back(Vector::Constant(1, static_cast<double>(pick)));
  }
  return out;
}

ExplorationSet build_omega(const GridNet& s_grid, const GridNet& a_grid) {
  if (s_grid.anchor_indices.empty() || a_grid.anchor_indices.empty())
    throw ConfigError("build_omega: grids carry no anchor indices");

  std::vector<bool> s_is_anchor(static_cast<std::size_t>(s_grid.size()),
                                false);
  for (Index i : s_grid.anchor_indices)
    s_is_anchor[static_cast<std::size_t>(i)] = true;
  std::vector<bool> a_is_anchor(static_cast<std::size_t>(a_grid.size()),
                                false);
  for (Index j : a_grid.anchor_indices)
    a_is_anchor[static_cast<std::size_t>(j)] = true;

  ExplorationSet omega;
  for (Index i = 0; i < s_grid.size(); ++i)
    for (Index j = 0; j < a_grid.size(); ++j)
      if (s_is_anchor[static_cast<std::size_t>(i)] ||
          a_is_anchor[static_cast<std::size_t>(j)])
        omega.pairs.emplace_back(i, j);
  return omega;
}

}  // namespace lowrl
