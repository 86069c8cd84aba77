#include "lowrl/grid.hpp"

#include <cmath>

namespace lowrl {

namespace {

GridNet build_lattice(const BoxSpace& space, std::vector<int> counts) {
  GridNet g;
  g.space = space;
  g.per_dim_counts = std::move(counts);
  const int d = space.dims();
  Index total = 1;
  for (int i = 0; i < d; ++i) {
    if (g.per_dim_counts[static_cast<std::size_t>(i)] < 1)
      throw InputError("build_net: per-dim count must be >= 1");
    total *= g.per_dim_counts[static_cast<std::size_t>(i)];
  }
  g.points.resize(total, d);
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  for (Index p = 0; p < total; ++p) {
    for (int i = 0; i < d; ++i) {
      const int n = g.per_dim_counts[static_cast<std::size_t>(i)];
      const double h = space.range(i) / n;
      g.points(p, i) =
          space.lower(i) + (idx[static_cast<std::size_t>(i)] + 0.5) * h;
    }
    // advance multi-index, last dim fastest
    for (int i = d - 1; i >= 0; --i) {
      if (++idx[static_cast<std::size_t>(i)] <
          g.per_dim_counts[static_cast<std::size_t>(i)])
        break;
      idx[static_cast<std::size_t>(i)] = 0;
    }
  }
  double half_diag_sq = 0.0;
  for (int i = 0; i < d; ++i) {
    const double h = g.spacing(i);
    half_diag_sq += 0.25 * h * h;
  }
  g.beta = std::sqrt(half_diag_sq);
  g.lattice_count = total;
  return g;
}

double sq_dist(const GridNet& g, Index row, const Vector& p) {
  double acc = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    const double diff = p(i) - g.points(row, i);
    acc += diff * diff;
  }
  return acc;
}

}  // namespace

GridNet build_net(const BoxSpace& space, double beta) {
  if (!(beta > 0.0)) throw InputError("build_net: beta must be > 0");
  const int d = space.dims();
  const double root_d = std::sqrt(static_cast<double>(d));
  std::vector<int> counts(static_cast<std::size_t>(d), 1);
  for (int i = 0; i < d; ++i) {
    const double needed = space.range(i) * root_d / (2.0 * beta);
    counts[static_cast<std::size_t>(i)] =
        std::max(1, static_cast<int>(std::ceil(needed - 1e-12)));
  }
  return build_lattice(space, std::move(counts));
}

GridNet build_net_from_counts(const BoxSpace& space,
                              const std::vector<int>& counts) {
  if (static_cast<int>(counts.size()) != space.dims())
    throw InputError("build_net_from_counts: count/dims mismatch");
  return build_lattice(space, counts);
}

GridNet augment(const GridNet& grid, const std::vector<Vector>& anchors) {
  GridNet g = grid;
  std::vector<Vector> fresh;
  fresh.reserve(anchors.size());
  for (const auto& a : anchors) {
    if (!g.space.contains(a))
      throw InputError("augment: anchor outside space");
    Index found = -1;
    for (Index i = 0; i < g.size() && found < 0; ++i) {
      if ((g.points.row(i).transpose() - a).lpNorm<Eigen::Infinity>() <= 1e-12)
        found = i;
    }
    for (std::size_t k = 0; k < fresh.size() && found < 0; ++k) {
      if ((fresh[k] - a).lpNorm<Eigen::Infinity>() <= 1e-12)
        found = g.size() + static_cast<Index>(k);
    }
    if (found >= 0) {
      g.anchor_indices.push_back(found);
    } else {
      g.anchor_indices.push_back(g.size() + static_cast<Index>(fresh.size()));
      fresh.push_back(a);
    }
  }
  if (!fresh.empty()) {
    Matrix pts(g.size() + static_cast<Index>(fresh.size()), g.dims());
    pts.topRows(g.size()) = g.points;
    for (std::size_t k = 0; k < fresh.size(); ++k)
      pts.row(g.size() + static_cast<Index>(k)) = fresh[k].transpose();
    g.points = std::move(pts);
  }
  return g;
}

Index nearest_index(const GridNet& grid, const Vector& point) {
  if (point.size() != grid.dims())
    throw InputError("nearest_index: dimension mismatch");
  const int d = grid.dims();

  // Candidate lattice cells: the cell containing the point and its
  // neighbors, which is guaranteed to contain the lattice argmin (ties
  // included). Candidates are visited in increasing flat index so the
  // lowest index wins ties, identical to a full scan.
  std::vector<std::vector<int>> cand(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const int n = grid.per_dim_counts[static_cast<std::size_t>(i)];
    const double h = grid.spacing(i);
    int c = static_cast<int>(
        std::floor((point(i) - grid.space.lower(i)) / h));
    c = std::max(0, std::min(c, n - 1));
    for (int k = std::max(0, c - 1); k <= std::min(n - 1, c + 1); ++k)
      cand[static_cast<std::size_t>(i)].push_back(k);
  }

  Index best = -1;
  double best_d = 0.0;
  std::vector<std::size_t> pos(static_cast<std::size_t>(d), 0);
  while (true) {
    Index flat = 0;
    for (int i = 0; i < d; ++i) {
      flat = flat * grid.per_dim_counts[static_cast<std::size_t>(i)] +
             cand[static_cast<std::size_t>(i)][pos[static_cast<std::size_t>(i)]];
    }
    const double ds = sq_dist(grid, flat, point);
    if (best < 0 || ds < best_d) {
      best = flat;
      best_d = ds;
    }
    int i = d - 1;
    for (; i >= 0; --i) {
      if (++pos[static_cast<std::size_t>(i)] <
          cand[static_cast<std::size_t>(i)].size())
        break;
      pos[static_cast<std::size_t>(i)] = 0;
    }
    if (i < 0) break;
  }

  // Appended anchors can beat any lattice point; they carry higher indices
  // so strict comparison preserves the tie rule.
  for (Index i = grid.lattice_count; i < grid.size(); ++i) {
    const double ds = sq_dist(grid, i, point);
    if (ds < best_d) {
      best = i;
      best_d = ds;
    }
  }
  return best;
}

}  // namespace lowrl
