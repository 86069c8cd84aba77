#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "lowrl/oracle.hpp"

namespace lowrl {

// Binary container for (state grid, action grid, value matrix) with a small
// header; used for the Q* proxy cache and persisted final Q tables.
// Layout (native little-endian):
//   magic "LRQTBL01" (8 bytes)
//   u8  kind                  0 = proxy, 1 = q-table
//   u64 env_hash
//   f64 gamma, f64 tol, f64 residual
//   u32 sweeps, u8 converged
//   grid x2:  u32 dims, f64 lower[], f64 upper[], u8 wraps[],
//             u32 per_dim_counts[], u64 lattice_count, f64 beta,
//             u64 n_anchor, u64 anchor_indices[],
//             u64 n_points, f64 points row-major [n_points x dims]
//   f64 values row-major [ns x na]
struct TableFile {
  std::uint8_t kind = 0;
  std::uint64_t env_hash = 0;
  double gamma = 0.0;
  double tol = 0.0;
  double residual = 0.0;
  std::uint32_t sweeps = 0;
  bool converged = false;
  GridNet s_grid;
  GridNet a_grid;
  Matrix values;
};

void save_table(const std::string& path, const TableFile& t);
TableFile load_table(const std::string& path);

TableFile proxy_to_table(const QStarProxy& proxy, std::uint64_t env_hash);
QStarProxy table_to_proxy(TableFile t);

TableFile oracle_to_table(const QOracle& oracle, std::uint64_t env_hash,
                          double gamma);
QOracle table_to_oracle(TableFile t);

// FNV-1a 64-bit, stable across runs and platforms.
std::uint64_t fnv1a(std::string_view data);

// Hash of the generative-model description: name, spaces, dynamics
// constants. Keys the proxy cache.
std::uint64_t hash_env(const MdpSpec& env);

}  // namespace lowrl
