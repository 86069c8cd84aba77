#include "lowrl/table_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace lowrl {

namespace {

constexpr char kMagic[8] = {'L', 'R', 'Q', 'T', 'B', 'L', '0', '1'};

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error("table file truncated");
  return v;
}

void put_grid(std::ostream& os, const GridNet& g) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.dims()));
  for (int i = 0; i < g.dims(); ++i) put<double>(os, g.space.lower(i));
  for (int i = 0; i < g.dims(); ++i) put<double>(os, g.space.upper(i));
  for (int i = 0; i < g.dims(); ++i)
    put<std::uint8_t>(os, g.space.wraps[static_cast<std::size_t>(i)] ? 1 : 0);
  for (int i = 0; i < g.dims(); ++i)
    put<std::uint32_t>(os, static_cast<std::uint32_t>(
                               g.per_dim_counts[static_cast<std::size_t>(i)]));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(g.lattice_count));
  put<double>(os, g.beta);
  put<std::uint64_t>(os, g.anchor_indices.size());
  for (Index a : g.anchor_indices)
    put<std::uint64_t>(os, static_cast<std::uint64_t>(a));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(g.size()));
  for (Index p = 0; p < g.size(); ++p)
    for (int i = 0; i < g.dims(); ++i) put<double>(os, g.points(p, i));
}

GridNet get_grid(std::istream& is) {
  GridNet g;
  const auto dims = get<std::uint32_t>(is);
  Vector lo(dims), hi(dims);
  for (std::uint32_t i = 0; i < dims; ++i) lo(i) = get<double>(is);
  for (std::uint32_t i = 0; i < dims; ++i) hi(i) = get<double>(is);
  g.space = BoxSpace(lo, hi);
  for (std::uint32_t i = 0; i < dims; ++i)
    g.space.wraps[i] = get<std::uint8_t>(is) != 0;
  g.per_dim_counts.resize(dims);
  for (std::uint32_t i = 0; i < dims; ++i)
    g.per_dim_counts[i] = static_cast<int>(get<std::uint32_t>(is));
  g.lattice_count = static_cast<Index>(get<std::uint64_t>(is));
  g.beta = get<double>(is);
  const auto n_anchor = get<std::uint64_t>(is);
  g.anchor_indices.resize(n_anchor);
  for (std::uint64_t a = 0; a < n_anchor; ++a)
    g.anchor_indices[a] = static_cast<Index>(get<std::uint64_t>(is));
  const auto n_points = get<std::uint64_t>(is);
  g.points.resize(static_cast<Index>(n_points), dims);
  for (std::uint64_t p = 0; p < n_points; ++p)
    for (std::uint32_t i = 0; i < dims; ++i)
      g.points(static_cast<Index>(p), i) = get<double>(is);
  return g;
}

}  // namespace

void save_table(const std::string& path, const TableFile& t) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os.write(kMagic, sizeof(kMagic));
  put<std::uint8_t>(os, t.kind);
  put<std::uint64_t>(os, t.env_hash);
  put<double>(os, t.gamma);
  put<double>(os, t.tol);
  put<double>(os, t.residual);
  put<std::uint32_t>(os, t.sweeps);
  put<std::uint8_t>(os, t.converged ? 1 : 0);
  put_grid(os, t.s_grid);
  put_grid(os, t.a_grid);
  for (Index i = 0; i < t.values.rows(); ++i)
    for (Index j = 0; j < t.values.cols(); ++j) put<double>(os, t.values(i, j));
  if (!os) throw Error("write failed for '" + path + "'");
}

TableFile load_table(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "'");
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw Error("'" + path + "' is not a table file");
  TableFile t;
  t.kind = get<std::uint8_t>(is);
  t.env_hash = get<std::uint64_t>(is);
  t.gamma = get<double>(is);
  t.tol = get<double>(is);
  t.residual = get<double>(is);
  t.sweeps = get<std::uint32_t>(is);
  t.converged = get<std::uint8_t>(is) != 0;
  t.s_grid = get_grid(is);
  t.a_grid = get_grid(is);
  t.values.resize(t.s_grid.size(), t.a_grid.size());
  for (Index i = 0; i < t.values.rows(); ++i)
    for (Index j = 0; j < t.values.cols(); ++j)
      t.values(i, j) = get<double>(is);
  return t;
}

TableFile proxy_to_table(const QStarProxy& proxy, std::uint64_t env_hash) {
  TableFile t;
  t.kind = 0;
  t.env_hash = env_hash;
  t.tol = proxy.tol;
  t.residual = proxy.residual;
  t.sweeps = static_cast<std::uint32_t>(proxy.sweeps);
  t.converged = proxy.converged;
  t.s_grid = *proxy.s_grid;
  t.a_grid = *proxy.a_grid;
  t.values = proxy.values;
  return t;
}

QStarProxy table_to_proxy(TableFile t) {
  QStarProxy p;
  p.s_grid = std::make_shared<const GridNet>(std::move(t.s_grid));
  p.a_grid = std::make_shared<const GridNet>(std::move(t.a_grid));
  p.values = std::move(t.values);
  p.residual = t.residual;
  p.sweeps = static_cast<int>(t.sweeps);
  p.converged = t.converged;
  p.tol = t.tol;
  return p;
}

TableFile oracle_to_table(const QOracle& oracle, std::uint64_t env_hash,
                          double gamma) {
  if (oracle.is_zero()) throw Error("oracle_to_table: zero oracle");
  TableFile t;
  t.kind = 1;
  t.env_hash = env_hash;
  t.gamma = gamma;
  t.s_grid = *oracle.s_grid;
  t.a_grid = *oracle.a_grid;
  t.values = oracle.values;
  return t;
}

QOracle table_to_oracle(TableFile t) {
  return QOracle::interpolate(
      std::make_shared<const GridNet>(std::move(t.s_grid)),
      std::make_shared<const GridNet>(std::move(t.a_grid)),
      std::move(t.values));
}

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t hash_env(const MdpSpec& env) {
  std::ostringstream ss;
  ss.precision(17);
  ss << env.name << '|' << static_cast<int>(env.task) << '|' << env.gamma
     << '|' << env.tau << '|' << env.noise_mu << '|' << env.noise_sigma << '|'
     << env.noise_dim << '|' << env.lipschitz_l;
  for (int i = 0; i < env.state_space.dims(); ++i)
    ss << '|' << env.state_space.lower(i) << ',' << env.state_space.upper(i)
       << ',' << env.state_space.wraps[static_cast<std::size_t>(i)];
  for (int i = 0; i < env.action_space.dims(); ++i)
    ss << '|' << env.action_space.lower(i) << ',' << env.action_space.upper(i);
  ss << '|' << env.cp_mass_cart << ',' << env.cp_mass_pole << ','
     << env.cp_pole_half_length << ',' << env.gravity << ','
     << env.ac_link_length << ',' << env.ac_link_com << ','
     << env.ac_link_mass << ',' << env.syn_g0 << ',' << env.syn_slope;
  return fnv1a(ss.str());
}

}  // namespace lowrl
