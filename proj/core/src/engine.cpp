#include "lowrl/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

namespace lowrl {

namespace {

constexpr std::uint64_t kExploreTag = 0x6578706c6f7265ull;
constexpr std::uint64_t kIndepTag = 0x696e646570ull;

std::shared_ptr<const GridNet> make_net(const MdpSpec& env,
                                        const BoxSpace& space,
                                        const GridRule& rule, int t) {
  GridNet net = rule.uses_counts()
                    ? build_net_from_counts(space, rule.counts_of(t, space))
                    : build_net(space, rule.beta_of(t));
  return std::make_shared<const GridNet>(std::move(net));
}

std::shared_ptr<const GridNet> augmented(
    const std::shared_ptr<const GridNet>& net,
    const std::vector<Vector>& anchors) {
  return std::make_shared<const GridNet>(augment(*net, anchors));
}

ExplorationSet full_omega(Index ns, Index na) {
  ExplorationSet omega;
  omega.pairs.reserve(static_cast<std::size_t>(ns * na));
  for (Index i = 0; i < ns; ++i)
    for (Index j = 0; j < na; ++j) omega.pairs.emplace_back(i, j);
  return omega;
}

// Uniform subset of the full grid with |cross| entries, for the baseline
// estimators that assume independent sampling.
ExplorationSet independent_omega(Index ns, Index na, std::size_t count,
                                 RngStream& rng) {
  const std::size_t total = static_cast<std::size_t>(ns * na);
  count = std::min(count, total);
  // Partial Fisher-Yates over implicit flat indices.
  std::vector<std::size_t> flat(total);
  for (std::size_t k = 0; k < total; ++k) flat[k] = k;
  ExplorationSet omega;
  omega.pairs.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t pick = k + static_cast<std::size_t>(rng.below(
                                     static_cast<std::uint64_t>(total - k)));
    std::swap(flat[k], flat[pick]);
    omega.pairs.emplace_back(static_cast<Index>(flat[k] / na),
                             static_cast<Index>(flat[k] % na));
  }
  std::sort(omega.pairs.begin(), omega.pairs.end());
  return omega;
}

bool anchor_variant(MeVariant v) {
  return v == MeVariant::rank1 || v == MeVariant::rank2 ||
         v == MeVariant::rankr;
}

}  // namespace

QOracle QOracle::interpolate(std::shared_ptr<const GridNet> s,
                             std::shared_ptr<const GridNet> a, Matrix q) {
  if (!s || !a) throw InputError("QOracle: null grids");
  if (q.rows() != s->size() || q.cols() != a->size())
    throw InputError("QOracle: value shape does not match grids");
  QOracle o;
  o.s_grid = std::move(s);
  o.a_grid = std::move(a);
  o.values = std::move(q);
  o.v_cache = o.values.rowwise().maxCoeff();
  return o;
}

double QOracle::q_at(const Vector& s, const Vector& a) const {
  if (is_zero()) return 0.0;
  return values(nearest_index(*s_grid, s), nearest_index(*a_grid, a));
}

double QOracle::v_of(const Vector& s) const {
  if (is_zero()) return 0.0;
  return v_cache(nearest_index(*s_grid, s));
}

Index QOracle::greedy_action(const Vector& s) const {
  if (is_zero()) return 0;
  const Index si = nearest_index(*s_grid, s);
  Index best = 0;
  for (Index j = 1; j < values.cols(); ++j)
    if (values(si, j) > values(si, best)) best = j;
  return best;
}

void QTable::advance(Stage next) {
  if (static_cast<int>(next) != static_cast<int>(stage) + 1)
    throw Error("QTable: stages only advance forward");
  stage = next;
}

const char* to_string(MeVariant v) {
  switch (v) {
    case MeVariant::none: return "none";
    case MeVariant::rank1: return "rank1";
    case MeVariant::rank2: return "rank2";
    case MeVariant::rankr: return "rankr";
    case MeVariant::usvt: return "usvt";
    case MeVariant::soft_impute: return "soft_impute";
  }
  return "?";
}

MeVariant me_variant_from_string(const std::string& name) {
  if (name == "none") return MeVariant::none;
  if (name == "rank1") return MeVariant::rank1;
  if (name == "rank2") return MeVariant::rank2;
  if (name == "rankr") return MeVariant::rankr;
  if (name == "usvt") return MeVariant::usvt;
  if (name == "soft_impute") return MeVariant::soft_impute;
  throw ConfigError("unknown ME method '" + name + "'");
}

double lookahead(const MdpSpec& env, const Vector& s, const Vector& a,
                 const std::function<double(const Vector&)>& v, int n,
                 RngStream& rng, SampleCounter& counter) {
  if (n < 1) throw InputError("lookahead: n must be >= 1");
  const double r = reward(env, s, a);
  if (env.task != Task::finite && env.noise_sigma == 0.0) {
    // Deterministic dynamics: all n draws coincide.
    counter.add(n);
    return r + env.gamma * v(step(env, s, a, env.noise_mu));
  }
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const Transition tr = sample_transition(env, s, a, rng, counter);
    acc += v(tr.next_state);
  }
  return r + env.gamma * acc / n;
}

std::pair<QOracle, IterationStats> run_iteration(
    const MdpSpec& env, const QOracle& q_prev, int t, const Schedule& sched,
    const AnchorSet& anchors, const MeMethodChoice& me,
    const EngineOptions& opts, SampleCounter& counter) {
  const auto wall_start = std::chrono::steady_clock::now();
  IterationStats stats;
  stats.t = t;

  // Step 1: discretization (+ anchor augmentation).
  QTable table;
  auto s_net = make_net(env, env.state_space, sched.state_rule, t);
  auto a_net = make_net(env, env.action_space, sched.action_rule, t);
  if (me.variant != MeVariant::none) {
    s_net = augmented(s_net, anchors.states);
    a_net = augmented(a_net, anchors.actions);
  }
  table.s_grid = s_net;
  table.a_grid = a_net;
  stats.n_states = s_net->size();
  stats.n_actions = a_net->size();
  stats.beta_s = s_net->beta;
  stats.beta_a = a_net->beta;

  // Step 2: exploration over omega via one-step lookahead.
  switch (me.variant) {
    case MeVariant::none:
      table.omega = full_omega(s_net->size(), a_net->size());
      break;
    case MeVariant::usvt:
    case MeVariant::soft_impute: {
      const auto cross = build_omega(*s_net, *a_net);
      RngStream pick(opts.master_seed,
                     {kIndepTag, static_cast<std::uint64_t>(t)});
      table.omega =
          independent_omega(s_net->size(), a_net->size(), cross.size(), pick);
      break;
    }
    default:
      table.omega = build_omega(*s_net, *a_net);
  }
  stats.n_omega = table.omega.size();
  const int n = sched.n_of(t, table.omega.size());
  stats.n_per_entry = n;

  table.qhat.values = Matrix::Zero(s_net->size(), a_net->size());
  table.qhat.observed =
      BoolMatrix::Constant(s_net->size(), a_net->size(), false);

  const auto v_prev = [&q_prev](const Vector& s) { return q_prev.v_of(s); };
  const std::size_t m = table.omega.size();
  const int n_threads = std::max(1, opts.threads);
  auto explore_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) {
      const auto [si, aj] = table.omega.pairs[k];
      RngStream rng(opts.master_seed,
                    {kExploreTag, static_cast<std::uint64_t>(t),
                     static_cast<std::uint64_t>(k)});
      const double q = lookahead(env, s_net->point(si), a_net->point(aj),
                                 v_prev, n, rng, counter);
      table.qhat.values(si, aj) = q;
      table.qhat.observed(si, aj) = true;
    }
  };
  if (n_threads == 1 || m < 64) {
    explore_range(0, m);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (m + n_threads - 1) / n_threads;
    for (int w = 0; w < n_threads; ++w) {
      const std::size_t lo = std::min(m, static_cast<std::size_t>(w) * chunk);
      const std::size_t hi = std::min(m, lo + chunk);
      if (lo < hi) pool.emplace_back(explore_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  stats.samples = static_cast<std::int64_t>(m) * n;

  // Step 3: matrix estimation.
  table.advance(QTable::Stage::estimated);
  const double v_max = env.v_max();
  MeOptions anchor_opts;
  anchor_opts.v_max = v_max;
  anchor_opts.rank_tol = me.rank_tol;
  try {
    switch (me.variant) {
      case MeVariant::none:
        table.qbar = table.qhat.values;
        break;
      case MeVariant::rank1: {
        if (s_net->anchor_indices.size() != 1 ||
            a_net->anchor_indices.size() != 1)
          throw ConfigError("rank1 estimator needs exactly 1+1 anchors");
        table.qbar = me_rank1(table.qhat, s_net->anchor_indices[0],
                              a_net->anchor_indices[0], anchor_opts);
        stats.sigma_r = anchor_rank_certificate(
            table.qhat, s_net->anchor_indices, a_net->anchor_indices);
        break;
      }
      case MeVariant::rank2: {
        if (s_net->anchor_indices.size() != 2 ||
            a_net->anchor_indices.size() != 2)
          throw ConfigError("rank2 estimator needs exactly 2+2 anchors");
        table.qbar = me_rank2_explicit(
            table.qhat, s_net->anchor_indices[0], s_net->anchor_indices[1],
            a_net->anchor_indices[0], a_net->anchor_indices[1], anchor_opts);
        stats.sigma_r = anchor_rank_certificate(
            table.qhat, s_net->anchor_indices, a_net->anchor_indices);
        break;
      }
      case MeVariant::rankr: {
        stats.sigma_r = anchor_rank_certificate(
            table.qhat, s_net->anchor_indices, a_net->anchor_indices);
        // Early iterations may hold an effectively lower-rank Q-hat (e.g.
        // Q-hat = R at t = 1); the exactness lemma needs rank(block) ==
        // rank(full), so only a signal-free block is fatal here and the
        // certificate is surfaced through the stats.
        table.qbar = me_rankr_anchor(
            table.qhat, s_net->anchor_indices, a_net->anchor_indices,
            me.rank_tol, /*required_rank=*/1, 1e-6 * v_max);
        break;
      }
      case MeVariant::usvt: {
        const double p =
            static_cast<double>(m) /
            (static_cast<double>(s_net->size()) * a_net->size());
        table.qbar =
            me_usvt(table.qhat, p, me.usvt_threshold,
                    me.clip ? std::optional<double>(v_max) : std::nullopt);
        break;
      }
      case MeVariant::soft_impute: {
        table.qbar =
            me_soft_impute(table.qhat, me.soft_lambda, me.soft_max_iters,
                           me.soft_tol,
                           me.clip ? std::optional<double>(v_max)
                                   : std::nullopt)
                .estimate;
        break;
      }
    }
  } catch (const DegenerateAnchorError& e) {
    throw DegenerateAnchorError("iteration " + std::to_string(t) + ": " +
                                e.what());
  } catch (const SingularPivotError& e) {
    throw SingularPivotError("iteration " + std::to_string(t) + ": " +
                             e.what());
  }

  // Step 4: generalization via 1-NN interpolation.
  table.advance(QTable::Stage::interpolated);
  QOracle oracle = QOracle::interpolate(s_net, a_net, std::move(table.qbar));

  stats.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - wall_start)
                      .count();
  return {std::move(oracle), stats};
}

RunResult run_algorithm(const MdpSpec& env, const Schedule& sched,
                        const AnchorSet& anchors, const MeMethodChoice& me,
                        const EngineOptions& opts, const ErrorFn& error_fn) {
  RunResult res;
  res.final_oracle = QOracle::zero();
  SampleCounter counter;
  for (int t = 1; t <= sched.t_max; ++t) {
    auto [oracle, stats] =
        run_iteration(env, res.final_oracle, t, sched, anchors, me, opts,
                      counter);
    res.final_oracle = std::move(oracle);
    MetricsRow row;
    row.t = t;
    row.cum_samples = counter.value();
    row.n_states = stats.n_states;
    row.n_actions = stats.n_actions;
    row.n_omega = stats.n_omega;
    row.n_per_entry = stats.n_per_entry;
    row.sigma_r = stats.sigma_r;
    row.wall_ms = stats.wall_ms;
    if (error_fn) {
      const auto [linf, mean] = error_fn(res.final_oracle);
      row.linf_err = linf;
      row.mean_err = mean;
    }
    res.trace.push_back(row);
  }
  res.total_samples = counter.value();
  return res;
}

}  // namespace lowrl
