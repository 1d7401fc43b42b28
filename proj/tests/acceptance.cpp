// Acceptance suite for the library's end-to-end guarantees. Every check is
// self-contained and prints one PASS/FAIL line with a short detail; the exit
// code is the number of failed checks. No arguments runs everything, check
// names select a subset, --list prints the names.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seistune/csa.hpp"
#include "seistune/fwi.hpp"
#include "seistune/revolve.hpp"
#include "seistune/sched.hpp"
#include "seistune/tuner.hpp"
#include "seistune/wave.hpp"

namespace {

using namespace seistune;

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

wave::VelocityModel homogeneous_model(std::int64_t n, double dx, double v) {
  wave::VelocityModel m;
  m.n1 = m.n2 = m.n3 = n;
  m.dx = dx;
  m.v.assign(static_cast<std::size_t>(n * n * n), v);
  return m;
}

// Scheduling executes every index of every range exactly once, across a
// randomized grid of kinds, chunk sizes (including defaults), thread counts
// and ranges (empty ones and negative begins included).
bool check_exactly_once(std::string& detail) {
  const int n_cases = 1200;
  const std::array<int, 6> thread_counts{1, 2, 3, 4, 8, 16};
  const std::array<sched::Kind, 3> kinds{sched::Kind::kStatic, sched::Kind::kDynamic,
                                         sched::Kind::kGuided};

  std::vector<std::unique_ptr<sched::WorkerPool>> pools;
  for (int t : thread_counts) {
    pools.push_back(std::make_unique<sched::WorkerPool>(sched::PoolConfig{t}));
  }

  std::mt19937_64 rng(7);
  for (int c = 0; c < n_cases; ++c) {
    sched::WorkerPool& pool = *pools[rng() % pools.size()];
    const std::int64_t begin = static_cast<std::int64_t>(rng() % 2000) - 500;
    const std::int64_t length = static_cast<std::int64_t>(rng() % 4001);
    sched::SchedulerSpec spec{kinds[rng() % kinds.size()], std::nullopt};
    if (rng() % 4 != 0) {
      spec.chunk = 1 + static_cast<std::int64_t>(rng() % (static_cast<std::uint64_t>(length) + 16));
    }

    std::vector<std::atomic<std::int64_t>> hits(static_cast<std::size_t>(length));
    for (auto& h : hits) h.store(0, std::memory_order_relaxed);
    pool.run({begin, begin + length}, spec, [&](std::int64_t i) {
      hits[static_cast<std::size_t>(i - begin)].fetch_add(1, std::memory_order_relaxed);
    });

    for (std::int64_t i = 0; i < length; ++i) {
      const std::int64_t got = hits[static_cast<std::size_t>(i)].load(std::memory_order_relaxed);
      if (got != 1) {
        detail = fmt("case %d: index %lld ran %lld times under %s on %d threads", c,
                     static_cast<long long>(begin + i), static_cast<long long>(got),
                     sched::to_string(spec).c_str(), pool.n_threads());
        return false;
      }
    }
  }
  detail = fmt("%d randomized cases over 3 kinds x 6 thread counts", n_cases);
  return true;
}

// Higher-precision re-evaluation of the closed-form chunk rule, written
// independently of the implementation (long double, explicit pow).
std::int64_t competitor_oracle(std::int64_t n_iters, int n_threads) {
  const long double ratio = static_cast<long double>(n_iters) / n_threads;
  const long double f = std::floor(std::log2(ratio) / 1.618L);
  const long double denom = std::pow(2.0L, f) * 2.0L * n_threads;
  const auto chunk = static_cast<std::int64_t>(std::floor(n_iters / denom));
  return std::max<std::int64_t>(1, chunk);
}

bool check_competitor_oracle(std::string& detail) {
  // Anchors worked out by hand from the closed-form rule.
  struct Anchor {
    std::int64_t n;
    int p;
    std::int64_t chunk;
  };
  const Anchor anchors[] = {
      {1024, 2, 8}, {4096, 4, 8}, {1000, 1, 7}, {16, 16, 1}, {16777216, 128, 64}};
  for (const Anchor& a : anchors) {
    if (sched::competitor_chunk(a.n, a.p) != a.chunk || competitor_oracle(a.n, a.p) != a.chunk) {
      detail = fmt("anchor N=%lld P=%d expected %lld", static_cast<long long>(a.n), a.p,
                   static_cast<long long>(a.chunk));
      return false;
    }
  }

  int pairs = 0;
  for (int e = 4; e <= 24; ++e) {
    const std::int64_t n = std::int64_t{1} << e;
    for (int p = 1; p <= 128; ++p) {
      if (n < p) continue;
      const std::int64_t got = sched::competitor_chunk(n, p);
      const std::int64_t want = competitor_oracle(n, p);
      if (got != want) {
        detail = fmt("N=%lld P=%d: got %lld, oracle %lld", static_cast<long long>(n), p,
                     static_cast<long long>(got), static_cast<long long>(want));
        return false;
      }
      ++pairs;
    }
  }

  for (auto [n, p] : {std::pair<std::int64_t, int>{1, 2}, {100, 101}, {15, 16}}) {
    try {
      sched::competitor_chunk(n, p);
      detail = fmt("N=%lld P=%d should be rejected", static_cast<long long>(n), p);
      return false;
    } catch (const std::domain_error&) {
    }
  }

  detail = fmt("%d (N,P) pairs exact, 5 hand anchors, undefined region rejected", pairs);
  return true;
}

// The forward seismogram is one bit pattern regardless of scheduler kind,
// chunk size (fixed, default or tuned) and worker count.
bool check_transparency(std::string& detail) {
  const wave::VelocityModel model =
      wave::make_gaussian_sphere_model(32, 32, 32, 10.0, 2200.0, 3200.0, {0.5, 0.5, 0.5}, 0.25);
  wave::SimConfig cfg;
  cfg.nt = 100;
  cfg.dt = 1e-3;
  cfg.f_peak = 25.0;
  cfg.boundary_width = 12;

  wave::Shot shot;
  shot.source = {24, 16, 16};
  shot.receivers = wave::plane_receivers(32, 32, 32);
  shot.wavelet = wave::ricker(cfg.f_peak, cfg.dt, cfg.nt);

  sched::WorkerPool pool1(sched::PoolConfig{1});
  sched::WorkerPool pool8(sched::PoolConfig{8});

  tuner::PropagationContext ctx(model, cfg, pool8);
  const tuner::TuningResult tuned = tuner::autotune_chunk(ctx, tuner::TuningPolicy{});

  const std::array<std::optional<std::int64_t>, 4> chunks{std::int64_t{1}, std::int64_t{50},
                                                          std::nullopt, tuned.chunk};
  wave::Seismogram ref;
  bool have_ref = false;
  int runs = 0;
  for (sched::Kind kind : {sched::Kind::kStatic, sched::Kind::kDynamic, sched::Kind::kGuided}) {
    for (const auto& chunk : chunks) {
      for (sched::WorkerPool* pool : {&pool1, &pool8}) {
        const sched::SchedulerSpec spec{kind, chunk};
        wave::Seismogram out = wave::forward_modeling(model, shot, cfg, spec, *pool).seismogram;
        ++runs;
        if (!have_ref) {
          double peak = 0.0;
          for (double x : out.a) peak = std::max(peak, std::abs(x));
          if (peak <= 0.0) {
            detail = "reference seismogram is identically zero";
            return false;
          }
          ref = std::move(out);
          have_ref = true;
        } else if (!same_bits(out.a, ref.a)) {
          detail = fmt("%s on %d threads deviates from the reference",
                       sched::to_string(spec).c_str(), pool->n_threads());
          return false;
        }
      }
    }
  }
  detail = fmt("%d runs bit-identical (tuned chunk %lld)", runs,
               static_cast<long long>(tuned.chunk));
  return true;
}

// Independent dynamic program for the minimal total advance length, written
// directly from the recurrence the planner optimizes.
std::int64_t oracle_min_advances(std::int64_t l, std::int64_t f,
                                 std::map<std::pair<std::int64_t, std::int64_t>,
                                          std::int64_t>& memo) {
  if (l == 1) return 0;
  if (f == 0) return l * (l - 1) / 2;
  const auto key = std::make_pair(l, f);
  const auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  std::int64_t best = -1;
  for (std::int64_t d = 1; d < l; ++d) {
    const std::int64_t c = d + oracle_min_advances(l - d, f - 1, memo) +
                           oracle_min_advances(d, f, memo);
    if (best < 0 || c < best) best = c;
  }
  memo[key] = best;
  return best;
}

std::int64_t oracle_min_advances(std::int64_t n_steps, std::int64_t n_snapshots) {
  std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> memo;
  return oracle_min_advances(n_steps, std::min(n_snapshots, n_steps) - 1, memo);
}

// Replays a plan against the execution rules: advances start at the live
// state and stay inside [0, n_steps), stores and restores respect slot
// bounds and occupancy, and states n-1 .. 0 are reversed in order from live
// states. Returns the total advance length, or -1 with a reason on violation.
std::int64_t simulate_plan(const revolve::CheckpointPlan& plan, std::string& why) {
  std::int64_t live = 0;
  std::int64_t advances = 0;
  std::int64_t next_reverse = plan.n_steps - 1;
  std::vector<std::optional<std::int64_t>> slots(static_cast<std::size_t>(plan.n_snapshots));
  for (const revolve::Action& a : plan.actions) {
    switch (a.kind) {
      case revolve::Action::Kind::kAdvance:
        if (a.a != live || a.b <= a.a || a.b >= plan.n_steps) {
          why = "bad advance";
          return -1;
        }
        advances += a.b - a.a;
        live = a.b;
        break;
      case revolve::Action::Kind::kStore:
        if (a.a < 0 || a.a >= plan.n_snapshots || a.b != live) {
          why = "bad store";
          return -1;
        }
        slots[static_cast<std::size_t>(a.a)] = live;
        break;
      case revolve::Action::Kind::kRestore:
        if (a.a < 0 || a.a >= plan.n_snapshots || !slots[static_cast<std::size_t>(a.a)]) {
          why = "bad restore";
          return -1;
        }
        live = *slots[static_cast<std::size_t>(a.a)];
        break;
      case revolve::Action::Kind::kReverse:
        if (a.a != next_reverse || a.a != live) {
          why = "reverse out of order or not live";
          return -1;
        }
        --next_reverse;
        break;
    }
  }
  if (next_reverse != -1) {
    why = "not every state was reversed";
    return -1;
  }
  return advances;
}

bool check_revolve_optimality(std::string& detail) {
  int optimal = 0;
  for (std::int64_t n = 1; n <= 64; ++n) {
    for (std::int64_t s = 1; s <= 8; ++s) {
      const revolve::CheckpointPlan plan = revolve::plan(n, s);
      std::string why;
      const std::int64_t advances = simulate_plan(plan, why);
      if (advances < 0) {
        detail = fmt("plan(%lld, %lld) invalid: %s", static_cast<long long>(n),
                     static_cast<long long>(s), why.c_str());
        return false;
      }
      const std::int64_t want = oracle_min_advances(n, s);
      if (advances != want || plan.total_advance_length() != want ||
          plan.recompute_length() != want - (n - 1)) {
        detail = fmt("plan(%lld, %lld): %lld advances, oracle %lld", static_cast<long long>(n),
                     static_cast<long long>(s), static_cast<long long>(advances),
                     static_cast<long long>(want));
        return false;
      }
      ++optimal;
    }
  }

  int valid = 0;
  for (std::int64_t n = 1; n <= 256; ++n) {
    for (std::int64_t s : {std::int64_t{1}, std::int64_t{3}, std::int64_t{10},
                           revolve::default_snapshot_budget(n)}) {
      const revolve::CheckpointPlan plan = revolve::plan(n, s);
      std::string why;
      if (simulate_plan(plan, why) < 0) {
        detail = fmt("plan(%lld, %lld) invalid: %s", static_cast<long long>(n),
                     static_cast<long long>(s), why.c_str());
        return false;
      }
      ++valid;
    }
  }

  detail = fmt("%d plans optimal vs oracle, %d plans valid up to 256 steps", optimal, valid);
  return true;
}

// Checkpointed recomputation reproduces every forward state bit for bit
// against a full-storage reference of the same simulation.
bool check_replay_fidelity(std::string& detail) {
  const std::int64_t nt = 50;
  const std::int64_t n_snapshots = 7;
  const wave::VelocityModel model =
      wave::make_gaussian_sphere_model(32, 32, 32, 10.0, 2200.0, 3200.0, {0.5, 0.5, 0.5}, 0.25);
  wave::SimConfig cfg;
  cfg.nt = nt;
  cfg.dt = 1e-3;
  cfg.f_peak = 25.0;
  cfg.boundary_width = 8;

  wave::Shot shot;
  shot.source = {16, 16, 16};
  shot.receivers = wave::plane_receivers(32, 32, 32);
  shot.wavelet = wave::ricker(cfg.f_peak, cfg.dt, cfg.nt);

  sched::WorkerPool pool(sched::PoolConfig{2});
  const sched::SchedulerSpec spec{sched::Kind::kDynamic, std::nullopt};

  std::vector<wave::Wavefield> ref;
  ref.reserve(static_cast<std::size_t>(nt + 1));
  wave::forward_modeling(model, shot, cfg, spec, pool,
                         [&](std::int64_t, const wave::Wavefield& s) { ref.push_back(s); });
  if (ref.size() != static_cast<std::size_t>(nt + 1)) {
    detail = "reference capture incomplete";
    return false;
  }

  const wave::Propagator prop(model, cfg);
  const revolve::CheckpointPlan plan = revolve::plan(nt, n_snapshots);
  revolve::SnapshotStore<wave::Wavefield> store(plan.n_snapshots);

  std::int64_t compared = 0;
  std::int64_t first_bad = -1;
  revolve::replay<wave::Wavefield>(
      plan, store, prop.make_field(),
      [&](std::int64_t t, wave::Wavefield& f) {
        prop.step(f, spec, pool);
        prop.inject(f, shot, t);
        prop.apply_absorbing(f);
      },
      [&](std::int64_t t, const wave::Wavefield& f) {
        const wave::Wavefield& want = ref[static_cast<std::size_t>(t)];
        if (!same_bits(f.curr, want.curr) || !same_bits(f.prev, want.prev)) {
          if (first_bad < 0) first_bad = t;
        }
        ++compared;
      });

  if (first_bad >= 0 || compared != nt) {
    detail = first_bad >= 0 ? fmt("state %lld differs from the reference",
                                  static_cast<long long>(first_bad))
                            : fmt("%lld states compared, expected %lld",
                                  static_cast<long long>(compared), static_cast<long long>(nt));
    return false;
  }
  detail = fmt("%lld states recomputed bit-identically with %lld snapshots (%lld extra advances)",
               static_cast<long long>(nt), static_cast<long long>(n_snapshots),
               static_cast<long long>(plan.recompute_length()));
  return true;
}

// The adjoint gradient matches central finite differences of the misfit along
// random model directions.
bool check_gradient_check(std::string& detail) {
  const double eps = 0.25;
  const double tol = 1e-3;
  const std::int64_t n = 24;

  const wave::VelocityModel truth =
      wave::make_gaussian_sphere_model(n, n, n, 10.0, 2300.0, 3000.0, {0.5, 0.5, 0.5}, 0.3);
  const wave::VelocityModel initial = homogeneous_model(n, 10.0, 2300.0);

  wave::SimConfig cfg;
  cfg.nt = 200;
  cfg.dt = 1e-3;
  cfg.f_peak = 15.0;
  cfg.boundary_width = 12;

  wave::Shot shot;
  shot.source = {18, 12, 12};
  shot.receivers = wave::plane_receivers(n, n, n);
  shot.wavelet = wave::ricker(cfg.f_peak, cfg.dt, cfg.nt);

  sched::WorkerPool pool(sched::PoolConfig{2});
  const sched::SchedulerSpec spec{sched::Kind::kDynamic, 50};

  const wave::Seismogram observed =
      wave::forward_modeling(truth, shot, cfg, spec, pool).seismogram;
  const revolve::CheckpointPlan plan =
      revolve::plan(cfg.nt, revolve::default_snapshot_budget(cfg.nt));
  const fwi::ShotGradient sg =
      fwi::shot_gradient(initial, shot, observed, cfg, spec, pool, plan);

  const std::vector<wave::Shot> shots{shot};
  const std::vector<wave::Seismogram> obs{observed};
  const std::size_t cells = initial.v.size();

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 3; ++k) {
    std::vector<double> dir(cells);
    double peak = 0.0;
    for (double& x : dir) {
      x = unit(rng);
      peak = std::max(peak, std::abs(x));
    }
    for (double& x : dir) x /= peak;

    double directional = 0.0;
    for (std::size_t i = 0; i < cells; ++i) directional += sg.gradient.g[i] * dir[i];

    wave::VelocityModel plus = initial;
    wave::VelocityModel minus = initial;
    for (std::size_t i = 0; i < cells; ++i) {
      plus.v[i] += eps * dir[i];
      minus.v[i] -= eps * dir[i];
    }
    const double jp = fwi::evaluate_objective(plus, shots, obs, cfg, spec, pool);
    const double jm = fwi::evaluate_objective(minus, shots, obs, cfg, spec, pool);
    const double fd = (jp - jm) / (2.0 * eps);
    if (fd == 0.0) {
      detail = fmt("direction %d: finite difference is exactly zero", k);
      return false;
    }
    const double rel = std::abs(directional - fd) / std::abs(fd);
    worst = std::max(worst, rel);
    if (rel > tol) {
      detail = fmt("direction %d: adjoint %.9e vs central difference %.9e (rel %.2e)", k,
                   directional, fd, rel);
      return false;
    }
  }
  detail = fmt("3 directions, worst relative error %.2e (tolerance %.0e)", worst, tol);
  return true;
}

// Defaults (4 optimizers, 40 iterations, generation 100, acceptance 0.9) find
// the quadratic minimum within +-1 on nearly every seed, at a fixed
// evaluation budget of m * (N + 1).
bool check_csa_convergence(std::string& detail) {
  const int n_seeds = 100;
  const int needed = 90;
  const std::int64_t target = 7;

  int within = 0;
  for (int seed = 1; seed <= n_seeds; ++seed) {
    csa::CsaConfig cfg;
    cfg.rng_seed = static_cast<std::uint64_t>(seed);
    std::int64_t evals = 0;
    const csa::CsaResult res = csa::csa_run(cfg, {0, 100}, [&](std::int64_t x) {
      ++evals;
      const double d = static_cast<double>(x - target);
      return d * d;
    });
    const std::int64_t budget =
        static_cast<std::int64_t>(cfg.n_optimizers) * (cfg.n_iterations + 1);
    if (evals != budget || res.history.size() != static_cast<std::size_t>(budget)) {
      detail = fmt("seed %d: %lld evaluations, expected %lld", seed,
                   static_cast<long long>(evals), static_cast<long long>(budget));
      return false;
    }
    if (std::llabs(res.best - target) <= 1) ++within;
  }
  if (within < needed) {
    detail = fmt("only %d/%d seeds within +-1 of the minimum", within, n_seeds);
    return false;
  }
  detail = fmt("%d/%d seeds within +-1, 164 evaluations each", within, n_seeds);
  return true;
}

// One inversion tunes exactly once, probes only chunks inside
// [min_chunk, ceil(N_i / N_t)], and drives every forward, recompute and
// adjoint loop with the tuned spec afterwards.
bool check_tuning_conformance(std::string& detail) {
  const std::int64_t n = 16;
  const wave::VelocityModel truth =
      wave::make_gaussian_sphere_model(n, n, n, 10.0, 2500.0, 2700.0, {0.5, 0.5, 0.5}, 0.25);
  const wave::VelocityModel initial = homogeneous_model(n, 10.0, 2500.0);

  wave::SimConfig sim;
  sim.nt = 16;
  sim.dt = 1e-3;
  sim.f_peak = 25.0;
  sim.boundary_width = 8;

  std::vector<wave::Shot> shots(2);
  shots[0].source = {12, 5, 8};
  shots[1].source = {12, 11, 8};
  for (wave::Shot& s : shots) {
    s.receivers = wave::plane_receivers(n, n, n);
    s.wavelet = wave::ricker(sim.f_peak, sim.dt, sim.nt);
  }

  sched::WorkerPool pool(sched::PoolConfig{2});
  const sched::SchedulerSpec base{sched::Kind::kDynamic, std::nullopt};
  std::vector<wave::Seismogram> observed;
  for (const wave::Shot& s : shots) {
    observed.push_back(wave::forward_modeling(truth, s, sim, base, pool).seismogram);
  }

  const wave::Propagator probe(initial, sim);
  const std::int64_t n_iters = probe.scheduled_range().length();
  const std::int64_t upper = (n_iters + pool.n_threads() - 1) / pool.n_threads();
  const tuner::TuningPolicy policy;

  struct Scenario {
    const char* name;
    int n_iterations;
    std::size_t n_shots;
  };
  for (const Scenario& sc : {Scenario{"2 shots x 2 iterations", 2, 2},
                             Scenario{"1 shot x 1 iteration", 1, 1}}) {
    fwi::FwiConfig cfg;
    cfg.n_iterations = sc.n_iterations;
    cfg.shots.assign(shots.begin(), shots.begin() + static_cast<std::ptrdiff_t>(sc.n_shots));
    cfg.sim = sim;
    cfg.n_snapshots = 3;

    std::vector<std::pair<std::string, sched::SchedulerSpec>> events;
    const fwi::FwiResult res = fwi::fwi_run(
        initial, cfg,
        std::vector<wave::Seismogram>(observed.begin(),
                                      observed.begin() + static_cast<std::ptrdiff_t>(sc.n_shots)),
        policy, pool,
        [&](std::string_view label, const sched::SchedulerSpec& spec) {
          events.emplace_back(std::string(label), spec);
        });

    if (res.tuner_invocations != 1 || !res.tuning.has_value()) {
      detail = fmt("%s: %d tuner invocations", sc.name, res.tuner_invocations);
      return false;
    }
    const tuner::TuningResult& tr = *res.tuning;
    if (tr.bounds.lo != policy.min_chunk || tr.bounds.hi != upper) {
      detail = fmt("%s: bounds [%lld, %lld], expected [%lld, %lld]", sc.name,
                   static_cast<long long>(tr.bounds.lo), static_cast<long long>(tr.bounds.hi),
                   static_cast<long long>(policy.min_chunk), static_cast<long long>(upper));
      return false;
    }
    if (tr.evaluations.size() != 164) {
      detail = fmt("%s: %zu probe evaluations, expected 164", sc.name, tr.evaluations.size());
      return false;
    }
    for (const tuner::TunerEvaluation& ev : tr.evaluations) {
      if (ev.chunk < policy.min_chunk || ev.chunk > upper) {
        detail = fmt("%s: probed chunk %lld outside [%lld, %lld]", sc.name,
                     static_cast<long long>(ev.chunk), static_cast<long long>(policy.min_chunk),
                     static_cast<long long>(upper));
        return false;
      }
    }

    const sched::SchedulerSpec want{sched::Kind::kDynamic, tr.chunk};
    if (!(res.propagation_spec == want)) {
      detail = fmt("%s: propagation spec %s, expected %s", sc.name,
                   sched::to_string(res.propagation_spec).c_str(),
                   sched::to_string(want).c_str());
      return false;
    }

    std::set<std::string> labels;
    for (const auto& [label, spec] : events) {
      labels.insert(label);
      if (label == "gradient") {
        if (spec.kind != sched::Kind::kStatic) {
          detail = fmt("%s: gradient loop ran under %s", sc.name,
                       sched::to_string(spec).c_str());
          return false;
        }
      } else if (label == "forward" || label == "recompute" || label == "adjoint") {
        if (!(spec == want)) {
          detail = fmt("%s: %s loop ran under %s, expected %s", sc.name, label.c_str(),
                       sched::to_string(spec).c_str(), sched::to_string(want).c_str());
          return false;
        }
      } else {
        detail = fmt("%s: unknown loop label %s", sc.name, label.c_str());
        return false;
      }
    }
    for (const char* need : {"forward", "recompute", "adjoint", "gradient"}) {
      if (labels.count(need) == 0) {
        detail = fmt("%s: no %s loop observed", sc.name, need);
        return false;
      }
    }
    for (std::size_t i = 0; i < res.shot_stats.size(); ++i) {
      const bool expect_tuned = i == 0;
      if ((res.shot_stats[i].tuning_seconds > 0.0) != expect_tuned) {
        detail = fmt("%s: shot_stats[%zu] tuning_seconds %.3g", sc.name, i,
                     res.shot_stats[i].tuning_seconds);
        return false;
      }
    }
  }

  detail = fmt("1 invocation per run, probes inside [50, %lld], tuned spec on every loop",
               static_cast<long long>(upper));
  return true;
}

// The tuned chunk is competitive with an exhaustive sweep: its freshly
// measured first-step time stays within a small band of the sweep minimum in
// most trials.
bool check_tuned_competitiveness(std::string& detail) {
  const double band = 1.10;
  const int n_trials = 10;
  const int needed = 8;
  const int n_sweep = 20;

  const wave::VelocityModel model = homogeneous_model(48, 10.0, 2500.0);
  wave::SimConfig cfg;
  cfg.nt = 1;
  cfg.dt = 1e-3;
  cfg.f_peak = 25.0;
  cfg.boundary_width = 12;

  sched::WorkerPool pool(sched::PoolConfig{2});
  tuner::PropagationContext ctx(model, cfg, pool);
  const tuner::TuningPolicy policy;
  const std::int64_t lo = policy.min_chunk;
  const std::int64_t hi = (ctx.n_iters() + pool.n_threads() - 1) / pool.n_threads();
  if (hi <= lo) {
    detail = "search interval collapsed; nothing to tune";
    return false;
  }

  // Noise floor of a chunk's first-step time: the minimum over fresh
  // measurements. Both sides of the comparison take a minimum over the same
  // total sample count (20 points x 3 for the sweep, 60 for the tuned chunk)
  // so measurement noise cancels instead of biasing the ratio.
  const auto floor_cost = [&ctx](std::int64_t chunk, int reps) {
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < reps; ++r) best = std::min(best, tuner::cost_first_step(chunk, ctx, 1));
    return best;
  };
  const int reps_per_point = 3;

  int wins = 0;
  double worst_ratio = 0.0;
  for (int trial = 0; trial < n_trials; ++trial) {
    const tuner::TuningResult tr = tuner::autotune_chunk(ctx, policy);
    double sweep_min = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n_sweep; ++j) {
      const auto chunk = static_cast<std::int64_t>(
          std::llround(lo + (hi - lo) * (static_cast<double>(j) / (n_sweep - 1))));
      sweep_min = std::min(sweep_min, floor_cost(chunk, reps_per_point));
    }
    const double ratio = floor_cost(tr.chunk, n_sweep * reps_per_point) / sweep_min;
    worst_ratio = std::max(worst_ratio, ratio);
    if (ratio <= band) ++wins;
  }
  if (wins < needed) {
    detail = fmt("only %d/%d trials within %.2fx of the sweep minimum (worst %.2fx)", wins,
                 n_trials, band, worst_ratio);
    return false;
  }
  detail = fmt("%d/%d trials within %.2fx of a %d-point sweep (worst %.2fx)", wins, n_trials,
               band, n_sweep, worst_ratio);
  return true;
}

// Ten descent iterations from a homogeneous start on a Gaussian-sphere truth
// never increase the misfit and at least halve it.
bool check_fwi_descent(std::string& detail) {
  const std::int64_t n = 40;
  const wave::VelocityModel truth =
      wave::make_gaussian_sphere_model(n, n, n, 10.0, 2500.0, 3000.0, {0.5, 0.5, 0.5}, 0.25);
  const wave::VelocityModel initial = homogeneous_model(n, 10.0, 2500.0);

  fwi::FwiConfig cfg;
  cfg.n_iterations = 10;
  cfg.step0_fraction = 0.10;
  cfg.sim.nt = 180;
  cfg.sim.dt = 1e-3;
  cfg.sim.f_peak = 25.0;
  cfg.sim.boundary_width = 12;

  wave::Shot shot;
  shot.source = {30, 20, 20};
  shot.receivers = wave::plane_receivers(n, n, n);
  shot.wavelet = wave::ricker(cfg.sim.f_peak, cfg.sim.dt, cfg.sim.nt);
  cfg.shots = {shot};

  sched::WorkerPool pool(sched::PoolConfig{2});
  const std::vector<wave::Seismogram> observed{
      wave::forward_modeling(truth, shot, cfg.sim, cfg.propagation, pool).seismogram};

  const fwi::FwiResult res = fwi::fwi_run(initial, cfg, observed, tuner::TuningPolicy{}, pool);

  if (res.objective_history.empty() || res.objective_history.front() <= 0.0) {
    detail = "no meaningful initial misfit";
    return false;
  }
  for (std::size_t i = 1; i < res.objective_history.size(); ++i) {
    if (res.objective_history[i] > res.objective_history[i - 1]) {
      detail = fmt("objective rose at accepted step %zu: %.6e -> %.6e", i,
                   res.objective_history[i - 1], res.objective_history[i]);
      return false;
    }
  }
  const double first = res.objective_history.front();
  const double last = res.objective_history.back();
  if (last > 0.5 * first) {
    detail = fmt("objective %.6e -> %.6e (ratio %.3f > 0.5, stop: %s)", first, last,
                 last / first, res.stop_reason.c_str());
    return false;
  }
  detail = fmt("objective %.6e -> %.6e (ratio %.3f) in %zu accepted steps", first, last,
               last / first, res.objective_history.size() - 1);
  return true;
}

// The reported tuning wall time agrees with the sum of its per-evaluation
// costs, and the tuning share of total runtime shrinks as shots are added.
bool check_overhead_accounting(std::string& detail) {
  const double accounting_band = 0.05;
  const std::int64_t n = 24;
  const wave::VelocityModel truth =
      wave::make_gaussian_sphere_model(n, n, n, 10.0, 2500.0, 2800.0, {0.5, 0.5, 0.5}, 0.25);
  const wave::VelocityModel initial = homogeneous_model(n, 10.0, 2500.0);

  wave::SimConfig sim;
  sim.nt = 64;
  sim.dt = 1e-3;
  sim.f_peak = 25.0;
  sim.boundary_width = 12;

  std::vector<wave::Shot> shots(8);
  for (std::size_t k = 0; k < shots.size(); ++k) {
    shots[k].source = {18, static_cast<std::int64_t>(3 + 2 * k), 12};
    shots[k].receivers = wave::plane_receivers(n, n, n);
    shots[k].wavelet = wave::ricker(sim.f_peak, sim.dt, sim.nt);
  }

  sched::WorkerPool pool(sched::PoolConfig{2});
  const sched::SchedulerSpec base{sched::Kind::kDynamic, std::nullopt};
  std::vector<wave::Seismogram> observed;
  for (const wave::Shot& s : shots) {
    observed.push_back(wave::forward_modeling(truth, s, sim, base, pool).seismogram);
  }

  const tuner::TuningPolicy policy;
  double fractions[2] = {0.0, 0.0};
  const std::size_t shot_counts[2] = {1, 8};
  for (int run = 0; run < 2; ++run) {
    fwi::FwiConfig cfg;
    cfg.n_iterations = 1;
    cfg.shots.assign(shots.begin(),
                     shots.begin() + static_cast<std::ptrdiff_t>(shot_counts[run]));
    cfg.sim = sim;

    const fwi::FwiResult res = fwi::fwi_run(
        initial, cfg,
        std::vector<wave::Seismogram>(
            observed.begin(), observed.begin() + static_cast<std::ptrdiff_t>(shot_counts[run])),
        policy, pool);

    if (res.tuner_invocations != 1 || !res.tuning.has_value() ||
        res.tuning->evaluations.size() != 164) {
      detail = fmt("%zu-shot run: tuner ran %d times with %zu evaluations",
                   shot_counts[run], res.tuner_invocations,
                   res.tuning ? res.tuning->evaluations.size() : std::size_t{0});
      return false;
    }
    double evaluation_sum = 0.0;
    for (const tuner::TunerEvaluation& ev : res.tuning->evaluations) {
      evaluation_sum += ev.wall_seconds;
    }
    const double wall = res.tuning->tuning_wall_seconds;
    if (wall <= 0.0 || std::abs(wall - evaluation_sum) > accounting_band * wall) {
      detail = fmt("%zu-shot run: tuning wall %.6f s vs evaluation sum %.6f s (gap > %.0f%%)",
                   shot_counts[run], wall, evaluation_sum, accounting_band * 100.0);
      return false;
    }
    if (res.total_seconds <= 0.0) {
      detail = fmt("%zu-shot run reported no total runtime", shot_counts[run]);
      return false;
    }
    fractions[run] = wall / res.total_seconds;
  }

  if (!(fractions[0] > fractions[1])) {
    detail = fmt("tuning share did not shrink: %.2f%% at 1 shot vs %.2f%% at 8 shots",
                 fractions[0] * 100.0, fractions[1] * 100.0);
    return false;
  }
  detail = fmt("accounting gap within %.0f%%; tuning share %.2f%% at 1 shot -> %.2f%% at 8",
               accounting_band * 100.0, fractions[0] * 100.0, fractions[1] * 100.0);
  return true;
}

using CheckFn = bool (*)(std::string&);

struct Check {
  const char* name;
  CheckFn fn;
};

constexpr Check kChecks[] = {
    {"exactly-once", check_exactly_once},
    {"competitor-oracle", check_competitor_oracle},
    {"transparency", check_transparency},
    {"revolve-optimality", check_revolve_optimality},
    {"replay-fidelity", check_replay_fidelity},
    {"gradient-check", check_gradient_check},
    {"csa-convergence", check_csa_convergence},
    {"tuning-conformance", check_tuning_conformance},
    {"tuned-competitiveness", check_tuned_competitiveness},
    {"fwi-descent", check_fwi_descent},
    {"overhead-accounting", check_overhead_accounting},
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> wanted(argv + 1, argv + argc);
  if (wanted.size() == 1 && wanted[0] == "--list") {
    for (const Check& c : kChecks) std::printf("%s\n", c.name);
    return 0;
  }
  for (const std::string& w : wanted) {
    const bool known = std::any_of(std::begin(kChecks), std::end(kChecks),
                                   [&](const Check& c) { return w == c.name; });
    if (!known) {
      std::fprintf(stderr, "unknown check: %s (--list prints the names)\n", w.c_str());
      return 2;
    }
  }

  int failures = 0;
  for (const Check& c : kChecks) {
    if (!wanted.empty() &&
        std::find(wanted.begin(), wanted.end(), c.name) == wanted.end()) {
      continue;
    }
    std::string detail;
    bool ok = false;
    try {
      ok = c.fn(detail);
    } catch (const std::exception& e) {
      ok = false;
      detail = fmt("exception: %s", e.what());
    }
    std::printf("%s %-24s %s\n", ok ? "PASS" : "FAIL", c.name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures;
}
