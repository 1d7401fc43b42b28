#include "seistune/fwi.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace seistune::fwi {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

constexpr std::int64_t kHW = wave::kStencilHalfWidth;
constexpr double kW0 = wave::kLaplacianWeights[0];
constexpr double kW1 = wave::kLaplacianWeights[1];
constexpr double kW2 = wave::kLaplacianWeights[2];
constexpr double kW3 = wave::kLaplacianWeights[3];
constexpr double kW4 = wave::kLaplacianWeights[4];

// 1/2 sum of squared entries in row-major order. Shared by every objective
// computation so totals agree bitwise however they were produced.
double half_sum_squares(const wave::Seismogram& calc, const wave::Seismogram& obs) {
  double acc = 0.0;
  for (std::size_t i = 0; i < calc.a.size(); ++i) {
    double r = calc.a[i] - obs.a[i];
    acc += 0.5 * r * r;
  }
  return acc;
}

void check_pair(const wave::Shot& shot, const wave::Seismogram& observed,
                std::int64_t nt) {
  if (observed.nt != nt ||
      observed.n_receivers != static_cast<std::int64_t>(shot.receivers.size())) {
    throw std::invalid_argument("observed seismogram shape does not match the shot");
  }
}

double mean_velocity(const wave::VelocityModel& m) {
  double acc = 0.0;
  for (double v : m.v) acc += v;
  return acc / static_cast<double>(m.v.size());
}

}  // namespace

double objective(const Residual& residual) {
  double acc = 0.0;
  for (const wave::Seismogram& s : residual.per_shot) {
    double shot_acc = 0.0;
    for (double r : s.a) shot_acc += 0.5 * r * r;
    acc += shot_acc;
  }
  return acc;
}

double Gradient::max_abs() const {
  double m = 0.0;
  for (double x : g) m = std::max(m, std::abs(x));
  return m;
}

ShotGradient shot_gradient(const wave::VelocityModel& model, const wave::Shot& shot,
                           const wave::Seismogram& observed,
                           const wave::SimConfig& config,
                           const sched::SchedulerSpec& spec, sched::WorkerPool& pool,
                           const revolve::CheckpointPlan& plan,
                           const LoopObserver& observer) {
  auto t_begin = Clock::now();
  const std::int64_t nt = config.nt;
  if (nt < 1) throw std::invalid_argument("shot_gradient: nt must be >= 1");
  if (plan.n_steps != nt) {
    throw std::invalid_argument("shot_gradient: plan does not cover nt steps");
  }
  check_pair(shot, observed, nt);
  if (static_cast<std::int64_t>(shot.wavelet.size()) < nt) {
    throw std::invalid_argument("shot_gradient: wavelet shorter than nt");
  }

  wave::Propagator prop(model, config);
  const wave::Dims pd = prop.padded_dims();
  const std::int64_t p2 = pd.n2;
  const std::int64_t p3 = pd.n3;
  const std::int64_t u2 = p2 - 2 * kHW;
  const std::int64_t s1 = p2 * p3;
  const std::int64_t s2 = p3;
  const std::int64_t n_recv = static_cast<std::int64_t>(shot.receivers.size());
  const double grad_scale = 2.0 * config.dt * config.dt / (prop.dx() * prop.dx());
  const sched::SchedulerSpec grad_spec{sched::Kind::kStatic, std::nullopt};

  ShotGradient out;
  out.calculated = wave::Seismogram(nt, n_recv);
  std::vector<double> g_pad(static_cast<std::size_t>(pd.count()), 0.0);
  wave::Seismogram residual(nt, n_recv);
  wave::Wavefield adj = prop.make_field();
  std::vector<double> adj_scratch;
  std::int64_t watermark = 0;

  auto record_row = [&](std::int64_t t, const wave::Wavefield& state) {
    for (std::int64_t r = 0; r < n_recv; ++r) {
      out.calculated.at(t, r) =
          prop.sample(state, shot.receivers[static_cast<std::size_t>(r)]);
    }
  };

  auto advance = [&](std::int64_t t, wave::Wavefield& state) {
    if (observer) observer(t < watermark ? "recompute" : "forward", spec);
    prop.step(state, spec, pool);
    prop.inject(state, shot, t);
    prop.apply_absorbing(state);
    if (t == watermark) {
      record_row(t, state);
      ++watermark;
    }
  };

  auto reverse = [&](std::int64_t t, const wave::Wavefield& state) {
    if (t == nt - 1) {
      // The plan's forward phase tops out at S_{nt-1}; one scratch step
      // supplies the final recorded row, then the residual is complete.
      wave::Wavefield tail = state;
      if (observer) observer("forward", spec);
      prop.step(tail, spec, pool);
      prop.inject(tail, shot, nt - 1);
      prop.apply_absorbing(tail);
      record_row(nt - 1, tail);
      watermark = nt;
      for (std::size_t i = 0; i < residual.a.size(); ++i) {
        residual.a[i] = out.calculated.a[i] - observed.a[i];
      }
      out.objective_contribution = half_sum_squares(out.calculated, observed);
    }

    // Adjoint machine iteration: after it, adj.curr holds the adjoint state
    // this time level pairs with.
    if (observer) observer("adjoint", spec);
    prop.step_scaled_laplacian(adj, spec, pool, adj_scratch);
    for (std::int64_t r = 0; r < n_recv; ++r) {
      prop.add_at(adj, shot.receivers[static_cast<std::size_t>(r)], residual.at(t, r));
    }
    prop.apply_absorbing(adj);

    // Velocity gradient for this time level. Writes are per-cell, the forward
    // and adjoint fields are read-only, so any schedule gives identical sums;
    // static keeps the dispatch overhead flat.
    if (observer) observer("gradient", grad_spec);
    const double* __restrict fc = state.curr.data();
    const double* __restrict ac = adj.curr.data();
    const double* __restrict vp = prop.padded_velocity().data();
    double* __restrict gp = g_pad.data();
    pool.run(prop.scheduled_range(), grad_spec, [&](std::int64_t plane) {
      std::int64_t i1 = kHW + plane / u2;
      std::int64_t i2 = kHW + plane % u2;
      std::int64_t row = (i1 * p2 + i2) * p3;
      for (std::int64_t i3 = kHW; i3 < p3 - kHW; ++i3) {
        std::int64_t x = row + i3;
        double s = 3.0 * kW0 * fc[x];
        s += kW1 * (fc[x - 1] + fc[x + 1]);
        s += kW2 * (fc[x - 2] + fc[x + 2]);
        s += kW3 * (fc[x - 3] + fc[x + 3]);
        s += kW4 * (fc[x - 4] + fc[x + 4]);
        s += kW1 * (fc[x - s2] + fc[x + s2]);
        s += kW2 * (fc[x - 2 * s2] + fc[x + 2 * s2]);
        s += kW3 * (fc[x - 3 * s2] + fc[x + 3 * s2]);
        s += kW4 * (fc[x - 4 * s2] + fc[x + 4 * s2]);
        s += kW1 * (fc[x - s1] + fc[x + s1]);
        s += kW2 * (fc[x - 2 * s1] + fc[x + 2 * s1]);
        s += kW3 * (fc[x - 3 * s1] + fc[x + 3 * s1]);
        s += kW4 * (fc[x - 4 * s1] + fc[x + 4 * s1]);
        gp[x] += grad_scale * vp[x] * s * ac[x];
      }
    });

    // The injected source amplitude scales with v at the source cell.
    std::int64_t sx = prop.padded_index(shot.source);
    g_pad[static_cast<std::size_t>(sx)] +=
        shot.wavelet[static_cast<std::size_t>(t)] *
        adj.curr[static_cast<std::size_t>(sx)] * grad_scale *
        prop.padded_velocity()[static_cast<std::size_t>(sx)];
  };

  revolve::SnapshotStore<wave::Wavefield> store(plan.n_snapshots);
  revolve::replay<wave::Wavefield>(plan, store, prop.make_field(), advance, reverse);

  // Halo cells replicate interior velocities; their sensitivities fold back
  // onto the cells they replicate.
  out.gradient.n1 = model.n1;
  out.gradient.n2 = model.n2;
  out.gradient.n3 = model.n3;
  out.gradient.g.assign(static_cast<std::size_t>(model.cell_count()), 0.0);
  std::size_t idx = 0;
  for (std::int64_t i1 = 0; i1 < pd.n1; ++i1) {
    for (std::int64_t i2 = 0; i2 < pd.n2; ++i2) {
      for (std::int64_t i3 = 0; i3 < pd.n3; ++i3, ++idx) {
        double g = g_pad[idx];
        if (g != 0.0) {
          wave::GridIndex m = prop.interior_of(i1, i2, i3);
          out.gradient.at(m.i1, m.i2, m.i3) += g;
        }
      }
    }
  }

  out.seconds = seconds_since(t_begin);
  return out;
}

std::optional<wave::VelocityModel> update_model(const wave::VelocityModel& model,
                                                const Gradient& gradient,
                                                double step) {
  if (gradient.n1 != model.n1 || gradient.n2 != model.n2 || gradient.n3 != model.n3) {
    throw std::invalid_argument("update_model: gradient dims do not match the model");
  }
  double g_max = gradient.max_abs();
  if (g_max == 0.0) return std::nullopt;
  wave::VelocityModel out = model;
  double scale = step / g_max;
  for (std::size_t i = 0; i < out.v.size(); ++i) {
    out.v[i] = std::clamp(model.v[i] - scale * gradient.g[i], kVelocityMin, kVelocityMax);
  }
  return out;
}

double evaluate_objective(const wave::VelocityModel& model,
                          const std::vector<wave::Shot>& shots,
                          const std::vector<wave::Seismogram>& observed,
                          const wave::SimConfig& config,
                          const sched::SchedulerSpec& spec, sched::WorkerPool& pool) {
  if (shots.size() != observed.size()) {
    throw std::invalid_argument("evaluate_objective: shots/observed size mismatch");
  }
  double acc = 0.0;
  for (std::size_t s = 0; s < shots.size(); ++s) {
    check_pair(shots[s], observed[s], config.nt);
    wave::ForwardResult fr = forward_modeling(model, shots[s], config, spec, pool);
    acc += half_sum_squares(fr.seismogram, observed[s]);
  }
  return acc;
}

LineSearchResult line_search(const wave::VelocityModel& model, const Gradient& gradient,
                             double current_objective,
                             const std::vector<wave::Shot>& shots,
                             const std::vector<wave::Seismogram>& observed,
                             const wave::SimConfig& config,
                             const sched::SchedulerSpec& spec,
                             sched::WorkerPool& pool, double step0, int max_halvings) {
  if (!(step0 > 0.0)) throw std::invalid_argument("line_search: step0 must be > 0");
  if (max_halvings < 0) throw std::invalid_argument("line_search: max_halvings must be >= 0");
  LineSearchResult result;
  double step = step0;
  for (int h = 0; h <= max_halvings; ++h, step *= 0.5) {
    std::optional<wave::VelocityModel> trial = update_model(model, gradient, step);
    if (!trial) break;
    ++result.trials;
    double j_trial = std::numeric_limits<double>::infinity();
    try {
      j_trial = evaluate_objective(*trial, shots, observed, config, spec, pool);
    } catch (const std::exception&) {
      // A trial the propagator rejects (or that blows up) is just a failed
      // step; backtracking continues.
    }
    if (j_trial < current_objective) {
      result.accepted = true;
      result.step = step;
      result.objective = j_trial;
      result.model = std::move(*trial);
      break;
    }
  }
  return result;
}

FwiResult fwi_run(const wave::VelocityModel& initial, const FwiConfig& config,
                  const std::vector<wave::Seismogram>& observed,
                  const tuner::TuningPolicy& policy, sched::WorkerPool& pool,
                  const LoopObserver& observer) {
  if (config.shots.empty()) throw std::invalid_argument("fwi_run: no shots");
  if (config.shots.size() != observed.size()) {
    throw std::invalid_argument("fwi_run: shots/observed size mismatch");
  }
  if (config.sim.nt < 1) throw std::invalid_argument("fwi_run: nt must be >= 1");
  if (config.n_iterations < 0) throw std::invalid_argument("fwi_run: n_iterations must be >= 0");
  for (std::size_t s = 0; s < config.shots.size(); ++s) {
    check_pair(config.shots[s], observed[s], config.sim.nt);
  }

  auto t_begin = Clock::now();
  FwiResult result;
  result.propagation_spec = config.propagation;
  result.stop_reason = "max_iterations";

  std::int64_t snaps = config.n_snapshots > 0
                           ? config.n_snapshots
                           : revolve::default_snapshot_budget(config.sim.nt);
  revolve::CheckpointPlan plan = revolve::plan(config.sim.nt, snaps);

  wave::VelocityModel model = initial;
  result.model_history.push_back(model);
  sched::SchedulerSpec spec = config.propagation;

  for (int k = 0; k < config.n_iterations; ++k) {
    auto t_iter = Clock::now();
    Gradient total;
    total.n1 = model.n1;
    total.n2 = model.n2;
    total.n3 = model.n3;
    total.g.assign(static_cast<std::size_t>(model.cell_count()), 0.0);
    double j_current = 0.0;

    for (std::size_t s = 0; s < config.shots.size(); ++s) {
      double tuning_seconds = 0.0;
      if (policy.enabled && result.tuner_invocations == 0) {
        // First shot of the first gradient loop: tune once, then reuse.
        tuner::PropagationContext ctx(model, config.sim, pool);
        result.tuning = tuner::autotune_chunk(ctx, policy);
        result.tuner_invocations = 1;
        spec = {sched::Kind::kDynamic, result.tuning->chunk};
        result.propagation_spec = spec;
        tuning_seconds = result.tuning->tuning_wall_seconds;
      }
      ShotGradient sg = shot_gradient(model, config.shots[s], observed[s], config.sim,
                                      spec, pool, plan, observer);
      j_current += sg.objective_contribution;
      for (std::size_t i = 0; i < total.g.size(); ++i) total.g[i] += sg.gradient.g[i];
      result.shot_stats.push_back(
          {k, static_cast<int>(s), sg.seconds, tuning_seconds});
    }

    if (k == 0) result.objective_history.push_back(j_current);
    double g_max = total.max_abs();

    if (g_max <= config.gradient_tolerance) {
      result.iterations.push_back({k, j_current, g_max, 0.0, seconds_since(t_iter)});
      result.stop_reason = "converged";
      break;
    }

    double step0 = config.step0_fraction * mean_velocity(model);
    LineSearchResult ls =
        line_search(model, total, j_current, config.shots, observed, config.sim, spec,
                    pool, step0, config.max_halvings);
    result.iterations.push_back(
        {k, j_current, g_max, ls.accepted ? ls.step : 0.0, seconds_since(t_iter)});
    if (!ls.accepted) {
      result.stop_reason = "line_search_exhausted";
      break;
    }
    model = std::move(ls.model);
    result.model_history.push_back(model);
    result.objective_history.push_back(ls.objective);
  }

  result.total_seconds = seconds_since(t_begin);
  return result;
}

}  // namespace seistune::fwi
