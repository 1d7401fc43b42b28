#include "seistune/tuner.hpp"

#include <chrono>
#include <cstdio>
#include <stdexcept>
#include <utility>

namespace seistune::tuner {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", s);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

TuningResult search(std::int64_t n_iters, int n_threads, const TuningPolicy& policy,
                    const std::function<double(std::int64_t)>& timed_cost) {
  if (n_iters < 1) throw std::invalid_argument("autotune_chunk: empty loop");
  if (n_threads < 1) throw std::invalid_argument("autotune_chunk: n_threads must be >= 1");
  if (policy.min_chunk < 1) throw std::invalid_argument("autotune_chunk: min_chunk must be >= 1");

  TuningResult result;
  std::int64_t upper = ceil_div(n_iters, n_threads);
  if (upper <= policy.min_chunk) {
    result.chunk = upper;
    result.degenerate = true;
    result.bounds = {upper, upper};
    return result;
  }
  result.bounds = {policy.min_chunk, upper};

  std::vector<double> walls;
  auto t0 = Clock::now();
  csa::CostFn wrapped = [&](std::int64_t chunk) {
    auto e0 = Clock::now();
    double cost = timed_cost(chunk);
    walls.push_back(std::chrono::duration<double>(Clock::now() - e0).count());
    return cost;
  };
  csa::CsaResult best = csa::csa_run(policy.csa, result.bounds, wrapped);
  result.tuning_wall_seconds = seconds_since(t0);

  result.chunk = best.best;
  result.cost_seconds = best.best_cost;
  result.evaluations.reserve(best.history.size());
  for (std::size_t i = 0; i < best.history.size(); ++i) {
    const csa::Evaluation& e = best.history[i];
    result.evaluations.push_back(
        {e.solution, e.cost, walls[i], e.iteration, e.optimizer});
  }
  return result;
}

}  // namespace

double cost_first_step(std::int64_t chunk, PropagationContext& context,
                       int discard_runs) {
  if (discard_runs < 0) throw std::invalid_argument("cost_first_step: discard_runs must be >= 0");
  sched::SchedulerSpec spec{sched::Kind::kDynamic, chunk};
  double seconds = 0.0;
  for (int r = 0; r <= discard_runs; ++r) {
    seconds = context.propagator.step(context.scratch, spec, context.pool);
  }
  return seconds;
}

TuningResult autotune_chunk(PropagationContext& context, const TuningPolicy& policy) {
  return search(context.n_iters(), context.pool.n_threads(), policy,
                [&](std::int64_t chunk) {
                  return cost_first_step(chunk, context, policy.discard_runs);
                });
}

TuningResult autotune_chunk(std::int64_t n_iters, int n_threads,
                            const TuningPolicy& policy,
                            const std::function<double(std::int64_t)>& cost) {
  return search(n_iters, n_threads, policy, cost);
}

std::string evaluations_csv(const TuningResult& result) {
  std::string out = "chunk,seconds,iteration,optimizer\n";
  for (const TunerEvaluation& e : result.evaluations) {
    out += std::to_string(e.chunk);
    out += ',';
    out += fmt_seconds(e.cost_seconds);
    out += ',';
    out += std::to_string(e.iteration);
    out += ',';
    out += std::to_string(e.optimizer);
    out += '\n';
  }
  return out;
}

}  // namespace seistune::tuner
