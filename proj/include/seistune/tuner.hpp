#pragma once

// Chunk-size autotuner for the dynamic scheduler.
//
// The tuned parameter is the dynamic chunk size of the stencil loop. The cost
// of a candidate chunk is the measured wall time of that loop for one time
// step, executed on a scratch wavefield so the real simulation state is never
// touched. Each evaluation runs the step twice and keeps the second timing
// (the first absorbs cold caches). The search runs coupled simulated annealing
// over [min_chunk, ceil(N_i / N_t)] where N_i is the scheduled iteration count
// and N_t the worker count; when that interval collapses (upper bound <=
// min_chunk) the tuner returns the upper bound directly and skips the search.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "seistune/csa.hpp"
#include "seistune/sched.hpp"
#include "seistune/wave.hpp"

namespace seistune::tuner {

struct TuningPolicy {
  bool enabled = true;
  csa::CsaConfig csa{};          // defaults: m = 4, N = 40, t0_gen = 100, t0_ac = 0.9
  std::int64_t min_chunk = 50;
  int discard_runs = 1;          // leading cold-start executions per evaluation
};

struct TunerEvaluation {
  std::int64_t chunk = 0;
  double cost_seconds = 0.0;  // kept timing (last execution)
  double wall_seconds = 0.0;  // full evaluation cost, every execution included
  int iteration = 0;
  int optimizer = 0;
};

struct TuningResult {
  std::int64_t chunk = 0;
  bool degenerate = false;  // search interval collapsed, search skipped
  double cost_seconds = 0.0;
  double tuning_wall_seconds = 0.0;
  csa::SearchBounds bounds{};
  std::vector<TunerEvaluation> evaluations;
};

// Scratch propagation state for cost measurements. The wavefield starts at
// zero and stays zero: the stencil maps zero to zero and nothing is injected,
// so repeated measurements need no re-initialization.
struct PropagationContext {
  PropagationContext(const wave::VelocityModel& model, const wave::SimConfig& config,
                     sched::WorkerPool& pool_)
      : propagator(model, config), scratch(propagator.make_field()), pool(pool_) {}

  std::int64_t n_iters() const { return propagator.scheduled_range().length(); }

  wave::Propagator propagator;
  wave::Wavefield scratch;
  sched::WorkerPool& pool;
};

// Wall time in seconds of the scheduled stencil loop for one time step under
// schedule (dynamic, chunk). Runs 1 + discard_runs times, returns the last.
double cost_first_step(std::int64_t chunk, PropagationContext& context,
                       int discard_runs = 1);

// Measured autotuning on real propagation state.
TuningResult autotune_chunk(PropagationContext& context, const TuningPolicy& policy);

// Same search driven by a synthetic cost function (for tests and dry runs).
TuningResult autotune_chunk(std::int64_t n_iters, int n_threads,
                            const TuningPolicy& policy,
                            const std::function<double(std::int64_t)>& cost);

// One line per evaluation: chunk,seconds,iteration,optimizer (with header).
std::string evaluations_csv(const TuningResult& result);

}  // namespace seistune::tuner
