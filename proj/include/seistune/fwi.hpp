#pragma once

// Full-waveform inversion: least-squares misfit, adjoint-state gradient with
// binomial checkpointing, normalized steepest descent with backtracking.
//
// The gradient is the exact discrete adjoint of the implemented forward scheme,
// so a central-difference probe of the objective matches it to roundoff-level
// accuracy. Reductions (objective sums, gradient accumulation across shots) run
// single threaded in a fixed order; per-cell gradient accumulation uses the
// static schedule. Results are therefore bit-identical across scheduler
// specs, chunk sizes and thread counts of the propagation loops.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seistune/revolve.hpp"
#include "seistune/sched.hpp"
#include "seistune/tuner.hpp"
#include "seistune/wave.hpp"

namespace seistune::fwi {

inline constexpr double kVelocityMin = 1000.0;
inline constexpr double kVelocityMax = 6000.0;

// Observes every scheduled propagation-loop launch. Labels: "forward" (fresh
// forward steps), "recompute" (checkpoint re-advances), "adjoint" (adjoint
// steps), "gradient" (gradient accumulation).
using LoopObserver =
    std::function<void(std::string_view label, const sched::SchedulerSpec& spec)>;

// Per-shot data misfit arrays, calculated minus observed.
struct Residual {
  std::vector<wave::Seismogram> per_shot;
};

// J = 1/2 sum of squares over shots, receivers and time, in a fixed order.
double objective(const Residual& residual);

struct Gradient {
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;
  std::int64_t n3 = 0;
  std::vector<double> g;

  double& at(std::int64_t i1, std::int64_t i2, std::int64_t i3) {
    return g[static_cast<std::size_t>((i1 * n2 + i2) * n3 + i3)];
  }
  double max_abs() const;
};

struct ShotGradient {
  Gradient gradient;
  double objective_contribution = 0.0;
  wave::Seismogram calculated;
  double seconds = 0.0;  // wall time of the whole forward+adjoint sweep
};

// Gradient of the misfit of one shot with respect to every velocity cell,
// computed by replaying the given checkpoint plan (plan.n_steps must equal
// config.nt). observed must be (nt, n_receivers).
ShotGradient shot_gradient(const wave::VelocityModel& model, const wave::Shot& shot,
                           const wave::Seismogram& observed,
                           const wave::SimConfig& config,
                           const sched::SchedulerSpec& spec, sched::WorkerPool& pool,
                           const revolve::CheckpointPlan& plan,
                           const LoopObserver& observer = {});

// m <- clamp(m - step * g / max|g|, [kVelocityMin, kVelocityMax]).
// Returns nothing when max|g| == 0: that is convergence, not a division.
std::optional<wave::VelocityModel> update_model(const wave::VelocityModel& model,
                                                const Gradient& gradient,
                                                double step);

// J(model) over all shots (forward only), accumulated in shot order.
double evaluate_objective(const wave::VelocityModel& model,
                          const std::vector<wave::Shot>& shots,
                          const std::vector<wave::Seismogram>& observed,
                          const wave::SimConfig& config,
                          const sched::SchedulerSpec& spec, sched::WorkerPool& pool);

struct LineSearchResult {
  bool accepted = false;
  double step = 0.0;
  double objective = 0.0;
  int trials = 0;
  wave::VelocityModel model;
};

// Backtracking: start at step0, halve until the trial objective drops below
// the current one, give up after max_halvings halvings. A trial whose forward
// simulation fails (e.g. the stability bound) counts as a failed trial.
LineSearchResult line_search(const wave::VelocityModel& model, const Gradient& gradient,
                             double current_objective,
                             const std::vector<wave::Shot>& shots,
                             const std::vector<wave::Seismogram>& observed,
                             const wave::SimConfig& config,
                             const sched::SchedulerSpec& spec,
                             sched::WorkerPool& pool, double step0, int max_halvings);

struct FwiConfig {
  int n_iterations = 10;
  std::vector<wave::Shot> shots;
  wave::SimConfig sim{};
  double gradient_tolerance = 0.0;  // stop when max|g| <= this
  double step0_fraction = 0.05;     // initial step = fraction * mean velocity
  int max_halvings = 5;
  std::int64_t n_snapshots = 0;     // 0 selects default_snapshot_budget(nt)
  sched::SchedulerSpec propagation{sched::Kind::kDynamic, std::nullopt};
};

struct IterationStat {
  int k = 0;
  double objective = 0.0;
  double gradient_max = 0.0;
  double step = 0.0;
  double seconds = 0.0;
};

struct ShotStat {
  int k = 0;
  int shot = 0;
  double seconds = 0.0;         // gradient sweep wall time for this shot
  double tuning_seconds = 0.0;  // nonzero only where tuning actually ran
};

struct FwiResult {
  std::vector<wave::VelocityModel> model_history;  // accepted iterates, initial first
  std::vector<double> objective_history;           // J per accepted iterate
  std::vector<IterationStat> iterations;
  std::vector<ShotStat> shot_stats;
  std::optional<tuner::TuningResult> tuning;
  int tuner_invocations = 0;
  sched::SchedulerSpec propagation_spec{};  // spec in effect after tuning
  std::string stop_reason;
  double total_seconds = 0.0;
};

// Gradient-descent driver. When policy.enabled, the dynamic chunk size is tuned
// exactly once, on the first shot of the first gradient loop, and the tuned
// spec is used for every subsequent propagation loop (forward, adjoint,
// recompute, line-search forwards).
FwiResult fwi_run(const wave::VelocityModel& initial, const FwiConfig& config,
                  const std::vector<wave::Seismogram>& observed,
                  const tuner::TuningPolicy& policy, sched::WorkerPool& pool,
                  const LoopObserver& observer = {});

}  // namespace seistune::fwi
