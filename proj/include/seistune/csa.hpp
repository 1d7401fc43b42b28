#pragma once

// Coupled simulated annealing over an integer interval.
//
// m optimizers share one acceptance coupling term. Candidate solutions are drawn
// from a Cauchy step around each current solution, reflected into the bounds.
// The acceptance temperature adapts so the dispersion of acceptance
// probabilities tracks a fixed target; the generation temperature decays as
// t0_gen / iteration. Costs may be +infinity (infeasible); such states never
// become best and contribute nothing to the coupling term.
//
// All randomness flows through one std::mt19937_64, so a seed fixes the whole
// trajectory. A run with m optimizers and N iterations costs exactly m * (N + 1)
// cost evaluations: m to seed the population, m per iteration.

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace seistune::csa {

struct CsaConfig {
  int n_optimizers = 4;
  int n_iterations = 40;
  double t0_gen = 100.0;
  double t0_ac = 0.9;
  // Dispersion target for acceptance probabilities; <= 0 selects
  // default_variance_target(n_optimizers).
  double variance_target = 0.0;
  std::uint64_t rng_seed = 1;
};

// 0.99 times the maximum possible variance (m - 1) / m^2 of m values in [0, 1].
double default_variance_target(int n_optimizers);

// Inclusive integer interval [lo, hi].
struct SearchBounds {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

struct CsaState {
  std::vector<std::int64_t> current;
  std::vector<double> current_cost;
  std::int64_t best = 0;
  double best_cost = 0.0;
  double t_gen = 0.0;
  double t_ac = 0.0;
  double variance_target = 0.0;
  int iteration = 0;  // 0 after init, k during iteration k (1-based)
};

struct Evaluation {
  std::int64_t solution = 0;
  double cost = 0.0;
  int iteration = 0;
  int optimizer = 0;
};

using CostFn = std::function<double(std::int64_t)>;

// Uniform draw in the open interval (0, 1); never returns 0 or 1 exactly.
double uniform_unit(std::mt19937_64& rng);

// Reflects x into [lo, hi] by folding over the period 2 * (hi - lo).
double reflect_into(double x, double lo, double hi);

// Seeds the population uniformly in bounds and evaluates it (m evaluations).
// Appends to *history when given.
CsaState csa_init(const CsaConfig& config, SearchBounds bounds, const CostFn& cost,
                  std::mt19937_64& rng, std::vector<Evaluation>* history = nullptr);

// One Cauchy candidate per optimizer:
// round(current + t_gen * tan(pi * (u - 1/2))), reflected then clamped to bounds.
std::vector<std::int64_t> csa_generate(const CsaState& state, SearchBounds bounds,
                                       std::mt19937_64& rng);

// Coupling term and per-optimizer acceptance probabilities for the current
// population (probability 0 for infeasible current states).
std::vector<double> acceptance_probabilities(const CsaState& state);

// Accepts each candidate if it improves on the optimizer's current cost, else
// with the coupled probability. Draws exactly one uniform per optimizer.
// Updates best from every candidate, accepted or not.
void csa_accept(CsaState& state, const std::vector<std::int64_t>& candidates,
                const std::vector<double>& candidate_costs, std::mt19937_64& rng);

// t_gen = t0_gen / iteration; t_ac scales by (1 - 0.05) when the population
// variance of acceptance probabilities exceeds the target, else by (1 + 0.05).
void csa_update_temperatures(CsaState& state, const CsaConfig& config);

struct CsaResult {
  std::int64_t best = 0;
  double best_cost = 0.0;
  std::vector<Evaluation> history;
};

CsaResult csa_run(const CsaConfig& config, SearchBounds bounds, const CostFn& cost);

}  // namespace seistune::csa
