#include "seistune/csa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace seistune::csa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTempStep = 0.05;

double sanitize(double cost) { return std::isfinite(cost) ? cost : kInf; }

void validate(const CsaConfig& config, SearchBounds bounds) {
  if (config.n_optimizers < 1) throw std::invalid_argument("csa: n_optimizers must be >= 1");
  if (config.n_iterations < 0) throw std::invalid_argument("csa: n_iterations must be >= 0");
  if (!(config.t0_gen > 0.0)) throw std::invalid_argument("csa: t0_gen must be > 0");
  if (!(config.t0_ac > 0.0)) throw std::invalid_argument("csa: t0_ac must be > 0");
  if (bounds.lo > bounds.hi) throw std::invalid_argument("csa: bounds.lo must be <= bounds.hi");
}

std::int64_t uniform_int(SearchBounds bounds, std::mt19937_64& rng) {
  auto span = static_cast<double>(bounds.hi - bounds.lo) + 1.0;
  auto offset = static_cast<std::int64_t>(uniform_unit(rng) * span);
  return std::min(bounds.hi, bounds.lo + offset);
}

// Largest finite current cost; +inf entries are skipped so one infeasible state
// cannot flatten everyone's acceptance probability.
double max_finite_cost(const std::vector<double>& costs) {
  double m = -kInf;
  for (double c : costs) {
    if (std::isfinite(c)) m = std::max(m, c);
  }
  return m;
}

}  // namespace

double default_variance_target(int n_optimizers) {
  if (n_optimizers < 1) throw std::invalid_argument("csa: n_optimizers must be >= 1");
  double m = n_optimizers;
  return 0.99 * (m - 1.0) / (m * m);
}

double uniform_unit(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double reflect_into(double x, double lo, double hi) {
  if (!(hi > lo)) return lo;
  double span = hi - lo;
  double period = 2.0 * span;
  double y = std::fmod(x - lo, period);
  if (y < 0.0) y += period;
  if (y > span) y = period - y;
  return lo + y;
}

CsaState csa_init(const CsaConfig& config, SearchBounds bounds, const CostFn& cost,
                  std::mt19937_64& rng, std::vector<Evaluation>* history) {
  validate(config, bounds);
  CsaState state;
  state.t_gen = config.t0_gen;
  state.t_ac = config.t0_ac;
  state.variance_target = config.variance_target > 0.0
                              ? config.variance_target
                              : default_variance_target(config.n_optimizers);
  state.iteration = 0;
  state.current.resize(static_cast<std::size_t>(config.n_optimizers));
  state.current_cost.resize(static_cast<std::size_t>(config.n_optimizers));
  state.best_cost = kInf;
  state.best = bounds.lo;
  for (int i = 0; i < config.n_optimizers; ++i) {
    std::int64_t x = uniform_int(bounds, rng);
    double c = sanitize(cost(x));
    state.current[static_cast<std::size_t>(i)] = x;
    state.current_cost[static_cast<std::size_t>(i)] = c;
    if (history) history->push_back({x, c, 0, i});
    if (c < state.best_cost) {
      state.best_cost = c;
      state.best = x;
    }
  }
  if (!std::isfinite(state.best_cost)) state.best = state.current.front();
  return state;
}

std::vector<std::int64_t> csa_generate(const CsaState& state, SearchBounds bounds,
                                       std::mt19937_64& rng) {
  std::vector<std::int64_t> out(state.current.size());
  auto lo = static_cast<double>(bounds.lo);
  auto hi = static_cast<double>(bounds.hi);
  for (std::size_t i = 0; i < state.current.size(); ++i) {
    double u = uniform_unit(rng);
    double step = state.t_gen * std::tan(std::numbers::pi * (u - 0.5));
    double cand = static_cast<double>(state.current[i]) + std::round(step);
    cand = reflect_into(cand, lo, hi);
    auto snapped = static_cast<std::int64_t>(std::llround(cand));
    out[i] = std::clamp(snapped, bounds.lo, bounds.hi);
  }
  return out;
}

std::vector<double> acceptance_probabilities(const CsaState& state) {
  std::vector<double> probs(state.current_cost.size(), 0.0);
  double max_cost = max_finite_cost(state.current_cost);
  if (!std::isfinite(max_cost)) return probs;
  double gamma = 0.0;
  for (double c : state.current_cost) {
    if (std::isfinite(c)) gamma += std::exp((c - max_cost) / state.t_ac);
  }
  if (!(gamma > 0.0)) return probs;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    double c = state.current_cost[i];
    if (std::isfinite(c)) probs[i] = std::exp((c - max_cost) / state.t_ac) / gamma;
  }
  return probs;
}

void csa_accept(CsaState& state, const std::vector<std::int64_t>& candidates,
                const std::vector<double>& candidate_costs, std::mt19937_64& rng) {
  if (candidates.size() != state.current.size() ||
      candidate_costs.size() != state.current.size()) {
    throw std::invalid_argument("csa_accept: population size mismatch");
  }
  std::vector<double> probs = acceptance_probabilities(state);
  for (std::size_t i = 0; i < state.current.size(); ++i) {
    double cand_cost = sanitize(candidate_costs[i]);
    // One draw per optimizer regardless of the branch keeps trajectories
    // reproducible across cost functions.
    double u = uniform_unit(rng);
    bool accept = cand_cost < state.current_cost[i] || probs[i] > u;
    if (accept) {
      state.current[i] = candidates[i];
      state.current_cost[i] = cand_cost;
    }
    if (cand_cost < state.best_cost) {
      state.best_cost = cand_cost;
      state.best = candidates[i];
    }
  }
}

void csa_update_temperatures(CsaState& state, const CsaConfig& config) {
  if (state.iteration < 1) throw std::logic_error("csa: iteration must be >= 1 here");
  state.t_gen = config.t0_gen / static_cast<double>(state.iteration);
  std::vector<double> probs = acceptance_probabilities(state);
  double mean = 0.0;
  for (double p : probs) mean += p;
  mean /= static_cast<double>(probs.size());
  double var = 0.0;
  for (double p : probs) var += (p - mean) * (p - mean);
  var /= static_cast<double>(probs.size());
  if (var > state.variance_target) {
    state.t_ac *= 1.0 - kTempStep;
  } else {
    state.t_ac *= 1.0 + kTempStep;
  }
}

CsaResult csa_run(const CsaConfig& config, SearchBounds bounds, const CostFn& cost) {
  std::mt19937_64 rng(config.rng_seed);
  CsaResult result;
  CsaState state = csa_init(config, bounds, cost, rng, &result.history);
  for (int k = 1; k <= config.n_iterations; ++k) {
    state.iteration = k;
    csa_update_temperatures(state, config);
    std::vector<std::int64_t> candidates = csa_generate(state, bounds, rng);
    std::vector<double> costs(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      costs[i] = cost(candidates[i]);
      result.history.push_back(
          {candidates[i], sanitize(costs[i]), k, static_cast<int>(i)});
    }
    csa_accept(state, candidates, costs, rng);
  }
  result.best = state.best;
  result.best_cost = state.best_cost;
  return result;
}

}  // namespace seistune::csa
