#include "seistune/revolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace seistune::revolve {

namespace {

// DP tables over (segment length l, free slots f), built lazily per plan call.
struct Tables {
  std::int64_t max_l;
  std::int64_t max_f;
  std::vector<std::int64_t> cost;   // (l, f) -> minimal advance length
  std::vector<std::int64_t> split;  // (l, f) -> argmin d, 0 when no split applies

  Tables(std::int64_t l_max, std::int64_t f_max) : max_l(l_max), max_f(f_max) {
    cost.assign(static_cast<std::size_t>((max_l + 1) * (max_f + 1)), 0);
    split.assign(cost.size(), 0);
    for (std::int64_t l = 2; l <= max_l; ++l) at(cost, l, 0) = l * (l - 1) / 2;
    for (std::int64_t f = 1; f <= max_f; ++f) {
      for (std::int64_t l = 2; l <= max_l; ++l) {
        std::int64_t best = std::numeric_limits<std::int64_t>::max();
        std::int64_t best_d = 1;
        for (std::int64_t d = 1; d < l; ++d) {
          std::int64_t c = d + at(cost, l - d, f - 1) + at(cost, d, f);
          if (c < best) {
            best = c;
            best_d = d;
          }
        }
        at(cost, l, f) = best;
        at(split, l, f) = best_d;
      }
    }
  }

  std::int64_t& at(std::vector<std::int64_t>& v, std::int64_t l, std::int64_t f) {
    return v[static_cast<std::size_t>(l * (max_f + 1) + f)];
  }
  std::int64_t get(const std::vector<std::int64_t>& v, std::int64_t l,
                   std::int64_t f) const {
    return v[static_cast<std::size_t>(l * (max_f + 1) + f)];
  }
};

class Planner {
 public:
  Planner(std::int64_t n_steps, std::int64_t n_snapshots)
      : tables_(n_steps, n_snapshots - 1) {
    plan_.n_steps = n_steps;
    plan_.n_snapshots = n_snapshots;
    for (std::int64_t s = n_snapshots - 1; s >= 1; --s) free_slots_.push_back(s);
    emit({Action::Kind::kStore, 0, 0});
    segment(0, n_steps, n_snapshots - 1, 0);
  }

  CheckpointPlan take() { return std::move(plan_); }

 private:
  void emit(Action a) { plan_.actions.push_back(a); }

  // Reverses states [b, e) with the live state at S_b, slot base_slot pinned to
  // S_b, and free_slots extra slots available. Leaves the live state at S_b.
  void segment(std::int64_t b, std::int64_t e, std::int64_t free_slots,
               std::int64_t base_slot) {
    std::int64_t l = e - b;
    if (l == 1) {
      emit({Action::Kind::kReverse, b, -1});
      return;
    }
    if (free_slots == 0) {
      for (std::int64_t t = e - 1; t > b; --t) {
        emit({Action::Kind::kAdvance, b, t});
        emit({Action::Kind::kReverse, t, -1});
        emit({Action::Kind::kRestore, base_slot, -1});
      }
      emit({Action::Kind::kReverse, b, -1});
      return;
    }
    std::int64_t d = tables_.get(tables_.split, l, free_slots);
    std::int64_t mid = b + d;
    std::int64_t slot = free_slots_.back();
    free_slots_.pop_back();
    emit({Action::Kind::kAdvance, b, mid});
    emit({Action::Kind::kStore, slot, mid});
    segment(mid, e, free_slots - 1, slot);
    free_slots_.push_back(slot);
    emit({Action::Kind::kRestore, base_slot, -1});
    segment(b, mid, free_slots, base_slot);
  }

  Tables tables_;
  std::vector<std::int64_t> free_slots_;
  CheckpointPlan plan_;
};

}  // namespace

std::string to_string(const Action& action) {
  switch (action.kind) {
    case Action::Kind::kAdvance:
      return "advance " + std::to_string(action.a) + " " + std::to_string(action.b);
    case Action::Kind::kStore:
      return "store " + std::to_string(action.a) + " " + std::to_string(action.b);
    case Action::Kind::kRestore:
      return "restore " + std::to_string(action.a);
    case Action::Kind::kReverse:
      return "reverse " + std::to_string(action.a);
  }
  return "?";
}

std::int64_t CheckpointPlan::total_advance_length() const {
  std::int64_t total = 0;
  for (const Action& a : actions) {
    if (a.kind == Action::Kind::kAdvance) total += a.b - a.a;
  }
  return total;
}

std::string CheckpointPlan::dump() const {
  std::string out;
  for (const Action& a : actions) {
    out += to_string(a);
    out += '\n';
  }
  return out;
}

CheckpointPlan plan(std::int64_t n_steps, std::int64_t n_snapshots) {
  if (n_steps < 1) throw std::invalid_argument("plan: n_steps must be >= 1");
  if (n_snapshots < 1) throw std::invalid_argument("plan: cannot reverse without snapshots");
  // Slots beyond n_steps are dead weight; capping keeps the DP table small.
  n_snapshots = std::min(n_snapshots, n_steps);
  return Planner(n_steps, n_snapshots).take();
}

std::int64_t default_snapshot_budget(std::int64_t nt) {
  if (nt < 1) throw std::invalid_argument("default_snapshot_budget: nt must be >= 1");
  std::int64_t log = 0;
  while ((std::int64_t{1} << log) < nt) ++log;  // ceil(log2(nt))
  return log + 2;
}

}  // namespace seistune::revolve
