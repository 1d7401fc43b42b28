#pragma once

// Binomial checkpointing: plan and replay a forward/reverse sweep over n_steps
// states using at most n_snapshots stored states.
//
// The forward recursion produces states S_0 .. S_n with step t mapping
// S_t -> S_{t+1}. The reverse pass must visit Reverse(n-1), .., Reverse(0), and
// Reverse(t) requires S_t to be the live state. When not enough snapshots exist
// to keep every state, segments are re-advanced from stored states; the plan
// minimizes the total length of Advance actions (the DP
//   C(1, f) = 0,  C(l, 0) = l (l - 1) / 2,
//   C(l, f) = min over d in [1, l-1] of d + C(l - d, f - 1) + C(d, f)
// where l is segment length and f the count of still-free snapshot slots beyond
// the one pinning the segment base).
//
// Plans are explicit action lists so an executor stays trivial and an oracle
// can simulate them.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace seistune::revolve {

struct Action {
  enum class Kind { kAdvance, kStore, kRestore, kReverse };

  Kind kind = Kind::kAdvance;
  // kAdvance: from = first step index, to = one past last (state goes from -> to).
  // kStore:   slot = snapshot slot, step = state index stored.
  // kRestore: slot = snapshot slot the live state is loaded from.
  // kReverse: step = state index consumed (live state must be S_step).
  std::int64_t a = -1;
  std::int64_t b = -1;

  friend bool operator==(const Action&, const Action&) = default;
};

std::string to_string(const Action& action);

struct CheckpointPlan {
  std::int64_t n_steps = 0;
  std::int64_t n_snapshots = 0;
  std::vector<Action> actions;

  // Sum of Advance lengths. The deepest state any Reverse consumes is
  // S_{n_steps - 1}, so the mandatory first sweep is n_steps - 1 advances and
  // everything beyond that is recomputation.
  std::int64_t total_advance_length() const;
  std::int64_t recompute_length() const { return total_advance_length() - (n_steps - 1); }
  std::string dump() const;
};

// Minimal-recomputation plan. Throws std::invalid_argument for n_steps < 1, and
// for n_snapshots < 1 ("cannot reverse without snapshots").
CheckpointPlan plan(std::int64_t n_steps, std::int64_t n_snapshots);

// Snapshot budget heuristic for a time loop of nt steps: ceil(log2(nt)) + 2.
std::int64_t default_snapshot_budget(std::int64_t nt);

// Fixed-capacity slot store for replay.
template <class State>
class SnapshotStore {
 public:
  explicit SnapshotStore(std::int64_t capacity)
      : slots_(static_cast<std::size_t>(capacity >= 0 ? capacity : 0)) {
    if (capacity < 0) throw std::invalid_argument("SnapshotStore: capacity must be >= 0");
  }

  std::int64_t capacity() const { return static_cast<std::int64_t>(slots_.size()); }

  void put(std::int64_t slot, std::int64_t step, const State& state) {
    check(slot);
    slots_[static_cast<std::size_t>(slot)] = {step, state};
  }

  const State& get(std::int64_t slot) const {
    check(slot);
    const auto& s = slots_[static_cast<std::size_t>(slot)];
    if (!s) throw std::logic_error("SnapshotStore: slot is empty");
    return s->second;
  }

  std::int64_t step_of(std::int64_t slot) const {
    check(slot);
    const auto& s = slots_[static_cast<std::size_t>(slot)];
    if (!s) throw std::logic_error("SnapshotStore: slot is empty");
    return s->first;
  }

 private:
  void check(std::int64_t slot) const {
    if (slot < 0 || slot >= capacity()) {
      throw std::out_of_range("SnapshotStore: slot out of range");
    }
  }

  std::vector<std::optional<std::pair<std::int64_t, State>>> slots_;
};

// Executes a plan. advance(t, state) maps S_t to S_{t+1} in place;
// reverse(t, state) observes the live state S_t. State must be copyable.
// Validates the step invariants as it goes and throws std::logic_error on a
// malformed plan, std::invalid_argument when the store is smaller than the
// plan requires.
template <class State>
void replay(const CheckpointPlan& plan, SnapshotStore<State>& store, State state,
            const std::function<void(std::int64_t, State&)>& advance,
            const std::function<void(std::int64_t, const State&)>& reverse) {
  if (store.capacity() < plan.n_snapshots) {
    throw std::invalid_argument("replay: snapshot store smaller than the plan requires");
  }
  std::int64_t cur = 0;
  for (const Action& act : plan.actions) {
    switch (act.kind) {
      case Action::Kind::kAdvance:
        if (act.a != cur || act.b < act.a) {
          throw std::logic_error("replay: advance does not start at the live state");
        }
        for (std::int64_t t = act.a; t < act.b; ++t) advance(t, state);
        cur = act.b;
        break;
      case Action::Kind::kStore:
        if (act.b != cur) throw std::logic_error("replay: store of a state that is not live");
        store.put(act.a, cur, state);
        break;
      case Action::Kind::kRestore:
        state = store.get(act.a);
        cur = store.step_of(act.a);
        break;
      case Action::Kind::kReverse:
        if (act.a != cur) throw std::logic_error("replay: reverse of a state that is not live");
        reverse(act.a, state);
        break;
    }
  }
}

}  // namespace seistune::revolve
