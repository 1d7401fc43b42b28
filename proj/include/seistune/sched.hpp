#pragma once

// Work-sharing loop scheduler with a persistent worker pool.
//
// Mirrors the OpenMP schedule(kind, chunk) contract for the three classic kinds:
//   static  : chunks of fixed size assigned round-robin to workers up front
//   dynamic : chunks of fixed size handed to whichever worker asks next
//   guided  : chunk size decays with the remaining work, floored at a minimum
//
// A loop body must be safe to run concurrently for distinct indices. Every index
// in the range is executed exactly once per run, whatever the kind, chunk and
// worker count.

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

namespace seistune::sched {

enum class Kind { kStatic, kDynamic, kGuided };

std::string_view kind_name(Kind kind);
std::optional<Kind> kind_from_name(std::string_view name);

// Half-open index interval [begin, end).
struct IterRange {
  std::int64_t begin = 0;
  std::int64_t end = 0;

  std::int64_t length() const { return end > begin ? end - begin : 0; }
  bool empty() const { return end <= begin; }
  friend bool operator==(const IterRange&, const IterRange&) = default;
};

// Scheduling request. An absent chunk means "use the default for this kind":
// static covers the range in one round-robin pass, dynamic and guided hand out
// single iterations (minimum chunk 1 for guided).
struct SchedulerSpec {
  Kind kind = Kind::kDynamic;
  std::optional<std::int64_t> chunk;

  friend bool operator==(const SchedulerSpec&, const SchedulerSpec&) = default;
};

std::string to_string(const SchedulerSpec& spec);

// Default chunk size when the spec carries none. Throws std::invalid_argument on
// an empty range or non-positive thread count.
std::int64_t default_chunk(Kind kind, IterRange range, int n_threads);

// Static assignment: chunk k (size chunk, the last one may be short) goes to
// thread k % n_threads. Returned in chunk order. Throws std::invalid_argument
// on chunk < 1 or n_threads < 1.
std::vector<std::pair<int, IterRange>> static_assignment(IterRange range,
                                                         std::int64_t chunk,
                                                         int n_threads);

// Size of the next guided chunk given the remaining iteration count:
// min(remaining, max(ceil(remaining / n_threads), min_chunk)).
std::int64_t guided_next_chunk(std::int64_t remaining, int n_threads,
                               std::int64_t min_chunk);

// Closed-form competitor chunk size:
//   f = floor(log2(n_iters / n_threads) / 1.618)
//   chunk = max(1, floor(n_iters / (2^f * 2 * n_threads)))
// Throws std::domain_error("formula undefined for N < P") when n_iters < n_threads.
std::int64_t competitor_chunk(std::int64_t n_iters, int n_threads);

using LoopBody = std::function<void(std::int64_t)>;

// Bookkeeping for the most recent run.
struct RunStats {
  std::int64_t chunks_dispensed = 0;
};

struct PoolConfig {
  int n_threads = 1;
};

// Persistent pool of worker threads. Threads are created once and reused across
// runs; a run hands every worker the same loop descriptor and blocks until all
// of them drain it. If the body throws, remaining chunks are abandoned (indices
// already started still finish on other workers), and run() rethrows
// std::runtime_error naming the first failing index.
class WorkerPool {
 public:
  explicit WorkerPool(PoolConfig config);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  int n_threads() const { return n_threads_; }

  // Runs the loop to completion and returns its wall time in seconds, measured
  // from immediately before the first chunk is released to after the last
  // worker finishes. An empty range returns without dispatching anything.
  double run(IterRange range, const SchedulerSpec& spec, const LoopBody& body);

  const RunStats& last_run_stats() const { return stats_; }

 private:
  void worker_main(int worker_id);
  void execute_job(int worker_id);
  bool run_indices(IterRange chunk);
  void note_failure(std::int64_t index, const char* what);

  int n_threads_ = 1;
  std::vector<std::thread> threads_;

  std::mutex mu_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  std::uint64_t epoch_ = 0;
  int active_ = 0;
  bool stop_ = false;

  // Descriptor of the job in flight. Plain fields are written by run() before
  // workers are released and read-only while the job runs.
  IterRange range_{};
  Kind kind_ = Kind::kDynamic;
  std::int64_t chunk_ = 1;
  const LoopBody* body_ = nullptr;
  std::atomic<std::int64_t> cursor_{0};
  std::atomic<std::int64_t> remaining_{0};
  std::atomic<std::int64_t> dispensed_{0};
  std::atomic<bool> abort_{false};

  std::mutex fail_mu_;
  std::int64_t fail_index_ = -1;
  std::string fail_what_;

  RunStats stats_{};
};

// Convenience wrapper over WorkerPool::run.
double parallel_for(IterRange range, const SchedulerSpec& spec, WorkerPool& pool,
                    const LoopBody& body);

}  // namespace seistune::sched
