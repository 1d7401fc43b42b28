#include "seistune/sched.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace seistune::sched {

namespace {

using Clock = std::chrono::steady_clock;
static_assert(static_cast<double>(Clock::period::num) / Clock::period::den <= 1e-6,
              "steady_clock resolution must be at least microseconds");

double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

}  // namespace

std::string_view kind_name(Kind kind) {
  switch (kind) {
    case Kind::kStatic:
      return "static";
    case Kind::kDynamic:
      return "dynamic";
    case Kind::kGuided:
      return "guided";
  }
  return "unknown";
}

std::optional<Kind> kind_from_name(std::string_view name) {
  if (name == "static") return Kind::kStatic;
  if (name == "dynamic") return Kind::kDynamic;
  if (name == "guided") return Kind::kGuided;
  return std::nullopt;
}

std::string to_string(const SchedulerSpec& spec) {
  std::string out(kind_name(spec.kind));
  if (spec.chunk) {
    out += ",";
    out += std::to_string(*spec.chunk);
  }
  return out;
}

std::int64_t default_chunk(Kind kind, IterRange range, int n_threads) {
  if (range.empty()) throw std::invalid_argument("default_chunk: empty iteration range");
  if (n_threads < 1) throw std::invalid_argument("default_chunk: n_threads must be >= 1");
  if (kind == Kind::kStatic) return ceil_div(range.length(), n_threads);
  return 1;
}

std::vector<std::pair<int, IterRange>> static_assignment(IterRange range,
                                                         std::int64_t chunk,
                                                         int n_threads) {
  if (chunk < 1) throw std::invalid_argument("static_assignment: chunk must be >= 1");
  if (n_threads < 1) throw std::invalid_argument("static_assignment: n_threads must be >= 1");
  std::vector<std::pair<int, IterRange>> out;
  std::int64_t k = 0;
  for (std::int64_t b = range.begin; b < range.end; b += chunk, ++k) {
    std::int64_t e = std::min(range.end, b + chunk);
    out.emplace_back(static_cast<int>(k % n_threads), IterRange{b, e});
  }
  return out;
}

std::int64_t guided_next_chunk(std::int64_t remaining, int n_threads,
                               std::int64_t min_chunk) {
  if (remaining <= 0) return 0;
  if (n_threads < 1) throw std::invalid_argument("guided_next_chunk: n_threads must be >= 1");
  if (min_chunk < 1) throw std::invalid_argument("guided_next_chunk: min_chunk must be >= 1");
  std::int64_t want = ceil_div(remaining, n_threads);
  if (want < min_chunk) want = min_chunk;
  return std::min(remaining, want);
}

std::int64_t competitor_chunk(std::int64_t n_iters, int n_threads) {
  if (n_threads < 1) throw std::invalid_argument("competitor_chunk: n_threads must be >= 1");
  if (n_iters < n_threads) throw std::domain_error("formula undefined for N < P");
  const double kInversePhi = 1.0 / 1.618;
  double f_real = std::log2(static_cast<double>(n_iters) / n_threads) * kInversePhi;
  auto f = static_cast<std::int64_t>(std::floor(f_real));
  // N >= P makes f >= 0; f <= log2(N) < 63 keeps the shift in range.
  std::int64_t denom = (std::int64_t{1} << f) * 2 * n_threads;
  std::int64_t chunk = n_iters / denom;
  return chunk < 1 ? 1 : chunk;
}

WorkerPool::WorkerPool(PoolConfig config) : n_threads_(config.n_threads) {
  if (n_threads_ < 1) throw std::invalid_argument("WorkerPool: n_threads must be >= 1");
  threads_.reserve(static_cast<std::size_t>(n_threads_));
  for (int id = 0; id < n_threads_; ++id) {
    threads_.emplace_back([this, id] { worker_main(id); });
  }
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard<std::mutex> lk(mu_);
    stop_ = true;
  }
  start_cv_.notify_all();
  for (auto& t : threads_) t.join();
}

double WorkerPool::run(IterRange range, const SchedulerSpec& spec, const LoopBody& body) {
  if (spec.chunk && *spec.chunk < 1) {
    throw std::invalid_argument("WorkerPool::run: chunk must be >= 1");
  }
  if (range.empty()) {
    auto t0 = Clock::now();
    stats_ = RunStats{0};
    return seconds_between(t0, Clock::now());
  }
  std::int64_t chunk = spec.chunk ? *spec.chunk : default_chunk(spec.kind, range, n_threads_);

  {
    std::lock_guard<std::mutex> lk(mu_);
    range_ = range;
    kind_ = spec.kind;
    chunk_ = chunk;
    body_ = &body;
    cursor_.store(range.begin, std::memory_order_relaxed);
    remaining_.store(range.length(), std::memory_order_relaxed);
    dispensed_.store(0, std::memory_order_relaxed);
    abort_.store(false, std::memory_order_relaxed);
    fail_index_ = -1;
    fail_what_.clear();
    active_ = n_threads_;
    ++epoch_;
  }

  auto t0 = Clock::now();
  start_cv_.notify_all();
  {
    std::unique_lock<std::mutex> lk(mu_);
    done_cv_.wait(lk, [this] { return active_ == 0; });
  }
  auto t1 = Clock::now();

  stats_ = RunStats{dispensed_.load(std::memory_order_relaxed)};
  body_ = nullptr;
  if (fail_index_ >= 0) {
    throw std::runtime_error("parallel loop body failed at index " +
                             std::to_string(fail_index_) + ": " + fail_what_);
  }
  return seconds_between(t0, t1);
}

void WorkerPool::worker_main(int worker_id) {
  std::uint64_t seen = 0;
  for (;;) {
    {
      std::unique_lock<std::mutex> lk(mu_);
      start_cv_.wait(lk, [&] { return stop_ || epoch_ != seen; });
      if (stop_) return;
      seen = epoch_;
    }
    execute_job(worker_id);
    {
      std::lock_guard<std::mutex> lk(mu_);
      if (--active_ == 0) done_cv_.notify_all();
    }
  }
}

void WorkerPool::execute_job(int worker_id) {
  switch (kind_) {
    case Kind::kStatic: {
      // Chunk k goes to worker k % n_threads, matching static_assignment.
      std::int64_t stride = static_cast<std::int64_t>(n_threads_) * chunk_;
      for (std::int64_t b = range_.begin + worker_id * chunk_; b < range_.end; b += stride) {
        dispensed_.fetch_add(1, std::memory_order_relaxed);
        if (!run_indices({b, std::min(range_.end, b + chunk_)})) return;
      }
      return;
    }
    case Kind::kDynamic: {
      for (;;) {
        std::int64_t b = cursor_.fetch_add(chunk_, std::memory_order_relaxed);
        if (b >= range_.end) return;
        dispensed_.fetch_add(1, std::memory_order_relaxed);
        if (!run_indices({b, std::min(range_.end, b + chunk_)})) return;
      }
    }
    case Kind::kGuided: {
      for (;;) {
        std::int64_t rem = remaining_.load(std::memory_order_relaxed);
        std::int64_t take = 0;
        do {
          if (rem <= 0) return;
          take = guided_next_chunk(rem, n_threads_, chunk_);
        } while (!remaining_.compare_exchange_weak(rem, rem - take,
                                                   std::memory_order_relaxed));
        std::int64_t b = range_.end - rem;
        dispensed_.fetch_add(1, std::memory_order_relaxed);
        if (!run_indices({b, b + take})) return;
      }
    }
  }
}

bool WorkerPool::run_indices(IterRange chunk) {
  for (std::int64_t i = chunk.begin; i < chunk.end; ++i) {
    if (abort_.load(std::memory_order_relaxed)) return false;
    try {
      (*body_)(i);
    } catch (const std::exception& e) {
      note_failure(i, e.what());
      return false;
    } catch (...) {
      note_failure(i, "unknown exception");
      return false;
    }
  }
  return true;
}

void WorkerPool::note_failure(std::int64_t index, const char* what) {
  bool expected = false;
  if (abort_.compare_exchange_strong(expected, true)) {
    std::lock_guard<std::mutex> lk(fail_mu_);
    fail_index_ = index;
    fail_what_ = what;
  }
}

double parallel_for(IterRange range, const SchedulerSpec& spec, WorkerPool& pool,
                    const LoopBody& body) {
  return pool.run(range, spec, body);
}

}  // namespace seistune::sched
