#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace hexfem {

/// Persistent worker pool. One pool stands in for a set of ranks: size()
/// workers process contiguous index ranges. All reductions in this library
/// use fixed-size blocks combined in a fixed order, so results do not depend
/// on the pool size.
class ThreadPool {
public:
  explicit ThreadPool(int workers = 1);
  ~ThreadPool();

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int size() const { return workers_; }

  /// Runs body(begin, end, worker_id) over a contiguous split of [0, n).
  /// worker_id is in [0, size()); the calling thread acts as worker 0.
  void parallel_for(std::int64_t n,
                    const std::function<void(std::int64_t, std::int64_t, int)>& body);

private:
  void worker_loop(int id);

  int workers_;
  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable cv_start_;
  std::condition_variable cv_done_;
  const std::function<void(std::int64_t, std::int64_t, int)>* body_ = nullptr;
  std::int64_t work_n_ = 0;
  std::uint64_t generation_ = 0;
  int pending_ = 0;
  bool stop_ = false;
};

/// Deterministic dot product: fixed 4096-element blocks summed sequentially,
/// block partials combined by a pairwise tree. Bitwise reproducible for any
/// pool size. `partials` is caller-owned scratch.
double dot_deterministic(std::span<const double> a, std::span<const double> b,
                         ThreadPool* pool, std::vector<double>& partials);

}  // namespace hexfem
