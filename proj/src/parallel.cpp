#include "hexfem/parallel.hpp"

#include <algorithm>
#include <stdexcept>

namespace hexfem {

ThreadPool::ThreadPool(int workers) : workers_(workers) {
  if (workers < 1) throw std::invalid_argument("ThreadPool: workers must be >= 1");
  threads_.reserve(workers_ - 1);
  for (int id = 1; id < workers_; ++id) {
    threads_.emplace_back([this, id] { worker_loop(id); });
  }
}

ThreadPool::~ThreadPool() {
  {
    std::unique_lock<std::mutex> lock(mu_);
    stop_ = true;
  }
  cv_start_.notify_all();
  for (auto& t : threads_) t.join();
}

void ThreadPool::worker_loop(int id) {
  std::uint64_t seen = 0;
  for (;;) {
    const std::function<void(std::int64_t, std::int64_t, int)>* body;
    std::int64_t n;
    {
      std::unique_lock<std::mutex> lock(mu_);
      cv_start_.wait(lock, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
      body = body_;
      n = work_n_;
    }
    const std::int64_t lo = n * id / workers_;
    const std::int64_t hi = n * (id + 1) / workers_;
    if (lo < hi) (*body)(lo, hi, id);
    {
      std::unique_lock<std::mutex> lock(mu_);
      if (--pending_ == 0) cv_done_.notify_all();
    }
  }
}

void ThreadPool::parallel_for(
    std::int64_t n, const std::function<void(std::int64_t, std::int64_t, int)>& body) {
  if (n <= 0) return;
  if (workers_ == 1) {
    body(0, n, 0);
    return;
  }
  {
    std::unique_lock<std::mutex> lock(mu_);
    body_ = &body;
    work_n_ = n;
    pending_ = workers_ - 1;
    ++generation_;
  }
  cv_start_.notify_all();
  const std::int64_t hi = n / workers_;
  if (hi > 0) body(0, hi, 0);
  std::unique_lock<std::mutex> lock(mu_);
  cv_done_.wait(lock, [&] { return pending_ == 0; });
}

namespace {
constexpr std::int64_t kReduceBlock = 4096;

double combine_pairwise(std::vector<double>& partials) {
  const std::int64_t nb = std::int64_t(partials.size());
  if (nb == 0) return 0.0;
  for (std::int64_t width = 1; width < nb; width *= 2) {
    for (std::int64_t i = 0; i + width < nb; i += 2 * width) {
      partials[i] += partials[i + width];
    }
  }
  return partials[0];
}
}  // namespace

double dot_deterministic(std::span<const double> a, std::span<const double> b,
                         ThreadPool* pool, std::vector<double>& partials) {
  const std::int64_t n = std::int64_t(a.size());
  if (std::int64_t(b.size()) != n)
    throw std::invalid_argument("dot_deterministic: length mismatch");
  const std::int64_t nb = (n + kReduceBlock - 1) / kReduceBlock;
  partials.assign(std::size_t(nb), 0.0);
  auto work = [&](std::int64_t lo, std::int64_t hi, int) {
    for (std::int64_t blk = lo; blk < hi; ++blk) {
      const std::int64_t i0 = blk * kReduceBlock;
      const std::int64_t i1 = std::min(n, i0 + kReduceBlock);
      double s = 0.0;
      for (std::int64_t i = i0; i < i1; ++i) s += a[std::size_t(i)] * b[std::size_t(i)];
      partials[std::size_t(blk)] = s;
    }
  };
  if (pool) {
    pool->parallel_for(nb, work);
  } else {
    work(0, nb, 0);
  }
  return combine_pairwise(partials);
}

}  // namespace hexfem
