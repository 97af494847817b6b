#ifndef PFS_CORE_WORKER_POOL_HPP
#define PFS_CORE_WORKER_POOL_HPP

#include <condition_variable>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace pfs {

// Persistent pool running the same job function with worker indices
// 0..size-1 and blocking until all are done. Work is always dealt out as
// precomputed contiguous slices, so results cannot depend on scheduling.
class WorkerPool {
 public:
  explicit WorkerPool(int workers);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  int size() const { return int(threads_.size()) + 1; }

  // Runs job(w) for every worker index w; index 0 executes on the calling
  // thread. Rethrows the first exception any worker produced.
  void run(const std::function<void(int)>& job);

 private:
  void worker_main(int index);

  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(int)>* job_ = nullptr;
  std::uint64_t generation_ = 0;
  int pending_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

}  // namespace pfs

#endif
