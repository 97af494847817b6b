#include "core/worker_pool.hpp"

#include "core/errors.hpp"

namespace pfs {

WorkerPool::WorkerPool(int workers) {
  if (workers < 1) throw config_error("worker count must be >= 1");
  threads_.reserve(std::size_t(workers) - 1);
  for (int i = 1; i < workers; ++i)
    threads_.emplace_back([this, i] { worker_main(i); });
}

WorkerPool::~WorkerPool() {
  {
    std::unique_lock lock(mutex_);
    stop_ = true;
  }
  start_cv_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::worker_main(int index) {
  std::uint64_t seen = 0;
  for (;;) {
    const std::function<void(int)>* job = nullptr;
    {
      std::unique_lock lock(mutex_);
      start_cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
      job = job_;
    }
    try {
      (*job)(index);
    } catch (...) {
      std::unique_lock lock(mutex_);
      if (!error_) error_ = std::current_exception();
    }
    {
      std::unique_lock lock(mutex_);
      if (--pending_ == 0) done_cv_.notify_all();
    }
  }
}

void WorkerPool::run(const std::function<void(int)>& job) {
  if (threads_.empty()) {
    job(0);
    return;
  }
  {
    std::unique_lock lock(mutex_);
    job_ = &job;
    pending_ = int(threads_.size());
    error_ = nullptr;
    ++generation_;
  }
  start_cv_.notify_all();
  std::exception_ptr my_error;
  try {
    job(0);
  } catch (...) {
    my_error = std::current_exception();
  }
  {
    std::unique_lock lock(mutex_);
    done_cv_.wait(lock, [&] { return pending_ == 0; });
    job_ = nullptr;
    if (!error_ && my_error) error_ = my_error;
    if (error_) {
      auto err = error_;
      error_ = nullptr;
      std::rethrow_exception(err);
    }
  }
}

}  // namespace pfs
