// Copyright 2026 The Lockstep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LOCKSTEP_CORE_PARALLEL_HPP_
#define LOCKSTEP_CORE_PARALLEL_HPP_

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace lockstep {

// Persistent workers that split a world range into contiguous chunks.
// With one thread everything runs inline on the caller.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t threads = 1) : threads_(threads ? threads : 1) {
    for (std::size_t i = 1; i < threads_; ++i) {
      workers_.emplace_back([this, i] { worker_loop(i); });
    }
  }
  ~WorkerPool() {
    {
      std::lock_guard lock(mu_);
      stop_ = true;
      ++epoch_;
    }
    cv_.notify_all();
    for (auto& t : workers_) t.join();
  }
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t threads() const { return threads_; }

  // Calls fn(begin, end) over a partition of [0, n). Blocks until done.
  void run(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (threads_ == 1 || n < 2 * threads_) {
      fn(0, n);
      return;
    }
    {
      std::lock_guard lock(mu_);
      job_ = &fn;
      n_ = n;
      pending_ = threads_ - 1;
      ++epoch_;
    }
    cv_.notify_all();
    const auto [b, e] = chunk(0, n);
    fn(b, e);
    std::unique_lock lock(mu_);
    done_cv_.wait(lock, [this] { return pending_ == 0; });
    job_ = nullptr;
  }

 private:
  std::pair<std::size_t, std::size_t> chunk(std::size_t i, std::size_t n) const {
    const std::size_t per = n / threads_;
    const std::size_t extra = n % threads_;
    const std::size_t begin = i * per + (i < extra ? i : extra);
    return {begin, begin + per + (i < extra ? 1 : 0)};
  }

  void worker_loop(std::size_t index) {
    std::size_t seen = 0;
    for (;;) {
      const std::function<void(std::size_t, std::size_t)>* job = nullptr;
      std::size_t n = 0;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return epoch_ != seen; });
        seen = epoch_;
        if (stop_) return;
        job = job_;
        n = n_;
      }
      const auto [b, e] = chunk(index, n);
      (*job)(b, e);
      {
        std::lock_guard lock(mu_);
        if (--pending_ == 0) done_cv_.notify_one();
      }
    }
  }

  std::size_t threads_;
  std::vector<std::thread> workers_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  const std::function<void(std::size_t, std::size_t)>* job_ = nullptr;
  std::size_t n_ = 0;
  std::size_t pending_ = 0;
  std::size_t epoch_ = 0;
  bool stop_ = false;
};

}  // namespace lockstep

#endif  // LOCKSTEP_CORE_PARALLEL_HPP_
