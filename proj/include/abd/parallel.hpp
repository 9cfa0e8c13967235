#pragma once

#include <cstddef>
#include <memory>

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

namespace abd {

/// Worker pool handle. Every parallel section writes to per-index slots, so results never depend
/// on the worker count.
class Executor {
 public:
  explicit Executor(int workers = 1)
      : workers_(workers < 1 ? 1 : workers),
        arena_(workers_ > 1 ? std::make_shared<tbb::task_arena>(workers_) : nullptr) {}

  int workers() const { return workers_; }

  template <class Fn>
  void for_each(std::size_t n, Fn&& fn) const {
    if (!arena_ || n < 2) {
      for (std::size_t i = 0; i < n; ++i) fn(i);
      return;
    }
    arena_->execute([&] {
      tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n), [&](const tbb::blocked_range<std::size_t>& r) {
        for (std::size_t i = r.begin(); i != r.end(); ++i) fn(i);
      });
    });
  }

 private:
  int workers_;
  std::shared_ptr<tbb::task_arena> arena_;
};

}  // namespace abd
