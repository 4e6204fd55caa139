// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef NETRED_SRC_PARALLEL_HPP
#define NETRED_SRC_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace netred::detail
{

// Runs fn(i) for i in [0, count) on up to `workers` threads.  The first
// exception thrown by any task is rethrown after all threads join.
template <typename F>
void parallel_for(std::size_t count, std::size_t workers, F &&fn)
{
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers <= 1)
  {
    for (std::size_t i = 0; i < count; ++i)
    {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;)
    {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load())
      {
        return;
      }
      try
      {
        fn(i);
      }
      catch (...)
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error)
        {
          error = std::current_exception();
        }
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w)
  {
    pool.emplace_back(body);
  }
  body();
  for (auto &t : pool)
  {
    t.join();
  }
  if (error)
  {
    std::rethrow_exception(error);
  }
}

}  // namespace netred::detail

#endif  // NETRED_SRC_PARALLEL_HPP
