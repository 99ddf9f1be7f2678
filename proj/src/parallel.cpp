#include "deconvband/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace deconvband {

namespace {

std::atomic<std::size_t> g_max_threads{ 0 };
thread_local bool t_inside_parallel = false;

std::size_t default_threads()
{
  if (const char* env = std::getenv("DECONVBAND_THREADS")) {
    try {
      const long value = std::stol(env);
      if (value > 0)
        return static_cast<std::size_t>(value);
    } catch (const std::exception&) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

} // namespace

std::size_t set_max_threads(std::size_t threads)
{
  return g_max_threads.exchange(threads);
}

std::size_t max_threads()
{
  const std::size_t configured = g_max_threads.load();
  return configured > 0 ? configured : default_threads();
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body)
{
  const std::size_t workers = std::min(max_threads(), count);
  if (workers <= 1 || t_inside_parallel) {
    for (std::size_t i = 0; i < count; ++i)
      body(i);
    return;
  }

  std::atomic<std::size_t> next{ 0 };
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    t_inside_parallel = true;
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count)
        break;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure)
          failure = std::current_exception();
        next.store(count);
      }
    }
    t_inside_parallel = false;
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w)
    pool.emplace_back(work);
  work();
  for (auto& thread : pool)
    thread.join();
  if (failure)
    std::rethrow_exception(failure);
}

} // namespace deconvband
