#include "genesis/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace genesis {

namespace {
std::atomic<int> g_max_jobs{0};
thread_local bool t_in_worker = false;
}  // namespace

void set_max_jobs(int jobs) { g_max_jobs.store(jobs < 0 ? 0 : jobs); }

int max_jobs() {
  int j = g_max_jobs.load();
  if (j == 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    j = hw == 0 ? 1 : static_cast<int>(hw);
  }
  return j;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t jobs =
      std::min<std::size_t>(t_in_worker ? 1 : static_cast<std::size_t>(max_jobs()),
                            n == 0 ? 1 : n);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    const std::size_t begin = n * w / jobs;
    const std::size_t end = n * (w + 1) / jobs;
    threads.emplace_back([&, begin, end] {
      t_in_worker = true;
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
      t_in_worker = false;
    });
  }
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace genesis
