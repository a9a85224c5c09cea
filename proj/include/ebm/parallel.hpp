#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ebm {

/// 0 means "all hardware threads"; the EBM_THREADS environment variable is not consulted here.
inline std::size_t resolve_threads(std::size_t requested) noexcept {
   if(requested != 0) {
      return requested;
   }
   const unsigned hw = std::thread::hardware_concurrency();
   return hw == 0 ? 1 : hw;
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Work items must write only to
/// their own output slots. The first exception thrown by any item is rethrown.
template<typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn && fn) {
   const std::size_t workers = std::min(resolve_threads(threads), n);
   if(workers <= 1) {
      for(std::size_t i = 0; i < n; ++i) {
         fn(i);
      }
      return;
   }
   std::atomic<std::size_t> next{0};
   std::exception_ptr failure;
   std::mutex failureMutex;
   {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for(std::size_t w = 0; w < workers; ++w) {
         pool.emplace_back([&] {
            for(std::size_t i = next++; i < n; i = next++) {
               try {
                  fn(i);
               } catch(...) {
                  std::lock_guard lock(failureMutex);
                  if(!failure) {
                     failure = std::current_exception();
                  }
               }
            }
         });
      }
   }
   if(failure) {
      std::rethrow_exception(failure);
   }
}

} // namespace ebm
