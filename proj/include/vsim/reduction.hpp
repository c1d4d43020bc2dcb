// Deterministic parallel reduction. Ensemble averages must be bit-identical
// for any worker count and across reruns, so floating-point sums are formed
// on a fixed binary tree over the realization index: leaves are grouped into
// fixed-size chunks, each chunk is summed by a binary-counter pairwise
// reducer, and the chunk sums are folded by the same tree in chunk order.
// Workers only decide *who* computes a chunk, never the summation order.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

namespace vsim {

// Binary-counter pairwise summation: slot k holds the sum of an aligned run
// of 2^k consecutive leaves. Earlier leaves always sit on the left of +=.
template <class T>
class PairwiseReducer {
 public:
  void push(T v) {
    for (std::size_t level = 0;; ++level) {
      if (level == slots_.size()) {
        slots_.emplace_back(std::move(v));
        break;
      }
      if (!slots_[level]) {
        slots_[level] = std::move(v);
        break;
      }
      T merged = std::move(*slots_[level]);
      slots_[level].reset();
      merged += v;  // earlier block += later block
      v = std::move(merged);
    }
  }

  bool empty() const {
    for (const auto& s : slots_)
      if (s) return false;
    return true;
  }

  // Fold leftovers highest-level (earliest leaves) first.
  T finish() {
    std::optional<T> acc;
    for (auto it = slots_.rbegin(); it != slots_.rend(); ++it) {
      if (!*it) continue;
      if (!acc)
        acc = std::move(**it);
      else
        *acc += **it;
    }
    slots_.clear();
    return std::move(*acc);
  }

 private:
  std::vector<std::optional<T>> slots_;
};

inline int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Reduce leaf(0) + leaf(1) + ... + leaf(n-1) over `workers` threads.
// `leaf` must be safe to call concurrently for distinct indices.
template <class T, class LeafFn>
T chunked_reduce(std::uint64_t n, int workers, LeafFn&& leaf) {
  if (n == 0) throw std::invalid_argument("chunked_reduce: empty reduction");
  constexpr std::uint64_t kChunk = 32;  // part of the reduction definition; never tune
  const std::uint64_t n_chunks = (n + kChunk - 1) / kChunk;
  std::vector<std::optional<T>> chunk_sums(n_chunks);

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto run = [&] {
    for (;;) {
      const std::uint64_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      try {
        PairwiseReducer<T> red;
        const std::uint64_t lo = c * kChunk;
        const std::uint64_t hi = std::min(n, lo + kChunk);
        for (std::uint64_t k = lo; k < hi; ++k) red.push(leaf(k));
        chunk_sums[c] = red.finish();
      } catch (...) {
        std::scoped_lock lk(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(n_chunks);  // stop handing out work
        return;
      }
    }
  };

  const int nw = std::min<std::uint64_t>(resolve_workers(workers), n_chunks ? n_chunks : 1);
  std::vector<std::thread> pool;
  for (int w = 1; w < nw; ++w) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);

  PairwiseReducer<T> top;
  for (auto& cs : chunk_sums) top.push(std::move(*cs));
  return top.finish();
}

}  // namespace vsim
