#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace loopgas {

// Signed log-magnitude value; sign 0 encodes an exact zero.
struct LogValue {
  double log_abs = 0.0;
  int sign = 1;

  double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }

  static LogValue zero() { return {-std::numeric_limits<double>::infinity(), 0}; }
};

// Neumaier-compensated accumulator; exact-oracle sums run over up to 2^25 terms.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Stable per-task seed: mixes a base seed with a task index, so sweeps assign
// distinct, reproducible streams regardless of execution order.
inline uint64_t derive_seed(uint64_t base, uint64_t task_index) {
  uint64_t s = base ^ (0x9e3779b97f4a7c15ull * (task_index + 1));
  splitmix64(s);
  return splitmix64(s);
}

inline std::mt19937_64 make_rng(uint64_t seed) {
  std::seed_seq seq{uint32_t(seed), uint32_t(seed >> 32), 0x5eedu, 0xc0ffeeu};
  return std::mt19937_64(seq);
}

// Union-find over a fixed vertex range, reusable across many configs.
struct UnionFind {
  std::vector<int> parent;

  explicit UnionFind(int n) : parent(n, -1) {}

  void reset(const std::vector<int>& touched) {
    for (int v : touched) parent[v] = -1;
  }
  int find(int v) {
    int r = v;
    while (parent[r] >= 0) r = parent[r];
    while (parent[v] >= 0) {
      int next = parent[v];
      parent[v] = r;
      v = next;
    }
    return r;
  }
  // returns true if a merge happened
  bool unite(int a, int b) {
    int ra = find(a), rb = find(b);
    if (ra == rb) return false;
    parent[ra] = rb;
    return true;
  }
};

}  // namespace loopgas
