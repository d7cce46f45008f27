#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace roughtomo {

struct Vec2 {
  double x = 0.0, y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  // Counterclockwise perpendicular.
  Vec2 perp() const { return {-y, x}; }
  double norm() const { return std::hypot(x, y); }
};

inline Vec2 unit_vec(double angle) { return {std::cos(angle), std::sin(angle)}; }

// Kahan-Babuska-Neumaier compensated accumulator.  The reconstruction double
// sum has O(eps^-2) terms with heavy cancellation; naive accumulation would
// pollute the eps-scaling measurement.
struct NeumaierSum {
  double s = 0.0, c = 0.0;
  void add(double v) {
    double t = s + v;
    if (std::abs(s) >= std::abs(v))
      c += (s - t) + v;
    else
      c += (v - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

// splitmix64: the documented mixing function behind PiecewiseConstantLattice.
inline uint64_t splitmix64(uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Uniform double in [0,1) from a (seed, index) pair; index may be negative.
inline double seeded_uniform(uint64_t seed, int64_t index) {
  uint64_t z = splitmix64(seed ^ splitmix64(static_cast<uint64_t>(index)));
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

// FNV-1a 64-bit, used for content checksums in manifests.
inline uint64_t fnv1a(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

// Deterministic parallel map over [0, n): contiguous chunks, results written
// to caller-owned disjoint slots, so output is identical for any thread count.
inline void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn) {
  if (threads <= 1 || n < 2) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  size_t nt = std::min<size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (size_t t = 0; t < nt; ++t) {
    pool.emplace_back([&, t]() {
      size_t lo = n * t / nt, hi = n * (t + 1) / nt;
      for (size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::string format_g17(double v);

}  // namespace roughtomo
