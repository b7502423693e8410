#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>

#include "ridgepath/dense_matrix.hpp"
#include "ridgepath/errors.hpp"

namespace ridgepath {

/// n log-spaced points from lo to hi inclusive; the endpoints are exact.
inline Vector log_space(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > 0.0)) throw InvalidArgument("log_space needs positive endpoints");
  if (n == 0) return {};
  if (n == 1) return {lo};
  Vector v(n);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  v.front() = lo;
  v.back() = hi;
  return v;
}

/// n evenly spaced points from lo to hi inclusive.
inline Vector lin_space(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {lo};
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  v.back() = hi;
  return v;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  void restart() { start_ = std::chrono::steady_clock::now(); }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace ridgepath
