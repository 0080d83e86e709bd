#pragma once

#include <cmath>
#include <cstddef>
#include <cstring>
#include <span>
#include <stdexcept>
#include <vector>

namespace asgd {

/// Dense row-major matrix of doubles. Used for model states (k prototypes
/// x d dimensions), descent deltas and message payloads.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

  double* row(std::size_t i) { return a.data() + i * cols; }
  const double* row(std::size_t i) const { return a.data() + i * cols; }
  std::span<double> row_span(std::size_t i) { return {row(i), cols}; }
  std::span<const double> row_span(std::size_t i) const { return {row(i), cols}; }

  double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

  std::size_t size() const { return a.size(); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

  void fill(double v) { std::fill(a.begin(), a.end(), v); }

  bool all_finite() const {
    for (double v : a)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline bool bitwise_equal(const Mat& x, const Mat& y) {
  if (!x.same_shape(y)) return false;
  return x.a.empty() || std::memcmp(x.a.data(), y.a.data(), x.a.size() * sizeof(double)) == 0;
}

inline double squared_distance(std::span<const double> x, const double* y) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double diff = x[j] - y[j];
    s += diff * diff;
  }
  return s;
}

inline void require_shape(const Mat& x, const Mat& y, const char* what) {
  if (!x.same_shape(y)) throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

}  // namespace asgd
