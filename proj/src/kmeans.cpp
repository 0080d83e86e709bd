#include "asgd/kmeans.hpp"

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace asgd {

namespace {

// Fixed decomposition of a sample range into at most kMaxBlocks blocks of at
// least kBlockSize samples. Boundaries depend only on the count, never on the
// thread count, so parallel and serial execution sum in the same order.
constexpr std::size_t kBlockSize = 4096;
constexpr std::size_t kMaxBlocks = 64;
constexpr std::size_t kParallelThreshold = 16384;

std::size_t block_count(std::size_t n) {
  const std::size_t by_size = (n + kBlockSize - 1) / kBlockSize;
  return std::max<std::size_t>(1, std::min(by_size, kMaxBlocks));
}

struct BlockRange {
  std::size_t begin, end;
};

BlockRange block_range(std::size_t n, std::size_t blocks, std::size_t b) {
  const std::size_t base = n / blocks;
  const std::size_t rem = n % blocks;
  const std::size_t begin = b * base + std::min(b, rem);
  return {begin, begin + base + (b < rem ? 1 : 0)};
}

double min_squared_distance(std::span<const double> x, const Mat& w) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < w.rows; ++k) {
    const double d2 = squared_distance(x, w.row(k));
    if (d2 < best) best = d2;
  }
  return best;
}

}  // namespace

std::size_t assign(std::span<const double> x, const Mat& w) {
  std::size_t best = 0;
  double best_d2 = squared_distance(x, w.row(0));
  for (std::size_t k = 1; k < w.rows; ++k) {
    const double d2 = squared_distance(x, w.row(k));
    if (d2 < best_d2) {  // strict: ties keep the lowest index
      best_d2 = d2;
      best = k;
    }
  }
  return best;
}

double quantization_error(const Mat& w, const Samples& X) {
  if (X.empty()) throw std::invalid_argument("quantization_error: empty sample range");
  if (X.dim != w.cols) throw std::invalid_argument("quantization_error: dimension mismatch");

  const std::size_t blocks = block_count(X.count);
  std::vector<double> partial(blocks, 0.0);

  const bool parallel = X.count >= kParallelThreshold && blocks > 1;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto [begin, end] = block_range(X.count, blocks, b);
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += 0.5 * min_squared_distance(X.row(i), w);
    partial[b] = s;
  }
  (void)parallel;

  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

double quantization_error_serial(const Mat& w, const Samples& X) {
  if (X.empty()) throw std::invalid_argument("quantization_error: empty sample range");
  if (X.dim != w.cols) throw std::invalid_argument("quantization_error: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < X.count; ++i) s += 0.5 * min_squared_distance(X.row(i), w);
  return s;
}

void online_step(const Mat& w, std::span<const double> x, Mat& delta) {
  if (x.size() != w.cols) throw std::invalid_argument("online_step: dimension mismatch");
  delta.rows = w.rows;
  delta.cols = w.cols;
  delta.a.assign(w.size(), 0.0);
  const std::size_t s = assign(x, w);
  double* out = delta.row(s);
  const double* wr = w.row(s);
  for (std::size_t j = 0; j < w.cols; ++j) out[j] = wr[j] - x[j];
}

Mat online_step(const Mat& w, std::span<const double> x) {
  Mat delta;
  online_step(w, x, delta);
  return delta;
}

void batch_step(const Mat& w, const Samples& X, Mat& delta) {
  if (X.empty()) throw std::invalid_argument("batch_step: empty sample range");
  if (X.dim != w.cols) throw std::invalid_argument("batch_step: dimension mismatch");

  const std::size_t k = w.rows, d = w.cols;
  const std::size_t blocks = block_count(X.count);
  std::vector<double> sums(blocks * k * d, 0.0);
  std::vector<std::uint64_t> counts(blocks * k, 0);

  const bool parallel = X.count >= kParallelThreshold && blocks > 1;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto [begin, end] = block_range(X.count, blocks, b);
    double* bsum = sums.data() + b * k * d;
    std::uint64_t* bcount = counts.data() + b * k;
    for (std::size_t i = begin; i < end; ++i) {
      const auto x = X.row(i);
      const std::size_t s = assign(x, w);
      double* row = bsum + s * d;
      for (std::size_t j = 0; j < d; ++j) row[j] += x[j];
      ++bcount[s];
    }
  }
  (void)parallel;

  // Combine blocks in index order, then form (count*w - sum)/m' per row.
  for (std::size_t b = 1; b < blocks; ++b) {
    double* dst = sums.data();
    const double* src = sums.data() + b * k * d;
    for (std::size_t i = 0; i < k * d; ++i) dst[i] += src[i];
    for (std::size_t i = 0; i < k; ++i) counts[i] += counts[b * k + i];
  }

  delta.rows = k;
  delta.cols = d;
  delta.a.assign(k * d, 0.0);
  const double inv_m = 1.0 / static_cast<double>(X.count);
  for (std::size_t p = 0; p < k; ++p) {
    if (counts[p] == 0) continue;  // unassigned prototype: zero row
    const double c = static_cast<double>(counts[p]);
    const double* wr = w.row(p);
    const double* sr = sums.data() + p * d;
    double* out = delta.row(p);
    for (std::size_t j = 0; j < d; ++j) out[j] = (c * wr[j] - sr[j]) * inv_m;
  }
}

Mat batch_step(const Mat& w, const Samples& X) {
  Mat delta;
  batch_step(w, X, delta);
  return delta;
}

void batch_step_serial(const Mat& w, const Samples& X, Mat& delta) {
  if (X.empty()) throw std::invalid_argument("batch_step: empty sample range");
  if (X.dim != w.cols) throw std::invalid_argument("batch_step: dimension mismatch");

  delta.rows = w.rows;
  delta.cols = w.cols;
  delta.a.assign(w.size(), 0.0);
  for (std::size_t i = 0; i < X.count; ++i) {
    const auto x = X.row(i);
    const std::size_t s = assign(x, w);
    const double* wr = w.row(s);
    double* out = delta.row(s);
    for (std::size_t j = 0; j < w.cols; ++j) out[j] += wr[j] - x[j];
  }
  const double inv_m = 1.0 / static_cast<double>(X.count);
  for (double& v : delta.a) v *= inv_m;
}

}  // namespace asgd
