// Independent brute-force oracles for the derived expected values. These
// deliberately share no code with the library kernels they check.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "asgd/dataset.hpp"
#include "asgd/mat.hpp"
#include "asgd/rng.hpp"

namespace oracle {

inline double sq_dist(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t j = 0; j < d; ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return s;
}

inline std::size_t nearest(const double* x, const asgd::Mat& w) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < w.rows; ++k) {
    const double d2 = sq_dist(x, w.row(k), w.cols);
    if (d2 < best_d) {
      best_d = d2;
      best = k;
    }
  }
  return best;
}

// Eq.-style double loop: half squared distance to the nearest prototype.
inline double quantization(const asgd::Mat& w, const asgd::Samples& X) {
  double total = 0.0;
  for (std::size_t i = 0; i < X.count; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < w.rows; ++k) {
      const double d2 = sq_dist(X.data + i * X.dim, w.row(k), w.cols);
      if (d2 < best) best = d2;
    }
    total += 0.5 * best;
  }
  return total;
}

// (1/m') * sum of single-sample deltas grouped by assignment.
inline asgd::Mat batch_delta(const asgd::Mat& w, const asgd::Samples& X) {
  asgd::Mat delta(w.rows, w.cols);
  for (std::size_t i = 0; i < X.count; ++i) {
    const double* x = X.data + i * X.dim;
    const std::size_t s = nearest(x, w);
    for (std::size_t j = 0; j < w.cols; ++j) delta.at(s, j) += w.at(s, j) - x[j];
  }
  for (double& v : delta.a) v /= static_cast<double>(X.count);
  return delta;
}

// Long-double accumulation, summed per state then divided once.
inline asgd::Mat mean_state(const std::vector<asgd::Mat>& states) {
  asgd::Mat out(states.front().rows, states.front().cols);
  for (std::size_t i = 0; i < out.a.size(); ++i) {
    long double acc = 0.0L;
    for (const asgd::Mat& s : states) acc += s.a[i];
    out.a[i] = static_cast<double>(acc / static_cast<long double>(states.size()));
  }
  return out;
}

inline double gt_error(const asgd::Mat& w, const asgd::Mat& truth) {
  double total = 0.0;
  for (std::size_t t = 0; t < truth.rows; ++t) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < w.rows; ++p) {
      const double d = std::sqrt(sq_dist(truth.row(t), w.row(p), w.cols));
      if (d < best) best = d;
    }
    total += best;
  }
  return total;
}

// Random k x d matrix with entries uniform in [lo, hi).
inline asgd::Mat random_mat(std::size_t k, std::size_t d, asgd::RandomStream& rng, double lo = -1.0,
                            double hi = 1.0) {
  asgd::Mat m(k, d);
  for (double& v : m.a) v = lo + (hi - lo) * rng.next_double();
  return m;
}

inline std::vector<double> random_rows(std::size_t n, std::size_t d, asgd::RandomStream& rng,
                                       double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n * d);
  for (double& x : v) x = lo + (hi - lo) * rng.next_double();
  return v;
}

}  // namespace oracle
