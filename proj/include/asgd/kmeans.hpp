#pragma once

#include <cstddef>
#include <span>

#include "asgd/dataset.hpp"
#include "asgd/mat.hpp"
#include "asgd/model.hpp"

namespace asgd {

/// Index of the closest prototype under squared Euclidean distance, ties
/// broken by the lowest index.
std::size_t assign(std::span<const double> x, const Mat& w);

/// Quantization error E(w) = sum_i 1/2 * ||x_i - w_{s_i(w)}||^2.
///
/// The default entry point runs the blocked kernel (OpenMP across fixed-size
/// blocks when the range is large). Block boundaries depend only on the
/// sample count, and partial sums combine in block order, so the result is
/// bitwise identical for any thread count. Throws on an empty range.
double quantization_error(const Mat& w, const Samples& X);

/// Plain single-loop reference implementation, kept for testing and for the
/// kernel benchmark. May differ from the blocked kernel in the last few ulps
/// (different summation order).
double quantization_error_serial(const Mat& w, const Samples& X);

/// Online descent delta: zero everywhere except row s_x(w), which holds
/// w_s - x (the partial derivative of 1/2*||x - w_s||^2).
void online_step(const Mat& w, std::span<const double> x, Mat& delta);
Mat online_step(const Mat& w, std::span<const double> x);

/// Batch descent delta: row k holds (1/m') * sum_{i: s_i(w)=k} (w_k - x_i)
/// with m' = |X|; rows with no assigned samples stay zero. Blocked/OpenMP
/// like quantization_error, same determinism guarantee.
void batch_step(const Mat& w, const Samples& X, Mat& delta);
Mat batch_step(const Mat& w, const Samples& X);

/// Serial reference for batch_step (per-sample accumulation order).
void batch_step_serial(const Mat& w, const Samples& X, Mat& delta);

/// GradientObjective adapter over the kernels above.
class KMeansObjective final : public GradientObjective {
 public:
  double loss(const Mat& w, const Samples& X) const override { return quantization_error(w, X); }
  void descent_step(const Mat& w, std::span<const double> x, Mat& delta) const override {
    online_step(w, x, delta);
  }
  void batch_descent_step(const Mat& w, const Samples& X, Mat& delta) const override {
    batch_step(w, X, delta);
  }
};

}  // namespace asgd
