#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>

#include "asgd/mat.hpp"

namespace asgd {

struct Samples;  // dataset.hpp

/// Constant learning rate. The algorithms here assume a fixed step size; no
/// decay schedules.
struct StepSchedule {
  double epsilon;

  explicit StepSchedule(double eps) : epsilon(eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("StepSchedule: epsilon must be > 0");
  }
};

/// The model parameters w: k prototype rows of dimension d, plus a version
/// counter that the owning worker bumps on every local update. Treated as a
/// value: copies are safe to hand to other threads.
class ModelState {
 public:
  ModelState(std::size_t k, std::size_t d) : w_(k, d) { validate_shape(); }

  explicit ModelState(Mat w, std::uint64_t version = 0) : w_(std::move(w)), version_(version) {
    validate_shape();
    if (!w_.all_finite()) throw std::invalid_argument("ModelState: non-finite parameter");
  }

  std::size_t prototypes() const { return w_.rows; }
  std::size_t dim() const { return w_.cols; }
  std::uint64_t version() const { return version_; }

  const Mat& w() const { return w_; }
  Mat& w() { return w_; }

  void bump_version() { ++version_; }

 private:
  void validate_shape() const {
    if (w_.rows < 1 || w_.cols < 1) throw std::invalid_argument("ModelState: k and d must be >= 1");
  }

  Mat w_;
  std::uint64_t version_ = 0;
};

/// One gradient step: w <- w - epsilon * delta, version incremented. delta is
/// the true partial derivative of the loss (see GradientObjective); the
/// subtraction here is the single place the sign convention is applied.
ModelState apply_step(ModelState w, const Mat& delta, double epsilon);

/// Loss/gradient contract shared by every optimizer. descent_step and
/// batch_descent_step return the partial derivative d/dw of the loss (not its
/// negation), shaped exactly like the model.
class GradientObjective {
 public:
  virtual ~GradientObjective() = default;

  virtual double loss(const Mat& w, const Samples& X) const = 0;
  virtual void descent_step(const Mat& w, std::span<const double> x, Mat& delta) const = 0;
  virtual void batch_descent_step(const Mat& w, const Samples& X, Mat& delta) const = 0;
};

}  // namespace asgd
