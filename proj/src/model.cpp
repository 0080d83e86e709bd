#include "asgd/model.hpp"

#include <cmath>
#include <stdexcept>

namespace asgd {

ModelState apply_step(ModelState w, const Mat& delta, double epsilon) {
  require_shape(w.w(), delta, "apply_step");
  if (!(epsilon > 0.0)) throw std::invalid_argument("apply_step: epsilon must be > 0");

  Mat& m = w.w();
  double acc = 0.0;
  for (std::size_t i = 0; i < m.a.size(); ++i) {
    m.a[i] -= epsilon * delta.a[i];
    acc += m.a[i];
  }
  // A finite sum can only hide non-finite elements by overflowing, in which
  // case it is itself non-finite; the precise scan confirms before throwing.
  if (!std::isfinite(acc) && !m.all_finite())
    throw std::invalid_argument("apply_step: update produced a non-finite parameter");

  w.bump_version();
  return w;
}

}  // namespace asgd
