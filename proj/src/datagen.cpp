#include "asgd/datagen.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "asgd/rng.hpp"

namespace asgd {

void GenSpec::validate() const {
  if (clusters < 1) throw std::invalid_argument("gen: k must be >= 1");
  if (samples < clusters) throw std::invalid_argument("gen: m must be >= k");
  if (dim < 1) throw std::invalid_argument("gen: d must be >= 1");
  if (!(min_center_distance > 0.0)) throw std::invalid_argument("gen: min_center_distance must be > 0");
  if (!(cluster_stddev > 0.0)) throw std::invalid_argument("gen: cluster_stddev must be > 0");
  if (center_box < 0.0) throw std::invalid_argument("gen: center_box must be >= 0");
}

Dataset generate(const GenSpec& spec) {
  spec.validate();
  const double box = spec.center_box > 0.0 ? spec.center_box : 10.0 * spec.min_center_distance;
  const double min_d2 = spec.min_center_distance * spec.min_center_distance;

  RandomStream center_rng = seeded_rng(spec.seed, 0);
  Mat centers(spec.clusters, spec.dim);
  constexpr std::size_t kMaxAttemptsPerCenter = 10000;
  for (std::size_t c = 0; c < spec.clusters; ++c) {
    std::size_t attempts = 0;
    for (;;) {
      if (++attempts > kMaxAttemptsPerCenter)
        throw std::runtime_error(
            "gen: could not place centers with the requested minimum distance; "
            "enlarge center_box or reduce k/min_center_distance");
      for (std::size_t j = 0; j < spec.dim; ++j) centers.at(c, j) = center_rng.next_double() * box;
      bool ok = true;
      for (std::size_t p = 0; p < c && ok; ++p)
        ok = squared_distance(centers.row_span(c), centers.row(p)) >= min_d2;
      if (ok) break;
    }
  }

  RandomStream sample_rng = seeded_rng(spec.seed, 1);
  std::vector<double> samples(spec.samples * spec.dim);
  for (std::size_t i = 0; i < spec.samples; ++i) {
    const std::size_t c = static_cast<std::size_t>(sample_rng.next_below(spec.clusters));
    const double* center = centers.row(c);
    double* out = samples.data() + i * spec.dim;
    for (std::size_t j = 0; j < spec.dim; ++j)
      out[j] = center[j] + spec.cluster_stddev * sample_rng.next_gaussian();
  }

  return Dataset(spec.dim, std::move(samples), std::move(centers));
}

double ground_truth_error(const Mat& w, const Mat& truth) {
  if (w.cols != truth.cols) throw std::invalid_argument("ground_truth_error: dimension mismatch");
  double total = 0.0;
  for (std::size_t t = 0; t < truth.rows; ++t) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < w.rows; ++p) {
      const double d2 = squared_distance(truth.row_span(t), w.row(p));
      if (d2 < best) best = d2;
    }
    total += std::sqrt(best);
  }
  return total;
}

}  // namespace asgd
