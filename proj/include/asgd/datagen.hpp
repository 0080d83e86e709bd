#pragma once

#include <cstdint>

#include "asgd/dataset.hpp"
#include "asgd/mat.hpp"

namespace asgd {

/// Parameters for synthetic clustered data: k centers kept pairwise at least
/// min_center_distance apart, m samples drawn from isotropic Gaussians of
/// stddev cluster_stddev around uniformly chosen centers.
struct GenSpec {
  std::size_t samples = 0;            // m
  std::size_t dim = 0;                // d
  std::size_t clusters = 0;           // k
  double min_center_distance = 1.0;
  double cluster_stddev = 0.1;
  std::uint64_t seed = 0;
  double center_box = 0.0;  // side of the sampling cube; 0 = 10 * min_center_distance

  void validate() const;
};

/// Deterministic given the seed. Throws if centers cannot be placed after a
/// bounded number of rejection rounds (box too dense).
Dataset generate(const GenSpec& spec);

/// Sum over truth centers of the Euclidean distance to the nearest prototype
/// of w (truth -> result, nearest-neighbor matching). A relative convergence
/// measure only; invariant under permutations of w's rows.
double ground_truth_error(const Mat& w, const Mat& truth);

}  // namespace asgd
