#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "asgd/mat.hpp"

namespace asgd {

/// Contiguous row-major view over `count` samples of dimension `dim`.
struct Samples {
  const double* data = nullptr;
  std::size_t count = 0;
  std::size_t dim = 0;

  std::span<const double> row(std::size_t i) const { return {data + i * dim, dim}; }

  Samples slice(std::size_t offset, std::size_t n) const {
    if (offset + n > count) throw std::out_of_range("Samples::slice out of range");
    return {data + offset * dim, n, dim};
  }

  bool empty() const { return count == 0; }
};

/// Raised when a dataset file is malformed (bad magic, version, truncation).
struct DatasetFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// m samples of dimension d plus optional ground-truth centers from the
/// generator. Immutable after construction; shared read-only across workers.
///
/// On-disk layout (all little-endian):
///   "ASGD"  u32 version=1  u64 m  u32 d  u32 k  u32 flags (bit0: truth present)
///   m*d float64 samples row-major, then k*d float64 truth centers if present.
class Dataset {
 public:
  Dataset(std::size_t dim, std::vector<double> samples, std::optional<Mat> ground_truth = std::nullopt);

  static Dataset load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  Samples samples() const { return {data_.data(), count_, dim_}; }
  std::size_t size() const { return count_; }
  std::size_t dim() const { return dim_; }
  const std::optional<Mat>& ground_truth() const { return truth_; }

 private:
  std::size_t dim_ = 0;
  std::size_t count_ = 0;
  std::vector<double> data_;
  std::optional<Mat> truth_;
};

}  // namespace asgd
