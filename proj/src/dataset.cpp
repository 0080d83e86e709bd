#include "asgd/dataset.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace asgd {

namespace {

constexpr char kMagic[4] = {'A', 'S', 'G', 'D'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::uint32_t kFlagGroundTruth = 1u;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

struct Reader {
  std::ifstream in;
  std::filesystem::path path;

  explicit Reader(const std::filesystem::path& p) : in(p, std::ios::binary), path(p) {
    if (!in) throw DatasetFormatError("cannot open dataset file: " + p.string());
  }

  void bytes(char* dst, std::size_t n) {
    in.read(dst, static_cast<std::streamsize>(n));
    if (in.gcount() != static_cast<std::streamsize>(n))
      throw DatasetFormatError("truncated dataset file: " + path.string());
  }

  std::uint32_t u32() {
    unsigned char b[4];
    bytes(reinterpret_cast<char*>(b), 4);
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
           std::uint32_t(b[3]) << 24;
  }

  std::uint64_t u64() {
    std::uint64_t v = 0;
    unsigned char b[8];
    bytes(reinterpret_cast<char*>(b), 8);
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }

  void f64_array(double* dst, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = std::bit_cast<double>(u64());
  }
};

}  // namespace

Dataset::Dataset(std::size_t dim, std::vector<double> samples, std::optional<Mat> ground_truth)
    : dim_(dim), data_(std::move(samples)), truth_(std::move(ground_truth)) {
  if (dim_ == 0) throw std::invalid_argument("Dataset: dimension must be >= 1");
  if (data_.empty() || data_.size() % dim_ != 0)
    throw std::invalid_argument("Dataset: sample buffer size not a multiple of the dimension");
  count_ = data_.size() / dim_;
  if (truth_ && truth_->cols != dim_)
    throw std::invalid_argument("Dataset: ground-truth dimension mismatch");
}

Dataset Dataset::load(const std::filesystem::path& path) {
  Reader r(path);

  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw DatasetFormatError("bad magic bytes (not an ASGD dataset): " + path.string());
  const std::uint32_t version = r.u32();
  if (version != kFormatVersion)
    throw DatasetFormatError("unsupported dataset format version " + std::to_string(version) +
                             ": " + path.string());

  const std::uint64_t m = r.u64();
  const std::uint32_t d = r.u32();
  const std::uint32_t k = r.u32();
  const std::uint32_t flags = r.u32();
  if (m == 0 || d == 0) throw DatasetFormatError("empty dataset: " + path.string());

  std::vector<double> samples(m * d);
  r.f64_array(samples.data(), samples.size());

  std::optional<Mat> truth;
  if (flags & kFlagGroundTruth) {
    Mat t(k, d);
    r.f64_array(t.a.data(), t.a.size());
    truth = std::move(t);
  }
  return Dataset(d, std::move(samples), std::move(truth));
}

void Dataset::save(const std::filesystem::path& path) const {
  std::string out;
  out.reserve(28 + data_.size() * 8 + (truth_ ? truth_->size() * 8 : 0));
  out.append(kMagic, 4);
  put_u32(out, kFormatVersion);
  put_u64(out, count_);
  put_u32(out, static_cast<std::uint32_t>(dim_));
  put_u32(out, static_cast<std::uint32_t>(truth_ ? truth_->rows : 0));
  put_u32(out, truth_ ? kFlagGroundTruth : 0);
  for (double v : data_) put_f64(out, v);
  if (truth_)
    for (double v : truth_->a) put_f64(out, v);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write dataset file: " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace asgd
