#include "asgd/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string_view>

namespace asgd {

namespace {

constexpr std::string_view kHeader = "touched_samples,wall_nanos,objective,gt_error";

void append_real(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void append_u64(std::string& out, std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%llu", static_cast<unsigned long long>(v));
  out += buf;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == sep) {
      fields.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

std::uint64_t parse_u64(std::string_view s) {
  return std::strtoull(std::string(s).c_str(), nullptr, 10);
}

double parse_real(std::string_view s) { return std::strtod(std::string(s).c_str(), nullptr); }

}  // namespace

void RunMetrics::record(MetricPoint p) {
  if (!points_.empty()) {
    const MetricPoint& last = points_.back();
    if (p.touched_samples <= last.touched_samples)
      throw std::invalid_argument("RunMetrics::record: touched_samples must increase strictly");
    if (p.wall_nanos < last.wall_nanos)
      throw std::invalid_argument("RunMetrics::record: wall_nanos must not decrease");
  }
  points_.push_back(std::move(p));
}

std::string RunMetrics::to_csv() const {
  std::string out(kHeader);
  out += '\n';
  for (const MetricPoint& p : points_) {
    append_u64(out, p.touched_samples);
    out += ',';
    append_u64(out, p.wall_nanos);
    out += ',';
    append_real(out, p.objective);
    out += ',';
    if (p.gt_error) append_real(out, *p.gt_error);
    out += '\n';
  }
  return out;
}

std::vector<MetricPoint> RunMetrics::parse_csv(const std::string& text) {
  std::vector<MetricPoint> points;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    if (first) {
      if (line != kHeader) throw std::invalid_argument("metrics CSV: unexpected header");
      first = false;
      continue;
    }
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 4) throw std::invalid_argument("metrics CSV: malformed row");
    MetricPoint p;
    p.touched_samples = parse_u64(fields[0]);
    p.wall_nanos = parse_u64(fields[1]);
    p.objective = parse_real(fields[2]);
    if (!fields[3].empty()) p.gt_error = parse_real(fields[3]);
    points.push_back(p);
  }
  if (first) throw std::invalid_argument("metrics CSV: missing header");
  return points;
}

std::vector<AggregatePoint> aggregate_runs(std::span<const RunMetrics> runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate_runs: no runs");
  const std::size_t npts = runs[0].points().size();
  for (const RunMetrics& r : runs)
    if (r.points().size() != npts)
      throw std::invalid_argument("aggregate_runs: repetition grids differ in length");

  std::vector<AggregatePoint> out(npts);
  const double n = static_cast<double>(runs.size());
  for (std::size_t i = 0; i < npts; ++i) {
    AggregatePoint& a = out[i];
    a.touched_samples = runs[0].points()[i].touched_samples;
    bool gt_everywhere = true;
    for (const RunMetrics& r : runs) {
      const MetricPoint& p = r.points()[i];
      if (p.touched_samples != a.touched_samples)
        throw std::invalid_argument("aggregate_runs: touched-samples grids differ");
      a.wall_mean += static_cast<double>(p.wall_nanos);
      a.objective_mean += p.objective;
      gt_everywhere &= p.gt_error.has_value();
    }
    a.wall_mean /= n;
    a.objective_mean /= n;
    double gt_mean = 0.0;
    if (gt_everywhere) {
      for (const RunMetrics& r : runs) gt_mean += *r.points()[i].gt_error;
      gt_mean /= n;
      a.gt_mean = gt_mean;
    }
    if (runs.size() > 1) {
      double wv = 0.0, ov = 0.0, gv = 0.0;
      for (const RunMetrics& r : runs) {
        const MetricPoint& p = r.points()[i];
        const double dw = static_cast<double>(p.wall_nanos) - a.wall_mean;
        const double dobj = p.objective - a.objective_mean;
        wv += dw * dw;
        ov += dobj * dobj;
        if (gt_everywhere) {
          const double dg = *p.gt_error - gt_mean;
          gv += dg * dg;
        }
      }
      a.wall_var = wv / (n - 1.0);
      a.objective_var = ov / (n - 1.0);
      if (gt_everywhere) a.gt_var = gv / (n - 1.0);
    } else if (gt_everywhere) {
      a.gt_var = 0.0;
    }
  }
  return out;
}

std::string aggregate_csv(std::span<const AggregatePoint> points) {
  std::string out =
      "touched_samples,wall_nanos_mean,wall_nanos_var,objective_mean,objective_var,gt_error_mean,"
      "gt_error_var\n";
  for (const AggregatePoint& a : points) {
    append_u64(out, a.touched_samples);
    out += ',';
    append_real(out, a.wall_mean);
    out += ',';
    append_real(out, a.wall_var);
    out += ',';
    append_real(out, a.objective_mean);
    out += ',';
    append_real(out, a.objective_var);
    out += ',';
    if (a.gt_mean) append_real(out, *a.gt_mean);
    out += ',';
    if (a.gt_var) append_real(out, *a.gt_var);
    out += '\n';
  }
  return out;
}

}  // namespace asgd
