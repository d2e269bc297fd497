#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "asgd/errors.hpp"

namespace asgd {

// Contiguous, non-overlapping index ranges covering [0, d). Stored as the
// exclusive end offset of every span, so spans[p] = [ends[p-1], ends[p]).
class LayerLayout {
 public:
  LayerLayout() = default;

  static LayerLayout single(std::size_t dim) { return LayerLayout({dim}); }

  explicit LayerLayout(std::vector<std::size_t> span_sizes) {
    if (span_sizes.empty()) throw DimensionMismatch("LayerLayout: at least one span required");
    ends_.reserve(span_sizes.size());
    std::size_t off = 0;
    for (const std::size_t s : span_sizes) {
      if (s == 0) throw DimensionMismatch("LayerLayout: empty span");
      off += s;
      ends_.push_back(off);
    }
  }

  std::size_t dim() const { return ends_.empty() ? 0 : ends_.back(); }
  std::size_t layers() const { return ends_.size(); }
  std::size_t begin_of(std::size_t p) const { return p == 0 ? 0 : ends_[p - 1]; }
  std::size_t end_of(std::size_t p) const { return ends_[p]; }

  bool operator==(const LayerLayout& other) const = default;

 private:
  std::vector<std::size_t> ends_;
};

struct ParamVector {
  std::vector<double> values;
  LayerLayout layout;

  ParamVector() = default;
  ParamVector(std::vector<double> v, LayerLayout l) : values(std::move(v)), layout(std::move(l)) {
    if (values.size() != layout.dim())
      throw DimensionMismatch("ParamVector: layout does not cover values");
  }
  explicit ParamVector(std::vector<double> v)
      : ParamVector(std::move(v), LayerLayout::single(0)) {
    layout = LayerLayout::single(values.size());
  }

  static ParamVector zeros(std::size_t dim) {
    return ParamVector(std::vector<double>(dim, 0.0), LayerLayout::single(dim));
  }
  static ParamVector zeros_like(const ParamVector& other) {
    return ParamVector(std::vector<double>(other.size(), 0.0), other.layout);
  }

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  bool finite() const {
    for (const double x : values)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

inline void check_same_shape(const ParamVector& a, const ParamVector& b, const char* what) {
  if (a.size() != b.size() || !(a.layout == b.layout)) throw DimensionMismatch(what);
}

// result[i] = a[i] + s * b[i]
inline ParamVector scale_add(const ParamVector& a, const ParamVector& b, double s) {
  check_same_shape(a, b, "scale_add: dimension mismatch");
  ParamVector out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += s * b.values[i];
  return out;
}

inline void scale_add_inplace(ParamVector& a, const ParamVector& b, double s) {
  check_same_shape(a, b, "scale_add: dimension mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a.values[i] += s * b.values[i];
}

inline double l2_norm(const ParamVector& v) {
  double acc = 0.0;
  for (const double x : v.values) acc += x * x;
  return std::sqrt(acc);
}

inline double l2_norm_span(const ParamVector& v, std::size_t begin, std::size_t end) {
  double acc = 0.0;
  for (std::size_t i = begin; i < end; ++i) acc += v.values[i] * v.values[i];
  return std::sqrt(acc);
}

// result[i] = num[i] / den[i]; any den[i] <= 0 is an invalid gap denominator
inline ParamVector hadamard_div(const ParamVector& num, const ParamVector& den) {
  check_same_shape(num, den, "hadamard_div: dimension mismatch");
  ParamVector out = num;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(den.values[i] > 0.0)) throw InvalidGap("hadamard_div: non-positive denominator");
    out.values[i] /= den.values[i];
  }
  return out;
}

}  // namespace asgd
