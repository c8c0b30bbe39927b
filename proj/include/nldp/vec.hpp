#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "nldp/error.hpp"

namespace nldp {

inline double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorKind::kInvalidInput, "dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

inline void scale_in_place(std::vector<double>& v, double c) {
  for (double& x : v) x *= c;
}

inline std::vector<double> scaled(std::span<const double> v, double c) {
  std::vector<double> out(v.begin(), v.end());
  scale_in_place(out, c);
  return out;
}

// a += c * b
inline void axpy(std::vector<double>& a, double c, std::span<const double> b) {
  require(a.size() == b.size(), ErrorKind::kInvalidInput, "axpy: dimension mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += c * b[i];
}

inline std::vector<double> unit_vector(std::size_t d, std::size_t axis = 0) {
  std::vector<double> v(d, 0.0);
  v.at(axis) = 1.0;
  return v;
}

inline bool all_finite(std::span<const double> v) {
  for (double c : v)
    if (!std::isfinite(c)) return false;
  return true;
}

}  // namespace nldp
