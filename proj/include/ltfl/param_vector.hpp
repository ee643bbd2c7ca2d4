#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ltfl {

// Flat model parameter block.  Every model maps to one of these; layout is
// the model's business (model.hpp documents it).
using ParamVector = std::vector<double>;

inline void check_same_dim(const ParamVector& a, const ParamVector& b,
                           const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) +
                                ": dimension mismatch");
  }
}

// a += s * b
inline void add_scaled(ParamVector& a, double s, const ParamVector& b) {
  check_same_dim(a, b, "add_scaled");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
}

inline void scale(ParamVector& a, double s) {
  for (double& x : a) x *= s;
}

inline double dot(const ParamVector& a, const ParamVector& b) {
  check_same_dim(a, b, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double squared_norm(const ParamVector& a) { return dot(a, a); }

inline bool all_finite(const ParamVector& a) {
  for (double x : a) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace ltfl
