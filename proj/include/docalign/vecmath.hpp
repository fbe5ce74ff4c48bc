#ifndef DOCALIGN_VECMATH_HPP
#define DOCALIGN_VECMATH_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace docalign {

inline double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += double(a[i]) * double(b[i]);
  return s;
}

inline double l2_norm(std::span<const float> v) {
  return std::sqrt(dot(v, v));
}

// Cosine similarity; defined as 0 when either vector has (near-)zero norm.
inline double cosine(std::span<const float> a, std::span<const float> b) {
  double na = l2_norm(a);
  double nb = l2_norm(b);
  if (na <= 1e-12 || nb <= 1e-12) return 0.0;
  return dot(a, b) / (na * nb);
}

// v / ||v||2; vectors with norm <= 1e-12 pass through unchanged so that
// degenerate sub-vectors never abort the pipeline.
inline void unit_normalize_inplace(std::span<float> v) {
  double n = l2_norm(v);
  if (n <= 1e-12) return;
  for (float& x : v) x = static_cast<float>(x / n);
}

inline std::vector<float> unit_normalize(std::span<const float> v) {
  std::vector<float> out(v.begin(), v.end());
  unit_normalize_inplace(out);
  return out;
}

}  // namespace docalign

#endif  // DOCALIGN_VECMATH_HPP
