#pragma once

#include "blpcs/ensembles.hpp"
#include "blpcs/keyrand.hpp"

#include <algorithm>
#include <cstddef>
#include <vector>

namespace testsupport {

using blpcs::DenseMatrix;
using blpcs::RandStream;
using blpcs::Vector;

inline double max_abs(const DenseMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline Vector gaussian_vector(RandStream& s, std::size_t n) {
  Vector v(static_cast<Eigen::Index>(n));
  for (auto& e : v) e = s.next_gaussian();
  return v;
}

inline std::vector<std::size_t> distinct_indices(RandStream& s, std::size_t n, std::size_t k) {
  std::vector<std::size_t> out;
  while (out.size() < k) {
    const auto i = static_cast<std::size_t>(s.next_below(n));
    if (std::find(out.begin(), out.end(), i) == out.end()) out.push_back(i);
  }
  return out;
}

inline Vector sparse_vector(RandStream& s, std::size_t n, std::size_t k) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i : distinct_indices(s, n, k)) {
    double g = s.next_gaussian();
    while (std::abs(g) < 0.1) g = s.next_gaussian();
    v[static_cast<Eigen::Index>(i)] = g;
  }
  return v;
}

inline std::size_t nnz(const Vector& v, double tol) {
  return static_cast<std::size_t>((v.array().abs() > tol).count());
}

}  // namespace testsupport
