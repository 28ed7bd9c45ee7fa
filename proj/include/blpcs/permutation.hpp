#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace blpcs {

/// Bijection on {0..n-1}. As a matrix, P has a single 1 at (i, map[i]) in
/// every row i, so (P x)[i] = x[map[i]] and (P^T x)[map[i]] = x[i].
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<std::size_t> map);

  static Permutation identity(std::size_t n);

  std::size_t size() const { return map_.size(); }
  std::size_t operator[](std::size_t i) const { return map_[i]; }
  const std::vector<std::size_t>& map() const { return map_; }
  bool is_identity() const;

  Permutation inverse() const;
  /// (this o other) as matrices: P_this * P_other.
  Permutation compose(const Permutation& other) const;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd to_matrix() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<std::size_t> map_;
};

}  // namespace blpcs
