#include "blpcs/permutation.hpp"

#include "blpcs/errors.hpp"

#include <numeric>

namespace blpcs {

Permutation::Permutation(std::vector<std::size_t> map) : map_(std::move(map)) {
  std::vector<bool> seen(map_.size(), false);
  for (std::size_t v : map_) {
    if (v >= map_.size() || seen[v]) throw ShapeError("permutation map is not a bijection");
    seen[v] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), std::size_t{0});
  return Permutation(std::move(m));
}

bool Permutation::is_identity() const {
  for (std::size_t i = 0; i < map_.size(); ++i)
    if (map_[i] != i) return false;
  return true;
}

Permutation Permutation::inverse() const {
  std::vector<std::size_t> inv(map_.size());
  for (std::size_t i = 0; i < map_.size(); ++i) inv[map_[i]] = i;
  return Permutation(std::move(inv));
}

Permutation Permutation::compose(const Permutation& other) const {
  if (other.size() != size()) throw ShapeError("permutation sizes differ");
  // (P Q x)[i] = (Q x)[map[i]] = x[other.map[map[i]]]
  std::vector<std::size_t> m(size());
  for (std::size_t i = 0; i < size(); ++i) m[i] = other.map_[map_[i]];
  return Permutation(std::move(m));
}

Eigen::VectorXd Permutation::apply(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != size()) throw ShapeError("permutation size mismatch");
  Eigen::VectorXd out(x.size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = x[map_[i]];
  return out;
}

Eigen::VectorXd Permutation::apply_transpose(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != size()) throw ShapeError("permutation size mismatch");
  Eigen::VectorXd out(x.size());
  for (std::size_t i = 0; i < size(); ++i) out[map_[i]] = x[i];
  return out;
}

Eigen::MatrixXd Permutation::to_matrix() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) p(i, static_cast<Eigen::Index>(map_[i])) = 1.0;
  return p;
}

}  // namespace blpcs
