#include "blpcs/solvers.hpp"

#include "blpcs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>

namespace blpcs {

Vector SparseRep::dense() const {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(length));
  for (std::size_t i = 0; i < support.size(); ++i) v[static_cast<Eigen::Index>(support[i])] = values[i];
  return v;
}

SparseRep SparseRep::from_dense(const Vector& v, double tol) {
  SparseRep rep;
  rep.length = static_cast<std::size_t>(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > tol) {
      rep.support.push_back(static_cast<std::size_t>(i));
      rep.values.push_back(v[i]);
    }
  }
  return rep;
}

double relative_error(const Vector& estimate, const Vector& truth) {
  const double denom = truth.norm();
  const double num = (estimate - truth).norm();
  return denom > 0.0 ? num / denom : num;
}

// ---------------------------------------------------------------------------

struct SensingOperator::Cache {
  std::once_flag norms_once, lipschitz_once, qr_once;
  Vector norms;
  double spectral = 0.0;
  Eigen::ColPivHouseholderQR<DenseMatrix> qr;
};

SensingOperator::SensingOperator(DenseMatrix a)
    : SensingOperator(std::make_shared<const DenseMatrix>(std::move(a))) {}

SensingOperator::SensingOperator(std::shared_ptr<const DenseMatrix> a)
    : a_(std::move(a)), cache_(std::make_shared<Cache>()) {
  if (!a_ || a_->size() == 0) throw ShapeError("SensingOperator: empty matrix");
}

const Vector& SensingOperator::column_norms() const {
  std::call_once(cache_->norms_once, [this] { cache_->norms = a_->colwise().norm().transpose(); });
  return cache_->norms;
}

double SensingOperator::spectral_norm_estimate() const {
  std::call_once(cache_->lipschitz_once, [this] {
    Vector v = Vector::Ones(a_->cols()) / std::sqrt(static_cast<double>(a_->cols()));
    double est = 0.0;
    for (int it = 0; it < 30; ++it) {
      Vector w = a_->transpose() * (*a_ * v);
      const double nw = w.norm();
      if (nw == 0.0) break;
      est = v.dot(w);
      v = w / nw;
    }
    est = std::max(est, (*a_ * v).squaredNorm());
    if (!(est > 0.0) || !std::isfinite(est)) throw GuardError("spectral-norm estimate failed: " + std::to_string(est));
    cache_->spectral = est;
  });
  return cache_->spectral;
}

double SensingOperator::lipschitz() const { return 1.1 * spectral_norm_estimate(); }

const Eigen::ColPivHouseholderQR<DenseMatrix>& SensingOperator::qr() const {
  std::call_once(cache_->qr_once, [this] { cache_->qr.compute(*a_); });
  return cache_->qr;
}

// ---------------------------------------------------------------------------

namespace {

DenseMatrix gather_columns(const DenseMatrix& a, const std::vector<Eigen::Index>& cols) {
  DenseMatrix out(a.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = a.col(cols[i]);
  return out;
}

// Least squares with minimum-norm fallback on rank deficiency.
Vector least_squares(const DenseMatrix& a, const Vector& y, bool* rank_deficient) {
  Eigen::ColPivHouseholderQR<DenseMatrix> qr(a);
  if (qr.rank() == a.cols()) {
    if (rank_deficient) *rank_deficient = false;
    return qr.solve(y);
  }
  if (rank_deficient) *rank_deficient = true;
  return Eigen::CompleteOrthogonalDecomposition<DenseMatrix>(a).solve(y);
}

double soft(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

}  // namespace

RecoveryReport omp_recover(const SensingOperator& A, const Vector& y, std::size_t sparsity_budget,
                           const SolverConfig& config) {
  const DenseMatrix& a = A.matrix();
  if (y.size() != a.rows()) throw ShapeError("omp_recover: y length must equal rows(A)");
  if (sparsity_budget > static_cast<std::size_t>(a.rows()))
    throw ShapeError("omp_recover: sparsity budget exceeds rows(A)");
  const Vector& norms = A.column_norms();

  RecoveryReport rep;
  rep.estimate = Vector::Zero(a.cols());
  Vector r = y;
  std::vector<Eigen::Index> active;
  std::vector<bool> used(static_cast<std::size_t>(a.cols()), false);
  Vector coef;
  const double stop = config.residual_tol * y.norm();

  while (active.size() < sparsity_budget && r.norm() > stop) {
    const Vector corr = a.transpose() * r;
    Eigen::Index pick = -1;
    double best = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (used[static_cast<std::size_t>(j)] || norms[j] == 0.0) continue;
      const double c = std::abs(corr[j]) / norms[j];
      if (c > best) {
        best = c;
        pick = j;
      }
    }
    if (pick < 0) break;
    active.push_back(pick);
    used[static_cast<std::size_t>(pick)] = true;
    const DenseMatrix sub = gather_columns(a, active);
    bool deficient = false;
    coef = least_squares(sub, y, &deficient);
    if (deficient) rep.note = "rank-deficient active set; minimum-norm refit";
    r = y - sub * coef;
    ++rep.iterations;
  }
  for (std::size_t i = 0; i < active.size(); ++i) rep.estimate[active[i]] = coef[static_cast<Eigen::Index>(i)];
  rep.residual_l2 = (y - a * rep.estimate).norm();
  rep.converged = rep.residual_l2 <= std::max(stop, 0.0) || active.size() == sparsity_budget;
  return rep;
}

RecoveryReport omp_recover(const DenseMatrix& A, const Vector& y, std::size_t sparsity_budget,
                           const SolverConfig& config) {
  return omp_recover(SensingOperator(A), y, sparsity_budget, config);
}

// ---------------------------------------------------------------------------

namespace {

struct BatchOptions {
  std::vector<double>* trace = nullptr;  // objective of column 0 per iteration
  const DenseMatrix* weights = nullptr;
};

BatchRecovery ista_batch_impl(const SensingOperator& op, const DenseMatrix& Y, const DenseMatrix* mask,
                              const SolverConfig& cfg, const BatchOptions& opt) {
  const DenseMatrix& a = op.matrix();
  if (Y.rows() != a.rows()) throw ShapeError("ista: measurement length must equal rows(A)");
  if (mask && (mask->rows() != Y.rows() || mask->cols() != Y.cols())) throw ShapeError("ista: mask shape");
  if (cfg.max_iters < 1) throw ShapeError("ista: max_iters must be positive");
  const DenseMatrix* W = opt.weights;
  if (W && (W->rows() != a.cols() || W->cols() != Y.cols() || !(W->minCoeff() > 0.0)))
    throw ShapeError("ista: weights must be positive with one entry per coefficient");
  auto penalty = [W](const DenseMatrix& S, Eigen::Index j) {
    return W ? S.col(j).cwiseAbs().dot(W->col(j)) : S.col(j).lpNorm<1>();
  };
  if (!(cfg.residual_tol > 0.0)) throw ShapeError("ista: residual_tol must be positive");

  const Eigen::Index n = a.cols();
  const Eigen::Index cols = Y.cols();
  const DenseMatrix Ym = mask ? DenseMatrix(Y.cwiseProduct(*mask)) : Y;

  BatchRecovery out;
  out.residual_l2.assign(static_cast<std::size_t>(cols), 0.0);

  // Under continuation the target is the equality-constrained problem, and a
  // determined, fully observed system has a single feasible point.
  if (cfg.continuation && !mask && a.rows() >= n && op.qr().rank() == n) {
    out.estimates = op.qr().solve(Ym);
    for (Eigen::Index j = 0; j < cols; ++j)
      out.residual_l2[static_cast<std::size_t>(j)] = (Ym.col(j) - a * out.estimates.col(j)).norm();
    out.converged = true;
    return out;
  }

  const double L = op.lipschitz();
  const DenseMatrix aty = a.transpose() * Ym;
  Vector lam_start(cols), lam_end(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const double amax = W ? aty.col(j).cwiseAbs().cwiseQuotient(W->col(j)).maxCoeff()
                          : aty.col(j).cwiseAbs().maxCoeff();
    if (cfg.continuation) {
      lam_start[j] = cfg.lambda_start_frac * amax;
      lam_end[j] = cfg.lambda_end_frac * amax;
    } else {
      lam_start[j] = lam_end[j] = cfg.lambda;
    }
  }
  const int cont_iters =
      cfg.continuation ? std::max(1, static_cast<int>(std::lround(cfg.continuation_share * cfg.max_iters))) : 0;
  auto lambda_at = [&](int it, Eigen::Index j) {
    if (!cfg.continuation || lam_start[j] <= 0.0) return lam_end[j];
    const double f = std::min(1.0, static_cast<double>(it) / cont_iters);
    return lam_start[j] * std::pow(lam_end[j] / lam_start[j], f);
  };

  DenseMatrix X = DenseMatrix::Zero(n, cols), AX = DenseMatrix::Zero(a.rows(), cols);
  DenseMatrix P = X, AP = AX;  // extrapolation point
  DenseMatrix Z(n, cols), AZ(a.rows(), cols), R(a.rows(), cols);
  Vector prev_obj = Vector::Constant(cols, std::numeric_limits<double>::infinity());
  Vector lam(cols);
  double t = 1.0;
  int it = 0;
  bool all_converged = false;
  std::vector<char> done(static_cast<std::size_t>(cols), 0);
  std::vector<char> stalled(static_cast<std::size_t>(cols), 0);
  DenseMatrix frozen(n, cols);

  for (; it < cfg.max_iters; ++it) {
    for (Eigen::Index j = 0; j < cols; ++j) lam[j] = lambda_at(it, j);

    R = AP - Ym;
    if (mask) R = R.cwiseProduct(*mask);
    Z.noalias() = a.transpose() * R;
    Z = P - Z / L;
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double thr = lam[j] / L;
      for (Eigen::Index i = 0; i < n; ++i) Z(i, j) = soft(Z(i, j), W ? thr * (*W)(i, j) : thr);
    }
    AZ.noalias() = a * Z;

    R = AZ - Ym;
    if (mask) R = R.cwiseProduct(*mask);
    Vector fz(cols);
    for (Eigen::Index j = 0; j < cols; ++j) fz[j] = 0.5 * R.col(j).squaredNorm() + lam[j] * penalty(Z, j);

    Vector obj(cols);
    std::fill(stalled.begin(), stalled.end(), 0);
    if (cfg.accelerated) {
      R = AX - Ym;
      if (mask) R = R.cwiseProduct(*mask);
      DenseMatrix Xn = X, AXn = AX;
      for (Eigen::Index j = 0; j < cols; ++j) {
        const double fx = 0.5 * R.col(j).squaredNorm() + lam[j] * penalty(X, j);
        if (fz[j] <= fx) {
          Xn.col(j) = Z.col(j);
          AXn.col(j) = AZ.col(j);
          obj[j] = fz[j];
        } else {
          obj[j] = fx;
          stalled[static_cast<std::size_t>(j)] = 1;
        }
      }
      const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      const double c1 = t / tn, c2 = (t - 1.0) / tn;
      P = Xn + c1 * (Z - Xn) + c2 * (Xn - X);
      if ((it + 1) % 100 == 0) {
        AP.noalias() = a * P;
      } else {
        AP = AXn + c1 * (AZ - AXn) + c2 * (AXn - AX);
      }
      X.swap(Xn);
      AX.swap(AXn);
      t = tn;
    } else {
      X = Z;
      AX = AZ;
      P = X;
      AP = AX;
      obj = fz;
    }
    if (opt.trace) opt.trace->push_back(obj[0]);

    // A column stops at the first iteration its own objective settles, so its
    // estimate never depends on the other columns of the batch. An iteration
    // that rejected the proximal step leaves the objective flat without
    // settling, so it never counts.
    if (it + 1 >= cont_iters) {
      all_converged = true;
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (done[static_cast<std::size_t>(j)]) continue;
        if (stalled[static_cast<std::size_t>(j)]) {
          all_converged = false;
          continue;
        }
        const double denom = std::max(std::abs(prev_obj[j]), std::numeric_limits<double>::min());
        if (std::abs(prev_obj[j] - obj[j]) / denom < cfg.residual_tol) {
          done[static_cast<std::size_t>(j)] = 1;
          frozen.col(j) = X.col(j);
        } else {
          all_converged = false;
        }
      }
    }
    prev_obj = obj;
    if (all_converged) {
      ++it;
      break;
    }
  }

  for (Eigen::Index j = 0; j < cols; ++j)
    if (done[static_cast<std::size_t>(j)]) X.col(j) = frozen.col(j);

  if (cfg.debias) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double mx = X.col(j).cwiseAbs().maxCoeff();
      if (mx == 0.0) continue;
      std::vector<Eigen::Index> supp;
      for (Eigen::Index i = 0; i < n; ++i)
        if (std::abs(X(i, j)) > cfg.debias_threshold * mx) supp.push_back(i);
      std::vector<Eigen::Index> rows_seen;
      for (Eigen::Index r = 0; r < a.rows(); ++r)
        if (!mask || (*mask)(r, j) != 0.0) rows_seen.push_back(r);
      if (supp.size() > rows_seen.size()) continue;
      DenseMatrix sub(static_cast<Eigen::Index>(rows_seen.size()), static_cast<Eigen::Index>(supp.size()));
      Vector yy(static_cast<Eigen::Index>(rows_seen.size()));
      for (std::size_t r = 0; r < rows_seen.size(); ++r) {
        yy[static_cast<Eigen::Index>(r)] = Y(rows_seen[r], j);
        for (std::size_t c = 0; c < supp.size(); ++c)
          sub(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = a(rows_seen[r], supp[c]);
      }
      const Vector coef = least_squares(sub, yy, nullptr);
      X.col(j).setZero();
      for (std::size_t c = 0; c < supp.size(); ++c) X(supp[c], j) = coef[static_cast<Eigen::Index>(c)];
    }
  }
  AX.noalias() = a * X;

  R = AX - Ym;
  if (mask) R = R.cwiseProduct(*mask);
  for (Eigen::Index j = 0; j < cols; ++j) out.residual_l2[static_cast<std::size_t>(j)] = R.col(j).norm();
  out.estimates = std::move(X);
  out.iterations = it;
  out.converged = all_converged;
  return out;
}

}  // namespace

BatchRecovery ista_bpdn_batch(const SensingOperator& A, const DenseMatrix& Y, const DenseMatrix* mask,
                              const SolverConfig& config, const DenseMatrix* l1_weights) {
  BatchOptions opt;
  opt.weights = l1_weights;
  return ista_batch_impl(A, Y, mask, config, opt);
}

RecoveryReport ista_bpdn(const SensingOperator& A, const Vector& y, const SolverConfig& config,
                         std::vector<double>* objective_trace) {
  BatchOptions opt;
  opt.trace = objective_trace;
  const BatchRecovery b = ista_batch_impl(A, DenseMatrix(y), nullptr, config, opt);
  RecoveryReport rep;
  rep.estimate = b.estimates.col(0);
  rep.residual_l2 = (y - A.matrix() * rep.estimate).norm();
  rep.iterations = b.iterations;
  rep.converged = b.converged;
  return rep;
}

RecoveryReport ista_bpdn(const DenseMatrix& A, const Vector& y, const SolverConfig& config,
                         std::vector<double>* objective_trace) {
  return ista_bpdn(SensingOperator(A), y, config, objective_trace);
}

// ---------------------------------------------------------------------------

namespace {

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace

L0Result l0_bruteforce(const DenseMatrix& A, const Vector& y, std::size_t k) {
  if (y.size() != A.rows()) throw ShapeError("l0_bruteforce: y length must equal rows(A)");
  const auto n = static_cast<std::size_t>(A.cols());
  if (k > n) throw ShapeError("l0_bruteforce: k exceeds column count");
  double total = 0.0;
  for (std::size_t s = 0; s <= k; ++s) total += binomial(n, s);
  if (total > 1e6) throw GuardError("l0_bruteforce: more than 1e6 supports");

  // Best residual per effective support (nonzero pattern of the fit).
  std::map<std::vector<std::size_t>, std::pair<double, Vector>> by_support;
  L0Result res;
  auto consider = [&](const std::vector<Eigen::Index>& cols) {
    ++res.supports_tried;
    Vector full = Vector::Zero(A.cols());
    double r;
    if (cols.empty()) {
      r = y.norm();
    } else {
      const DenseMatrix sub = gather_columns(A, cols);
      const Vector coef = least_squares(sub, y, nullptr);
      r = (y - sub * coef).norm();
      for (std::size_t i = 0; i < cols.size(); ++i) full[cols[i]] = coef[static_cast<Eigen::Index>(i)];
    }
    const double tol = 1e-9 * std::max(1.0, full.cwiseAbs().maxCoeff());
    std::vector<std::size_t> eff;
    for (Eigen::Index i = 0; i < full.size(); ++i)
      if (std::abs(full[i]) > tol) eff.push_back(static_cast<std::size_t>(i));
    auto it = by_support.find(eff);
    if (it == by_support.end() || r < it->second.first) by_support[eff] = {r, full};
  };

  std::vector<Eigen::Index> cur;
  for (std::size_t s = 0; s <= k; ++s) {
    std::vector<std::size_t> comb(s);
    std::iota(comb.begin(), comb.end(), std::size_t{0});
    while (true) {
      cur.assign(comb.begin(), comb.end());
      consider(cur);
      // next combination in lexicographic order
      std::size_t i = s;
      while (i > 0 && comb[i - 1] == n - s + i - 1) --i;
      if (i == 0) break;
      ++comb[i - 1];
      for (std::size_t j = i; j < s; ++j) comb[j] = comb[j - 1] + 1;
    }
  }

  double best = std::numeric_limits<double>::infinity(), second = best;
  const Vector* best_vec = nullptr;
  const std::vector<std::size_t>* best_supp = nullptr;
  for (const auto& [supp, entry] : by_support) {
    // Prefer smaller supports on (numerical) ties.
    const bool better = entry.first < best - 1e-12 ||
                        (entry.first <= best + 1e-12 && best_supp && supp.size() < best_supp->size());
    if (better) {
      second = std::min(second, best);
      best = entry.first;
      best_vec = &entry.second;
      best_supp = &supp;
    } else {
      second = std::min(second, entry.first);
    }
  }
  res.residual_l2 = best;
  res.runner_up_residual = second;
  res.solution = SparseRep::from_dense(*best_vec, 0.0);
  return res;
}

TwoStepResult two_step_decode(const SensingOperator& A_K, const Basis& basis, const Vector& y,
                              const SolverConfig& config) {
  if (static_cast<std::size_t>(A_K.cols()) != basis.dim()) throw ShapeError("two_step_decode: basis size");
  TwoStepResult out;
  if (config.method == SolverMethod::omp) {
    const std::size_t budget =
        config.sparsity_budget ? config.sparsity_budget : static_cast<std::size_t>(A_K.rows());
    out.coefficients = omp_recover(A_K, y, budget, config);
  } else {
    out.coefficients = ista_bpdn(A_K, y, config);
  }
  out.x = basis.synthesize(out.coefficients.estimate);
  return out;
}

}  // namespace blpcs
