// Copyright 2026 The otbridge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "otbridge/ot_solver.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace otbridge {
namespace {

void check_marginal(const Vector& m, Eigen::Index expected, const char* name) {
  if (m.size() != expected) {
    throw ValidationError(std::string(name) + " marginal has length " + std::to_string(m.size()) +
                          ", expected " + std::to_string(expected));
  }
  if (!m.allFinite() || (m.array() <= 0.0).any()) {
    throw ValidationError(std::string(name) + " marginal must be strictly positive");
  }
  if (std::abs(m.sum() - 1.0) > 1e-9) {
    throw ValidationError(std::string(name) + " marginal must sum to 1");
  }
}

// log(sum(exp(x + shift))) for a contiguous column x.
template <typename Col, typename Shift>
double log_sum_exp(const Col& x, const Shift& shift, Eigen::ArrayXd& scratch) {
  scratch = x.array() + shift.array();
  const double m = scratch.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((scratch - m).exp().sum());
}

double marginal_violation(const Matrix& plan, const Vector& row, const Vector& col) {
  const double row_err = (plan.rowwise().sum() - row).cwiseAbs().maxCoeff();
  const double col_err = (plan.colwise().sum().transpose() - col).cwiseAbs().maxCoeff();
  return std::max(row_err, col_err);
}

// Plain log-domain iteration, continuing from potentials (f, g). Every
// update is a log-sum-exp, so nothing can overflow or underflow.
void iterate_log(const Matrix& scaled, const Vector& row, const Vector& col,
                 const SolverConfig& cfg, Vector& f, Vector& g, AssignmentMatrix& out) {
  const Eigen::Index k = scaled.rows();
  const Eigen::Index b = scaled.cols();
  const Matrix scaled_t = scaled.transpose();  // contiguous rows for the row update
  const Vector log_row = row.array().log();
  const Vector log_col = col.array().log();
  Vector col_lse(b);
  Eigen::ArrayXd scratch;

  while (out.iterations_used < cfg.max_iter) {
    ++out.iterations_used;
    for (Eigen::Index i = 0; i < k; ++i) {
      f(i) = log_row(i) - log_sum_exp(scaled_t.col(i), g, scratch);
    }
    // Rows are now exact; the column sums of the current plan are
    // exp(g_j + lse_j), which is also what the next g-update needs.
    double col_err = 0.0;
    for (Eigen::Index j = 0; j < b; ++j) {
      col_lse(j) = log_sum_exp(scaled.col(j), f, scratch);
      col_err = std::max(col_err, std::abs(std::exp(g(j) + col_lse(j)) - col(j)));
    }
    if (col_err <= cfg.tol) {
      out.converged = true;
      return;
    }
    g = log_col - col_lse;
  }
}

// Log-stabilized Sinkhorn: the potentials (f, g) are kept in log form and
// absorbed into the kernel exp(S/eps + f + g) whenever the linear scalings
// (u, v) leave [1e-100, 1e100]. The inner iterations are matrix-vector
// products. If a kernel row or column underflows to zero the solve
// continues with plain log-domain updates.
AssignmentMatrix sinkhorn_log(const Matrix& scaled, const Vector& row, const Vector& col,
                              const SolverConfig& cfg) {
  constexpr double kAbsorbBound = 230.0;  // |log u|, |log v| limit (about 1e100)
  const Eigen::Index k = scaled.rows();
  const Eigen::Index b = scaled.cols();
  const Vector log_row = row.array().log();

  Vector f(k);
  Vector g = Vector::Zero(b);
  {
    Eigen::ArrayXd scratch;
    for (Eigen::Index i = 0; i < k; ++i) {
      f(i) = log_row(i) - log_sum_exp(scaled.row(i).transpose(), g, scratch);
    }
  }
  auto absorb = [&](Matrix& kernel) {
    kernel = ((scaled.colwise() + f).rowwise() + g.transpose()).array().exp();
  };

  AssignmentMatrix out;
  Matrix kernel;
  absorb(kernel);
  Vector u = Vector::Ones(k);
  Vector v = Vector::Ones(b);
  bool degenerate = false;
  while (out.iterations_used < cfg.max_iter) {
    ++out.iterations_used;
    const Vector kv = kernel * v;
    if (!(kv.array() > 0.0).all() || !kv.allFinite()) {
      degenerate = true;
      break;
    }
    u = row.cwiseQuotient(kv);
    const Vector ktu = kernel.transpose() * u;
    const double col_err = (v.cwiseProduct(ktu) - col).cwiseAbs().maxCoeff();
    if (col_err <= cfg.tol) {
      out.converged = true;
      break;
    }
    if (!(ktu.array() > 0.0).all() || !ktu.allFinite()) {
      degenerate = true;
      break;
    }
    v = col.cwiseQuotient(ktu);
    const Eigen::ArrayXd lu = u.array().log();
    const Eigen::ArrayXd lv = v.array().log();
    if (lu.abs().maxCoeff() > kAbsorbBound || lv.abs().maxCoeff() > kAbsorbBound) {
      f += lu.matrix();
      g += lv.matrix();
      u.setOnes();
      v.setOnes();
      absorb(kernel);
    }
  }
  f += u.array().log().matrix();
  g += v.array().log().matrix();
  if (degenerate) {
    --out.iterations_used;
    iterate_log(scaled, row, col, cfg, f, g, out);
  }

  out.plan = ((scaled.colwise() + f).rowwise() + g.transpose()).array().exp();
  out.log_row_scaling = std::move(f);
  out.log_column_scaling = std::move(g);
  out.marginal_error = marginal_violation(out.plan, row, col);
  return out;
}

AssignmentMatrix sinkhorn_linear(const Matrix& scaled, const Vector& row, const Vector& col,
                                 const SolverConfig& cfg) {
  const Matrix kernel = scaled.array().exp();
  if (!kernel.allFinite()) throw RuntimeError("numerical overflow; retry in log domain");
  Vector u = Vector::Ones(kernel.rows());
  Vector v = Vector::Ones(kernel.cols());

  AssignmentMatrix out;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    out.iterations_used = it;
    u = row.cwiseQuotient(kernel * v);
    const Vector kt_u = kernel.transpose() * u;
    const double col_err = (v.cwiseProduct(kt_u) - col).cwiseAbs().maxCoeff();
    if (!u.allFinite() || !kt_u.allFinite() || !std::isfinite(col_err)) {
      throw RuntimeError("numerical overflow; retry in log domain");
    }
    if (col_err <= cfg.tol) {
      out.converged = true;
      break;
    }
    v = col.cwiseQuotient(kt_u);
    if (!v.allFinite()) throw RuntimeError("numerical overflow; retry in log domain");
  }
  out.plan = u.asDiagonal() * kernel * v.asDiagonal();
  if (!out.plan.allFinite()) throw RuntimeError("numerical overflow; retry in log domain");
  out.log_row_scaling = u.array().log();
  out.log_column_scaling = v.array().log();
  out.marginal_error = marginal_violation(out.plan, row, col);
  return out;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ValidationError("eps must be positive");
  if (!(tol > 0.0) || !std::isfinite(tol)) throw ValidationError("tol must be positive");
  if (max_iter < 1) throw ValidationError("max_iter must be at least 1");
}

PrototypeSpace PrototypeSpace::random(Eigen::Index count, Eigen::Index dim, std::uint64_t seed) {
  if (count < 1 || dim < 1) throw ValidationError("prototype space must be non-empty");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  PrototypeSpace p;
  p.prototypes = Matrix::NullaryExpr(count, dim, [&] { return normal(rng); });
  p.renormalize();
  return p;
}

void PrototypeSpace::renormalize() { prototypes = normalize_rows(prototypes); }

ScoreMatrix score_matrix(const Matrix& central, const PooledBatch& pooled, bool normalize) {
  if (central.cols() != pooled.dim()) {
    throw ValidationError("dimension mismatch: central space has dimension " +
                          std::to_string(central.cols()) + ", pooled batch has " +
                          std::to_string(pooled.dim()));
  }
  if (central.rows() == 0 || pooled.size() == 0) throw ValidationError("empty score matrix");
  if (normalize) return {normalize_rows(central) * normalize_rows(pooled.rows).transpose()};
  return {central * pooled.rows.transpose()};
}

AssignmentMatrix sinkhorn(const ScoreMatrix& s, const Vector& row_marginal,
                          const Vector& col_marginal, const SolverConfig& cfg) {
  cfg.validate();
  if (s.scores.rows() == 0 || s.scores.cols() == 0) throw ValidationError("empty score matrix");
  if (!s.scores.allFinite()) throw ValidationError("scores must be finite");
  check_marginal(row_marginal, s.scores.rows(), "row");
  check_marginal(col_marginal, s.scores.cols(), "column");
  const Matrix scaled = s.scores / cfg.eps;
  return cfg.log_domain ? sinkhorn_log(scaled, row_marginal, col_marginal, cfg)
                        : sinkhorn_linear(scaled, row_marginal, col_marginal, cfg);
}

AssignmentMatrix assign_batch(const WordAnchorSpace& space, const PooledBatch& pooled,
                              const SolverConfig& cfg) {
  const auto s = score_matrix(space.weights(), pooled, space.normalized());
  const auto b = pooled.size();
  return sinkhorn(s, space.mu(), Vector::Constant(b, 1.0 / static_cast<double>(b)), cfg);
}

AssignmentMatrix equipartition_assign(const Matrix& central, const PooledBatch& pooled,
                                      const SolverConfig& cfg, bool normalize) {
  const auto s = score_matrix(central, pooled, normalize);
  const auto k = central.rows();
  const auto b = pooled.size();
  return sinkhorn(s, Vector::Constant(k, 1.0 / static_cast<double>(k)),
                  Vector::Constant(b, 1.0 / static_cast<double>(b)), cfg);
}

double assignment_entropy(const AssignmentMatrix& q) {
  double h = 0.0;
  for (Eigen::Index j = 0; j < q.plan.cols(); ++j) {
    for (Eigen::Index i = 0; i < q.plan.rows(); ++i) {
      const double v = q.plan(i, j);
      if (v > 0.0) h -= v * std::log(v);
    }
  }
  return h;
}

}  // namespace otbridge
