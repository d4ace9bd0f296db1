#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lig/game.hpp"

namespace lig {

/// log(1 + exp(t)) without overflow for large |t|.
template <class Scalar>
Scalar softplus(Scalar t) {
  using std::exp;
  using std::log1p;
  if (t > Scalar(0)) return t + log1p(exp(-t));
  return log1p(exp(t));
}

/// 1 / (1 + exp(-t)).
template <class Scalar>
Scalar sigmoid(Scalar t) {
  using std::exp;
  if (t >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-t));
  const Scalar e = exp(t);
  return e / (Scalar(1) + e);
}

/// eta(t) = 1 / (exp(t/2) + exp(-t/2))^2 = sigmoid(t) sigmoid(-t).
template <class Scalar>
Scalar eta(Scalar t) {
  const Scalar s = sigmoid(t < Scalar(0) ? t : -t);
  return s * (Scalar(1) - s);
}

namespace detail {

template <class DerivedV, class DerivedZ>
void check_dims(const Eigen::MatrixBase<DerivedV>& v, const Eigen::MatrixBase<DerivedZ>& Z) {
  if (v.cols() != 1 || Z.cols() != v.rows() || Z.rows() < 1) {
    throw std::invalid_argument("logistic: design matrix is m x n and v has length n");
  }
}

}  // namespace detail

/// Mean logistic loss (1/m) sum_l log(1 + exp(-v^T z_l)) over the rows of Z.
template <class DerivedV, class DerivedZ>
typename DerivedV::Scalar loss(const Eigen::MatrixBase<DerivedV>& v,
                               const Eigen::MatrixBase<DerivedZ>& Z) {
  using Scalar = typename DerivedV::Scalar;
  detail::check_dims(v, Z);
  const auto margins = (Z * v).eval();
  Scalar acc(0);
  for (Eigen::Index l = 0; l < margins.size(); ++l) acc += softplus(-margins[l]);
  return acc / Scalar(margins.size());
}

/// Gradient (1/m) sum_l { -z_l / (1 + exp(v^T z_l)) }.
template <class DerivedV, class DerivedZ>
auto gradient(const Eigen::MatrixBase<DerivedV>& v, const Eigen::MatrixBase<DerivedZ>& Z)
    -> Eigen::Matrix<typename DerivedV::Scalar, Eigen::Dynamic, 1> {
  using Scalar = typename DerivedV::Scalar;
  detail::check_dims(v, Z);
  auto margins = (Z * v).eval();
  for (Eigen::Index l = 0; l < margins.size(); ++l) margins[l] = sigmoid(-margins[l]);
  return -(Z.transpose() * margins) / Scalar(Z.rows());
}

/// Hessian (1/m) sum_l eta(v^T z_l) z_l z_l^T; symmetric positive semidefinite.
template <class DerivedV, class DerivedZ>
auto hessian(const Eigen::MatrixBase<DerivedV>& v, const Eigen::MatrixBase<DerivedZ>& Z)
    -> Eigen::Matrix<typename DerivedV::Scalar, Eigen::Dynamic, Eigen::Dynamic> {
  using Scalar = typename DerivedV::Scalar;
  detail::check_dims(v, Z);
  auto margins = (Z * v).eval();
  for (Eigen::Index l = 0; l < margins.size(); ++l) margins[l] = eta(margins[l]);
  return Z.transpose() * (Z.array().colwise() * margins.array()).matrix() / Scalar(Z.rows());
}

struct SolverConfig {
  double lambda = 0.0;
  int max_iters = 50000;
  double tol = 1e-7;  // l1-KKT residual threshold
  double initial_step = 4.0;  // also the regrowth ceiling for the backtracked step
  double step_shrink = 0.5;
  bool accelerate = false;   // FISTA; the plain mode keeps the objective monotone
  bool penalize_bias = true; // v includes -b_i; setting false exempts that coordinate
  double norm_cap = 1e8;     // stops separated lambda = 0 runs from drifting forever
  bool record_trace = false;
};

struct FitResult {
  Vector v_hat;
  bool converged = false;
  int iters = 0;
  double kkt_residual = 0;
  double final_objective = 0;
  bool norm_capped = false;
  std::vector<double> objective_trace;  // filled when record_trace
};

/// Subgradient optimality residual of the l1-penalized problem at v.
double kkt_residual(const Vector& v, const Vector& grad, double lambda, bool penalize_bias = true);

/// Proximal gradient descent with backtracking line search and
/// soft-thresholding, started at v = 0.
FitResult fit_player(const Matrix& Z, const SolverConfig& cfg);

/// m x n design matrix for player i: row l is z_i(x^(l)).
Matrix build_design_matrix(const std::vector<JointAction>& data, int i, int n);

struct GameFit {
  Game game;
  std::vector<FitResult> fits;  // one per player

  int max_iters_used() const;
};

/// Fits each player independently and reassembles (W, b); W(i, j) for j != i
/// comes from the leading n-1 coordinates of v_i, b(i) = -v_i[n-1].
GameFit fit_game(const std::vector<JointAction>& data, int n, const SolverConfig& cfg);

/// multiplier * sqrt((2/m) log(2n/delta)).
double lambda_schedule(long m, int n, double delta, double multiplier);

}  // namespace lig
