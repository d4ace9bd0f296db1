#include "lig/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lig {

namespace {

double mean_softplus_neg(const Vector& margins) {
  double acc = 0.0;
  for (Eigen::Index l = 0; l < margins.size(); ++l) acc += softplus(-margins[l]);
  return acc / static_cast<double>(margins.size());
}

Vector soft_threshold(const Vector& w, double tau, bool penalize_bias) {
  Vector u(w.size());
  const Eigen::Index last = w.size() - 1;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    if (!penalize_bias && j == last) {
      u[j] = w[j];
    } else if (w[j] > tau) {
      u[j] = w[j] - tau;
    } else if (w[j] < -tau) {
      u[j] = w[j] + tau;
    } else {
      u[j] = 0.0;
    }
  }
  return u;
}

double l1_norm(const Vector& v, bool penalize_bias) {
  double s = v.lpNorm<1>();
  if (!penalize_bias) s -= std::abs(v[v.size() - 1]);
  return s;
}

void validate(const SolverConfig& cfg) {
  if (cfg.lambda < 0) throw std::invalid_argument("SolverConfig: lambda must be >= 0");
  if (cfg.max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
  if (!(cfg.tol > 0)) throw std::invalid_argument("SolverConfig: tol must be > 0");
  if (!(cfg.initial_step > 0)) throw std::invalid_argument("SolverConfig: initial_step must be > 0");
  if (!(cfg.step_shrink > 0 && cfg.step_shrink < 1)) {
    throw std::invalid_argument("SolverConfig: step_shrink must be in (0, 1)");
  }
}

}  // namespace

double kkt_residual(const Vector& v, const Vector& grad, double lambda, bool penalize_bias) {
  if (v.size() != grad.size()) throw std::invalid_argument("kkt_residual: size mismatch");
  double r = 0.0;
  const Eigen::Index last = v.size() - 1;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    double rj;
    if (!penalize_bias && j == last) {
      rj = std::abs(grad[j]);
    } else if (v[j] != 0.0) {
      rj = std::abs(grad[j] + lambda * (v[j] > 0 ? 1.0 : -1.0));
    } else {
      rj = std::max(0.0, std::abs(grad[j]) - lambda);
    }
    r = std::max(r, rj);
  }
  return r;
}

FitResult fit_player(const Matrix& Z, const SolverConfig& cfg) {
  validate(cfg);
  const Eigen::Index m = Z.rows();
  const Eigen::Index n = Z.cols();
  if (m < 1 || n < 1) throw std::invalid_argument("fit_player: empty design matrix");
  const double inv_m = 1.0 / static_cast<double>(m);

  FitResult res;
  Vector v = Vector::Zero(n);
  Vector margins = Vector::Zero(m);
  double smooth = mean_softplus_neg(margins);  // log 2 at the origin
  double objective = smooth;                   // ||0||_1 = 0

  // FISTA extrapolation state; inert unless cfg.accelerate.
  Vector v_prev = v;
  double momentum = 1.0;

  double step = cfg.initial_step;
  Vector grad(n), y(n), y_grad(n), y_margins(m), u(n), u_margins(m);

  auto grad_at = [&](const Vector& marg) -> Vector {
    Vector w(m);
    for (Eigen::Index l = 0; l < m; ++l) w[l] = sigmoid(-marg[l]);
    return -(Z.transpose() * w) * inv_m;
  };

  int iter = 0;
  for (; iter < cfg.max_iters; ++iter) {
    grad = grad_at(margins);
    res.kkt_residual = kkt_residual(v, grad, cfg.lambda, cfg.penalize_bias);
    if (cfg.record_trace) res.objective_trace.push_back(objective);
    if (res.kkt_residual <= cfg.tol) {
      res.converged = true;
      break;
    }
    if (v.lpNorm<Eigen::Infinity>() > cfg.norm_cap) {
      res.norm_capped = true;
      break;
    }

    const Vector* g = &grad;
    double smooth_base = smooth;
    if (cfg.accelerate) {
      const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      const double beta = (momentum - 1.0) / next;
      momentum = next;
      y = v + beta * (v - v_prev);
      y_margins.noalias() = Z * y;
      smooth_base = mean_softplus_neg(y_margins);
      y_grad = grad_at(y_margins);
      g = &y_grad;
    } else {
      y = v;
    }

    // Backtracking: accept u when the smooth part stays under its quadratic
    // model at y; the plain mode additionally requires no objective increase.
    step = std::min(step / cfg.step_shrink, cfg.initial_step);
    bool stalled = false;
    for (;;) {
      u = soft_threshold(y - step * *g, step * cfg.lambda, cfg.penalize_bias);
      u_margins.noalias() = Z * u;
      const double smooth_u = mean_softplus_neg(u_margins);
      const Vector du = u - y;
      const double quad = smooth_base + g->dot(du) + du.squaredNorm() / (2.0 * step);
      // absorbs the roundoff of the m-term objective sums near the optimum
      const double slack =
          (1e-14 + 4e-16 * static_cast<double>(m)) * std::max(1.0, std::abs(smooth_base));
      bool ok = smooth_u <= quad + slack;
      double objective_u = smooth_u + cfg.lambda * l1_norm(u, cfg.penalize_bias);
      if (ok && !cfg.accelerate) ok = objective_u <= objective + slack;
      if (ok) {
        if (!std::isfinite(objective_u)) {
          throw std::runtime_error("fit_player: non-finite objective at iteration " +
                                   std::to_string(iter));
        }
        v_prev = v;
        v = u;
        margins = u_margins;
        smooth = smooth_u;
        objective = objective_u;
        break;
      }
      step *= cfg.step_shrink;
      if (step < 1e-18) {
        stalled = true;
        break;
      }
    }
    if (stalled) break;
  }

  if (iter == cfg.max_iters || res.norm_capped) {
    grad = grad_at(margins);
    res.kkt_residual = kkt_residual(v, grad, cfg.lambda, cfg.penalize_bias);
    res.converged = res.kkt_residual <= cfg.tol;
  }
  res.v_hat = std::move(v);
  res.iters = iter;
  res.final_objective = objective;
  return res;
}

Matrix build_design_matrix(const std::vector<JointAction>& data, int i, int n) {
  if (data.empty()) throw std::invalid_argument("build_design_matrix: empty data");
  if (i < 0 || i >= n) throw std::invalid_argument("build_design_matrix: player index out of range");
  Matrix Z(static_cast<Eigen::Index>(data.size()), n);
  for (Eigen::Index l = 0; l < Z.rows(); ++l) {
    const JointAction x = data[static_cast<std::size_t>(l)];
    const double xi = x.spin(i);
    int p = 0;
    for (int j = 0; j < n; ++j) {
      if (j != i) Z(l, p++) = xi * x.spin(j);
    }
    Z(l, n - 1) = xi;
  }
  return Z;
}

int GameFit::max_iters_used() const {
  int worst = 0;
  for (const FitResult& f : fits) worst = std::max(worst, f.iters);
  return worst;
}

GameFit fit_game(const std::vector<JointAction>& data, int n, const SolverConfig& cfg) {
  if (data.empty()) throw std::invalid_argument("fit_game: empty data");
  if (n < 2) throw std::invalid_argument("fit_game: need n >= 2");
  Matrix W = Matrix::Zero(n, n);
  Vector b = Vector::Zero(n);
  std::vector<FitResult> fits;
  fits.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    FitResult fit;
    try {
      fit = fit_player(build_design_matrix(data, i, n), cfg);
    } catch (const std::exception& e) {
      throw std::runtime_error("fit_game: player " + std::to_string(i) + ": " + e.what());
    }
    int p = 0;
    for (int j = 0; j < n; ++j) {
      if (j != i) W(i, j) = fit.v_hat[p++];
    }
    b[i] = -fit.v_hat[n - 1];
    fits.push_back(std::move(fit));
  }
  return GameFit{Game(std::move(W), std::move(b)), std::move(fits)};
}

double lambda_schedule(long m, int n, double delta, double multiplier) {
  if (m < 1) throw std::domain_error("lambda_schedule: need m >= 1");
  if (n < 1) throw std::domain_error("lambda_schedule: need n >= 1");
  if (!(delta > 0 && delta < 1)) throw std::domain_error("lambda_schedule: delta must be in (0, 1)");
  if (!(multiplier > 0)) throw std::domain_error("lambda_schedule: multiplier must be > 0");
  return multiplier * std::sqrt((2.0 / static_cast<double>(m)) * std::log(2.0 * n / delta));
}

}  // namespace lig
