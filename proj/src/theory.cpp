#include "lig/theory.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

#include "lig/logistic.hpp"

namespace lig {

TheoryConstants compute_constants(const Game& game, const NoiseModel& model, int i) {
  const int n = game.players();
  if (n > kMaxExactExpectationPlayers) {
    throw std::length_error("compute_constants: n = " + std::to_string(n) + " exceeds limit " +
                            std::to_string(kMaxExactExpectationPlayers));
  }
  if (i < 0 || i >= n) throw std::invalid_argument("compute_constants: player index out of range");

  const Vector v_star = game.player_parameters(i);
  TheoryConstants tc;
  for (int j = 0; j < n; ++j) {
    if (v_star[j] != 0.0) tc.support.push_back(j);
  }
  tc.support_size = static_cast<int>(tc.support.size());
  if (tc.support_size == 0) {
    throw std::domain_error("compute_constants: player " + std::to_string(i) +
                            " has empty support (v_i = 0)");
  }

  const PsneSet& ne = psne_of(model);
  const int s = tc.support_size;
  Matrix hess = Matrix::Zero(s, s);
  Matrix scatter = Matrix::Zero(s, s);
  Vector z_s(s);
  const std::uint32_t space = std::uint32_t{1} << n;
  for (std::uint32_t bits = 0; bits < space; ++bits) {
    const JointAction x{bits};
    const double p = pmf(model, x);
    const Vector z = feature_vector(x, i, n);
    for (int a = 0; a < s; ++a) z_s[a] = z[tc.support[a]];
    const double weight = eta(v_star.dot(z));
    scatter.selfadjointView<Eigen::Lower>().rankUpdate(z_s, p);
    hess.selfadjointView<Eigen::Lower>().rankUpdate(z_s, p * weight);
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig_h(hess.selfadjointView<Eigen::Lower>());
  Eigen::SelfAdjointEigenSolver<Matrix> eig_s(scatter.selfadjointView<Eigen::Lower>());
  if (eig_h.info() != Eigen::Success || eig_s.info() != Eigen::Success) {
    throw std::runtime_error("compute_constants: eigensolver failed");
  }
  tc.c_min = eig_h.eigenvalues().minCoeff();
  tc.d_max = eig_s.eigenvalues().maxCoeff();

  tc.rho_min = min_payoff_over_psne(game, ne);
  tc.kappa = 1.0 / (1.0 + std::exp(tc.rho_min));
  double mass = 0.0;
  for (const JointAction y : ne.actions) mass += pmf(model, y);
  tc.psne_mass = mass;

  const DistributionConstants dc = constants(model);
  tc.tp_min = dc.tp_min;
  tc.tp_max = dc.tp_max;
  tc.p_max = dc.p_max;
  tc.f_ne = dc.f_ne;
  tc.nu = tc.kappa * mass + (tc.tp_max - tc.tp_min) / (2.0 - tc.f_ne) +
          tc.f_ne * tc.tp_min / (2.0 - tc.f_ne);
  tc.K = 5.0 * tc.c_min * tc.c_min / (32.0 * s * tc.d_max) - tc.nu;
  return tc;
}

RecoveryWindow recovery_window(const TheoryConstants& tc, int n, int k, long m, double delta) {
  if (n < 1 || k < 1 || m < 1 || !(delta > 0 && delta < 1)) {
    throw std::invalid_argument("recovery_window: bad arguments");
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  RecoveryWindow w;
  w.K = 5.0 * tc.c_min * tc.c_min / (32.0 * k * tc.d_max) - tc.nu;
  const double log_window = std::log(6.0 * n * n / delta);
  const double slack = std::sqrt(2.0 / static_cast<double>(m) * log_window);
  w.lambda_lo = tc.nu + slack;
  w.lambda_hi = 2.0 * w.K + tc.nu - slack;
  w.window_nonempty = w.lambda_lo <= w.lambda_hi;

  const double log_support = std::log(3.0 * k * n / delta);
  const double m1 = w.K > 0 ? 2.0 / (w.K * w.K) * log_window : inf;
  const double m2 = 2.0 * k / tc.c_min * log_support;
  const double m3 = tc.tp_min > 0 ? 4.0 * k / tc.tp_min * log_support : inf;
  w.m_required = std::max({m1, m2, m3});
  w.m_sufficient = static_cast<double>(m) >= w.m_required;
  return w;
}

namespace {

Game fano_member(int n, const std::vector<int>& influential) {
  Matrix W = Matrix::Zero(n, n);
  Vector b = Vector::Zero(n);
  std::vector<bool> in_set(static_cast<std::size_t>(n), false);
  for (const int j : influential) in_set[static_cast<std::size_t>(j)] = true;
  for (int i = 0; i < n; ++i) {
    if (in_set[static_cast<std::size_t>(i)]) {
      b[i] = 1.0;
      continue;
    }
    for (const int j : influential) W(i, j) = -1.0;
  }
  return Game(std::move(W), std::move(b));
}

JointAction fano_equilibrium(int n, const std::vector<int>& influential) {
  std::uint32_t bits = (std::uint32_t{1} << n) - 1;  // everyone at +1
  for (const int j : influential) bits &= ~(std::uint32_t{1} << j);
  return JointAction{bits};
}

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

FanoEnsemble build_fano_ensemble(int n, int k, long cap, Rng& rng) {
  if (n < 2 || k < 1 || k >= n) {
    throw std::invalid_argument("build_fano_ensemble: need 1 <= k < n");
  }
  if (cap < 1) throw std::invalid_argument("build_fano_ensemble: cap must be >= 1");

  FanoEnsemble ens;
  ens.n = n;
  ens.k = k;

  std::vector<std::vector<int>> subsets;
  const bool exhaustive = log_binomial(n, k) <= std::log(static_cast<double>(cap)) + 1e-9;
  if (exhaustive) {
    // lexicographic k-subset enumeration
    std::vector<int> idx(static_cast<std::size_t>(k));
    std::iota(idx.begin(), idx.end(), 0);
    for (;;) {
      subsets.push_back(idx);
      int pos = k - 1;
      while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
      if (pos < 0) break;
      ++idx[static_cast<std::size_t>(pos)];
      for (int t = pos + 1; t < k; ++t) {
        idx[static_cast<std::size_t>(t)] = idx[static_cast<std::size_t>(t - 1)] + 1;
      }
    }
  } else {
    std::set<std::vector<int>> seen;
    std::vector<int> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    while (static_cast<long>(seen.size()) < cap) {
      for (int t = 0; t < k; ++t) {
        const auto r = t + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(n - t)));
        std::swap(pool[static_cast<std::size_t>(t)], pool[static_cast<std::size_t>(r)]);
      }
      std::vector<int> subset(pool.begin(), pool.begin() + k);
      std::sort(subset.begin(), subset.end());
      seen.insert(std::move(subset));
    }
    subsets.assign(seen.begin(), seen.end());
  }

  for (const auto& subset : subsets) {
    ens.members.push_back(fano_member(n, subset));
    ens.equilibria.push_back(fano_equilibrium(n, subset));
  }

  if (n <= kMaxExactExpectationPlayers) {
    std::set<std::uint32_t> distinct;
    for (std::size_t t = 0; t < ens.members.size(); ++t) {
      const PsneSet ne = enumerate_psne(ens.members[t]);
      if (ne.size() != 1 || ne.actions[0] != ens.equilibria[t]) {
        throw std::runtime_error("build_fano_ensemble: member lost its singleton equilibrium");
      }
      distinct.insert(ne.actions[0].bits);
    }
    if (distinct.size() != ens.members.size()) {
      throw std::runtime_error("build_fano_ensemble: equilibria are not pairwise distinct");
    }
  }
  return ens;
}

double fano_kl(int n, double q) {
  if (n < 1 || n > 30) throw std::domain_error("fano_kl: need 1 <= n <= 30");
  if (!(q > 0 && q < 1)) throw std::domain_error("fano_kl: need q in (0, 1)");
  const double space = std::ldexp(1.0, n);
  return (space * q - 1.0) / (space - 1.0) * (std::log(q) - std::log((1.0 - q) / (space - 1.0)));
}

double fano_sample_bound(int n, int k) {
  if (k < 1 || k >= n) throw std::invalid_argument("fano_sample_bound: need 1 <= k < n");
  const double log2 = std::log(2.0);
  return (k * std::log(static_cast<double>(n)) - k * std::log(static_cast<double>(k)) -
          2.0 * log2) /
         (2.0 * log2);
}

}  // namespace lig
