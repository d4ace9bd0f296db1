#pragma once

#include <vector>

#include "lig/game.hpp"
#include "lig/noise.hpp"
#include "lig/rng.hpp"

namespace lig {

/// Exact population expectations sweep all 2^n actions; keep that desk-scale.
inline constexpr int kMaxExactExpectationPlayers = 16;

/// Constants governing one player's recovery guarantee.
///
/// c_min / d_max are the extreme eigenvalues of the expected support-restricted
/// Hessian E[eta(v*^T z) z_S z_S^T] and scatter E[z_S z_S^T]. kappa, nu and K
/// are the gradient-bound and window constants; K here is instantiated with
/// k = support_size (recovery_window re-derives it for any sparsity bound).
struct TheoryConstants {
  double c_min = 0;
  double d_max = 0;
  double kappa = 0;
  double nu = 0;
  double K = 0;
  double rho_min = 0;
  // carried along so downstream bounds need no model re-scan
  double tp_min = 0;
  double tp_max = 0;
  double p_max = 0;
  double f_ne = 0;
  double psne_mass = 0;  // sum of P(x) over the equilibrium set
  std::vector<int> support;
  int support_size = 0;
};

/// Exact constants for player i of the game under the given observation
/// model, by pmf-weighted sweep over all 2^n joint actions (n <= 16).
/// The support S is the set of nonzero coordinates of v_i = (w_{i,-i}, -b_i).
TheoryConstants compute_constants(const Game& game, const NoiseModel& model, int i);

struct RecoveryWindow {
  double K = 0;
  double lambda_lo = 0;
  double lambda_hi = 0;
  double m_required = 0;
  bool window_nonempty = false;
  bool m_sufficient = false;
};

/// The admissible regularization interval and sample requirement:
///   nu + s <= lambda <= 2K + nu - s   with   s = sqrt((2/m) log(6 n^2 / delta)),
///   m_required = max{ (2/K^2) log(6n^2/d), (2k/c_min) log(3kn/d), (4k/tp_min) log(3kn/d) }.
/// K <= 0 is reported as an empty window, never thrown.
RecoveryWindow recovery_window(const TheoryConstants& tc, int n, int k, long m, double delta);

/// Hard instance family: per k-subset of influential players, a complete
/// bipartite graph of -1 weights from the subset to everyone else, bias +1 on
/// the subset and 0 elsewhere. Every member has a distinct singleton PSNE.
struct FanoEnsemble {
  int n = 0;
  int k = 0;
  std::vector<Game> members;
  std::vector<JointAction> equilibria;  // the one equilibrium of each member
};

/// All C(n, k) members when that is <= cap, else cap distinct subsets drawn
/// uniformly. Construction invariants are verified exhaustively at n <= 16.
FanoEnsemble build_fano_ensemble(int n, int k, long cap, Rng& rng);

/// Per-sample KL divergence between the global-noise distributions of two
/// distinct singleton-PSNE ensemble members at signal level q:
///   (2^n q - 1)/(2^n - 1) * (log q - log((1-q)/(2^n - 1))).
double fano_kl(int n, double q);

/// Sample count below which no decoder can beat error probability 1/2 on the
/// ensemble: (k log n - k log k - 2 log 2) / (2 log 2).
double fano_sample_bound(int n, int k);

}  // namespace lig
