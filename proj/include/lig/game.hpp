#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "lig/rng.hpp"

namespace lig {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Exhaustive PSNE enumeration sweeps all 2^n joint actions; refuse above this.
inline constexpr int kMaxEnumerationPlayers = 24;

/// One joint action of n binary players, bit-packed.
/// Bit i set means x_i = +1, bit i clear means x_i = -1. This is the single
/// canonical encoding used everywhere (samplers, datasets, feature vectors).
struct JointAction {
  std::uint32_t bits = 0;

  int spin(int i) const { return (bits >> i) & 1u ? 1 : -1; }
  friend auto operator<=>(const JointAction&, const JointAction&) = default;
};

Vector to_spin_vector(JointAction x, int n);

/// Linear influence game over n binary players. Player i's payoff at joint
/// action x is x_i (sum_{j != i} W(i,j) x_j - b(i)). diag(W) is exactly zero.
class Game {
 public:
  Game(Matrix W, Vector b);

  int players() const { return static_cast<int>(b_.size()); }
  const Matrix& weights() const { return W_; }
  const Vector& biases() const { return b_; }

  /// Parameter vector v_i = (w_{i,-i}, -b_i): the n-1 off-diagonal weights of
  /// row i in ascending column order, then -b_i.
  Vector player_parameters(int i) const;

 private:
  Matrix W_;
  Vector b_;
};

/// The exact equilibrium set of a game: distinct actions, ascending by bits.
struct PsneSet {
  std::vector<JointAction> actions;
  int n = 0;

  int size() const { return static_cast<int>(actions.size()); }
  bool contains(JointAction x) const;
};

/// Validates range/order/distinctness; sorts if needed.
PsneSet make_psne_set(std::vector<JointAction> actions, int n);

/// Payoff of player i at x. Summation runs over ascending j for bitwise
/// reproducibility; enumerate_psne evaluates through this same path.
double payoff(const Game& g, int i, JointAction x);

/// All x with payoff(g, i, x) >= 0 for every player i, sorted ascending.
PsneSet enumerate_psne(const Game& g);

/// rho_min: the smallest payoff any player gets at any equilibrium.
double min_payoff_over_psne(const Game& g, const PsneSet& psne);

/// Random sparse game: k off-diagonal entries per row set to -1, positions
/// uniform without replacement (Fisher-Yates partial shuffle), all biases 0.
Game generate_game(int n, int k, Rng& rng);

/// Two games are equivalent iff they induce the same PSNE set.
bool games_equivalent(const Game& a, const Game& b);

/// Feature vector z_i(x) = (x_i x_j for j != i ascending, x_i); length n,
/// entries are +-1. Satisfies v_i^T z_i(x) = payoff(g, i, x).
Vector feature_vector(JointAction x, int i, int n);

/// Text format: line 1 "n k", then n weight rows, then one bias row.
/// Doubles print in shortest round-trip form, so read(write(g)) is bit-exact.
void write_game(std::ostream& os, const Game& g, int k);

struct GameFile {
  Game game;
  int k;
};
GameFile read_game(std::istream& is);

}  // namespace lig
