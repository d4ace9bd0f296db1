#include "lig/game.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "lig/format.hpp"

namespace lig {

Vector to_spin_vector(JointAction x, int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = x.spin(i);
  return v;
}

Game::Game(Matrix W, Vector b) : W_(std::move(W)), b_(std::move(b)) {
  const auto n = b_.size();
  if (n < 1) throw std::invalid_argument("Game: need at least one player");
  if (W_.rows() != n || W_.cols() != n) {
    throw std::invalid_argument("Game: W must be n x n with n = b.size()");
  }
  if (!W_.allFinite() || !b_.allFinite()) {
    throw std::invalid_argument("Game: weights and biases must be finite");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (W_(i, i) != 0.0) {
      throw std::invalid_argument("Game: diag(W) must be exactly zero");
    }
  }
}

Vector Game::player_parameters(int i) const {
  const int n = players();
  if (i < 0 || i >= n) throw std::invalid_argument("player_parameters: index out of range");
  Vector v(n);
  int p = 0;
  for (int j = 0; j < n; ++j) {
    if (j != i) v[p++] = W_(i, j);
  }
  v[n - 1] = -b_[i];
  return v;
}

bool PsneSet::contains(JointAction x) const {
  return std::binary_search(actions.begin(), actions.end(), x);
}

PsneSet make_psne_set(std::vector<JointAction> actions, int n) {
  if (n < 1 || n > kMaxEnumerationPlayers) {
    throw std::invalid_argument("make_psne_set: player count out of range");
  }
  std::sort(actions.begin(), actions.end());
  if (std::adjacent_find(actions.begin(), actions.end()) != actions.end()) {
    throw std::invalid_argument("make_psne_set: duplicate actions");
  }
  const std::uint32_t limit = std::uint32_t{1} << n;
  if (!actions.empty() && actions.back().bits >= limit) {
    throw std::invalid_argument("make_psne_set: action has bits outside [0, 2^n)");
  }
  return PsneSet{std::move(actions), n};
}

double payoff(const Game& g, int i, JointAction x) {
  const int n = g.players();
  if (i < 0 || i >= n) throw std::invalid_argument("payoff: player index out of range");
  const Matrix& W = g.weights();
  double s = 0.0;
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    s += W(i, j) * x.spin(j);
  }
  return x.spin(i) * (s - g.biases()[i]);
}

PsneSet enumerate_psne(const Game& g) {
  const int n = g.players();
  if (n > kMaxEnumerationPlayers) {
    throw std::length_error("enumerate_psne: n = " + std::to_string(n) + " exceeds limit " +
                            std::to_string(kMaxEnumerationPlayers));
  }
  PsneSet out;
  out.n = n;
  const std::uint32_t limit = std::uint32_t{1} << n;
  for (std::uint32_t bits = 0; bits < limit; ++bits) {
    const JointAction x{bits};
    bool equilibrium = true;
    for (int i = 0; i < n && equilibrium; ++i) {
      equilibrium = payoff(g, i, x) >= 0.0;
    }
    if (equilibrium) out.actions.push_back(x);
  }
  return out;
}

double min_payoff_over_psne(const Game& g, const PsneSet& psne) {
  if (psne.actions.empty()) {
    throw std::domain_error("min_payoff_over_psne: empty PSNE set");
  }
  double lo = std::numeric_limits<double>::infinity();
  for (const JointAction x : psne.actions) {
    for (int i = 0; i < g.players(); ++i) {
      lo = std::min(lo, payoff(g, i, x));
    }
  }
  return lo;
}

Game generate_game(int n, int k, Rng& rng) {
  if (n < 2) throw std::invalid_argument("generate_game: need n >= 2");
  if (k < 1 || k > n - 1) {
    throw std::invalid_argument("generate_game: k must be in [1, n-1]");
  }
  Matrix W = Matrix::Zero(n, n);
  std::vector<int> cols(n - 1);
  for (int i = 0; i < n; ++i) {
    int p = 0;
    for (int j = 0; j < n; ++j) {
      if (j != i) cols[p++] = j;
    }
    // Partial Fisher-Yates: the first k entries end up uniform without
    // replacement among the n-1 off-diagonal columns.
    for (int t = 0; t < k; ++t) {
      const auto r = t + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(n - 1 - t)));
      std::swap(cols[t], cols[r]);
      W(i, cols[t]) = -1.0;
    }
  }
  return Game(std::move(W), Vector::Zero(n));
}

bool games_equivalent(const Game& a, const Game& b) {
  if (a.players() != b.players()) {
    throw std::invalid_argument("games_equivalent: player counts differ");
  }
  const PsneSet na = enumerate_psne(a);
  const PsneSet nb = enumerate_psne(b);
  return na.actions == nb.actions;
}

Vector feature_vector(JointAction x, int i, int n) {
  if (i < 0 || i >= n) throw std::invalid_argument("feature_vector: player index out of range");
  Vector z(n);
  const int xi = x.spin(i);
  int p = 0;
  for (int j = 0; j < n; ++j) {
    if (j != i) z[p++] = xi * x.spin(j);
  }
  z[n - 1] = xi;
  return z;
}

void write_game(std::ostream& os, const Game& g, int k) {
  const int n = g.players();
  os << n << ' ' << k << '\n';
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j) os << ' ';
      os << format_double(g.weights()(i, j));
    }
    os << '\n';
  }
  for (int i = 0; i < n; ++i) {
    if (i) os << ' ';
    os << format_double(g.biases()[i]);
  }
  os << '\n';
}

GameFile read_game(std::istream& is) {
  int n = 0, k = 0;
  if (!(is >> n >> k) || n < 1) {
    throw std::runtime_error("read_game: bad header line, expected 'n k'");
  }
  Matrix W(n, n);
  Vector b(n);
  std::string tok;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!(is >> tok)) throw std::runtime_error("read_game: truncated weight matrix");
      W(i, j) = parse_double(tok);
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!(is >> tok)) throw std::runtime_error("read_game: truncated bias row");
    b[i] = parse_double(tok);
  }
  return GameFile{Game(std::move(W), std::move(b)), k};
}

}  // namespace lig
