#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "lig/noise.hpp"

using namespace lig;

namespace {

// chi2.isf(0.001, 63): the 64-cell goodness-of-fit acceptance threshold
constexpr double kChi2Crit63 = 103.44237731987324;

PsneSet psne_from_bits(std::initializer_list<std::uint32_t> bits, int n) {
  std::vector<JointAction> actions;
  for (const std::uint32_t b : bits) actions.push_back(JointAction{b});
  return make_psne_set(std::move(actions), n);
}

PsneSet nonempty_game_psne(int n, int k, Rng& rng) {
  for (;;) {
    const PsneSet ne = enumerate_psne(generate_game(n, k, rng));
    if (!ne.actions.empty()) return ne;
  }
}

double chi_square_statistic(const NoiseModel& model, const std::vector<JointAction>& draws, int n) {
  std::vector<double> counts(std::size_t{1} << n, 0.0);
  for (const JointAction x : draws) counts[x.bits] += 1.0;
  double stat = 0.0;
  for (std::uint32_t bits = 0; bits < counts.size(); ++bits) {
    const double expected = static_cast<double>(draws.size()) * pmf(model, JointAction{bits});
    REQUIRE(expected > 0.0);
    const double diff = counts[bits] - expected;
    stat += diff * diff / expected;
  }
  return stat;
}

// direct-product local pmf, no log-space: the independent second pass
double local_pmf_oracle(const PsneSet& ne, const Vector& q, JointAction x) {
  double acc = 0.0;
  for (const JointAction y : ne.actions) {
    double term = 1.0;
    for (int i = 0; i < ne.n; ++i) {
      term *= x.spin(i) == y.spin(i) ? q[i] : 1.0 - q[i];
    }
    acc += term;
  }
  return acc / ne.size();
}

JointAction permute_action(JointAction x, const std::vector<int>& perm) {
  std::uint32_t bits = 0;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if ((x.bits >> i) & 1u) bits |= std::uint32_t{1} << perm[i];
  }
  return JointAction{bits};
}

}  // namespace

TEST_SUITE("noise") {

TEST_CASE("global pmf takes its two closed-form branches") {
  const GlobalNoiseModel model(psne_from_bits({0b000, 0b111}, 3), 0.5);
  CHECK(pmf(model, JointAction{0b000}) == 0.25);
  CHECK(pmf(model, JointAction{0b111}) == 0.25);
  CHECK(pmf(model, JointAction{0b001}) == doctest::Approx(0.5 / 6.0).epsilon(1e-15));
}

TEST_CASE("global pmf at the lower-bound signal level q = 1/n") {
  const GlobalNoiseModel model(psne_from_bits({0b0101}, 4), 0.25);
  CHECK(pmf(model, JointAction{0b0101}) == 0.25);
  for (std::uint32_t bits = 0; bits < 16; ++bits) {
    if (bits != 0b0101) CHECK(pmf(model, JointAction{bits}) == 0.05);
  }
}

TEST_CASE("both pmfs are exhaustively normalized") {
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 4 + static_cast<int>(uniform_below(rng, 5));  // 4..8
    const PsneSet ne = nonempty_game_psne(n, 1 + static_cast<int>(uniform_below(rng, 2)), rng);
    if (ne.size() == (1 << n)) continue;

    const double lo = static_cast<double>(ne.size()) / (1 << n);
    const GlobalNoiseModel global(ne, lo + (1.0 - lo) * (0.05 + 0.9 * uniform01(rng)));
    Vector q(n);
    for (int i = 0; i < n; ++i) q[i] = 0.5 + 0.5 * (0.1 + 0.9 * uniform01(rng));
    const LocalNoiseModel local(ne, q);

    double sum_g = 0.0, sum_l = 0.0;
    for (std::uint32_t bits = 0; bits < (std::uint32_t{1} << n); ++bits) {
      sum_g += pmf(global, JointAction{bits});
      sum_l += pmf(local, JointAction{bits});
    }
    CHECK(std::abs(sum_g - 1.0) <= 1e-12);
    CHECK(std::abs(sum_l - 1.0) <= 1e-12);
  }
}

TEST_CASE("noiseless local model concentrates on its equilibrium") {
  const LocalNoiseModel model(psne_from_bits({0b101}, 3), Vector::Ones(3));
  CHECK(pmf(model, JointAction{0b101}) == 1.0);
  for (std::uint32_t bits = 0; bits < 8; ++bits) {
    if (bits != 0b101) CHECK(pmf(model, JointAction{bits}) == 0.0);
  }
}

TEST_CASE("two-player local pmf matches the direct products") {
  Vector q(2);
  q << 0.6, 0.6;
  const LocalNoiseModel model(psne_from_bits({0b11}, 2), q);
  CHECK(pmf(model, JointAction{0b11}) == doctest::Approx(0.36).epsilon(1e-15));
  CHECK(pmf(model, JointAction{0b00}) == doctest::Approx(0.16).epsilon(1e-15));
  CHECK(pmf(model, JointAction{0b01}) == doctest::Approx(0.24).epsilon(1e-15));
  CHECK(pmf(model, JointAction{0b10}) == doctest::Approx(0.24).epsilon(1e-15));
}

TEST_CASE("local pmf equals an independent direct-product scan") {
  Rng rng(19);
  const PsneSet ne = nonempty_game_psne(8, 3, rng);
  Vector q(8);
  for (int i = 0; i < 8; ++i) q[i] = 0.55 + 0.44 * uniform01(rng);
  const LocalNoiseModel model(ne, q);
  for (std::uint32_t bits = 0; bits < 256; ++bits) {
    const double got = pmf(model, JointAction{bits});
    const double want = local_pmf_oracle(ne, q, JointAction{bits});
    CHECK(std::abs(got - want) <= 1e-12 * std::max(1.0, want));
  }
}

TEST_CASE("local pmf is symmetric under simultaneous player permutation") {
  Rng rng(21);
  const PsneSet ne = nonempty_game_psne(6, 1, rng);
  Vector q(6);
  for (int i = 0; i < 6; ++i) q[i] = 0.55 + 0.4 * uniform01(rng);

  std::vector<int> perm{3, 0, 5, 1, 4, 2};
  std::vector<JointAction> permuted_actions;
  for (const JointAction y : ne.actions) permuted_actions.push_back(permute_action(y, perm));
  const PsneSet ne_perm = make_psne_set(std::move(permuted_actions), 6);
  Vector q_perm(6);
  for (int i = 0; i < 6; ++i) q_perm[perm[i]] = q[i];

  const LocalNoiseModel model(ne, q);
  const LocalNoiseModel model_perm(ne_perm, q_perm);
  for (std::uint32_t bits = 0; bits < 64; ++bits) {
    const JointAction x{bits};
    CHECK(pmf(model, x) ==
          doctest::Approx(pmf(model_perm, permute_action(x, perm))).epsilon(1e-13));
  }
}

TEST_CASE("boundary q_g = 1 samples only equilibria") {
  Rng rng(25);
  const PsneSet ne = psne_from_bits({0b0011, 0b1100}, 4);
  const GlobalNoiseModel model(ne, 1.0);
  for (const JointAction x : sample(model, 500, rng)) CHECK(ne.contains(x));
}

TEST_CASE("noiseless local sampler emits only equilibria") {
  Rng rng(27);
  const PsneSet ne = psne_from_bits({0b0110, 0b1001}, 4);
  const LocalNoiseModel model(ne, Vector::Ones(4));
  for (const JointAction x : sample(model, 500, rng)) CHECK(ne.contains(x));
}

TEST_CASE("sample requires a positive count") {
  Rng rng(1);
  const GlobalNoiseModel model(psne_from_bits({0b01}, 2), 0.9);
  CHECK_THROWS_AS(sample(model, 0, rng), std::invalid_argument);
}

TEST_CASE("empirical global frequencies pass the chi-square gate") {
  Rng rng(33);
  const PsneSet ne = nonempty_game_psne(6, 1, rng);
  const NoiseModel model{GlobalNoiseModel(ne, 0.3)};
  const auto draws = sample(model, 200000, rng);
  CHECK(chi_square_statistic(model, draws, 6) < kChi2Crit63);
}

TEST_CASE("empirical local frequencies pass the chi-square gate") {
  Rng rng(35);
  const PsneSet ne = nonempty_game_psne(6, 1, rng);
  const NoiseModel model{LocalNoiseModel(ne, Vector::Constant(6, 0.7))};
  const auto draws = sample(model, 200000, rng);
  CHECK(chi_square_statistic(model, draws, 6) < kChi2Crit63);
}

TEST_CASE("global constants follow their closed forms") {
  const PsneSet ne = psne_from_bits({0b001, 0b010, 0b100}, 3);
  const DistributionConstants c = constants(GlobalNoiseModel(ne, 0.9));
  CHECK(c.tp_min == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(c.tp_max == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(c.p_max == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(c.sandwich_holds);
}

TEST_CASE("equilibrium fraction is measured against the half-space cap") {
  const PsneSet ne = psne_from_bits({0b0000, 0b1111}, 4);
  CHECK(constants(GlobalNoiseModel(ne, 0.5)).f_ne == 0.25);
}

TEST_CASE("noiseless boundary violates the distribution sandwich") {
  const DistributionConstants c = constants(GlobalNoiseModel(psne_from_bits({0b11}, 2), 1.0));
  CHECK(c.tp_min == 0.0);
  CHECK(!c.sandwich_holds);
  const DistributionConstants cl =
      constants(LocalNoiseModel(psne_from_bits({0b11}, 2), Vector::Ones(2)));
  CHECK(cl.tp_min == 0.0);
  CHECK(cl.tp_max == 0.0);
  CHECK(!cl.sandwich_holds);
}

TEST_CASE("global sandwich holds across random admissible models") {
  Rng rng(39);
  for (int rep = 0; rep < 25; ++rep) {
    const int n = 4 + static_cast<int>(uniform_below(rng, 4));
    const PsneSet ne = nonempty_game_psne(n, 1, rng);
    if (ne.size() == (1 << n)) continue;
    const double lo = static_cast<double>(ne.size()) / (1 << n);
    const GlobalNoiseModel model(ne, lo + (1.0 - lo) * (0.02 + 0.9 * uniform01(rng)));
    CHECK(constants(model).sandwich_holds);
  }
}

TEST_CASE("local constants match the worked two-equilibrium example") {
  // NE = {x1, x2}: they differ only in player 0; everyone else plays +1.
  const int n = 5;
  const PsneSet ne = psne_from_bits({0b11111, 0b11110}, n);
  Vector q(n);
  q << 0.9, 0.8, 0.6, 0.7, 0.95;  // q[0] is irrelevant to the closed forms
  const DistributionConstants got = constants(LocalNoiseModel(ne, q));

  const double cells = std::ldexp(1.0, n) - 2.0;
  double tp_min = 0.5 * cells, p_max = 0.5;
  for (int i = 1; i < n; ++i) {
    tp_min *= 1.0 - q[i];
    p_max *= q[i];
  }
  double qj = 2.0;
  for (int i = 1; i < n; ++i) qj = std::min(qj, q[i]);
  double tp_max = 0.5 * (1.0 - qj) * cells;
  for (int i = 1; i < n; ++i) {
    if (q[i] != qj) tp_max *= q[i];
  }

  CHECK(std::abs(got.tp_min - tp_min) <= 1e-12);
  CHECK(std::abs(got.tp_max - tp_max) <= 1e-12);
  CHECK(std::abs(got.p_max - p_max) <= 1e-12);
  CHECK(got.sandwich_holds);
}

TEST_CASE("local constants agree with an independent scan") {
  Rng rng(45);
  const PsneSet ne = nonempty_game_psne(8, 1, rng);
  Vector q(8);
  for (int i = 0; i < 8; ++i) q[i] = 0.6 + 0.35 * uniform01(rng);
  const DistributionConstants got = constants(LocalNoiseModel(ne, q));

  double off_min = 1e300, off_max = 0.0, eq_max = 0.0;
  for (std::uint32_t bits = 0; bits < 256; ++bits) {
    const double p = local_pmf_oracle(ne, q, JointAction{bits});
    if (ne.contains(JointAction{bits})) {
      eq_max = std::max(eq_max, p);
    } else {
      off_min = std::min(off_min, p);
      off_max = std::max(off_max, p);
    }
  }
  const double scale = 256.0 - ne.size();
  CHECK(std::abs(got.tp_min - off_min * scale) <= 1e-12);
  CHECK(std::abs(got.tp_max - off_max * scale) <= 1e-12);
  CHECK(std::abs(got.p_max - eq_max) <= 1e-12);
}

TEST_CASE("global masses are uniform within each branch") {
  Rng rng(47);
  const PsneSet ne = nonempty_game_psne(7, 2, rng);
  const double lo = static_cast<double>(ne.size()) / (1 << 7);
  if (lo >= 0.9) return;
  const GlobalNoiseModel model(ne, std::max(0.4, lo + 0.01));
  double eq_mass = -1.0, off_mass = -1.0;
  for (std::uint32_t bits = 0; bits < 128; ++bits) {
    const double p = pmf(model, JointAction{bits});
    double& slot = ne.contains(JointAction{bits}) ? eq_mass : off_mass;
    if (slot < 0) slot = p;
    CHECK(p == slot);
  }
}

TEST_CASE("model constructors reject out-of-range parameters") {
  const PsneSet ne = psne_from_bits({0b01}, 2);
  CHECK_THROWS_WITH_AS(GlobalNoiseModel(ne, 0.25), doctest::Contains("(0.25, 1]"),
                       std::invalid_argument);
  CHECK_THROWS_AS(GlobalNoiseModel(ne, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(GlobalNoiseModel(make_psne_set({}, 2), 0.9), std::invalid_argument);
  CHECK_THROWS_AS(
      GlobalNoiseModel(psne_from_bits({0b00, 0b01, 0b10, 0b11}, 2), 0.9),
      std::invalid_argument);
  CHECK_THROWS_AS(LocalNoiseModel(ne, Vector::Constant(2, 0.5)), std::invalid_argument);
  CHECK_THROWS_AS(LocalNoiseModel(ne, Vector::Constant(2, 1.1)), std::invalid_argument);
  CHECK_THROWS_AS(LocalNoiseModel(make_psne_set({}, 2), Vector::Constant(2, 0.8)),
                  std::invalid_argument);
}

TEST_CASE("datasets round-trip bit-exactly") {
  Rng rng(49);
  const PsneSet ne = nonempty_game_psne(5, 1, rng);
  const NoiseModel model{GlobalNoiseModel(ne, 0.4)};
  const auto draws = sample(model, 200, rng);
  std::stringstream ss;
  write_dataset(ss, draws, 5, "global", 777);
  const Dataset back = read_dataset(ss);
  CHECK(back.n == 5);
  CHECK(back.model_name == "global");
  CHECK(back.seed == 777);
  REQUIRE(back.actions.size() == draws.size());
  for (std::size_t l = 0; l < draws.size(); ++l) CHECK(back.actions[l] == draws[l]);
}

TEST_CASE("dataset reader rejects non-sign entries") {
  std::stringstream ss("2 1 global 0\n1 2\n");
  CHECK_THROWS_AS(read_dataset(ss), std::runtime_error);
}

}  // TEST_SUITE
