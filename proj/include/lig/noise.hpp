#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "lig/game.hpp"
#include "lig/rng.hpp"

namespace lig {

/// Exhaustive scans over the action space cap out here, like enumeration.
inline constexpr int kMaxScanPlayers = kMaxEnumerationPlayers;

/// Mixture that puts mass q_g uniformly on the equilibria and 1 - q_g
/// uniformly on the non-equilibria. Requires q_g in (|NE|/2^n, 1]; the upper
/// boundary q_g = 1 is admitted so noiseless tests can run.
class GlobalNoiseModel {
 public:
  GlobalNoiseModel(PsneSet psne, double q_g);

  const PsneSet& psne() const { return psne_; }
  double q_g() const { return q_g_; }
  int players() const { return psne_.n; }

 private:
  PsneSet psne_;
  double q_g_;
};

/// Uniform equilibrium choice followed by independent per-player corruption:
/// player i keeps the equilibrium action with probability q_i in (0.5, 1].
class LocalNoiseModel {
 public:
  LocalNoiseModel(PsneSet psne, Vector q);

  const PsneSet& psne() const { return psne_; }
  const Vector& q() const { return q_; }
  int players() const { return psne_.n; }

 private:
  PsneSet psne_;
  Vector q_;
};

using NoiseModel = std::variant<GlobalNoiseModel, LocalNoiseModel>;

const PsneSet& psne_of(const NoiseModel& model);

double pmf(const GlobalNoiseModel& model, JointAction x);
/// Mixture over equilibria evaluated as logsumexp of per-equilibrium
/// Bernoulli-product log terms; immune to underflow for any n.
double pmf(const LocalNoiseModel& model, JointAction x);
double pmf(const NoiseModel& model, JointAction x);

JointAction sample_one(const GlobalNoiseModel& model, Rng& rng);
JointAction sample_one(const LocalNoiseModel& model, Rng& rng);
std::vector<JointAction> sample(const GlobalNoiseModel& model, long m, Rng& rng);
std::vector<JointAction> sample(const LocalNoiseModel& model, long m, Rng& rng);
std::vector<JointAction> sample(const NoiseModel& model, long m, Rng& rng);

/// The distribution-side constants of the learnability conditions.
/// On/off the equilibrium set the pmf is sandwiched by
///   tp_min/(2^n - |NE|) <= P(x) <= tp_max/(2^n - |NE|)   for x outside NE,
///   tp_max/(2^n - |NE|) <  P(x) <= p_max                 for x inside NE,
/// and f_ne = |NE| / 2^(n-1). sandwich_holds reports whether the sandwich
/// (with its strict inequalities) actually holds; violations are reported,
/// never thrown, so degenerate regimes stay explorable.
struct DistributionConstants {
  double tp_min = 0;
  double tp_max = 0;
  double p_max = 0;
  double f_ne = 0;
  bool sandwich_holds = false;
};

/// Closed forms: tp_min = tp_max = 1 - q_g, p_max = q_g / |NE|.
DistributionConstants constants(const GlobalNoiseModel& model);
/// Exhaustive scan over all 2^n actions (n <= kMaxScanPlayers).
DistributionConstants constants(const LocalNoiseModel& model);
DistributionConstants constants(const NoiseModel& model);

/// Dataset text format: header "n m model seed", then m rows of n
/// space-separated +-1 values. Round-trips bit-exactly.
void write_dataset(std::ostream& os, const std::vector<JointAction>& data, int n,
                   const std::string& model_name, std::uint64_t seed);

struct Dataset {
  int n = 0;
  std::vector<JointAction> actions;
  std::string model_name;
  std::uint64_t seed = 0;
};
Dataset read_dataset(std::istream& is);

}  // namespace lig
