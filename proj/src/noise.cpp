#include "lig/noise.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "lig/format.hpp"

namespace lig {

namespace {

double pow2(int n) { return std::ldexp(1.0, n); }

}  // namespace

GlobalNoiseModel::GlobalNoiseModel(PsneSet psne, double q_g)
    : psne_(std::move(psne)), q_g_(q_g) {
  const int n = psne_.n;
  if (psne_.actions.empty()) {
    throw std::invalid_argument("GlobalNoiseModel: PSNE set must be nonempty");
  }
  const double total = pow2(n);
  if (psne_.size() >= total) {
    throw std::invalid_argument("GlobalNoiseModel: PSNE set must not cover the whole action space");
  }
  const double lo = psne_.size() / total;
  if (!(q_g_ > lo && q_g_ <= 1.0)) {
    throw std::invalid_argument("GlobalNoiseModel: q_g = " + format_double(q_g_) +
                                " outside admissible interval (" + format_double(lo) + ", 1]");
  }
}

LocalNoiseModel::LocalNoiseModel(PsneSet psne, Vector q)
    : psne_(std::move(psne)), q_(std::move(q)) {
  if (psne_.actions.empty()) {
    throw std::invalid_argument("LocalNoiseModel: PSNE set must be nonempty");
  }
  if (q_.size() != psne_.n) {
    throw std::invalid_argument("LocalNoiseModel: q must have one entry per player");
  }
  for (Eigen::Index i = 0; i < q_.size(); ++i) {
    if (!(q_[i] > 0.5 && q_[i] <= 1.0)) {
      throw std::invalid_argument("LocalNoiseModel: q[" + std::to_string(i) + "] = " +
                                  format_double(q_[i]) + " outside (0.5, 1]");
    }
  }
}

const PsneSet& psne_of(const NoiseModel& model) {
  return std::visit([](const auto& m) -> const PsneSet& { return m.psne(); }, model);
}

double pmf(const GlobalNoiseModel& model, JointAction x) {
  const double total = pow2(model.players());
  if (model.psne().contains(x)) {
    return model.q_g() / model.psne().size();
  }
  return (1.0 - model.q_g()) / (total - model.psne().size());
}

double pmf(const LocalNoiseModel& model, JointAction x) {
  const int n = model.players();
  const Vector& q = model.q();
  // log P(x | y) for each equilibrium y, then logsumexp across the mixture.
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(model.psne().actions.size());
  for (const JointAction y : model.psne().actions) {
    double lp = 0.0;
    for (int i = 0; i < n; ++i) {
      lp += std::log(x.spin(i) == y.spin(i) ? q[i] : 1.0 - q[i]);
    }
    terms.push_back(lp);
    max_term = std::max(max_term, lp);
  }
  if (max_term == -std::numeric_limits<double>::infinity()) return 0.0;
  double acc = 0.0;
  for (const double t : terms) acc += std::exp(t - max_term);
  return std::exp(max_term) * acc / model.psne().size();
}

double pmf(const NoiseModel& model, JointAction x) {
  return std::visit([x](const auto& m) { return pmf(m, x); }, model);
}

JointAction sample_one(const GlobalNoiseModel& model, Rng& rng) {
  if (bernoulli(rng, model.q_g())) {
    const auto idx = uniform_below(rng, model.psne().actions.size());
    return model.psne().actions[idx];
  }
  // Uniform over non-equilibria by rejection; acceptance is at least 1/2 for
  // any game whose equilibria fill at most half the action space, and the
  // loop terminates w.p. 1 regardless.
  const std::uint64_t space = std::uint64_t{1} << model.players();
  for (;;) {
    const JointAction x{static_cast<std::uint32_t>(uniform_below(rng, space))};
    if (!model.psne().contains(x)) return x;
  }
}

JointAction sample_one(const LocalNoiseModel& model, Rng& rng) {
  const auto idx = uniform_below(rng, model.psne().actions.size());
  std::uint32_t bits = model.psne().actions[idx].bits;
  for (int i = 0; i < model.players(); ++i) {
    if (bernoulli(rng, 1.0 - model.q()[i])) bits ^= std::uint32_t{1} << i;
  }
  return JointAction{bits};
}

namespace {

template <class Model>
std::vector<JointAction> sample_impl(const Model& model, long m, Rng& rng) {
  if (m < 1) throw std::invalid_argument("sample: need m >= 1");
  std::vector<JointAction> out;
  out.reserve(static_cast<std::size_t>(m));
  for (long l = 0; l < m; ++l) out.push_back(sample_one(model, rng));
  return out;
}

}  // namespace

std::vector<JointAction> sample(const GlobalNoiseModel& model, long m, Rng& rng) {
  return sample_impl(model, m, rng);
}

std::vector<JointAction> sample(const LocalNoiseModel& model, long m, Rng& rng) {
  return sample_impl(model, m, rng);
}

std::vector<JointAction> sample(const NoiseModel& model, long m, Rng& rng) {
  return std::visit([&](const auto& mod) { return sample_impl(mod, m, rng); }, model);
}

namespace {

DistributionConstants finish_constants(double tp_min, double tp_max, double p_max,
                                       double p_ne_min, int ne_size, int n) {
  DistributionConstants c;
  c.tp_min = tp_min;
  c.tp_max = tp_max;
  c.p_max = p_max;
  c.f_ne = ne_size / pow2(n - 1);
  const double off_hi = tp_max / (pow2(n) - ne_size);
  c.sandwich_holds = tp_min > 0.0 && off_hi < p_ne_min && p_max <= 1.0;
  return c;
}

}  // namespace

DistributionConstants constants(const GlobalNoiseModel& model) {
  const int n = model.players();
  const int ne = model.psne().size();
  const double tp = 1.0 - model.q_g();
  const double p_eq = model.q_g() / ne;
  return finish_constants(tp, tp, p_eq, p_eq, ne, n);
}

DistributionConstants constants(const LocalNoiseModel& model) {
  const int n = model.players();
  if (n > kMaxScanPlayers) {
    throw std::length_error("constants: n = " + std::to_string(n) + " exceeds scan limit " +
                            std::to_string(kMaxScanPlayers));
  }
  const int ne = model.psne().size();
  const std::uint32_t space = std::uint32_t{1} << n;
  double off_min = std::numeric_limits<double>::infinity();
  double off_max = 0.0;
  double eq_min = std::numeric_limits<double>::infinity();
  double eq_max = 0.0;
  for (std::uint32_t bits = 0; bits < space; ++bits) {
    const JointAction x{bits};
    const double p = pmf(model, x);
    if (model.psne().contains(x)) {
      eq_min = std::min(eq_min, p);
      eq_max = std::max(eq_max, p);
    } else {
      off_min = std::min(off_min, p);
      off_max = std::max(off_max, p);
    }
  }
  const double scale = pow2(n) - ne;
  return finish_constants(off_min * scale, off_max * scale, eq_max, eq_min, ne, n);
}

DistributionConstants constants(const NoiseModel& model) {
  return std::visit([](const auto& m) { return constants(m); }, model);
}

void write_dataset(std::ostream& os, const std::vector<JointAction>& data, int n,
                   const std::string& model_name, std::uint64_t seed) {
  os << n << ' ' << data.size() << ' ' << model_name << ' ' << seed << '\n';
  for (const JointAction x : data) {
    for (int i = 0; i < n; ++i) {
      if (i) os << ' ';
      os << x.spin(i);
    }
    os << '\n';
  }
}

Dataset read_dataset(std::istream& is) {
  Dataset d;
  std::size_t m = 0;
  if (!(is >> d.n >> m >> d.model_name >> d.seed) || d.n < 1) {
    throw std::runtime_error("read_dataset: bad header, expected 'n m model seed'");
  }
  d.actions.reserve(m);
  for (std::size_t l = 0; l < m; ++l) {
    std::uint32_t bits = 0;
    for (int i = 0; i < d.n; ++i) {
      int v = 0;
      if (!(is >> v) || (v != 1 && v != -1)) {
        throw std::runtime_error("read_dataset: expected +-1 entries");
      }
      if (v == 1) bits |= std::uint32_t{1} << i;
    }
    d.actions.push_back(JointAction{bits});
  }
  return d;
}

}  // namespace lig
