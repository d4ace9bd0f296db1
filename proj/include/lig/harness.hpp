#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lig/game.hpp"
#include "lig/logistic.hpp"
#include "lig/noise.hpp"

namespace lig {

enum class NoiseKind { global, local };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& s);

/// One phase-transition experiment: a full factorial over
/// (n, k, c, trial), with m = floor(C_k 10^c k^2 log(6 n^2 / delta)).
struct ExperimentConfig {
  std::vector<int> n_list{10};
  std::vector<int> k_list{1};
  NoiseKind noise = NoiseKind::global;
  double q_g = 0.01;
  double q_local = 0.6;
  double delta = 0.01;
  // 0.02 puts the default schedule below the weak q_g = 0.01 signal level;
  // the transition then lands inside the default grid for both noise models.
  double lambda_multiplier = 0.02;
  std::vector<double> c_grid{-3.0, -2.5, -2.0, -1.5, -1.0, -0.5, 0.0, 0.25};
  std::map<int, double> big_c;  // per-k base constant; missing k falls back to defaults
  int trials = 40;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  int threads = 0;  // 0 = hardware concurrency
  int max_redraws = 100;
  SolverConfig solver;  // lambda is overwritten per trial
};

void validate(const ExperimentConfig& cfg);

/// Base constant for k: any explicit entry wins, else 10000 for k = 1 and
/// 1000 otherwise.
double big_c_for_k(const ExperimentConfig& cfg, int k);

/// floor(C 10^c k^2 log(6 n^2 / delta)), clamped to at least one sample.
long sample_count(double big_c, double c, int k, int n, double delta);

/// Per-trial seed: splitmix64 fold of (master, n, k, bits of c, trial).
std::uint64_t trial_seed(std::uint64_t master, int n, int k, double c, int trial);

struct TrialRecord {
  int n = 0;
  int k = 0;
  double c = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  long m = 0;
  double lambda = 0;
  bool recovered = false;
  double rho_min = 0;
  int psne_size = 0;
  int solver_iters = 0;  // max over the n per-player fits
  double wall_ms = 0;    // in-memory diagnostic; kept out of the CSVs so reruns are byte-identical
  int redraws = 0;
  bool degenerate = false;
  std::string error;
};

/// Game + model drawn for one trial, with the redraw bookkeeping.
/// Draws are retried while the PSNE set is empty, the minimum payoff is not
/// strictly positive, or the global q_g falls outside its admissible range.
struct TrialSetup {
  std::optional<Game> game;
  PsneSet psne;
  std::optional<NoiseModel> model;
  double rho_min = 0;
  int redraws = 0;
  bool ok = false;
};

TrialSetup draw_trial_game(int n, int k, NoiseKind noise, double q_g, double q_local,
                           int max_redraws, Rng& rng);

/// Generate, sample, fit, compare. Solver failures land in .error with
/// recovered = false; they never propagate.
TrialRecord run_trial(const ExperimentConfig& cfg, int n, int k, double c, int trial);

struct SweepResult {
  std::vector<TrialRecord> trials;
  std::string trials_csv;
  std::string aggregate_csv;
};

/// Runs the factorial on a worker pool (trials are independent; per-trial
/// seeds make scheduling irrelevant) and writes trials.csv plus aggregate.csv
/// under cfg.out_dir.
SweepResult run_sweep(const ExperimentConfig& cfg);

void write_trials_csv(std::ostream& os, const ExperimentConfig& cfg,
                      const std::vector<TrialRecord>& records);
void write_aggregate_csv(std::ostream& os, const ExperimentConfig& cfg,
                         const std::vector<TrialRecord>& records);

/// Joins a trials.csv with the exact theory quantities: constants, the
/// certified lambda window and sample requirement, the Fano lower bound, and
/// whether the run satisfied the guarantee's premises. Rows with n above the
/// exact-expectation cap (or degenerate/failed rows) are marked not_computed.
/// Games and models are rebuilt from each row's recorded seed, which requires
/// the same redraw limit the sweep used.
void annotate_csv(std::istream& in, std::ostream& out, int max_redraws = 100);

/// key=value config file, one entry per line, '#' comments.
ExperimentConfig parse_experiment_config(std::istream& is);

}  // namespace lig
