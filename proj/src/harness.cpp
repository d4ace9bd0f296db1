#include "lig/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "lig/format.hpp"
#include "lig/theory.hpp"

namespace lig {

std::string to_string(NoiseKind kind) {
  return kind == NoiseKind::global ? "global" : "local";
}

NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "global") return NoiseKind::global;
  if (s == "local") return NoiseKind::local;
  throw std::invalid_argument("noise model must be 'global' or 'local', got '" + s + "'");
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.n_list.empty() || cfg.k_list.empty()) {
    throw std::invalid_argument("config: n and k lists must be nonempty");
  }
  for (const int n : cfg.n_list) {
    if (n < 2 || n > kMaxEnumerationPlayers) {
      throw std::invalid_argument("config: n must be in [2, " +
                                  std::to_string(kMaxEnumerationPlayers) + "]");
    }
    for (const int k : cfg.k_list) {
      if (k < 1 || k > n - 1) {
        throw std::invalid_argument("config: every (n, k) pair needs 1 <= k <= n-1");
      }
    }
  }
  if (cfg.c_grid.empty()) throw std::invalid_argument("config: c grid must be nonempty");
  if (cfg.trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (!(cfg.delta > 0 && cfg.delta < 1)) throw std::invalid_argument("config: delta must be in (0, 1)");
  if (!(cfg.q_g > 0 && cfg.q_g <= 1)) throw std::invalid_argument("config: qg must be in (0, 1]");
  if (!(cfg.q_local > 0.5 && cfg.q_local <= 1)) {
    throw std::invalid_argument("config: q must be in (0.5, 1]");
  }
  if (!(cfg.lambda_multiplier > 0)) {
    throw std::invalid_argument("config: lambda multiplier must be > 0");
  }
  if (cfg.max_redraws < 0) throw std::invalid_argument("config: max_redraws must be >= 0");
  if (cfg.threads < 0) throw std::invalid_argument("config: threads must be >= 0");
}

double big_c_for_k(const ExperimentConfig& cfg, int k) {
  if (const auto it = cfg.big_c.find(k); it != cfg.big_c.end()) return it->second;
  return k == 1 ? 10000.0 : 1000.0;
}

long sample_count(double big_c, double c, int k, int n, double delta) {
  const double raw = std::floor(big_c * std::pow(10.0, c) * static_cast<double>(k) * k *
                                std::log(6.0 * n * n / delta));
  if (!(raw >= 1.0)) return 1;
  if (raw > 1e12) throw std::invalid_argument("sample_count: m = " + format_double(raw) +
                                              " is beyond any desk-scale run");
  return static_cast<long>(raw);
}

std::uint64_t trial_seed(std::uint64_t master, int n, int k, double c, int trial) {
  std::uint64_t h = mix64(master);
  h = seed_chain(h, static_cast<std::uint64_t>(n));
  h = seed_chain(h, static_cast<std::uint64_t>(k));
  h = seed_chain(h, std::bit_cast<std::uint64_t>(c));
  h = seed_chain(h, static_cast<std::uint64_t>(trial));
  return h;
}

TrialSetup draw_trial_game(int n, int k, NoiseKind noise, double q_g, double q_local,
                           int max_redraws, Rng& rng) {
  TrialSetup setup;
  for (int attempt = 0; attempt <= max_redraws; ++attempt) {
    Game game = generate_game(n, k, rng);
    PsneSet psne = enumerate_psne(game);
    if (psne.actions.empty()) {
      ++setup.redraws;
      continue;
    }
    const double rho = min_payoff_over_psne(game, psne);
    if (!(rho > 0)) {
      ++setup.redraws;
      continue;
    }
    if (noise == NoiseKind::global) {
      const double lo = psne.size() / std::ldexp(1.0, n);
      if (!(q_g > lo)) {  // equilibrium set too large for this signal level
        ++setup.redraws;
        continue;
      }
      setup.model = NoiseModel{GlobalNoiseModel(psne, q_g)};
    } else {
      setup.model = NoiseModel{LocalNoiseModel(psne, Vector::Constant(n, q_local))};
    }
    setup.game = std::move(game);
    setup.psne = std::move(psne);
    setup.rho_min = rho;
    setup.ok = true;
    return setup;
  }
  return setup;
}

namespace {

std::string sanitize_error(std::string msg) {
  for (char& ch : msg) {
    if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ';';
  }
  return msg;
}

}  // namespace

TrialRecord run_trial(const ExperimentConfig& cfg, int n, int k, double c, int trial) {
  TrialRecord rec;
  rec.n = n;
  rec.k = k;
  rec.c = c;
  rec.trial = trial;
  rec.seed = trial_seed(cfg.seed, n, k, c, trial);
  rec.m = sample_count(big_c_for_k(cfg, k), c, k, n, cfg.delta);
  rec.lambda = lambda_schedule(rec.m, n, cfg.delta, cfg.lambda_multiplier);
  rec.rho_min = std::numeric_limits<double>::quiet_NaN();

  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(rec.seed);
  TrialSetup setup =
      draw_trial_game(n, k, cfg.noise, cfg.q_g, cfg.q_local, cfg.max_redraws, rng);
  rec.redraws = setup.redraws;
  if (!setup.ok) {
    rec.degenerate = true;
    rec.error = "no-valid-game";
  } else {
    rec.rho_min = setup.rho_min;
    rec.psne_size = setup.psne.size();
    try {
      const std::vector<JointAction> data = sample(*setup.model, rec.m, rng);
      SolverConfig solver = cfg.solver;
      solver.lambda = rec.lambda;
      const GameFit fit = fit_game(data, n, solver);
      rec.solver_iters = fit.max_iters_used();
      rec.recovered = games_equivalent(*setup.game, fit.game);
    } catch (const std::exception& e) {
      rec.recovered = false;
      rec.error = sanitize_error(e.what());
    }
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  return rec;
}

namespace {

struct TrialSpec {
  int n, k, trial;
  double c;
};

std::vector<TrialSpec> factorial(const ExperimentConfig& cfg) {
  std::vector<TrialSpec> specs;
  for (const int n : cfg.n_list) {
    for (const int k : cfg.k_list) {
      for (const double c : cfg.c_grid) {
        for (int t = 0; t < cfg.trials; ++t) specs.push_back({n, k, t, c});
      }
    }
  }
  return specs;
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  const std::vector<TrialSpec> specs = factorial(cfg);
  std::vector<TrialRecord> records(specs.size());

  unsigned workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, specs.size());
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= specs.size()) return;
      const TrialSpec& s = specs[idx];
      try {
        records[idx] = run_trial(cfg, s.n, s.k, s.c, s.trial);
      } catch (const std::exception& e) {
        TrialRecord& rec = records[idx];
        rec.n = s.n;
        rec.k = s.k;
        rec.c = s.c;
        rec.trial = s.trial;
        rec.seed = trial_seed(cfg.seed, s.n, s.k, s.c, s.trial);
        rec.rho_min = std::numeric_limits<double>::quiet_NaN();
        rec.degenerate = true;
        rec.error = sanitize_error(e.what());
      }
    }
  };
  if (workers <= 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    for (std::thread& th : pool) th.join();
  }

  // progress summary per cell, stderr only
  for (std::size_t i = 0; i < records.size();) {
    std::size_t j = i;
    int hits = 0;
    double ms = 0;
    while (j < records.size() && records[j].n == records[i].n && records[j].k == records[i].k &&
           records[j].c == records[i].c) {
      hits += records[j].recovered ? 1 : 0;
      ms += records[j].wall_ms;
      ++j;
    }
    std::cerr << "[sweep] n=" << records[i].n << " k=" << records[i].k
              << " c=" << format_double(records[i].c) << " m=" << records[i].m << " recovered "
              << hits << "/" << (j - i) << " (" << format_double(ms / 1000.0) << "s cpu)\n";
    i = j;
  }

  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  SweepResult result;
  result.trials = std::move(records);
  result.trials_csv = (fs::path(cfg.out_dir) / "trials.csv").string();
  result.aggregate_csv = (fs::path(cfg.out_dir) / "aggregate.csv").string();
  {
    std::ofstream os(result.trials_csv);
    write_trials_csv(os, cfg, result.trials);
    if (!os) throw std::runtime_error("run_sweep: failed writing " + result.trials_csv);
  }
  {
    std::ofstream os(result.aggregate_csv);
    write_aggregate_csv(os, cfg, result.trials);
    if (!os) throw std::runtime_error("run_sweep: failed writing " + result.aggregate_csv);
  }
  return result;
}

void write_trials_csv(std::ostream& os, const ExperimentConfig& cfg,
                      const std::vector<TrialRecord>& records) {
  os << "n,k,c,trial,seed,m,lambda,recovered,rho_min,psne_size,solver_iters,redraws,"
        "degenerate,error,noise,q,delta\n";
  const double q = cfg.noise == NoiseKind::global ? cfg.q_g : cfg.q_local;
  for (const TrialRecord& r : records) {
    os << r.n << ',' << r.k << ',' << format_double(r.c) << ',' << r.trial << ',' << r.seed << ','
       << r.m << ',' << format_double(r.lambda) << ',' << (r.recovered ? 1 : 0) << ','
       << format_double(r.rho_min) << ',' << r.psne_size << ',' << r.solver_iters << ','
       << r.redraws << ',' << (r.degenerate ? 1 : 0) << ',' << r.error << ','
       << to_string(cfg.noise) << ',' << format_double(q) << ',' << format_double(cfg.delta)
       << '\n';
  }
}

void write_aggregate_csv(std::ostream& os, const ExperimentConfig& cfg,
                         const std::vector<TrialRecord>& records) {
  os << "n,k,c,m,trials,recovered_count,probability\n";
  for (std::size_t i = 0; i < records.size();) {
    std::size_t j = i;
    int hits = 0;
    while (j < records.size() && records[j].n == records[i].n && records[j].k == records[i].k &&
           records[j].c == records[i].c) {
      hits += records[j].recovered ? 1 : 0;
      ++j;
    }
    const auto cell = static_cast<long>(j - i);
    os << records[i].n << ',' << records[i].k << ',' << format_double(records[i].c) << ','
       << records[i].m << ',' << cell << ',' << hits << ','
       << format_double(static_cast<double>(hits) / static_cast<double>(cell)) << '\n';
    i = j;
  }
  (void)cfg;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (const char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

int field_index(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw std::runtime_error("annotate: input csv lacks column '" + name + "'");
  }
  return static_cast<int>(it - header.begin());
}

std::string bool_field(bool v) { return v ? "1" : "0"; }

}  // namespace

void annotate_csv(std::istream& in, std::ostream& out, int max_redraws) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("annotate: empty input");
  const std::vector<std::string> header = split_csv_line(line);
  const int col_n = field_index(header, "n");
  const int col_k = field_index(header, "k");
  const int col_seed = field_index(header, "seed");
  const int col_m = field_index(header, "m");
  const int col_lambda = field_index(header, "lambda");
  const int col_degenerate = field_index(header, "degenerate");
  const int col_error = field_index(header, "error");
  const int col_noise = field_index(header, "noise");
  const int col_q = field_index(header, "q");
  const int col_delta = field_index(header, "delta");

  out << line
      << ",theory,c_min,d_max,kappa,nu,K,lambda_lo,lambda_hi,m_required,window_nonempty,"
         "m_sufficient,lambda_in_window,payoff_margin_strict,payoff_margin_weak,premises_ok,"
         "fano_m_bound\n";

  const std::string nan = "nan";
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != header.size()) throw std::runtime_error("annotate: ragged csv row");
    const int n = static_cast<int>(parse_long(f[col_n]));
    const int k = static_cast<int>(parse_long(f[col_k]));
    const bool degenerate = f[col_degenerate] == "1";
    const bool errored = !f[col_error].empty();

    out << line << ',';
    if (degenerate || errored || n > kMaxExactExpectationPlayers) {
      out << "not_computed";
      for (int t = 0; t < 8; ++t) out << ',' << nan;  // c_min .. m_required
      for (int t = 0; t < 6; ++t) out << ",0";        // the premise flags
      out << ',' << format_double(fano_sample_bound(n, k)) << '\n';
      continue;
    }

    const std::uint64_t seed = std::stoull(f[col_seed]);
    const long m = parse_long(f[col_m]);
    const double lambda = parse_double(f[col_lambda]);
    const NoiseKind noise = noise_kind_from_string(f[col_noise]);
    const double q = parse_double(f[col_q]);
    const double delta = parse_double(f[col_delta]);

    Rng rng(seed);
    TrialSetup setup = draw_trial_game(n, k, noise, noise == NoiseKind::global ? q : 0.01,
                                       noise == NoiseKind::local ? q : 0.6, max_redraws, rng);
    if (!setup.ok) {
      throw std::runtime_error("annotate: seed replay produced no valid game; was the sweep run "
                               "with a different redraw limit?");
    }

    // The guarantee must bound every player at once: smallest c_min,
    // largest d_max; nu is player-independent for these models.
    TheoryConstants agg = compute_constants(*setup.game, *setup.model, 0);
    int max_support = agg.support_size;
    for (int i = 1; i < n; ++i) {
      const TheoryConstants tc = compute_constants(*setup.game, *setup.model, i);
      agg.c_min = std::min(agg.c_min, tc.c_min);
      agg.d_max = std::max(agg.d_max, tc.d_max);
      agg.nu = std::max(agg.nu, tc.nu);
      max_support = std::max(max_support, tc.support_size);
    }
    const RecoveryWindow win = recovery_window(agg, n, k, m, delta);
    const bool lambda_in_window =
        win.window_nonempty && lambda >= win.lambda_lo && lambda <= win.lambda_hi;
    const double ratio = 5.0 * agg.c_min / agg.d_max;
    const bool a2_strict = agg.rho_min > ratio;
    const bool a2_weak = agg.rho_min >= ratio;
    const bool premises = win.window_nonempty && win.m_sufficient && lambda_in_window &&
                          a2_strict && max_support <= k;

    out << "ok," << format_double(agg.c_min) << ',' << format_double(agg.d_max) << ','
        << format_double(agg.kappa) << ',' << format_double(agg.nu) << ','
        << format_double(win.K) << ',' << format_double(win.lambda_lo) << ','
        << format_double(win.lambda_hi) << ',' << format_double(win.m_required) << ','
        << bool_field(win.window_nonempty) << ',' << bool_field(win.m_sufficient) << ','
        << bool_field(lambda_in_window) << ',' << bool_field(a2_strict) << ','
        << bool_field(a2_weak) << ',' << bool_field(premises) << ','
        << format_double(fano_sample_bound(n, k)) << '\n';
  }
  if (!out) throw std::runtime_error("annotate: write failed");
}

namespace {

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (const char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      cur += ch;
    }
  }
  if (!cur.empty() || !out.empty()) out.push_back(cur);
  return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& is) {
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": expected key=value");
      }
      continue;
    }
    auto trim = [](const std::string& s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "n") {
        cfg.n_list.clear();
        for (const auto& t : split_list(value, ',')) cfg.n_list.push_back(static_cast<int>(parse_long(t)));
      } else if (key == "k") {
        cfg.k_list.clear();
        for (const auto& t : split_list(value, ',')) cfg.k_list.push_back(static_cast<int>(parse_long(t)));
      } else if (key == "noise") {
        cfg.noise = noise_kind_from_string(value);
      } else if (key == "qg") {
        cfg.q_g = parse_double(value);
      } else if (key == "q") {
        cfg.q_local = parse_double(value);
      } else if (key == "delta") {
        cfg.delta = parse_double(value);
      } else if (key == "lambda_multiplier") {
        cfg.lambda_multiplier = parse_double(value);
      } else if (key == "c_grid") {
        cfg.c_grid.clear();
        for (const auto& t : split_list(value, ',')) cfg.c_grid.push_back(parse_double(t));
      } else if (key == "C") {
        for (const auto& t : split_list(value, ',')) {
          const auto colon = t.find(':');
          if (colon == std::string::npos) throw std::invalid_argument("expected k:C pairs");
          cfg.big_c[static_cast<int>(parse_long(t.substr(0, colon)))] =
              parse_double(t.substr(colon + 1));
        }
      } else if (key == "trials") {
        cfg.trials = static_cast<int>(parse_long(value));
      } else if (key == "seed") {
        cfg.seed = std::stoull(value);
      } else if (key == "out") {
        cfg.out_dir = value;
      } else if (key == "threads") {
        cfg.threads = static_cast<int>(parse_long(value));
      } else if (key == "max_redraws") {
        cfg.max_redraws = static_cast<int>(parse_long(value));
      } else if (key == "tol") {
        cfg.solver.tol = parse_double(value);
      } else if (key == "max_iters") {
        cfg.solver.max_iters = static_cast<int>(parse_long(value));
      } else if (key == "accelerate") {
        cfg.solver.accelerate = value == "1" || value == "true";
      } else if (key == "penalize_bias") {
        cfg.solver.penalize_bias = value == "1" || value == "true";
      } else {
        throw std::invalid_argument("unknown key '" + key + "'");
      }
    } catch (const std::exception& e) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

}  // namespace lig
