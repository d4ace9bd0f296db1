#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lig/format.hpp"
#include "lig/game.hpp"
#include "lig/harness.hpp"

namespace {

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ',')) out.push_back(lig::parse_double(cur));
  if (out.empty()) throw std::invalid_argument("expected a comma-separated list, got '" + s + "'");
  return out;
}

int cmd_run(const CLI::App& sub, const std::string& config_path) {
  lig::ExperimentConfig cfg;
  if (!config_path.empty()) {
    std::ifstream is(config_path);
    if (!is) throw std::runtime_error("cannot open config file " + config_path);
    cfg = lig::parse_experiment_config(is);
  }

  auto passed = [&sub](const std::string& name) { return sub.count(name) > 0; };
  if (passed("--n")) cfg.n_list = sub.get_option("--n")->as<std::vector<int>>();
  if (passed("--k")) cfg.k_list = sub.get_option("--k")->as<std::vector<int>>();
  if (passed("--noise")) {
    cfg.noise = lig::noise_kind_from_string(sub.get_option("--noise")->as<std::string>());
  }
  if (passed("--qg")) cfg.q_g = sub.get_option("--qg")->as<double>();
  if (passed("--q")) cfg.q_local = sub.get_option("--q")->as<double>();
  if (passed("--delta")) cfg.delta = sub.get_option("--delta")->as<double>();
  if (passed("--trials")) cfg.trials = sub.get_option("--trials")->as<int>();
  if (passed("--c-grid")) cfg.c_grid = parse_double_list(sub.get_option("--c-grid")->as<std::string>());
  if (passed("--seed")) cfg.seed = sub.get_option("--seed")->as<std::uint64_t>();
  if (passed("--out")) cfg.out_dir = sub.get_option("--out")->as<std::string>();
  if (passed("--lambda-multiplier")) {
    cfg.lambda_multiplier = sub.get_option("--lambda-multiplier")->as<double>();
  }
  if (passed("--threads")) cfg.threads = sub.get_option("--threads")->as<int>();
  if (passed("--max-redraws")) cfg.max_redraws = sub.get_option("--max-redraws")->as<int>();
  if (passed("--tol")) cfg.solver.tol = sub.get_option("--tol")->as<double>();
  if (passed("--max-iters")) cfg.solver.max_iters = sub.get_option("--max-iters")->as<int>();
  if (passed("--accelerate")) cfg.solver.accelerate = true;
  if (passed("--C")) {
    for (const auto& pair : sub.get_option("--C")->as<std::vector<std::string>>()) {
      const auto colon = pair.find(':');
      if (colon == std::string::npos) {
        throw std::invalid_argument("--C expects k:value pairs, got '" + pair + "'");
      }
      cfg.big_c[static_cast<int>(lig::parse_long(pair.substr(0, colon)))] =
          lig::parse_double(pair.substr(colon + 1));
    }
  }

  const lig::SweepResult result = lig::run_sweep(cfg);
  std::cout << result.trials_csv << '\n' << result.aggregate_csv << '\n';
  return 0;
}

int cmd_annotate(const std::string& in_path, const std::string& out_path, int max_redraws) {
  std::ifstream is(in_path);
  if (!is) throw std::runtime_error("cannot open " + in_path);
  std::ofstream os(out_path);
  if (!os) throw std::runtime_error("cannot open " + out_path + " for writing");
  lig::annotate_csv(is, os, max_redraws);
  return 0;
}

int cmd_psne(const std::string& game_path) {
  std::ifstream is(game_path);
  if (!is) throw std::runtime_error("cannot open " + game_path);
  const lig::GameFile gf = lig::read_game(is);
  const lig::PsneSet psne = lig::enumerate_psne(gf.game);
  for (const lig::JointAction x : psne.actions) {
    for (int i = 0; i < psne.n; ++i) {
      if (i) std::cout << ' ';
      std::cout << x.spin(i);
    }
    std::cout << '\n';
  }
  return 0;
}

int cmd_gen(int n, int k, std::uint64_t seed, const std::string& out_path) {
  lig::Rng rng(seed);
  const lig::Game game = lig::generate_game(n, k, rng);
  if (out_path.empty()) {
    lig::write_game(std::cout, game, k);
  } else {
    std::ofstream os(out_path);
    if (!os) throw std::runtime_error("cannot open " + out_path + " for writing");
    lig::write_game(os, game, k);
    if (!os) throw std::runtime_error("write failed: " + out_path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn the equilibrium sets of sparse linear influence games from noisy joint actions"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a recovery experiment sweep, writing trial and aggregate CSVs");
  std::string config_path;
  run->add_option("--config", config_path, "key=value config file; flags override its entries");
  run->add_option("--n", "player counts (repeatable)")->type_name("INT")->expected(-1)->take_all();
  run->add_option("--k", "in-degrees (repeatable)")->type_name("INT")->expected(-1)->take_all();
  run->add_option("--noise", "observation model: global or local");
  run->add_option("--qg", "global-model signal level q_g")->type_name("FLOAT");
  run->add_option("--q", "local-model per-player agreement probability")->type_name("FLOAT");
  run->add_option("--delta", "failure probability delta")->type_name("FLOAT");
  run->add_option("--trials", "games per (n, k, c) cell")->type_name("INT");
  run->add_option("--c-grid", "comma-separated control-parameter grid");
  run->add_option("--seed", "master seed")->type_name("UINT64");
  run->add_option("--out", "output directory");
  run->add_option("--lambda-multiplier", "multiplier on the lambda schedule")->type_name("FLOAT");
  run->add_option("--threads", "worker threads (0 = hardware)")->type_name("INT");
  run->add_option("--max-redraws", "degenerate-game redraw limit")->type_name("INT");
  run->add_option("--tol", "solver KKT tolerance")->type_name("FLOAT");
  run->add_option("--max-iters", "solver iteration cap")->type_name("INT");
  run->add_flag("--accelerate", "enable FISTA acceleration");
  run->add_option("--C", "per-k base constants as k:value pairs")->expected(-1)->take_all();

  auto* annotate = app.add_subcommand("annotate", "Join a trials CSV with exact theory quantities");
  std::string in_path, out_path;
  int annotate_redraws = 100;
  annotate->add_option("--in", in_path, "input trials.csv")->required();
  annotate->add_option("--out", out_path, "output csv path")->required();
  annotate->add_option("--max-redraws", annotate_redraws, "redraw limit the sweep used");

  auto* psne = app.add_subcommand("psne", "Print the PSNE set of a game file, one action per line");
  std::string game_path;
  psne->add_option("--game", game_path, "game file")->required();

  auto* gen = app.add_subcommand("gen", "Generate a random sparse game and print its game file");
  int gen_n = 0, gen_k = 0;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--n", gen_n, "player count")->required();
  gen->add_option("--k", gen_k, "per-row in-degree")->required();
  gen->add_option("--seed", gen_seed, "seed")->required();
  gen->add_option("--out", gen_out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(*run, config_path);
    if (annotate->parsed()) return cmd_annotate(in_path, out_path, annotate_redraws);
    if (psne->parsed()) return cmd_psne(game_path);
    if (gen->parsed()) return cmd_gen(gen_n, gen_k, gen_seed, gen_out);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
