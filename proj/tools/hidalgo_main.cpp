#include <CLI11.hpp>

#include <string>
#include <vector>

#include "hidalgo/commands.hpp"

namespace {

void add_estimate_flags(CLI::App* cmd, hidalgo::EstimateOptions& opts, bool require_k) {
  auto* k = cmd->add_option("--K", opts.K, "number of mixture components");
  if (require_k) k->required();
  cmd->add_option("--prior", opts.prior,
                  "plain|truncated|spike|repulsive, or a prior-spec JSON file");
  cmd->add_option("--q", opts.q, "neighbourhood size for the adjacency term")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--zeta", opts.zeta, "fixed zeta in (0.5, 1)");
  cmd->add_option("--sweeps", opts.sweeps, "MCMC sweeps")->check(CLI::PositiveNumber);
  cmd->add_option("--burn-in", opts.burn_in, "discarded initial sweeps")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--thin", opts.thin, "retained-sweep stride")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", opts.seed, "master seed; chains derive from it");
  cmd->add_option("--chains", opts.chains, "independent chains")->check(CLI::PositiveNumber);
  cmd->add_flag("--adjacency,!--no-adjacency", opts.adjacency_on,
                "include the neighbourhood-homogeneity likelihood term");
  cmd->add_option("--jobs", opts.jobs, "parallel chains (default: HIDALGO_JOBS or 1)");
  cmd->add_option("--out", opts.out_dir, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heterogeneous intrinsic-dimension estimation for point clouds and "
               "basketball tracking matrices"};
  app.require_subcommand(1);

  // simulate
  std::string sim_spec, sim_out = "out";
  auto* simulate = app.add_subcommand("simulate", "generate synthetic manifold datasets");
  simulate->add_option("spec", sim_spec, "manifold spec JSON")->required();
  simulate->add_option("--out", sim_out, "output directory");

  // estimate
  std::string est_data;
  hidalgo::EstimateOptions est;
  est.K = 1;
  est.prior = "plain";
  std::string k_scan;
  auto* estimate = app.add_subcommand("estimate", "run the ID mixture sampler on a matrix");
  estimate->add_option("data", est_data, "dataset CSV or JSON")->required();
  add_estimate_flags(estimate, est, true);
  estimate->add_option("--K-scan", k_scan, "a..b: run each K and pick by mean log posterior");

  // analyze-movement
  std::string mov_tracking, mov_pbp;
  hidalgo::MovementOptions mov;
  auto* movement =
      app.add_subcommand("analyze-movement", "per-frame ID curves for tracking plays");
  movement->add_option("tracking", mov_tracking, "tracking CSV")->required();
  movement->add_option("pbp", mov_pbp, "play-by-play CSV")->required();
  movement->add_option("--game", mov.game, "game id (required with multi-game files)");
  movement->add_option("--play", mov.plays, "event ids to analyze (default: all)");
  movement->add_option("--features", mov.features, "xy | speed | angle");
  movement->add_option("--downsample", mov.downsample_factor, "raw frames per kept frame")
      ->check(CLI::PositiveNumber);
  add_estimate_flags(movement, mov.estimate, false);

  // analyze-shotcharts
  std::string shot_tracking, shot_pbp;
  hidalgo::ShotChartOptions shot;
  auto* shotcharts = app.add_subcommand(
      "analyze-shotcharts", "shot-moment location clusters and success tables");
  shotcharts->add_option("tracking", shot_tracking, "tracking CSV")->required();
  shotcharts->add_option("pbp", shot_pbp, "play-by-play CSV")->required();
  shotcharts->add_option("--mode", shot.mode, "two-team | single-attack | single-defense");
  shotcharts->add_option("--team", shot.team, "reference team");
  shotcharts->add_option("--game", shot.game, "game id");
  shotcharts->add_option("--downsample", shot.downsample_factor, "raw frames per kept frame")
      ->check(CLI::PositiveNumber);
  add_estimate_flags(shotcharts, shot.estimate, false);

  CLI11_PARSE(app, argc, argv);

  if (simulate->parsed()) return hidalgo::cmd_simulate(sim_spec, sim_out);
  if (estimate->parsed()) {
    if (!k_scan.empty()) {
      const auto dots = k_scan.find("..");
      if (dots == std::string::npos) {
        std::cerr << "error: --K-scan expects a..b\n";
        return 1;
      }
      try {
        est.k_scan_lo = std::stoi(k_scan.substr(0, dots));
        est.k_scan_hi = std::stoi(k_scan.substr(dots + 2));
      } catch (const std::exception&) {
        std::cerr << "error: --K-scan expects a..b\n";
        return 1;
      }
    }
    return hidalgo::cmd_estimate(est_data, est);
  }
  if (movement->parsed()) return hidalgo::cmd_analyze_movement(mov_tracking, mov_pbp, mov);
  if (shotcharts->parsed())
    return hidalgo::cmd_analyze_shotcharts(shot_tracking, shot_pbp, shot);
  return 1;
}
