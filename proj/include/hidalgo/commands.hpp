#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hidalgo/types.hpp"

namespace hidalgo {

inline constexpr const char* kToolVersion = "0.1.0";

/// Reproducible-run options shared by the estimating commands.
struct EstimateOptions {
  int K = 3;
  std::string prior = "repulsive";  // plain|truncated|spike|repulsive or a JSON file
  int q = 3;
  double zeta = 0.8;
  int sweeps = 2000;
  int burn_in = 1000;
  int thin = 1;
  std::uint64_t seed = 1;
  int chains = 1;
  bool adjacency_on = true;
  int k_scan_lo = 0;  // 0 = no scan
  int k_scan_hi = 0;
  int jobs = 0;       // 0 = HIDALGO_JOBS env or 1
  std::string out_dir = "out";
};

struct MovementOptions {
  std::string game;                 // empty = only game present
  std::vector<long long> plays;     // empty = all qualifying plays
  std::string features = "xy";      // xy | speed | angle
  int downsample_factor = 10;
  EstimateOptions estimate;
};

struct ShotChartOptions {
  std::string mode = "two-team";    // two-team | single-attack | single-defense
  std::string team;                 // required for the single-team modes
  std::string game;
  int downsample_factor = 10;
  EstimateOptions estimate;
};

// Each command returns a process exit code: 0 iff every requested artifact
// was written. All outputs land under the command's out directory and are
// listed in manifest.json with checksums.
int cmd_simulate(const std::string& spec_path, const std::string& out_dir);
int cmd_estimate(const std::string& data_path, const EstimateOptions& options);
int cmd_analyze_movement(const std::string& tracking_path, const std::string& pbp_path,
                         const MovementOptions& options);
int cmd_analyze_shotcharts(const std::string& tracking_path, const std::string& pbp_path,
                           const ShotChartOptions& options);

/// Re-reads a manifest and verifies every recorded output checksum.
bool verify_manifest(const std::string& manifest_path, std::string* error = nullptr);

}  // namespace hidalgo
