#include "hidalgo/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "hidalgo/ingest.hpp"
#include "hidalgo/io.hpp"
#include "hidalgo/model.hpp"
#include "hidalgo/neighbors.hpp"
#include "hidalgo/posterior.hpp"
#include "hidalgo/sampler.hpp"
#include "hidalgo/synth.hpp"

namespace hidalgo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t checksum_trace(const PosteriorTrace& trace) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  h = fnv1a(&trace.data_checksum, sizeof trace.data_checksum, h);
  h = fnv1a(trace.z.data(), sizeof(int) * static_cast<std::size_t>(trace.z.size()), h);
  h = checksum_matrix(trace.d, h);
  h = checksum_matrix(trace.p, h);
  h = fnv1a(trace.zeta.data(), sizeof(double) * static_cast<std::size_t>(trace.zeta.size()), h);
  h = fnv1a(trace.log_posterior.data(),
            sizeof(double) * static_cast<std::size_t>(trace.log_posterior.size()), h);
  return h;
}

// Collects output files and checksums for the manifest; every artifact goes
// through here so nothing is written outside the out directory.
class ArtifactSink {
 public:
  explicit ArtifactSink(const std::string& out_dir) : root_(out_dir) {
    fs::create_directories(root_);
  }

  const fs::path& root() const { return root_; }

  void note_input(const std::string& path) {
    inputs_.push_back({{"path", path}, {"checksum", checksum_hex(checksum_file(path))}});
  }

  void warn(const std::string& message) {
    warnings_.push_back(message);
    std::cerr << "warning: " << message << "\n";
  }

  std::string resolve(const std::string& rel) {
    const fs::path full = root_ / rel;
    fs::create_directories(full.parent_path());
    return full.string();
  }

  void record(const std::string& rel) {
    outputs_.push_back(
        {{"path", rel}, {"checksum", checksum_hex(checksum_file((root_ / rel).string()))}});
  }

  void write_text(const std::string& rel, const std::string& text) {
    write_text_file(resolve(rel), text);
    record(rel);
  }

  void write_matrix(const std::string& rel, const Matrix& m,
                    const std::vector<std::string>& header,
                    const std::vector<std::string>* row_ids = nullptr,
                    const std::string& id_column = "id",
                    const std::string& preamble = "") {
    write_matrix_csv(resolve(rel), m, header, row_ids, id_column, preamble);
    record(rel);
  }

  void finish(const std::string& command, std::uint64_t seed, const json& config) {
    json manifest;
    manifest["tool_version"] = kToolVersion;
    manifest["command"] = command;
    manifest["seed"] = seed;
    manifest["config"] = config;
    manifest["inputs"] = inputs_;
    manifest["outputs"] = outputs_;
    manifest["warnings"] = warnings_;
    write_text_file((root_ / "manifest.json").string(), manifest.dump(2) + "\n");
  }

 private:
  fs::path root_;
  json inputs_ = json::array();
  json outputs_ = json::array();
  std::vector<std::string> warnings_;
};

int resolve_jobs(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HIDALGO_JOBS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

PriorSpec resolve_prior(const EstimateOptions& opts, int K, double D_cap) {
  PriorSpec prior;
  const bool from_file =
      opts.prior.size() > 5 && opts.prior.substr(opts.prior.size() - 5) == ".json";
  if (from_file) {
    prior = prior_spec_from_json(read_text_file(opts.prior));
  } else {
    prior = default_prior(K, prior_variant_from_string(opts.prior));
    prior.zeta_mode.value = opts.zeta;
  }
  if (prior.c.size() != K) prior.c = Vector::Ones(K);
  if (prior.truncated() && prior.D_cap <= 0.0) prior.D_cap = D_cap;
  validate(prior);
  return prior;
}

json prior_to_json_obj(const PriorSpec& prior) {
  return json::parse(prior_spec_to_json(prior, 0));
}

SamplerConfig make_config(const EstimateOptions& opts, int K, double D_cap,
                          std::uint64_t seed) {
  SamplerConfig config;
  config.K = K;
  config.sweeps = opts.sweeps;
  config.burn_in = opts.burn_in;
  config.thin = opts.thin;
  config.seed = seed;
  config.q = opts.q;
  config.adjacency_on = opts.adjacency_on;
  config.prior = resolve_prior(opts, K, D_cap);
  if (!(config.prior.zeta_mode.sampled) &&
      !(config.prior.zeta_mode.value > 0.5 && config.prior.zeta_mode.value < 1.0))
    throw std::invalid_argument("--zeta must lie in (0.5, 1)");
  validate(config);
  return config;
}

// Chain c of a K-component run draws its seed from splitmix64 stream
// K*10000 + c of the master seed.
std::uint64_t chain_seed(std::uint64_t master, int K, int chain) {
  return Rng::derive_stream(master, static_cast<std::uint64_t>(K) * 10000 +
                                        static_cast<std::uint64_t>(chain));
}

std::vector<PosteriorTrace> run_chains(const Vector& mu, const AdjacencyMatrix& adj,
                                       const EstimateOptions& opts, int K, double D_cap,
                                       int jobs) {
  std::vector<PosteriorTrace> traces(static_cast<std::size_t>(opts.chains));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(opts.chains));
  for (int start = 0; start < opts.chains; start += jobs) {
    const int end = std::min(opts.chains, start + jobs);
    std::vector<std::thread> pool;
    for (int c = start; c < end; ++c) {
      pool.emplace_back([&, c] {
        try {
          const SamplerConfig config =
              make_config(opts, K, D_cap, chain_seed(opts.seed, K, c));
          traces[static_cast<std::size_t>(c)] = run_chain(mu, adj, config);
        } catch (...) {
          errors[static_cast<std::size_t>(c)] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return traces;
}

void write_trace_csv(ArtifactSink& sink, const std::string& rel,
                     const PosteriorTrace& trace) {
  std::ostringstream out;
  const int K = static_cast<int>(trace.d.cols());
  out << "sweep,log_posterior";
  for (int k = 1; k <= K; ++k) out << ",d_" << k;
  for (int k = 1; k <= K; ++k) out << ",p_" << k;
  out << ",zeta\n";
  for (Index t = 0; t < trace.retained(); ++t) {
    out << trace.sweep_index[static_cast<std::size_t>(t)] << ','
        << format_double(trace.log_posterior[t]);
    for (int k = 0; k < K; ++k) out << ',' << format_double(trace.d(t, k));
    for (int k = 0; k < K; ++k) out << ',' << format_double(trace.p(t, k));
    out << ',' << format_double(trace.zeta[t]) << "\n";
  }
  sink.write_text(rel, out.str());
}

void write_z_csv(ArtifactSink& sink, const std::string& rel, const PosteriorTrace& trace) {
  std::ostringstream out;
  out << "sweep";
  for (Index i = 1; i <= trace.n_obs(); ++i) out << ",z_" << i;
  out << "\n";
  for (Index t = 0; t < trace.retained(); ++t) {
    out << trace.sweep_index[static_cast<std::size_t>(t)];
    for (Index i = 0; i < trace.n_obs(); ++i) out << ',' << trace.z(t, i) + 1;
    out << "\n";
  }
  sink.write_text(rel, out.str());
}

struct PipelineResult {
  Vector mu;
  AdjacencyMatrix adj;
  PosteriorTrace pooled;
  IdEstimates estimates;
  Matrix psm;
  IntVector binder;
  IntVector vi;
  std::vector<int> order;
  KSelection selection;  // empty table when no scan ran
  int k_star = 0;
  std::uint64_t trace_checksum = 0;
};

// Full estimation pass over one observation matrix: mu, adjacency, chains
// (scanning K when requested), pooled estimates, psm, partitions, ordering.
// Writes the standard artifact set under `prefix` inside the sink.
PipelineResult run_pipeline(const Dataset& data, const EstimateOptions& opts,
                            ArtifactSink& sink, const std::string& prefix) {
  validate(data);
  const double D_cap = static_cast<double>(data.dim());
  const int jobs = resolve_jobs(opts.jobs);
  const int q_max = std::max(2, opts.q);
  if (data.rows() <= q_max)
    throw std::invalid_argument("need more than max(2, --q) observations, got " +
                                std::to_string(data.rows()));

  PipelineResult result;
  const NeighborGraph graph = build_knn_graph(data, q_max);
  result.mu = compute_mu(graph);
  result.adj = build_adjacency(graph, opts.q);

  // mu and adjacency exports (1-based neighbour indices).
  sink.write_matrix(prefix + "mu.csv", result.mu, {"mu"}, &data.ids);
  Matrix adj_out = (result.adj.rows.cast<double>().array() + 1.0).matrix();
  std::vector<std::string> adj_header;
  for (int j = 1; j <= result.adj.q; ++j) adj_header.push_back("nn" + std::to_string(j));
  sink.write_matrix(prefix + "adjacency.csv", adj_out, adj_header, &data.ids);

  std::vector<int> k_values;
  if (opts.k_scan_lo > 0) {
    if (opts.k_scan_hi < opts.k_scan_lo)
      throw std::invalid_argument("--K-scan range is empty");
    for (int k = opts.k_scan_lo; k <= opts.k_scan_hi; ++k) k_values.push_back(k);
  } else {
    k_values.push_back(opts.K);
  }

  std::map<int, PosteriorTrace> pooled_by_k;
  for (const int K : k_values) {
    auto traces = run_chains(result.mu, result.adj, opts, K, D_cap, jobs);
    for (int c = 0; c < opts.chains; ++c) {
      const std::string tag = "K" + std::to_string(K) + "_chain" + std::to_string(c);
      write_trace_csv(sink, prefix + "trace_" + tag + ".csv",
                      traces[static_cast<std::size_t>(c)]);
      write_z_csv(sink, prefix + "z_" + tag + ".csv", traces[static_cast<std::size_t>(c)]);
    }
    pooled_by_k.emplace(K, concat_traces(traces));
  }

  if (k_values.size() > 1) {
    std::map<int, const PosteriorTrace*> refs;
    for (const auto& [K, trace] : pooled_by_k) refs.emplace(K, &trace);
    result.selection = select_K(refs);
    result.k_star = result.selection.k_star;
    json sel;
    sel["K_star"] = result.k_star;
    sel["table"] = json::array();
    for (const auto& row : result.selection.table)
      sel["table"].push_back(
          {{"K", row.K}, {"mean_log_posterior", row.mean_log_posterior}});
    sink.write_text(prefix + "kselect.json", sel.dump(2) + "\n");
  } else {
    result.k_star = k_values.front();
  }

  result.pooled = std::move(pooled_by_k.at(result.k_star));
  result.trace_checksum = checksum_trace(result.pooled);
  const std::string preamble =
      "# trace_checksum=" + checksum_hex(result.trace_checksum) + "\n";

  result.estimates = per_observation_id(result.pooled);
  Matrix est(data.rows(), 4);
  est.col(0) = result.estimates.mean_id;
  est.col(1) = result.estimates.median_id;
  est.col(2) = result.estimates.lower;
  est.col(3) = result.estimates.upper;
  sink.write_matrix(prefix + "id_estimates.csv", est,
                    {"mean_id", "median_id", "lower_95", "upper_95"}, &data.ids, "id",
                    preamble);

  result.psm = coclustering_matrix(result.pooled);
  sink.write_matrix(prefix + "psm.csv", result.psm, data.ids, &data.ids, "id", preamble);

  result.binder = point_partition(result.psm, result.pooled, PartitionLoss::Binder);
  result.vi = point_partition(result.psm, result.pooled, PartitionLoss::VI);
  Matrix part(data.rows(), 2);
  for (Index i = 0; i < data.rows(); ++i) {
    part(i, 0) = result.binder[i] + 1;
    part(i, 1) = result.vi[i] + 1;
  }
  sink.write_matrix(prefix + "partition.csv", part, {"binder", "vi"}, &data.ids, "id",
                    preamble);

  result.order = heatmap_order(result.psm);
  {
    std::ostringstream out;
    out << preamble << "position,id\n";
    for (std::size_t pos = 0; pos < result.order.size(); ++pos)
      out << pos + 1 << ',' << data.ids[static_cast<std::size_t>(result.order[pos])] << "\n";
    sink.write_text(prefix + "heatmap_order.csv", out.str());
  }
  {
    const Index n = data.rows();
    Matrix ordered(n, n);
    std::vector<std::string> ordered_ids;
    for (Index i = 0; i < n; ++i) {
      ordered_ids.push_back(data.ids[static_cast<std::size_t>(result.order[static_cast<std::size_t>(i)])]);
      for (Index j = 0; j < n; ++j)
        ordered(i, j) = result.psm(result.order[static_cast<std::size_t>(i)],
                                   result.order[static_cast<std::size_t>(j)]);
    }
    sink.write_matrix(prefix + "psm_ordered.csv", ordered, ordered_ids, &ordered_ids, "id",
                      preamble);
  }

  json config;
  config["K"] = result.k_star;
  config["prior"] = prior_to_json_obj(resolve_prior(opts, result.k_star, D_cap));
  config["q"] = opts.q;
  config["sweeps"] = opts.sweeps;
  config["burn_in"] = opts.burn_in;
  config["thin"] = opts.thin;
  config["seed"] = opts.seed;
  config["chains"] = opts.chains;
  config["adjacency_on"] = opts.adjacency_on;
  config["data_checksum"] = checksum_hex(result.pooled.data_checksum);
  sink.write_text(prefix + "config.json", config.dump(2) + "\n");
  return result;
}

json estimate_options_to_json(const EstimateOptions& opts) {
  json j;
  j["K"] = opts.K;
  j["prior"] = opts.prior;
  j["q"] = opts.q;
  j["zeta"] = opts.zeta;
  j["sweeps"] = opts.sweeps;
  j["burn_in"] = opts.burn_in;
  j["thin"] = opts.thin;
  j["seed"] = opts.seed;
  j["chains"] = opts.chains;
  j["adjacency_on"] = opts.adjacency_on;
  if (opts.k_scan_lo > 0) j["K_scan"] = {opts.k_scan_lo, opts.k_scan_hi};
  return j;
}

int fail(const std::string& message) {
  std::cerr << "error: " << message << "\n";
  return 1;
}

}  // namespace

int cmd_simulate(const std::string& spec_path, const std::string& out_dir) {
  try {
    ArtifactSink sink(out_dir);
    sink.note_input(spec_path);
    const auto specs = manifold_specs_from_json(read_text_file(spec_path));
    auto [data, labels] = specs.size() == 1 ? generate(specs.front()) : multi_manifold(specs);

    std::vector<std::string> header;
    for (Index j = 1; j <= data.dim(); ++j) header.push_back("x" + std::to_string(j));
    sink.write_matrix("dataset.csv", data.points, header, &data.ids);
    Matrix label_col = labels.cast<double>();
    sink.write_matrix("labels.csv", label_col, {"label"}, &data.ids);

    json config = json::parse("[" + [&] {
      std::string items;
      for (std::size_t i = 0; i < specs.size(); ++i)
        items += (i ? "," : "") + manifold_spec_to_json(specs[i], -1);
      return items;
    }() + "]");
    sink.finish("simulate", specs.front().seed, config);
    return 0;
  } catch (const std::exception& e) {
    return fail(e.what());
  }
}

int cmd_estimate(const std::string& data_path, const EstimateOptions& options) {
  try {
    ArtifactSink sink(options.out_dir);
    sink.note_input(data_path);
    const Dataset data = read_dataset(data_path);
    run_pipeline(data, options, sink, "");
    sink.finish("estimate", options.seed, estimate_options_to_json(options));
    return 0;
  } catch (const std::exception& e) {
    return fail(e.what());
  }
}

namespace {

struct GameData {
  std::vector<Play> plays;          // last segment per event
  std::vector<std::string> teams;   // sorted; teams[0] is "home" by convention
  int final_home = 0;
  int final_away = 0;
};

GameData load_game(const std::string& tracking_path, const std::string& pbp_path,
                   const std::string& game, ArtifactSink& sink) {
  sink.note_input(tracking_path);
  sink.note_input(pbp_path);
  std::ifstream tracking_in(tracking_path);
  if (!tracking_in) throw std::runtime_error("cannot open " + tracking_path);
  std::ifstream pbp_in(pbp_path);
  if (!pbp_in) throw std::runtime_error("cannot open " + pbp_path);

  ParseReport report;
  auto frames = parse_tracking_csv(tracking_in, &report);
  for (const auto& w : report.warnings) sink.warn(w);
  const auto pbp = parse_pbp_csv(pbp_in);

  std::set<std::string> games;
  for (const auto& f : frames) games.insert(f.game_id);
  std::string selected = game;
  if (selected.empty()) {
    if (games.size() != 1)
      throw std::invalid_argument("file contains " + std::to_string(games.size()) +
                                  " games; pass --game");
    selected = *games.begin();
  } else if (!games.count(selected)) {
    throw std::invalid_argument("game '" + selected + "' not present in tracking file");
  }
  std::erase_if(frames, [&](const TrackingFrame& f) { return f.game_id != selected; });

  ParseReport play_report;
  auto all_plays = build_plays(frames, pbp, &play_report);
  for (const auto& w : play_report.warnings) sink.warn(w);

  GameData out;
  std::map<long long, Play> last_segment;
  std::set<std::string> teams;
  for (auto& play : all_plays) {
    for (const auto& p : play.frames.front().players) teams.insert(p.team);
    auto it = last_segment.find(play.event_id);
    if (it == last_segment.end() || play.segment > it->second.segment)
      last_segment.insert_or_assign(play.event_id, std::move(play));
  }
  for (auto& [event, play] : last_segment) out.plays.push_back(std::move(play));
  out.teams.assign(teams.begin(), teams.end());
  if (!pbp.empty()) {
    out.final_home = pbp.back().score_home;
    out.final_away = pbp.back().score_away;
  }
  return out;
}

Dataset matrix_as_dataset(const Matrix& m, const std::vector<std::string>& ids) {
  Dataset data;
  data.points = m;
  data.ids = ids;
  validate(data);
  return data;
}

}  // namespace

int cmd_analyze_movement(const std::string& tracking_path, const std::string& pbp_path,
                         const MovementOptions& options) {
  try {
    ArtifactSink sink(options.estimate.out_dir);
    GameData game = load_game(tracking_path, pbp_path, options.game, sink);

    std::vector<Play> selected;
    if (options.plays.empty()) {
      selected = game.plays;
    } else {
      std::set<long long> wanted(options.plays.begin(), options.plays.end());
      for (const auto& play : game.plays)
        if (wanted.count(play.event_id)) {
          selected.push_back(play);
          wanted.erase(play.event_id);
        }
      for (const long long missing : wanted)
        sink.warn("event " + std::to_string(missing) + " not found; skipped");
    }
    if (selected.empty()) return fail("no matching plays");

    sink.warn(
        "movement frames are autocorrelated; the ID analysis treats them as "
        "exchangeable observations anyway");

    int analyzed = 0;
    for (const auto& raw_play : selected) {
      const std::string dir = "play_" + std::to_string(raw_play.event_id) + "/";
      try {
        const Play filtered = offensive_half_filter(raw_play);
        if (filtered.frames.empty()) {
          sink.warn("event " + std::to_string(raw_play.event_id) +
                    ": ball never in the offensive half; skipped");
          continue;
        }
        const double offensive_duration = filtered.duration();
        const Play play = downsample(filtered, options.downsample_factor);

        Matrix features;
        std::vector<std::string> columns;
        if (options.features == "xy") {
          features = movement_matrix(play);
          columns = movement_columns(play);
        } else if (options.features == "speed" || options.features == "angle") {
          auto [speed, angle] = speed_angle(play);
          features = options.features == "speed" ? speed : angle;
          for (const auto& p : play.frames.front().players)
            columns.push_back(p.team + "_" + std::to_string(p.player_id));
        } else {
          throw std::invalid_argument("--features must be xy, speed or angle");
        }

        std::vector<std::string> frame_ids;
        for (Index i = 1; i <= features.rows(); ++i) frame_ids.push_back(std::to_string(i));
        const Dataset data = matrix_as_dataset(features, frame_ids);
        sink.write_matrix(dir + "features.csv", features, columns, &frame_ids, "frame");

        EstimateOptions est = options.estimate;
        est.k_scan_lo = est.k_scan_hi = 0;
        const PipelineResult result = run_pipeline(data, est, sink, dir);

        // Per-frame ID curve, one row per retained frame.
        Matrix curve(features.rows(), 4);
        curve.col(0) = result.estimates.median_id;
        curve.col(1) = result.estimates.lower;
        curve.col(2) = result.estimates.upper;
        curve.col(3) = result.estimates.mean_id;
        sink.write_matrix(dir + "id_curve.csv", curve,
                          {"median_id", "lower_95", "upper_95", "mean_id"}, &frame_ids,
                          "frame",
                          "# trace_checksum=" + checksum_hex(result.trace_checksum) + "\n");

        json meta;
        meta["event_id"] = raw_play.event_id;
        meta["features"] = options.features;
        meta["n_frames"] = features.rows();
        meta["outcome"] = to_string(raw_play.outcome);
        meta["offensive_duration_seconds"] = offensive_duration;
        meta["duration_class"] = to_string(duration_split(filtered));
        meta["score_margin_at_start"] = raw_play.score_margin_at_start;
        meta["margin_category"] = to_string(categorize_margin(raw_play.score_margin_at_start));
        meta["autocorrelation_warning"] = true;
        if (raw_play.outcome != PlayOutcome::Other) {
          try {
            const int shot = shot_moment(play);
            meta["shot_frame"] = shot + 1;
            const auto& players = play.frames[static_cast<std::size_t>(shot)].players;
            for (const auto& p : players)
              if (p.player_id == raw_play.shooter_id) {
                const double delta = std::sqrt((p.x - kHubX) * (p.x - kHubX) +
                                               (p.y - kHubY) * (p.y - kHubY));
                meta["shooter_distance_feet"] = delta;
                meta["distance_category"] = to_string(categorize_shot(delta));
              }
          } catch (const FlatTrajectory& e) {
            sink.warn(e.what());
          }
        }
        meta["trace_checksum"] = checksum_hex(result.trace_checksum);
        sink.write_text(dir + "meta.json", meta.dump(2) + "\n");
        ++analyzed;
      } catch (const std::exception& e) {
        sink.warn("event " + std::to_string(raw_play.event_id) + ": " + e.what());
      }
    }
    if (analyzed == 0) return fail("no play could be analyzed");

    json config = estimate_options_to_json(options.estimate);
    config["features"] = options.features;
    config["downsample_factor"] = options.downsample_factor;
    if (!options.game.empty()) config["game"] = options.game;
    sink.finish("analyze-movement", options.estimate.seed, config);
    return 0;
  } catch (const std::exception& e) {
    return fail(e.what());
  }
}

namespace {

struct PreparedSet {
  std::vector<Play> plays;  // filtered, downsampled, shot plays only
  std::string team;         // the set's reference team
  std::string role;         // attack | defense
};

// Success tables and rank tests for one shot-chart set.
void write_set_analytics(ArtifactSink& sink, const std::string& dir,
                         const ShotChartSet& set, const PipelineResult& result) {
  const Index n = set.matrix.rows();
  const auto median = result.estimates.median_id;

  const auto median_of = [](std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size();
    if (m == 0) return std::numeric_limits<double>::quiet_NaN();
    return m % 2 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
  };

  // Per-cluster success proportions for each partition route.
  std::ostringstream cluster_csv;
  cluster_csv << "method,cluster,n,p_success,median_id\n";
  const auto emit_clusters = [&](const std::string& method, const IntVector& labels) {
    const int K = labels.size() == 0 ? 0 : labels.maxCoeff() + 1;
    for (int k = 0; k < K; ++k) {
      int count = 0, made = 0;
      std::vector<double> ids;
      for (Index i = 0; i < n; ++i)
        if (labels[i] == k) {
          ++count;
          made += set.outcomes[static_cast<std::size_t>(i)];
          ids.push_back(median[i]);
        }
      if (count == 0) continue;
      cluster_csv << method << ',' << k + 1 << ',' << count << ','
                  << format_double(static_cast<double>(made) / count) << ','
                  << format_double(median_of(ids)) << "\n";
    }
  };
  emit_clusters("binder", result.binder);
  emit_clusters("vi", result.vi);

  json kmeans_json;
  if (n >= 4) {
    std::vector<int> g_range;
    for (int g = 2; g <= std::min<Index>(8, n - 1); ++g) g_range.push_back(g);
    try {
      const KmeansResult km = kmeans_id_clusters(median, g_range);
      emit_clusters("kmeans", km.labels);
      kmeans_json["chosen_G"] = km.chosen_g;
      kmeans_json["table"] = json::array();
      for (const auto& row : km.table)
        kmeans_json["table"].push_back({{"G", row.g},
                                        {"silhouette", row.silhouette},
                                        {"calinski_harabasz", row.calinski_harabasz},
                                        {"wcss", row.wcss}});
      std::vector<int> labels(km.labels.data(), km.labels.data() + km.labels.size());
      for (auto& l : labels) ++l;
      kmeans_json["labels"] = labels;
    } catch (const std::exception& e) {
      kmeans_json["error"] = e.what();
    }
  } else {
    kmeans_json["error"] = "too few plays for k-means";
  }
  sink.write_text(dir + "success_by_cluster.csv", cluster_csv.str());
  sink.write_text(dir + "kmeans.json", kmeans_json.dump(2) + "\n");

  // Distance-category table (ns, p success, median ID).
  std::ostringstream cat_csv;
  cat_csv << "dist_cat,ns,p_success,median_id\n";
  for (const auto cat :
       {ShotCategory::Short, ShotCategory::MidRange, ShotCategory::ThreePoints}) {
    int count = 0, made = 0;
    std::vector<double> ids;
    for (Index i = 0; i < n; ++i) {
      const double delta = set.shooter_distance[i];
      if (delta < 0.0) continue;
      if (categorize_shot(delta) != cat) continue;
      ++count;
      made += set.outcomes[static_cast<std::size_t>(i)];
      ids.push_back(median[i]);
    }
    if (count == 0) continue;
    cat_csv << to_string(cat) << ',' << count << ','
            << format_double(static_cast<double>(made) / count) << ','
            << format_double(median_of(ids)) << "\n";
  }
  sink.write_text(dir + "success_by_category.csv", cat_csv.str());

  // Pairwise margin-band comparisons: alternative is "row band has greater
  // median ranks than the column band".
  const std::vector<MarginCategory> bands{MarginCategory::Huge, MarginCategory::Large,
                                          MarginCategory::Medium, MarginCategory::Small};
  std::map<MarginCategory, std::vector<double>> by_band;
  for (const auto b : bands) by_band[b] = {};
  for (Index i = 0; i < n; ++i)
    by_band[categorize_margin(set.margins[static_cast<std::size_t>(i)])].push_back(median[i]);

  json tests;
  tests["bands"] = json::array();
  for (const auto b : bands)
    tests["bands"].push_back(
        {{"band", to_string(b)}, {"n", by_band[b].size()}});
  tests["pairwise"] = json::array();
  for (std::size_t row = 1; row < bands.size(); ++row) {
    for (std::size_t col = 0; col < row; ++col) {
      const auto& xs = by_band[bands[row]];
      const auto& ys = by_band[bands[col]];
      json entry;
      entry["row"] = to_string(bands[row]);
      entry["column"] = to_string(bands[col]);
      if (xs.empty() || ys.empty()) {
        entry["skipped"] = "empty band";
      } else {
        const auto mw =
            mann_whitney(Eigen::Map<const Vector>(xs.data(), static_cast<Index>(xs.size())),
                         Eigen::Map<const Vector>(ys.data(), static_cast<Index>(ys.size())),
                         Alternative::Greater);
        entry["U"] = mw.u;
        entry["p"] = mw.p;
        entry["exact"] = mw.exact;
      }
      tests["pairwise"].push_back(entry);
    }
  }
  sink.write_text(dir + "margin_tests.json", tests.dump(2) + "\n");
}

}  // namespace

int cmd_analyze_shotcharts(const std::string& tracking_path, const std::string& pbp_path,
                           const ShotChartOptions& options) {
  try {
    const ShotChartMode mode = shot_chart_mode_from_string(options.mode);
    if (mode != ShotChartMode::TwoTeam && options.team.empty())
      return fail("--mode " + options.mode + " needs --team");

    ArtifactSink sink(options.estimate.out_dir);
    GameData game = load_game(tracking_path, pbp_path, options.game, sink);
    if (game.teams.size() != 2)
      return fail("expected exactly 2 teams in the game, found " +
                  std::to_string(game.teams.size()));
    if (!options.team.empty() &&
        options.team != game.teams[0] && options.team != game.teams[1])
      return fail("--team " + options.team + " does not play in this game");

    // Which sets to build: (reference team, role).
    std::vector<PreparedSet> sets;
    const auto other = [&](const std::string& t) {
      return t == game.teams[0] ? game.teams[1] : game.teams[0];
    };
    if (mode == ShotChartMode::TwoTeam) {
      if (options.team.empty()) {
        sets.push_back({{}, game.teams[0], "attack"});
        sets.push_back({{}, game.teams[1], "attack"});
      } else {
        sets.push_back({{}, options.team, "attack"});
      }
    } else if (mode == ShotChartMode::SingleTeamAttack) {
      sets.push_back({{}, options.team, "attack"});
    } else {
      sets.push_back({{}, options.team, "defense"});
    }

    for (auto& set : sets) {
      const std::string offense =
          set.role == "attack" ? set.team : other(set.team);
      for (const auto& play : game.plays) {
        if (play.outcome == PlayOutcome::Other) continue;
        if (play.offense_team != offense) continue;
        try {
          Play filtered = offensive_half_filter(play);
          Play prepared = downsample(filtered, options.downsample_factor);
          if (prepared.frames.size() < 3) {
            sink.warn("event " + std::to_string(play.event_id) +
                      ": too few offensive frames; skipped");
            continue;
          }
          prepared.score_margin_at_start = play.score_margin_at_start;
          shot_moment(prepared);     // validates the height trace
          movement_matrix(prepared)  // validates roster and frame count
              .eval();
          set.plays.push_back(std::move(prepared));
        } catch (const std::exception& e) {
          sink.warn("event " + std::to_string(play.event_id) + ": " + std::string(e.what()) +
                    "; skipped");
        }
      }
    }

    std::map<std::string, double> attack_median_id;  // team -> overall median
    std::map<std::string, std::vector<double>> attack_ids;
    int built = 0;
    for (const auto& prepared : sets) {
      const std::string dir = prepared.team + "_" + prepared.role + "/";
      if (prepared.plays.empty()) {
        sink.warn("set " + prepared.team + " " + prepared.role + ": no qualifying plays");
        continue;
      }
      try {
        const ShotChartSet set = build_shot_charts(prepared.plays, mode, prepared.team);
        std::vector<std::string> ids;
        for (const long long event : set.event_ids) ids.push_back(std::to_string(event));
        sink.write_matrix(dir + "shotchart.csv", set.matrix, set.columns, &ids, "id");

        json meta;
        meta["mode"] = to_string(set.mode);
        meta["team"] = set.team;
        meta["role"] = prepared.role;
        meta["D"] = set.matrix.cols();
        meta["n_plays"] = set.matrix.rows();
        meta["event_ids"] = set.event_ids;
        meta["outcomes"] = set.outcomes;
        meta["margins"] = set.margins;
        json cats = json::array(), durs = json::array(), dists = json::array();
        for (Index i = 0; i < set.matrix.rows(); ++i) {
          const double delta = set.shooter_distance[i];
          dists.push_back(delta);
          cats.push_back(delta < 0.0 ? "unknown" : to_string(categorize_shot(delta)));
          durs.push_back(set.durations[static_cast<std::size_t>(i)] <= 12.5 ? "short" : "long");
        }
        meta["shooter_distance_feet"] = dists;
        meta["distance_categories"] = cats;
        meta["duration_classes"] = durs;
        sink.write_text(dir + "shotchart_meta.json", meta.dump(2) + "\n");

        const Dataset data = matrix_as_dataset(set.matrix, ids);
        EstimateOptions est = options.estimate;
        est.k_scan_lo = est.k_scan_hi = 0;
        const PipelineResult result = run_pipeline(data, est, sink, dir);
        write_set_analytics(sink, dir, set, result);

        if (prepared.role == "attack") {
          std::vector<double> meds(result.estimates.median_id.data(),
                                   result.estimates.median_id.data() +
                                       result.estimates.median_id.size());
          attack_ids[prepared.team] = meds;
          std::sort(meds.begin(), meds.end());
          const std::size_t m = meds.size();
          attack_median_id[prepared.team] =
              m % 2 ? meds[m / 2] : 0.5 * (meds[m / 2 - 1] + meds[m / 2]);
        }
        ++built;
      } catch (const std::exception& e) {
        sink.warn("set " + prepared.team + " " + prepared.role + ": " + e.what());
      }
    }
    if (built == 0) return fail("no shot-chart set could be analyzed");

    // Winner/loser comparison when both attacking sets exist.
    if (attack_ids.size() == 2) {
      json wl;
      const std::string home = game.teams[0], away = game.teams[1];
      wl["home_team"] = home;
      wl["away_team"] = away;
      wl["final_score"] = {game.final_home, game.final_away};
      if (game.final_home != game.final_away) {
        const std::string winner = game.final_home > game.final_away ? home : away;
        const std::string loser = winner == home ? away : home;
        wl["winner"] = winner;
        const auto& xs = attack_ids[winner];
        const auto& ys = attack_ids[loser];
        const auto greater =
            mann_whitney(Eigen::Map<const Vector>(xs.data(), static_cast<Index>(xs.size())),
                         Eigen::Map<const Vector>(ys.data(), static_cast<Index>(ys.size())),
                         Alternative::Greater);
        const auto two_sided =
            mann_whitney(Eigen::Map<const Vector>(xs.data(), static_cast<Index>(xs.size())),
                         Eigen::Map<const Vector>(ys.data(), static_cast<Index>(ys.size())),
                         Alternative::TwoSided);
        wl["winner_greater"] = {{"U", greater.u}, {"p", greater.p}, {"exact", greater.exact}};
        wl["two_sided"] = {{"U", two_sided.u}, {"p", two_sided.p}, {"exact", two_sided.exact}};
        wl["median_id"] = {{winner, attack_median_id[winner]}, {loser, attack_median_id[loser]}};
      } else {
        wl["winner"] = "tie";
      }
      sink.write_text("game_tests.json", wl.dump(2) + "\n");
    }

    json config = estimate_options_to_json(options.estimate);
    config["mode"] = options.mode;
    if (!options.team.empty()) config["team"] = options.team;
    if (!options.game.empty()) config["game"] = options.game;
    config["downsample_factor"] = options.downsample_factor;
    sink.finish("analyze-shotcharts", options.estimate.seed, config);
    return 0;
  } catch (const std::exception& e) {
    return fail(e.what());
  }
}

bool verify_manifest(const std::string& manifest_path, std::string* error) {
  try {
    const auto manifest = json::parse(read_text_file(manifest_path));
    const fs::path root = fs::path(manifest_path).parent_path();
    for (const auto& entry : manifest.at("outputs")) {
      const std::string rel = entry.at("path").get<std::string>();
      const std::string expected = entry.at("checksum").get<std::string>();
      const std::string actual = checksum_hex(checksum_file((root / rel).string()));
      if (expected != actual) {
        if (error) *error = rel + ": checksum mismatch";
        return false;
      }
    }
    return true;
  } catch (const std::exception& e) {
    if (error) *error = e.what();
    return false;
  }
}

}  // namespace hidalgo
