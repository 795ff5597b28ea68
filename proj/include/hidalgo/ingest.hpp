#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hidalgo/types.hpp"

namespace hidalgo {

// Court geometry, feet. Plays are normalized to attack the x > 47 half;
// the attacked hub then sits at (88.75, 25).
inline constexpr double kCourtLength = 94.0;
inline constexpr double kCourtWidth = 50.0;
inline constexpr double kHalfCourtX = 47.0;
inline constexpr double kHubX = 88.75;
inline constexpr double kHubY = 25.0;

struct PlayerState {
  std::string team;
  long long player_id = 0;
  double x = 0.0;
  double y = 0.0;
};

struct BallState {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// One tracking snapshot: exactly 10 players plus the ball.
struct TrackingFrame {
  std::string game_id;
  long long event_id = 0;
  long long frame_index = 0;
  double timestamp = 0.0;  // seconds
  std::vector<PlayerState> players;  // size 10, sorted by (team, player_id)
  BallState ball;
};

enum class PlayOutcome { ShotMade, ShotMissed, Other };

PlayOutcome outcome_from_string(const std::string& name);
std::string to_string(PlayOutcome outcome);

/// One possession: the ordered frames of a single event, with the outcome
/// and score context attached from play-by-play.
struct Play {
  std::string game_id;
  long long event_id = 0;
  int segment = 0;  // >0 when a frame gap split the event into pieces
  std::vector<TrackingFrame> frames;
  std::string offense_team;
  PlayOutcome outcome = PlayOutcome::Other;
  long long shooter_id = -1;
  int score_margin_at_start = 0;

  double duration() const {
    return frames.empty() ? 0.0 : frames.back().timestamp - frames.front().timestamp;
  }
};

struct ParseReport {
  std::vector<std::string> warnings;
  int frames_total = 0;
  int frames_dropped = 0;
};

/// Reads the tracking schema
///   game_id,event_id,frame,timestamp,entity_type,team,player_id,x,y,z
/// and groups rows into validated frames. Frames with missing entities are
/// dropped with a warning; more than 5% dropped is a hard error.
std::vector<TrackingFrame> parse_tracking_csv(std::istream& in, ParseReport* report = nullptr);

void write_tracking_csv(std::ostream& out, const std::vector<TrackingFrame>& frames);

struct PlayByPlayRow {
  long long event_id = 0;
  std::string outcome;
  long long shooter_id = -1;
  int score_home = 0;
  int score_away = 0;
};

/// Reads event_id,outcome,shooter_id,score_home,score_away.
std::vector<PlayByPlayRow> parse_pbp_csv(std::istream& in);

/// Groups frames into plays, attaches outcomes, interpolates gaps of at most
/// two raw frames and splits larger ones, and normalizes orientation so
/// every play attacks the x > 47 half.
std::vector<Play> build_plays(const std::vector<TrackingFrame>& frames,
                              const std::vector<PlayByPlayRow>& pbp,
                              ParseReport* report = nullptr);

/// Keeps frames at indices 0, factor, 2*factor, ...
Play downsample(const Play& play, int factor);

/// Maximal suffix of frames with ball x > 47; may be empty.
Play offensive_half_filter(const Play& play);

/// frames x 20 matrix of player (x, y) pairs, columns sorted by
/// (team, player_id), ball excluded. Requires a constant roster and at
/// least 3 frames.
Matrix movement_matrix(const Play& play);

/// Canonical column names matching movement_matrix.
std::vector<std::string> movement_columns(const Play& play);

/// Forward-difference speed and angle matrices, one column per player.
/// Angle uses the two-argument arctangent in (-pi, pi]; a stationary step
/// maps to 0. Requires at least 4 frames.
std::pair<Matrix, Matrix> speed_angle(const Play& play);

/// Release frame inferred from ball height: the start of the final run of
/// strictly rising steps that attains the play's maximum z. Throws
/// FlatTrajectory when the trace is constant.
int shot_moment(const Play& play);

enum class ShotChartMode { TwoTeam, SingleTeamAttack, SingleTeamDefense };

ShotChartMode shot_chart_mode_from_string(const std::string& name);
std::string to_string(ShotChartMode mode);

/// Player locations at the shot instant, one row per qualifying play.
struct ShotChartSet {
  Matrix matrix;                        // plays x D, D in {10, 20}
  std::vector<int> outcomes;            // made = 1, missed = 0
  Vector shooter_distance;              // delta, feet; -1 when unknown
  std::vector<long long> event_ids;
  std::vector<int> margins;             // |score margin| at play start
  std::vector<double> durations;        // seconds, offensive suffix
  std::vector<std::string> columns;
  std::string team;
  ShotChartMode mode = ShotChartMode::TwoTeam;
};

/// Builds the shot-moment location matrix from filtered, downsampled shot
/// plays. TwoTeam keeps all 20 columns; the single-team modes keep the 10
/// columns of `team`. Plays must share one attacking orientation.
ShotChartSet build_shot_charts(const std::vector<Play>& plays, ShotChartMode mode,
                               const std::string& team);

enum class ShotCategory { Short, MidRange, ThreePoints };
enum class MarginCategory { Small, Medium, Large, Huge };
enum class DurationClass { Short, Long };

std::string to_string(ShotCategory c);
std::string to_string(MarginCategory c);
std::string to_string(DurationClass c);

/// delta < 6 short, 6 <= delta < 22 mid-range, delta >= 22 three-points.
ShotCategory categorize_shot(double delta_feet);

/// 0-5 small, 6-10 medium, 11-15 large, >= 16 huge.
MarginCategory categorize_margin(int margin);

/// duration <= 12.5 s short, otherwise long; measured on the play as given
/// (apply offensive_half_filter first).
DurationClass duration_split(const Play& play);

}  // namespace hidalgo
