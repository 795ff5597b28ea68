#include "hidalgo/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "hidalgo/io.hpp"

namespace hidalgo {

PlayOutcome outcome_from_string(const std::string& name) {
  if (name == "ShotMade") return PlayOutcome::ShotMade;
  if (name == "ShotMissed") return PlayOutcome::ShotMissed;
  return PlayOutcome::Other;
}

std::string to_string(PlayOutcome outcome) {
  switch (outcome) {
    case PlayOutcome::ShotMade: return "ShotMade";
    case PlayOutcome::ShotMissed: return "ShotMissed";
    case PlayOutcome::Other: return "Other";
  }
  return "?";
}

ShotChartMode shot_chart_mode_from_string(const std::string& name) {
  if (name == "two-team" || name == "TwoTeam") return ShotChartMode::TwoTeam;
  if (name == "single-attack" || name == "SingleTeamAttack")
    return ShotChartMode::SingleTeamAttack;
  if (name == "single-defense" || name == "SingleTeamDefense")
    return ShotChartMode::SingleTeamDefense;
  throw std::invalid_argument("unknown shot chart mode: " + name);
}

std::string to_string(ShotChartMode mode) {
  switch (mode) {
    case ShotChartMode::TwoTeam: return "two-team";
    case ShotChartMode::SingleTeamAttack: return "single-attack";
    case ShotChartMode::SingleTeamDefense: return "single-defense";
  }
  return "?";
}

std::string to_string(ShotCategory c) {
  switch (c) {
    case ShotCategory::Short: return "short";
    case ShotCategory::MidRange: return "mid_range";
    case ShotCategory::ThreePoints: return "three_points";
  }
  return "?";
}

std::string to_string(MarginCategory c) {
  switch (c) {
    case MarginCategory::Small: return "small";
    case MarginCategory::Medium: return "medium";
    case MarginCategory::Large: return "large";
    case MarginCategory::Huge: return "huge";
  }
  return "?";
}

std::string to_string(DurationClass c) {
  return c == DurationClass::Short ? "short" : "long";
}

namespace {

constexpr const char* kTrackingHeader =
    "game_id,event_id,frame,timestamp,entity_type,team,player_id,x,y,z";

struct RawRow {
  std::string game_id;
  long long event_id;
  long long frame;
  double timestamp;
  bool is_ball;
  std::string team;
  long long player_id;
  double x, y, z;
};

bool parse_raw_row(const std::vector<std::string>& fields, RawRow& row, std::string& why) {
  if (fields.size() != 10) {
    why = "expected 10 fields, got " + std::to_string(fields.size());
    return false;
  }
  try {
    row.game_id = fields[0];
    row.event_id = std::stoll(fields[1]);
    row.frame = std::stoll(fields[2]);
    row.timestamp = std::stod(fields[3]);
    if (fields[4] == "ball") {
      row.is_ball = true;
      row.player_id = -1;
    } else if (fields[4] == "player") {
      row.is_ball = false;
      row.team = fields[5];
      row.player_id = std::stoll(fields[6]);
    } else {
      why = "entity_type must be 'player' or 'ball'";
      return false;
    }
    row.x = std::stod(fields[7]);
    row.y = std::stod(fields[8]);
    row.z = fields[9].empty() ? 0.0 : std::stod(fields[9]);
  } catch (const std::exception&) {
    why = "malformed numeric field";
    return false;
  }
  if (!std::isfinite(row.x) || !std::isfinite(row.y) || !std::isfinite(row.z)) {
    why = "non-finite coordinate";
    return false;
  }
  if (row.x < 0.0 || row.x > kCourtLength || row.y < 0.0 || row.y > kCourtWidth) {
    why = "coordinate outside the 94x50 court";
    return false;
  }
  if (row.is_ball && row.z < 0.0) {
    why = "ball height must be nonnegative";
    return false;
  }
  return true;
}

void sort_players(TrackingFrame& frame) {
  std::sort(frame.players.begin(), frame.players.end(),
            [](const PlayerState& a, const PlayerState& b) {
              return a.team < b.team || (a.team == b.team && a.player_id < b.player_id);
            });
}

}  // namespace

std::vector<TrackingFrame> parse_tracking_csv(std::istream& in, ParseReport* report) {
  ParseReport local;
  ParseReport& rep = report ? *report : local;

  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;

  // (game, event, frame) -> frame under construction, in first-seen order.
  std::map<std::tuple<std::string, long long, long long>, std::size_t> slot;
  std::vector<TrackingFrame> frames;
  std::vector<bool> has_ball;

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // header row, validated loosely
      if (line.rfind("game_id", 0) != 0)
        throw std::runtime_error("tracking file must start with the header " +
                                 std::string(kTrackingHeader));
      continue;
    }
    RawRow row;
    std::string why;
    if (!parse_raw_row(split_csv_line(line), row, why)) {
      rep.warnings.push_back("line " + std::to_string(lineno) + ": " + why);
      continue;
    }
    const auto key = std::make_tuple(row.game_id, row.event_id, row.frame);
    auto it = slot.find(key);
    if (it == slot.end()) {
      it = slot.emplace(key, frames.size()).first;
      TrackingFrame frame;
      frame.game_id = row.game_id;
      frame.event_id = row.event_id;
      frame.frame_index = row.frame;
      frame.timestamp = row.timestamp;
      frames.push_back(std::move(frame));
      has_ball.push_back(false);
    }
    TrackingFrame& frame = frames[it->second];
    if (row.is_ball) {
      frame.ball = {row.x, row.y, row.z};
      has_ball[it->second] = true;
    } else {
      frame.players.push_back({row.team, row.player_id, row.x, row.y});
    }
  }

  std::vector<TrackingFrame> valid;
  valid.reserve(frames.size());
  rep.frames_total = static_cast<int>(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    TrackingFrame& frame = frames[i];
    if (frame.players.size() != 10 || !has_ball[i]) {
      ++rep.frames_dropped;
      rep.warnings.push_back("event " + std::to_string(frame.event_id) + " frame " +
                             std::to_string(frame.frame_index) + ": dropped (" +
                             std::to_string(frame.players.size()) + " players, ball " +
                             (has_ball[i] ? "present" : "missing") + ")");
      continue;
    }
    sort_players(frame);
    valid.push_back(std::move(frame));
  }
  if (rep.frames_total > 0 &&
      rep.frames_dropped > 0.05 * static_cast<double>(rep.frames_total))
    throw std::runtime_error(std::to_string(rep.frames_dropped) + " of " +
                             std::to_string(rep.frames_total) +
                             " frames dropped; input is unusable");

  // Stable order: by game, event, frame index.
  std::stable_sort(valid.begin(), valid.end(),
                   [](const TrackingFrame& a, const TrackingFrame& b) {
                     if (a.game_id != b.game_id) return a.game_id < b.game_id;
                     if (a.event_id != b.event_id) return a.event_id < b.event_id;
                     return a.frame_index < b.frame_index;
                   });
  return valid;
}

void write_tracking_csv(std::ostream& out, const std::vector<TrackingFrame>& frames) {
  out << kTrackingHeader << "\n";
  for (const auto& frame : frames) {
    for (const auto& p : frame.players) {
      out << frame.game_id << ',' << frame.event_id << ',' << frame.frame_index << ','
          << format_double(frame.timestamp) << ",player," << p.team << ',' << p.player_id
          << ',' << format_double(p.x) << ',' << format_double(p.y) << ",0\n";
    }
    out << frame.game_id << ',' << frame.event_id << ',' << frame.frame_index << ','
        << format_double(frame.timestamp) << ",ball,,-1," << format_double(frame.ball.x)
        << ',' << format_double(frame.ball.y) << ',' << format_double(frame.ball.z)
        << "\n";
  }
}

std::vector<PlayByPlayRow> parse_pbp_csv(std::istream& in) {
  std::vector<PlayByPlayRow> rows;
  std::string line;
  bool header_seen = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != 5)
      throw std::runtime_error("play-by-play line " + std::to_string(lineno) +
                               ": expected event_id,outcome,shooter_id,score_home,score_away");
    PlayByPlayRow row;
    try {
      row.event_id = std::stoll(fields[0]);
      row.outcome = fields[1];
      row.shooter_id = fields[2].empty() ? -1 : std::stoll(fields[2]);
      row.score_home = std::stoi(fields[3]);
      row.score_away = std::stoi(fields[4]);
    } catch (const std::exception&) {
      throw std::runtime_error("play-by-play line " + std::to_string(lineno) +
                               ": malformed numeric field");
    }
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const PlayByPlayRow& a, const PlayByPlayRow& b) {
                     return a.event_id < b.event_id;
                   });
  return rows;
}

namespace {

TrackingFrame interpolate_frame(const TrackingFrame& a, const TrackingFrame& b,
                                long long frame_index) {
  const double w = static_cast<double>(frame_index - a.frame_index) /
                   static_cast<double>(b.frame_index - a.frame_index);
  TrackingFrame out = a;
  out.frame_index = frame_index;
  out.timestamp = a.timestamp + w * (b.timestamp - a.timestamp);
  for (std::size_t p = 0; p < out.players.size(); ++p) {
    out.players[p].x = a.players[p].x + w * (b.players[p].x - a.players[p].x);
    out.players[p].y = a.players[p].y + w * (b.players[p].y - a.players[p].y);
  }
  out.ball.x = a.ball.x + w * (b.ball.x - a.ball.x);
  out.ball.y = a.ball.y + w * (b.ball.y - a.ball.y);
  out.ball.z = a.ball.z + w * (b.ball.z - a.ball.z);
  return out;
}

bool same_roster(const TrackingFrame& a, const TrackingFrame& b) {
  for (std::size_t p = 0; p < a.players.size(); ++p)
    if (a.players[p].team != b.players[p].team ||
        a.players[p].player_id != b.players[p].player_id)
      return false;
  return true;
}

// A play attacks the right half after normalization. The raw direction is
// read off the ball's mean x over the second half of the frames.
bool attacks_left(const std::vector<TrackingFrame>& frames) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = frames.size() / 2; i < frames.size(); ++i) {
    sum += frames[i].ball.x;
    ++count;
  }
  return count > 0 && sum / static_cast<double>(count) < kHalfCourtX;
}

void reflect(TrackingFrame& frame) {
  for (auto& p : frame.players) {
    p.x = kCourtLength - p.x;
    p.y = kCourtWidth - p.y;
  }
  frame.ball.x = kCourtLength - frame.ball.x;
  frame.ball.y = kCourtWidth - frame.ball.y;
}

}  // namespace

std::vector<Play> build_plays(const std::vector<TrackingFrame>& frames,
                              const std::vector<PlayByPlayRow>& pbp, ParseReport* report) {
  ParseReport local;
  ParseReport& rep = report ? *report : local;

  std::map<long long, const PlayByPlayRow*> by_event;
  std::map<long long, int> margin_before;  // |home - away| before the event
  int prev_home = 0, prev_away = 0;
  for (const auto& row : pbp) {
    by_event[row.event_id] = &row;
    margin_before[row.event_id] = std::abs(prev_home - prev_away);
    prev_home = row.score_home;
    prev_away = row.score_away;
  }

  std::vector<Play> plays;
  std::size_t i = 0;
  while (i < frames.size()) {
    std::size_t j = i;
    while (j < frames.size() && frames[j].game_id == frames[i].game_id &&
           frames[j].event_id == frames[i].event_id)
      ++j;

    // Split the event at large frame gaps or roster changes, interpolating
    // gaps of at most two raw frames.
    std::vector<std::vector<TrackingFrame>> segments(1);
    segments.back().push_back(frames[i]);
    for (std::size_t t = i + 1; t < j; ++t) {
      const TrackingFrame& prev = segments.back().back();
      const TrackingFrame& cur = frames[t];
      const long long gap = cur.frame_index - prev.frame_index - 1;
      if (gap < 0) {
        rep.warnings.push_back("event " + std::to_string(cur.event_id) +
                               ": duplicate frame index " +
                               std::to_string(cur.frame_index) + " ignored");
        continue;
      }
      if (!same_roster(prev, cur)) {
        rep.warnings.push_back("event " + std::to_string(cur.event_id) +
                               ": lineup change at frame " +
                               std::to_string(cur.frame_index) + "; play split");
        segments.emplace_back();
      } else if (gap > 2) {
        rep.warnings.push_back("event " + std::to_string(cur.event_id) + ": gap of " +
                               std::to_string(gap) + " frames at " +
                               std::to_string(cur.frame_index) + "; play split");
        segments.emplace_back();
      } else if (gap > 0) {
        for (long long f = prev.frame_index + 1; f < cur.frame_index; ++f)
          segments.back().push_back(interpolate_frame(prev, cur, f));
      }
      segments.back().push_back(cur);
    }

    const auto pbp_it = by_event.find(frames[i].event_id);
    for (std::size_t s = 0; s < segments.size(); ++s) {
      Play play;
      play.game_id = frames[i].game_id;
      play.event_id = frames[i].event_id;
      play.segment = static_cast<int>(s);
      play.frames = std::move(segments[s]);
      if (pbp_it != by_event.end()) {
        const PlayByPlayRow& row = *pbp_it->second;
        play.outcome = outcome_from_string(row.outcome);
        play.shooter_id = row.shooter_id;
        play.score_margin_at_start = margin_before[row.event_id];
      }
      if (attacks_left(play.frames))
        for (auto& frame : play.frames) reflect(frame);
      if (play.outcome != PlayOutcome::Other && play.shooter_id >= 0) {
        const auto& players = play.frames.front().players;
        const auto found =
            std::find_if(players.begin(), players.end(), [&](const PlayerState& p) {
              return p.player_id == play.shooter_id;
            });
        if (found != players.end()) play.offense_team = found->team;
      }
      plays.push_back(std::move(play));
    }
    i = j;
  }
  return plays;
}

Play downsample(const Play& play, int factor) {
  if (factor < 1) throw std::invalid_argument("downsample factor must be >= 1");
  if (factor == 1) return play;
  Play out = play;
  out.frames.clear();
  for (std::size_t i = 0; i < play.frames.size(); i += static_cast<std::size_t>(factor))
    out.frames.push_back(play.frames[i]);
  return out;
}

Play offensive_half_filter(const Play& play) {
  Play out = play;
  std::size_t start = play.frames.size();
  while (start > 0 && play.frames[start - 1].ball.x > kHalfCourtX) --start;
  out.frames.assign(play.frames.begin() + static_cast<std::ptrdiff_t>(start),
                    play.frames.end());
  return out;
}

namespace {

void require_constant_roster(const Play& play) {
  for (std::size_t t = 1; t < play.frames.size(); ++t)
    if (!same_roster(play.frames[0], play.frames[t]))
      throw std::invalid_argument("event " + std::to_string(play.event_id) +
                                  ": lineup changes within the window");
}

}  // namespace

Matrix movement_matrix(const Play& play) {
  const auto n_frames = static_cast<Index>(play.frames.size());
  if (n_frames < 3)
    throw std::invalid_argument("movement matrix needs at least 3 frames (ID undefined below)");
  if (play.frames[0].players.size() != 10)
    throw std::invalid_argument("frames must carry exactly 10 players");
  require_constant_roster(play);
  Matrix m(n_frames, 20);
  for (Index t = 0; t < n_frames; ++t)
    for (Index p = 0; p < 10; ++p) {
      m(t, 2 * p) = play.frames[static_cast<std::size_t>(t)].players[static_cast<std::size_t>(p)].x;
      m(t, 2 * p + 1) =
          play.frames[static_cast<std::size_t>(t)].players[static_cast<std::size_t>(p)].y;
    }
  return m;
}

std::vector<std::string> movement_columns(const Play& play) {
  std::vector<std::string> cols;
  if (play.frames.empty()) return cols;
  for (const auto& p : play.frames.front().players) {
    cols.push_back(p.team + "_" + std::to_string(p.player_id) + "_x");
    cols.push_back(p.team + "_" + std::to_string(p.player_id) + "_y");
  }
  return cols;
}

std::pair<Matrix, Matrix> speed_angle(const Play& play) {
  const auto n_frames = static_cast<Index>(play.frames.size());
  if (n_frames < 4) throw std::invalid_argument("speed/angle needs at least 4 frames");
  require_constant_roster(play);
  Matrix speed(n_frames - 1, 10);
  Matrix angle(n_frames - 1, 10);
  for (Index t = 0; t + 1 < n_frames; ++t) {
    const auto& cur = play.frames[static_cast<std::size_t>(t)].players;
    const auto& nxt = play.frames[static_cast<std::size_t>(t) + 1].players;
    for (Index p = 0; p < 10; ++p) {
      const double dx = nxt[static_cast<std::size_t>(p)].x - cur[static_cast<std::size_t>(p)].x;
      const double dy = nxt[static_cast<std::size_t>(p)].y - cur[static_cast<std::size_t>(p)].y;
      speed(t, p) = std::sqrt(dy * dy + dx * dx);
      angle(t, p) = (dx == 0.0 && dy == 0.0) ? 0.0 : std::atan2(dy, dx);
    }
  }
  return {std::move(speed), std::move(angle)};
}

int shot_moment(const Play& play) {
  const auto n = static_cast<int>(play.frames.size());
  if (n == 0) throw std::invalid_argument("empty play");
  const auto z_at = [&](int t) { return play.frames[static_cast<std::size_t>(t)].ball.z; };
  double z_max = z_at(0), z_min = z_at(0);
  for (int t = 1; t < n; ++t) {
    z_max = std::max(z_max, z_at(t));
    z_min = std::min(z_min, z_at(t));
  }
  if (z_max == z_min)
    throw FlatTrajectory("event " + std::to_string(play.event_id) +
                         ": ball height is constant; no release detectable");

  // Apex: the last max-attaining frame reached by a strictly rising step
  // (the trace start counts as rising).
  int apex = 0;
  for (int t = 0; t < n; ++t)
    if (z_at(t) == z_max && (t == 0 || z_at(t) > z_at(t - 1))) apex = t;

  // Release: the first frame of the run of rising steps ending at the apex.
  int s = apex;
  while (s > 0 && z_at(s) > z_at(s - 1)) --s;
  return s == 0 ? 0 : s + 1;
}

ShotChartSet build_shot_charts(const std::vector<Play>& plays, ShotChartMode mode,
                               const std::string& team) {
  if (mode != ShotChartMode::TwoTeam && team.empty())
    throw std::invalid_argument("single-team shot charts need a team");

  ShotChartSet set;
  set.mode = mode;
  set.team = team;

  std::vector<Vector> rows;
  for (const auto& play : plays) {
    if (play.outcome != PlayOutcome::ShotMade && play.outcome != PlayOutcome::ShotMissed)
      continue;
    if (play.frames.size() < 3) continue;
    const Matrix movement = movement_matrix(play);
    const int shot = shot_moment(play);
    const auto cols = movement_columns(play);
    const auto& players = play.frames.front().players;

    // Column selection per mode; ball never enters.
    std::vector<Index> keep;
    for (Index p = 0; p < 10; ++p) {
      const bool is_team = players[static_cast<std::size_t>(p)].team == team;
      if (mode == ShotChartMode::TwoTeam ||
          (mode == ShotChartMode::SingleTeamAttack && is_team) ||
          (mode == ShotChartMode::SingleTeamDefense && is_team)) {
        keep.push_back(2 * p);
        keep.push_back(2 * p + 1);
      }
    }
    const Index d = static_cast<Index>(keep.size());
    if ((mode == ShotChartMode::TwoTeam && d != 20) ||
        (mode != ShotChartMode::TwoTeam && d != 10))
      throw std::invalid_argument("event " + std::to_string(play.event_id) +
                                  ": team '" + team + "' does not field 5 players");

    Vector row(d);
    for (Index c = 0; c < d; ++c) row[c] = movement(shot, keep[static_cast<std::size_t>(c)]);
    rows.push_back(std::move(row));

    if (set.columns.empty())
      for (Index c = 0; c < d; ++c)
        set.columns.push_back(cols[static_cast<std::size_t>(keep[static_cast<std::size_t>(c)])]);

    set.outcomes.push_back(play.outcome == PlayOutcome::ShotMade ? 1 : 0);
    set.event_ids.push_back(play.event_id);
    set.margins.push_back(play.score_margin_at_start);
    set.durations.push_back(play.duration());

    double delta = -1.0;
    if (play.shooter_id >= 0) {
      const auto& shot_players = play.frames[static_cast<std::size_t>(shot)].players;
      for (const auto& p : shot_players)
        if (p.player_id == play.shooter_id) {
          delta = std::sqrt((p.x - kHubX) * (p.x - kHubX) + (p.y - kHubY) * (p.y - kHubY));
          break;
        }
    }
    set.shooter_distance.conservativeResize(set.shooter_distance.size() + 1);
    set.shooter_distance[set.shooter_distance.size() - 1] = delta;
  }

  if (rows.empty()) throw std::invalid_argument("no qualifying shot plays");
  set.matrix.resize(static_cast<Index>(rows.size()), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    set.matrix.row(static_cast<Index>(r)) = rows[r].transpose();
  return set;
}

ShotCategory categorize_shot(double delta_feet) {
  if (delta_feet < 0.0) throw std::invalid_argument("shot distance must be nonnegative");
  if (delta_feet < 6.0) return ShotCategory::Short;
  if (delta_feet < 22.0) return ShotCategory::MidRange;
  return ShotCategory::ThreePoints;
}

MarginCategory categorize_margin(int margin) {
  if (margin < 0) throw std::invalid_argument("margin must be nonnegative");
  if (margin <= 5) return MarginCategory::Small;
  if (margin <= 10) return MarginCategory::Medium;
  if (margin <= 15) return MarginCategory::Large;
  return MarginCategory::Huge;
}

DurationClass duration_split(const Play& play) {
  return play.duration() <= 12.5 ? DurationClass::Short : DurationClass::Long;
}

}  // namespace hidalgo
