#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "hackattack/game.hpp"
#include "hackattack/serialize.hpp"

namespace hackattack {

inline constexpr int kRecordVersion = 1;

struct TurnRecord {
  PlayerId player = 0;
  std::vector<Action> actions;
  TurnObservations observations;  // one list per action
  bool operator==(const TurnRecord&) const = default;
};

struct RoundRecord {
  int round = 1;
  Observations grants;
  std::vector<TurnRecord> turns;
  bool operator==(const RoundRecord&) const = default;
};

// Replayable transcript of one game: config and seed fix the hidden state, and
// the recorded actions fix everything else.
struct GameRecord {
  int version = kRecordVersion;
  GameConfig config;
  std::uint64_t seed = 0;
  std::vector<std::string> strategies;  // per seat, informational
  std::vector<RoundRecord> rounds;
  Observations end;
  Outcome outcome;
  bool operator==(const GameRecord&) const = default;
};

inline void to_json(json& j, const TurnRecord& t) {
  j = json{{"player", t.player}, {"actions", t.actions}, {"observations", t.observations}};
}
inline void from_json(const json& j, TurnRecord& t) {
  j.at("player").get_to(t.player);
  j.at("actions").get_to(t.actions);
  j.at("observations").get_to(t.observations);
}
inline void to_json(json& j, const RoundRecord& r) {
  j = json{{"round", r.round}, {"grants", r.grants}, {"turns", r.turns}};
}
inline void from_json(const json& j, RoundRecord& r) {
  j.at("round").get_to(r.round);
  j.at("grants").get_to(r.grants);
  j.at("turns").get_to(r.turns);
}
inline void to_json(json& j, const GameRecord& g) {
  j = json{{"version", g.version}, {"config", g.config}, {"seed", g.seed},
           {"strategies", g.strategies}, {"rounds", g.rounds}, {"end", g.end},
           {"outcome", g.outcome}};
}
inline void from_json(const json& j, GameRecord& g) {
  j.at("version").get_to(g.version);
  if (g.version != kRecordVersion)
    throw FormatError("unsupported record version " + std::to_string(g.version));
  j.at("config").get_to(g.config);
  j.at("seed").get_to(g.seed);
  j.at("strategies").get_to(g.strategies);
  j.at("rounds").get_to(g.rounds);
  j.at("end").get_to(g.end);
  j.at("outcome").get_to(g.outcome);
}

inline std::string dump(const GameRecord& g) { return json(g).dump(); }

// 64-bit FNV-1a of the canonical dump, as 16 hex digits.
inline std::string digest(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string digest(const GameRecord& g) { return digest(dump(g)); }

// Re-runs the recorded actions through the engine from (config, seed).
// Throws RuleViolation if a recorded action is illegal.
inline GameRecord replay(const GameRecord& rec) {
  GameRecord out;
  out.config = rec.config;
  out.seed = rec.seed;
  out.strategies = rec.strategies;
  GameState s = new_game(rec.config, rec.seed);
  for (const RoundRecord& r : rec.rounds) {
    RoundRecord rr;
    rr.round = s.round;
    rr.grants = grant_round_exploits(s);
    for (const TurnRecord& t : r.turns) {
      TurnRecord tr;
      tr.player = t.player;
      tr.actions = t.actions;
      tr.observations = play_turn(s, t.player, t.actions);
      rr.turns.push_back(std::move(tr));
      if (is_over(s)) break;
    }
    out.rounds.push_back(std::move(rr));
    if (is_over(s)) break;
  }
  out.end = end_of_game(s);
  out.outcome = game_result(s);
  return out;
}

}  // namespace hackattack
