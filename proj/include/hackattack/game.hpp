#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hackattack/config.hpp"
#include "hackattack/exploit.hpp"
#include "hackattack/rng.hpp"

namespace hackattack {

class RuleViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Computer {
  ComputerId id = 0;
  int os = 0;
  ExploitSet patches;
};

class AccountLedger {
 public:
  AccountLedger() = default;
  AccountLedger(int players, int computers)
      : players_(players), computers_(computers), counts_(players * computers, 0) {}

  int at(PlayerId p, ComputerId c) const { return counts_[p * computers_ + c]; }
  void set(PlayerId p, ComputerId c, int n) { counts_[p * computers_ + c] = n; }
  bool controls(PlayerId p, ComputerId c) const { return at(p, c) >= 1; }

  int controlled_count(PlayerId p) const {
    int n = 0;
    for (int c = 0; c < computers_; ++c) n += controls(p, c);
    return n;
  }

  std::vector<ComputerId> controlled(PlayerId p) const {
    std::vector<ComputerId> out;
    for (int c = 0; c < computers_; ++c)
      if (controls(p, c)) out.push_back(c);
    return out;
  }

  int total() const {
    int n = 0;
    for (int v : counts_) n += v;
    return n;
  }

  int players() const { return players_; }
  int computers() const { return computers_; }

 private:
  int players_ = 0;
  int computers_ = 0;
  std::vector<int> counts_;
};

struct Action {
  PlayerId actor = 0;
  ComputerId acting = 0;
  ActionKind kind = ActionKind::Scan;
  ComputerId target = -1;  // Hack/Recon only
  std::optional<Exploit> exploit;  // Hack/Patch only

  // The computer the action lands on.
  ComputerId affected() const { return is_remote(kind) ? target : acting; }

  bool operator==(const Action&) const = default;

  static Action hack(PlayerId p, ComputerId from, ComputerId to, Exploit e) {
    return {p, from, ActionKind::Hack, to, e};
  }
  static Action recon(PlayerId p, ComputerId from, ComputerId to) {
    return {p, from, ActionKind::Recon, to, std::nullopt};
  }
  static Action patch(PlayerId p, ComputerId c, Exploit e) {
    return {p, c, ActionKind::Patch, -1, e};
  }
  static Action local(PlayerId p, ComputerId c, ActionKind k) {
    return {p, c, k, -1, std::nullopt};
  }
};

struct Outcome {
  enum class Kind { Ongoing, Win, Tie };
  Kind kind = Kind::Ongoing;
  PlayerId winner = -1;
  std::vector<int> counts;  // controlled computers per player

  bool operator==(const Outcome&) const = default;
};

// Observation payloads. Each is delivered to exactly one recipient.
struct HackResult {
  ComputerId target;
  Exploit exploit;
  bool success;
  bool operator==(const HackResult&) const = default;
};
struct BackdoorApplied {
  ComputerId computer;
  int count;
  bool operator==(const BackdoorApplied&) const = default;
};
struct CleanResult {
  ComputerId computer;
  int own_count;                     // the cleaner's accounts at resolution
  std::map<PlayerId, int> removed;   // every other player, 0 when absent
  bool operator==(const CleanResult&) const = default;
};
struct PatchApplied {
  ComputerId computer;
  Exploit exploit;
  bool operator==(const PatchApplied&) const = default;
};
struct ReconResult {
  ComputerId target;
  int os;
  std::vector<Exploit> viable;   // owned, matching OS, not patched
  std::vector<Exploit> blocked;  // owned, matching OS, patched
  bool operator==(const ReconResult&) const = default;
};
struct ScanResult {
  ComputerId computer;
  std::vector<int> counts;  // per player
  bool operator==(const ScanResult&) const = default;
};
struct Detected {
  PlayerId actor;
  ActionKind kind;
  std::optional<ComputerId> source;  // unknown when only seen from the target side
  ComputerId target;
  std::optional<bool> success;  // Hack only
  bool operator==(const Detected&) const = default;
};
struct AccountsLost {
  ComputerId computer;
  PlayerId by;
  int lost;
  int remaining;
  bool operator==(const AccountsLost&) const = default;
};
struct ExploitGained {
  Exploit exploit;
  bool operator==(const ExploitGained&) const = default;
};
struct GameEnd {
  Outcome outcome;
  bool operator==(const GameEnd&) const = default;
};

using Payload = std::variant<HackResult, BackdoorApplied, CleanResult, PatchApplied, ReconResult,
                             ScanResult, Detected, AccountsLost, ExploitGained, GameEnd>;

struct Observation {
  PlayerId recipient = 0;
  Payload payload;
  bool operator==(const Observation&) const = default;
};

using Observations = std::vector<Observation>;

struct GameState {
  GameConfig config;
  std::uint64_t seed = 0;
  std::vector<Computer> computers;
  AccountLedger ledger;
  std::vector<ExploitSet> exploits;             // per player
  std::vector<ComputerId> start_computers;      // per player
  // Patch facts each player has seen first hand (own Patch, Recon "blocked").
  std::vector<std::set<std::pair<ComputerId, Exploit>>> known_patches;
  int round = 1;
  int turn_index = 0;         // position in the fixed turn order
  bool grants_done = false;   // exploit grants for `round` already rolled
  Rng rng;
};

inline GameState new_game(const GameConfig& config, std::uint64_t seed) {
  validate(config);
  GameState s;
  s.config = config;
  s.seed = seed;
  s.rng = Rng(seed);
  const int n = config.num_computers();
  for (int c = 0; c < n; ++c) {
    Computer comp;
    comp.id = c;
    comp.os = static_cast<int>(s.rng.uniform_index(static_cast<std::uint64_t>(config.num_os)));
    if (config.patch_model == PatchModel::AnyOs) {
      comp.patches = sample_distinct_exploits(config, s.rng, config.starting_patches_per_computer);
    } else {
      while (static_cast<int>(comp.patches.size()) < config.starting_patches_per_computer)
        comp.patches.insert(Exploit{comp.os, sample_power(config, s.rng)});
    }
    s.computers.push_back(std::move(comp));
  }
  s.ledger = AccountLedger(config.num_players, n);
  for (int p = 0; p < config.num_players; ++p) {
    const int start = static_cast<int>(s.rng.uniform_index(static_cast<std::uint64_t>(n)));
    s.start_computers.push_back(start);
    s.ledger.set(p, start, 1);
  }
  for (int p = 0; p < config.num_players; ++p)
    s.exploits.push_back(sample_distinct_exploits(config, s.rng, config.starting_exploits));
  s.known_patches.resize(config.num_players);
  return s;
}

inline bool knows_patched(const GameState& s, PlayerId p, ComputerId c, Exploit e) {
  return s.known_patches[p].contains({c, e});
}

// Every legal move from `acting`, in a fixed order: hacks by target then
// exploit strength, recons, clean, scan, backdoor, patches.
inline std::vector<Action> legal_actions(const GameState& s, PlayerId player, ComputerId acting) {
  if (player < 0 || player >= s.config.num_players)
    throw RuleViolation("unknown player");
  if (acting < 0 || acting >= s.config.num_computers() || !s.ledger.controls(player, acting))
    throw RuleViolation("player does not control the acting computer");
  std::vector<Action> out;
  const int n = s.config.num_computers();
  for (int t = 0; t < n; ++t) {
    if (t == acting) continue;
    for (const Exploit& e : s.exploits[player]) out.push_back(Action::hack(player, acting, t, e));
  }
  for (int t = 0; t < n; ++t)
    if (t != acting) out.push_back(Action::recon(player, acting, t));
  out.push_back(Action::local(player, acting, ActionKind::Clean));
  out.push_back(Action::local(player, acting, ActionKind::Scan));
  if (s.ledger.at(player, acting) < s.config.max_accounts)
    out.push_back(Action::local(player, acting, ActionKind::Backdoor));
  for (const Exploit& e : s.exploits[player])
    if (!knows_patched(s, player, acting, e)) out.push_back(Action::patch(player, acting, e));
  return out;
}

// Throws RuleViolation naming the broken rule.
inline void check_legal(const GameState& s, const Action& a) {
  const auto& cfg = s.config;
  if (a.actor < 0 || a.actor >= cfg.num_players) throw RuleViolation("unknown player");
  if (a.acting < 0 || a.acting >= cfg.num_computers())
    throw RuleViolation("acting computer out of range");
  if (!s.ledger.controls(a.actor, a.acting))
    throw RuleViolation("player does not control the acting computer");
  if (is_remote(a.kind)) {
    if (a.target < 0 || a.target >= cfg.num_computers())
      throw RuleViolation("target computer out of range");
    if (a.target == a.acting) throw RuleViolation("target must differ from the acting computer");
  } else if (a.target != -1 && a.target != a.acting) {
    throw RuleViolation("local actions take no separate target");
  }
  if (uses_exploit(a.kind)) {
    if (!a.exploit) throw RuleViolation("action requires an exploit");
    if (!s.exploits[a.actor].contains(*a.exploit))
      throw RuleViolation("exploit not owned by the actor");
  } else if (a.exploit) {
    throw RuleViolation("action takes no exploit");
  }
  if (a.kind == ActionKind::Backdoor && s.ledger.at(a.actor, a.acting) >= cfg.max_accounts)
    throw RuleViolation("backdoor would exceed the account limit");
  if (a.kind == ActionKind::Patch && knows_patched(s, a.actor, a.acting, *a.exploit))
    throw RuleViolation("computer already patched against this exploit");
}

namespace detail {

inline void roll_detection(GameState& s, const Action& a, std::span<const int> before_target,
                           std::span<const int> before_source, bool success,
                           Observations& out) {
  const double prob = s.config.detection_prob(a.kind);
  for (PlayerId q = 0; q < s.config.num_players; ++q) {
    if (q == a.actor) continue;
    const bool on_target = before_target[q] >= 1;
    const bool on_source = is_remote(a.kind) && before_source[q] >= 1;
    if (!on_target && !on_source) continue;
    if (!s.rng.bernoulli(prob)) continue;
    Detected d{a.actor, a.kind, std::nullopt, a.affected(), std::nullopt};
    if (!is_remote(a.kind) || on_source) d.source = a.acting;
    if (a.kind == ActionKind::Hack) d.success = success;
    out.push_back({q, d});
  }
}

}  // namespace detail

// Resolves one action against the current state. Throws (state unchanged)
// when the action is illegal. Detection is rolled for every player present on
// the affected computer (or, for remote moves, the acting one) before
// resolution.
inline Observations apply_action(GameState& s, const Action& a) {
  check_legal(s, a);
  const auto& cfg = s.config;
  const ComputerId hit = a.affected();
  std::vector<int> before_target(cfg.num_players), before_source(cfg.num_players);
  for (PlayerId q = 0; q < cfg.num_players; ++q) {
    before_target[q] = s.ledger.at(q, hit);
    before_source[q] = s.ledger.at(q, a.acting);
  }

  Observations out;
  bool success = false;
  switch (a.kind) {
    case ActionKind::Hack: {
      const Computer& target = s.computers[a.target];
      success = a.exploit->os == target.os && !target.patches.contains(*a.exploit);
      if (success)
        s.ledger.set(a.actor, a.target,
                     std::min(cfg.max_accounts, s.ledger.at(a.actor, a.target) + 1));
      out.push_back({a.actor, HackResult{a.target, *a.exploit, success}});
      break;
    }
    case ActionKind::Backdoor: {
      const int n = std::min(cfg.max_accounts, s.ledger.at(a.actor, a.acting) + 1);
      s.ledger.set(a.actor, a.acting, n);
      out.push_back({a.actor, BackdoorApplied{a.acting, n}});
      break;
    }
    case ActionKind::Clean: {
      const int mine = s.ledger.at(a.actor, a.acting);
      CleanResult result{a.acting, mine, {}};
      Observations losses;
      for (PlayerId q = 0; q < cfg.num_players; ++q) {
        if (q == a.actor) continue;
        const int theirs = s.ledger.at(q, a.acting);
        const int removed = std::min(theirs, mine);
        result.removed[q] = removed;
        if (removed > 0) {
          s.ledger.set(q, a.acting, theirs - removed);
          losses.push_back({q, AccountsLost{a.acting, a.actor, removed, theirs - removed}});
        }
      }
      out.push_back({a.actor, std::move(result)});
      out.insert(out.end(), losses.begin(), losses.end());
      break;
    }
    case ActionKind::Patch: {
      s.computers[a.acting].patches.insert(*a.exploit);
      s.known_patches[a.actor].insert({a.acting, *a.exploit});
      out.push_back({a.actor, PatchApplied{a.acting, *a.exploit}});
      break;
    }
    case ActionKind::Recon: {
      const Computer& target = s.computers[a.target];
      ReconResult r{a.target, target.os, {}, {}};
      for (const Exploit& e : s.exploits[a.actor]) {
        if (e.os != target.os) continue;
        if (target.patches.contains(e)) {
          r.blocked.push_back(e);
          s.known_patches[a.actor].insert({a.target, e});
        } else {
          r.viable.push_back(e);
        }
      }
      out.push_back({a.actor, std::move(r)});
      break;
    }
    case ActionKind::Scan: {
      ScanResult r{a.acting, {}};
      for (PlayerId q = 0; q < cfg.num_players; ++q) r.counts.push_back(s.ledger.at(q, a.acting));
      out.push_back({a.actor, std::move(r)});
      break;
    }
  }
  detail::roll_detection(s, a, before_target, before_source, success, out);
  return out;
}

// Start-of-round exploit grants; each player independently with
// exploit_gain_prob. Must run once per round before the first turn.
inline Observations grant_round_exploits(GameState& s) {
  if (s.grants_done) throw RuleViolation("exploit grants already rolled this round");
  Observations out;
  for (PlayerId p = 0; p < s.config.num_players; ++p) {
    if (!s.rng.bernoulli(s.config.exploit_gain_prob)) continue;
    if (static_cast<int>(s.exploits[p].size()) >= s.config.num_exploits()) continue;
    Exploit e;
    do {
      e = sample_exploit(s.config, s.rng);
    } while (s.exploits[p].contains(e));
    s.exploits[p].insert(e);
    out.push_back({p, ExploitGained{e}});
  }
  s.grants_done = true;
  return out;
}

inline Outcome decide_by_counts(const GameState& s, Outcome::Kind fallback) {
  Outcome o;
  o.kind = fallback;
  for (PlayerId p = 0; p < s.config.num_players; ++p) o.counts.push_back(s.ledger.controlled_count(p));
  const int best = *std::max_element(o.counts.begin(), o.counts.end());
  if (std::count(o.counts.begin(), o.counts.end(), best) == 1) {
    o.kind = Outcome::Kind::Win;
    o.winner = static_cast<PlayerId>(std::find(o.counts.begin(), o.counts.end(), best) - o.counts.begin());
  } else {
    o.kind = Outcome::Kind::Tie;
  }
  return o;
}

// Ongoing until the last round is played or some player has been cleaned off
// every computer; then the strict maximum of controlled computers wins.
inline Outcome game_result(const GameState& s) {
  bool eliminated = false;
  for (PlayerId p = 0; p < s.config.num_players; ++p)
    eliminated |= s.ledger.controlled_count(p) == 0;
  if (s.round > s.config.rounds || eliminated) return decide_by_counts(s, Outcome::Kind::Tie);
  Outcome o;
  for (PlayerId p = 0; p < s.config.num_players; ++p) o.counts.push_back(s.ledger.controlled_count(p));
  return o;
}

inline bool is_over(const GameState& s) { return game_result(s).kind != Outcome::Kind::Ongoing; }

inline PlayerId current_player(const GameState& s) { return s.turn_index; }

// One observation list per submitted action, in submission order.
using TurnObservations = std::vector<Observations>;

// Resolves one action per computer the player controls at the start of the
// turn, sequentially in the given order. The whole turn is validated first and
// rejected atomically. Computers gained mid-turn do not act; an action that a
// mid-turn change turned into a no-op (backdoor at the cap) still resolves.
inline TurnObservations play_turn(GameState& s, PlayerId player, std::span<const Action> actions) {
  if (is_over(s)) throw RuleViolation("game is over");
  if (!s.grants_done) throw RuleViolation("round exploit grants have not been rolled");
  if (player != current_player(s)) throw RuleViolation("not this player's turn");
  const auto controlled = s.ledger.controlled(player);
  if (actions.size() != controlled.size())
    throw RuleViolation("exactly one action per controlled computer is required");
  std::set<ComputerId> seen;
  for (const Action& a : actions) {
    if (a.actor != player) throw RuleViolation("action submitted for another player");
    if (!seen.insert(a.acting).second) throw RuleViolation("two actions for one computer");
    check_legal(s, a);
  }

  TurnObservations out;
  for (const Action& a : actions) {
    Action step = a;
    if (step.kind == ActionKind::Backdoor && s.ledger.at(player, step.acting) >= s.config.max_accounts) {
      // Capped by an earlier hack this turn; resolves as a no-op.
      out.push_back({{player, BackdoorApplied{step.acting, s.config.max_accounts}}});
      continue;
    }
    if (step.kind == ActionKind::Patch && knows_patched(s, player, step.acting, *step.exploit)) {
      out.push_back({{player, PatchApplied{step.acting, *step.exploit}}});
      continue;
    }
    out.push_back(apply_action(s, step));
  }

  if (++s.turn_index == s.config.num_players) {
    s.turn_index = 0;
    ++s.round;
    s.grants_done = false;
  }
  return out;
}

// GameEnd for every player once the game is over; empty otherwise.
inline Observations end_of_game(const GameState& s) {
  const Outcome o = game_result(s);
  Observations out;
  if (o.kind == Outcome::Kind::Ongoing) return out;
  for (PlayerId p = 0; p < s.config.num_players; ++p) out.push_back({p, GameEnd{o}});
  return out;
}

}  // namespace hackattack
