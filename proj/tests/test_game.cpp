#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "hackattack/game.hpp"
#include "hackattack/serialize.hpp"

using namespace hackattack;

namespace {

// A fresh two-player game with hand-placed hidden state, so rule tests do not
// depend on what a seed happens to draw.
GameState staged(std::uint64_t seed = 1) {
  GameState s = new_game(GameConfig{}, seed);
  for (auto& c : s.computers) {
    c.os = 0;
    c.patches.clear();
  }
  s.ledger = AccountLedger(2, 10);
  s.ledger.set(0, 0, 1);
  s.ledger.set(1, 5, 1);
  s.start_computers = {0, 5};
  s.exploits = {{{0, 3}, {1, 0}, {2, 7}, {3, 1}}, {{0, 2}, {1, 1}, {2, 0}, {3, 4}}};
  s.grants_done = true;
  return s;
}

template <typename T>
std::vector<T> payloads(const Observations& obs, PlayerId to) {
  std::vector<T> out;
  for (const auto& o : obs)
    if (o.recipient == to)
      if (auto* p = std::get_if<T>(&o.payload)) out.push_back(*p);
  return out;
}

}  // namespace

TEST(Rng, SubstreamsDiffer) {
  Rng a = substream(7, 0), b = substream(7, 1), c = substream(7, 0);
  EXPECT_NE(a.next(), b.next());
  EXPECT_EQ(substream(7, 0).next(), c.next());
}

TEST(Rng, UniformIndexCoversRange) {
  Rng r(3);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 70000; ++i) ++hits[r.uniform_index(7)];
  for (int h : hits) EXPECT_NEAR(h, 10000, 500);
}

TEST(Exploit, PowerDistributionSumsToOne) {
  GameConfig c;
  double total = 0.0;
  for (int n = 0; n <= c.max_power; ++n) total += power_probability(c, n);
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(power_probability(c, 0), 0.5 / (1.0 - std::ldexp(1.0, -15)));
}

TEST(Exploit, OrderingIsStrongestFirst) {
  ExploitSet s{{0, 1}, {3, 9}, {1, 9}, {2, 0}};
  std::vector<Exploit> order(s.begin(), s.end());
  const std::vector<Exploit> want{{1, 9}, {3, 9}, {0, 1}, {2, 0}};
  EXPECT_EQ(order, want);
}

TEST(Exploit, IndexRoundTrip) {
  GameConfig c;
  for (int i = 0; i < c.num_exploits(); ++i) EXPECT_EQ(exploit_index(c, exploit_at(c, i)), i);
}

TEST(Exploit, SampledFrequenciesMatchFormula) {
  GameConfig c;
  Rng r(11);
  std::vector<int> power(c.num_powers(), 0), os(c.num_os, 0);
  const int draws = 400000;
  for (int i = 0; i < draws; ++i) {
    Exploit e = sample_exploit(c, r);
    ++power[e.power];
    ++os[e.os];
  }
  for (int n = 0; n < 6; ++n) {
    const double p = power_probability(c, n);
    EXPECT_NEAR(power[n] / double(draws), p, 5 * std::sqrt(p * (1 - p) / draws)) << "power " << n;
  }
  for (int o = 0; o < c.num_os; ++o) EXPECT_NEAR(os[o] / double(draws), 0.25, 0.004);
}

// Inclusion probabilities against a direct simulation of re-draw-on-duplicate.
TEST(Exploit, InclusionProbabilityMatchesSimulation) {
  for (PatchModel model : {PatchModel::AnyOs, PatchModel::MatchingOs}) {
    GameConfig c;
    c.patch_model = model;
    Rng r(5);
    const int trials = 200000;
    std::vector<int> hit(3, 0);
    int both = 0;
    for (int t = 0; t < trials; ++t) {
      std::set<std::pair<int, int>> drawn;
      while (drawn.size() < 3) {
        Exploit e = sample_exploit(c, r);
        drawn.insert({model == PatchModel::AnyOs ? e.os : 0, e.power});
      }
      for (int n = 0; n < 3; ++n) hit[n] += drawn.contains({0, n});
      both += drawn.contains({0, 0}) && drawn.contains({0, 1});
    }
    for (int n = 0; n < 3; ++n) {
      const int t[] = {n};
      auto [classes, targets] = patch_space_classes(c, t);
      EXPECT_NEAR(inclusion_probability(classes, 3, targets), hit[n] / double(trials), 0.004)
          << to_string(model) << " power " << n;
    }
    const int t2[] = {0, 1};
    auto [classes, targets] = patch_space_classes(c, t2);
    EXPECT_NEAR(inclusion_probability(classes, 3, targets), both / double(trials), 0.004);
  }
}

TEST(Config, ValidateRejectsNonsense) {
  GameConfig c;
  c.num_players = 1;
  EXPECT_THROW(validate(c), ConfigError);
  c = GameConfig{};
  c.detection_probs[0] = 1.5;
  EXPECT_THROW(validate(c), ConfigError);
  c = GameConfig{};
  c.starting_exploits = 61;
  EXPECT_THROW(validate(c), ConfigError);
  EXPECT_NO_THROW(validate(GameConfig{}));
}

TEST(Config, JsonKeepsDefaultsForMissingKeys) {
  GameConfig c = json::parse(R"({"rounds": 5, "detection_probs": {"scan": 0.5}})").get<GameConfig>();
  EXPECT_EQ(c.rounds, 5);
  EXPECT_EQ(c.num_os, 4);
  EXPECT_DOUBLE_EQ(c.detection_prob(ActionKind::Scan), 0.5);
  EXPECT_DOUBLE_EQ(c.detection_prob(ActionKind::Hack), 0.2);
  EXPECT_EQ(json(c).get<GameConfig>(), c);
  EXPECT_THROW(json::parse(R"({"patch_model": "nope"})").get<GameConfig>(), FormatError);
}

TEST(NewGame, DefaultShape) {
  GameState s = new_game(GameConfig{}, 42);
  EXPECT_EQ(s.computers.size(), 10u);
  EXPECT_EQ(s.ledger.total(), 2);
  for (PlayerId p = 0; p < 2; ++p) {
    EXPECT_EQ(s.ledger.controlled_count(p), 1);
    EXPECT_EQ(s.exploits[p].size(), 4u);
  }
  for (const auto& c : s.computers) EXPECT_EQ(c.patches.size(), 3u);
  EXPECT_EQ(s.round, 1);
}

TEST(NewGame, SameSeedSameGame) {
  GameState a = new_game(GameConfig{}, 9), b = new_game(GameConfig{}, 9);
  for (int c = 0; c < 10; ++c) {
    EXPECT_EQ(a.computers[c].os, b.computers[c].os);
    EXPECT_EQ(a.computers[c].patches, b.computers[c].patches);
  }
  EXPECT_EQ(a.exploits, b.exploits);
  EXPECT_EQ(a.start_computers, b.start_computers);
}

// Independent uniform starts: P(shared start) = 1/10.
TEST(NewGame, SharedStartRate) {
  int shared = 0;
  const int games = 20000;
  for (int i = 0; i < games; ++i) {
    GameState s = new_game(GameConfig{}, 1000 + i);
    shared += s.start_computers[0] == s.start_computers[1];
  }
  EXPECT_NEAR(shared / double(games), 0.1, 3 * std::sqrt(0.09 / games));
}

TEST(NewGame, MatchingOsPatchesFollowTheComputer) {
  GameConfig c;
  c.patch_model = PatchModel::MatchingOs;
  GameState s = new_game(c, 4);
  for (const auto& comp : s.computers)
    for (const Exploit& e : comp.patches) EXPECT_EQ(e.os, comp.os);
}

TEST(Legal, FreshGameHas52Actions) {
  GameState s = new_game(GameConfig{}, 3);
  const auto acts = legal_actions(s, 0, s.start_computers[0]);
  // 9 targets x 4 exploits + 9 recons + clean + scan + backdoor + 4 patches
  EXPECT_EQ(acts.size(), 9u * 4 + 9 + 3 + 4);
  for (const auto& a : acts) EXPECT_NO_THROW(check_legal(s, a));
}

TEST(Legal, BackdoorDisappearsAtCap) {
  GameState s = staged();
  s.ledger.set(0, 0, 4);
  for (const auto& a : legal_actions(s, 0, 0)) EXPECT_NE(a.kind, ActionKind::Backdoor);
  EXPECT_THROW(check_legal(s, Action::local(0, 0, ActionKind::Backdoor)), RuleViolation);
}

TEST(Legal, RejectsMalformedActions) {
  GameState s = staged();
  EXPECT_THROW(check_legal(s, Action::hack(0, 0, 0, {0, 3})), RuleViolation);   // self target
  EXPECT_THROW(check_legal(s, Action::hack(0, 0, 4, {0, 9})), RuleViolation);   // not owned
  EXPECT_THROW(check_legal(s, Action::hack(0, 1, 4, {0, 3})), RuleViolation);   // not controlled
  EXPECT_THROW(check_legal(s, Action::recon(0, 0, 10)), RuleViolation);         // out of range
  Action clean = Action::local(0, 0, ActionKind::Clean);
  clean.exploit = Exploit{0, 3};
  EXPECT_THROW(check_legal(s, clean), RuleViolation);
}

// Success iff the OS matches and the exploit is unpatched, over every case.
TEST(Hack, TruthTable) {
  for (int os = 0; os < 2; ++os) {
    for (bool patched : {false, true}) {
      GameState s = staged();
      s.computers[3].os = os;
      if (patched) s.computers[3].patches.insert({0, 3});
      const auto obs = apply_action(s, Action::hack(0, 0, 3, {0, 3}));
      const bool want = os == 0 && !patched;
      const auto r = payloads<HackResult>(obs, 0);
      ASSERT_EQ(r.size(), 1u);
      EXPECT_EQ(r[0].success, want);
      EXPECT_EQ(s.ledger.at(0, 3), want ? 1 : 0);
    }
  }
}

TEST(Hack, OwnComputerGainsAccountUpToCap) {
  GameState s = staged();
  s.ledger.set(0, 3, 4);
  apply_action(s, Action::hack(0, 0, 3, {0, 3}));
  EXPECT_EQ(s.ledger.at(0, 3), 4);
}

TEST(Clean, RemovesUpToOwnCount) {
  GameState s = staged();
  s.ledger.set(0, 5, 2);
  s.ledger.set(1, 5, 3);
  const auto obs = apply_action(s, Action::local(0, 5, ActionKind::Clean));
  const auto r = payloads<CleanResult>(obs, 0);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].removed.at(1), 2);
  EXPECT_EQ(s.ledger.at(1, 5), 1);
  const auto lost = payloads<AccountsLost>(obs, 1);
  ASSERT_EQ(lost.size(), 1u);
  EXPECT_EQ(lost[0].remaining, 1);
  EXPECT_EQ(lost[0].lost, 2);
  EXPECT_EQ(lost[0].by, 0);
}

TEST(Clean, AbsentOpponentRemovesNothing) {
  GameState s = staged();
  const auto obs = apply_action(s, Action::local(0, 0, ActionKind::Clean));
  const auto r = payloads<CleanResult>(obs, 0);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].removed.at(1), 0);
  EXPECT_TRUE(payloads<AccountsLost>(obs, 1).empty());
  EXPECT_TRUE(payloads<Detected>(obs, 1).empty());
}

TEST(Clean, AlwaysDetectedByVictim) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    GameState s = staged(seed);
    s.ledger.set(1, 0, 1);
    const auto obs = apply_action(s, Action::local(0, 0, ActionKind::Clean));
    EXPECT_EQ(payloads<Detected>(obs, 1).size(), 1u);
  }
}

TEST(Recon, RevealsOsAndMatchingPatchesOnly) {
  GameState s = staged();
  s.computers[4].os = 2;
  s.computers[4].patches = {{2, 7}, {0, 3}};
  s.exploits[0] = {{2, 7}, {2, 1}, {0, 3}};
  const auto obs = apply_action(s, Action::recon(0, 0, 4));
  const auto r = payloads<ReconResult>(obs, 0);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].os, 2);
  EXPECT_EQ(r[0].viable, (std::vector<Exploit>{{2, 1}}));
  EXPECT_EQ(r[0].blocked, (std::vector<Exploit>{{2, 7}}));
  EXPECT_TRUE(knows_patched(s, 0, 4, {2, 7}));
  EXPECT_FALSE(knows_patched(s, 0, 4, {0, 3}));
}

TEST(Scan, ReportsEveryCount) {
  GameState s = staged();
  s.ledger.set(1, 0, 3);
  const auto obs = apply_action(s, Action::local(0, 0, ActionKind::Scan));
  const auto r = payloads<ScanResult>(obs, 0);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].counts, (std::vector<int>{1, 3}));
}

TEST(Patch, BlocksLaterHacksAndBecomesIllegal) {
  GameState s = staged();
  s.ledger.set(1, 0, 0);
  apply_action(s, Action::patch(0, 0, {1, 0}));
  EXPECT_THROW(check_legal(s, Action::patch(0, 0, {1, 0})), RuleViolation);
  s.computers[0].os = 1;
  s.exploits[1].insert({1, 0});
  const auto obs = apply_action(s, Action::hack(1, 5, 0, {1, 0}));
  EXPECT_FALSE(payloads<HackResult>(obs, 1).at(0).success);
}

// Detection frequency for each kind with one observer on the affected
// computer. Independent of the game: compares against the configured rates.
TEST(Detection, RatesMatchConfiguration) {
  const int n = 20000;
  for (ActionKind kind : kActionKinds) {
    int seen = 0;
    GameState s = staged(77 + static_cast<int>(kind));
    for (int i = 0; i < n; ++i) {
      s.ledger.set(0, 0, 1);
      s.ledger.set(0, 3, 0);
      s.ledger.set(1, 3, 1);
      s.ledger.set(1, 0, is_remote(kind) ? 0 : 1);
      s.computers[3].patches.clear();
      s.known_patches[0].clear();
      Action a;
      switch (kind) {
        case ActionKind::Hack: a = Action::hack(0, 0, 3, {0, 3}); break;
        case ActionKind::Recon: a = Action::recon(0, 0, 3); break;
        case ActionKind::Patch: a = Action::patch(0, 0, {0, 3}); break;
        default: a = Action::local(0, 0, kind); break;
      }
      seen += !payloads<Detected>(apply_action(s, a), 1).empty();
    }
    const double p = GameConfig{}.detection_prob(kind);
    EXPECT_NEAR(seen / double(n), p, 0.02) << to_string(kind);
  }
}

TEST(Detection, SourceRevealedOnlyFromActingSide) {
  GameConfig c;
  c.detection_probs.fill(1.0);
  GameState s = staged();
  s.config = c;
  s.ledger.set(1, 3, 1);
  auto d = payloads<Detected>(apply_action(s, Action::recon(0, 0, 3)), 1);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_FALSE(d[0].source.has_value());
  EXPECT_EQ(d[0].target, 3);
  s.ledger.set(1, 0, 1);
  d = payloads<Detected>(apply_action(s, Action::hack(0, 0, 3, {0, 3})), 1);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].source, 0);
  EXPECT_EQ(d[0].success, true);
}

TEST(Grants, MeanOverTwentyRounds) {
  const int runs = 10000;
  double total = 0.0;
  for (int i = 0; i < runs; ++i) {
    GameState s = new_game(GameConfig{}, 500 + i);
    for (int r = 0; r < 20; ++r) {
      s.grants_done = false;
      for (const auto& o : grant_round_exploits(s)) total += o.recipient == 0;
    }
  }
  EXPECT_NEAR(total / runs, 20.0 / 6.0, 0.1);
}

TEST(Grants, OncePerRound) {
  GameState s = new_game(GameConfig{}, 1);
  grant_round_exploits(s);
  EXPECT_THROW(grant_round_exploits(s), RuleViolation);
}

TEST(Result, Cases) {
  GameState s = staged();
  EXPECT_EQ(game_result(s).kind, Outcome::Kind::Ongoing);
  s.round = 21;
  EXPECT_EQ(game_result(s).kind, Outcome::Kind::Tie);
  s.ledger.set(0, 2, 1);
  Outcome o = game_result(s);
  EXPECT_EQ(o.kind, Outcome::Kind::Win);
  EXPECT_EQ(o.winner, 0);
  EXPECT_EQ(o.counts, (std::vector<int>{2, 1}));
  s = staged();
  s.ledger.set(1, 5, 0);
  o = game_result(s);
  EXPECT_EQ(o.kind, Outcome::Kind::Win);
  EXPECT_EQ(o.winner, 0);
}

TEST(Turn, OneActionPerControlledComputer) {
  GameState s = staged();
  s.ledger.set(0, 1, 1);
  const std::vector<Action> one{Action::local(0, 0, ActionKind::Scan)};
  EXPECT_THROW(play_turn(s, 0, one), RuleViolation);
  const std::vector<Action> dup{Action::local(0, 0, ActionKind::Scan), Action::local(0, 0, ActionKind::Clean)};
  EXPECT_THROW(play_turn(s, 0, dup), RuleViolation);
  const std::vector<Action> wrong{Action::local(1, 5, ActionKind::Scan)};
  EXPECT_THROW(play_turn(s, 1, wrong), RuleViolation);  // not player 1's turn
  const std::vector<Action> ok{Action::local(0, 0, ActionKind::Scan), Action::local(0, 1, ActionKind::Scan)};
  EXPECT_EQ(play_turn(s, 0, ok).size(), 2u);
  EXPECT_EQ(current_player(s), 1);
}

TEST(Turn, RejectedTurnLeavesStateUntouched) {
  GameState s = staged();
  s.ledger.set(0, 1, 1);
  const std::vector<Action> bad{Action::hack(0, 0, 3, {0, 3}), Action::hack(0, 1, 1, {0, 3})};
  const int before = s.ledger.total();
  EXPECT_THROW(play_turn(s, 0, bad), RuleViolation);
  EXPECT_EQ(s.ledger.total(), before);
  EXPECT_EQ(current_player(s), 0);
}

// A computer gained mid-turn does not act in that turn.
TEST(Turn, MidTurnAcquisitionWaits) {
  GameState s = staged();
  const std::vector<Action> hack{Action::hack(0, 0, 3, {0, 3})};
  play_turn(s, 0, hack);
  EXPECT_TRUE(s.ledger.controls(0, 3));
  const std::vector<Action> p1{Action::local(1, 5, ActionKind::Scan)};
  play_turn(s, 1, p1);
  EXPECT_EQ(s.round, 2);
  s.grants_done = true;
  const std::vector<Action> one{Action::local(0, 0, ActionKind::Scan)};
  EXPECT_THROW(play_turn(s, 0, one), RuleViolation);
}

TEST(Turn, BackdoorCappedMidTurnIsNoOp) {
  GameState s = staged();
  s.ledger.set(0, 3, 3);
  s.ledger.set(0, 0, 1);
  const std::vector<Action> turn{Action::hack(0, 0, 3, {0, 3}), Action::local(0, 3, ActionKind::Backdoor)};
  EXPECT_NO_THROW(play_turn(s, 0, turn));
  EXPECT_EQ(s.ledger.at(0, 3), 4);
}

TEST(Serialize, ObservationRoundTrip) {
  GameState s = new_game(GameConfig{}, 21);
  s.grants_done = true;
  Rng pick(2);
  for (int step = 0; step < 40 && !is_over(s); ++step) {
    const PlayerId p = current_player(s);
    std::vector<Action> turn;
    for (ComputerId c : s.ledger.controlled(p)) {
      const auto acts = legal_actions(s, p, c);
      turn.push_back(acts[pick.uniform_index(acts.size())]);
    }
    for (const auto& obs : play_turn(s, p, turn))
      for (const auto& o : obs) EXPECT_EQ(json(o).get<Observation>(), o);
    for (const auto& a : turn) EXPECT_EQ(json(a).get<Action>(), a);
    s.grants_done = true;
  }
}
