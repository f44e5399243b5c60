#pragma once

#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hackattack/belief.hpp"
#include "hackattack/game.hpp"

namespace hackattack {

// Everything one player knows: exact own assets, the belief tables, and the
// patch facts that decide Patch legality. Built only from the player's own
// starting hand and observation stream.
class PlayerView {
 public:
  PlayerView() = default;

  PlayerView(const GameConfig& config, PlayerId owner, ComputerId start, ExploitSet exploits)
      : config_(config),
        owner_(owner),
        counts_(config.num_computers(), 0),
        exploits_(std::move(exploits)),
        belief_(initial_belief(config, owner, start, exploits_)) {
    counts_[start] = 1;
  }

  // The view a player has at the start of `s` (their start computer and hand).
  static PlayerView at_start(const GameState& s, PlayerId p) {
    ExploitSet hand = s.exploits[p];
    return PlayerView(s.config, p, s.start_computers[p], std::move(hand));
  }

  const GameConfig& config() const { return config_; }
  PlayerId owner() const { return owner_; }
  int round() const { return round_; }
  const Belief& belief() const { return belief_; }
  Belief& belief() { return belief_; }
  const ExploitSet& exploits() const { return exploits_; }

  int own_count(ComputerId c) const { return counts_[c]; }
  bool controls(ComputerId c) const { return counts_[c] >= 1; }
  int controlled_count() const {
    int n = 0;
    for (int v : counts_) n += v >= 1;
    return n;
  }
  std::vector<ComputerId> controlled() const {
    std::vector<ComputerId> out;
    for (int c = 0; c < static_cast<int>(counts_.size()); ++c)
      if (controls(c)) out.push_back(c);
    return out;
  }

  bool knows_patched(ComputerId c, Exploit e) const { return known_patches_.contains({c, e}); }
  const std::set<std::pair<ComputerId, Exploit>>& known_patches() const { return known_patches_; }

  // Start-of-round bookkeeping, before the round's grants are observed.
  void begin_round(int round) {
    while (round_ < round) {
      ++round_;
      if (round_ > 1) belief_.predict_round();
    }
  }

  void observe(const Observation& obs) {
    if (obs.recipient != owner_) throw std::invalid_argument("observation addressed to another player");
    std::visit([this](const auto& p) { apply(p); }, obs.payload);
  }

  // --- hypothetical edits used by search -------------------------------

  void set_own_count(ComputerId c, int n) {
    counts_[c] = n;
    belief_.set_count(owner_, c, n);
  }
  void add_known_patch(ComputerId c, Exploit e) {
    known_patches_.insert({c, e});
    belief_.set_patched(c, e, true);
  }

 private:
  void apply(const HackResult& r) {
    belief_.hack_outcome(r.target, r.exploit, r.success);
    if (r.success) set_own_count(r.target, std::min(config_.max_accounts, counts_[r.target] + 1));
  }
  void apply(const BackdoorApplied& r) { set_own_count(r.computer, r.count); }
  void apply(const CleanResult& r) {
    for (const auto& [p, removed] : r.removed) belief_.clean_outcome(p, r.computer, r.own_count, removed);
  }
  void apply(const PatchApplied& r) { add_known_patch(r.computer, r.exploit); }
  void apply(const ReconResult& r) {
    belief_.recon_outcome(r.target, r.os, r.viable, r.blocked);
    for (const Exploit& e : r.blocked) known_patches_.insert({r.target, e});
  }
  void apply(const ScanResult& r) {
    for (PlayerId p = 0; p < static_cast<int>(r.counts.size()); ++p)
      belief_.set_count(p, r.computer, r.counts[p]);
    counts_[r.computer] = r.counts[owner_];
  }
  void apply(const Detected& d) { belief_.detected(d); }
  void apply(const AccountsLost& a) {
    counts_[a.computer] = a.remaining;
    belief_.accounts_lost(a);
  }
  void apply(const ExploitGained& g) {
    exploits_.insert(g.exploit);
    belief_.set_owned(owner_, g.exploit, true);
  }
  void apply(const GameEnd&) {}

  GameConfig config_;
  PlayerId owner_ = 0;
  int round_ = 0;
  std::vector<int> counts_;
  ExploitSet exploits_;
  std::set<std::pair<ComputerId, Exploit>> known_patches_;
  Belief belief_;
};

// Legal actions computed from the player's own knowledge. Agrees with the
// engine's list because legality only depends on what the player knows.
inline std::vector<Action> legal_actions(const PlayerView& v, ComputerId acting) {
  if (!v.controls(acting)) throw RuleViolation("player does not control the acting computer");
  const PlayerId p = v.owner();
  const int n = v.config().num_computers();
  std::vector<Action> out;
  for (int t = 0; t < n; ++t) {
    if (t == acting) continue;
    for (const Exploit& e : v.exploits()) out.push_back(Action::hack(p, acting, t, e));
  }
  for (int t = 0; t < n; ++t)
    if (t != acting) out.push_back(Action::recon(p, acting, t));
  out.push_back(Action::local(p, acting, ActionKind::Clean));
  out.push_back(Action::local(p, acting, ActionKind::Scan));
  if (v.own_count(acting) < v.config().max_accounts)
    out.push_back(Action::local(p, acting, ActionKind::Backdoor));
  for (const Exploit& e : v.exploits())
    if (!v.knows_patched(acting, e)) out.push_back(Action::patch(p, acting, e));
  return out;
}

}  // namespace hackattack
