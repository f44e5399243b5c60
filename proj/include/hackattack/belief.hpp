#pragma once

#include <algorithm>
#include <cassert>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <tuple>
#include <vector>

#include "hackattack/config.hpp"
#include "hackattack/exploit.hpp"
#include "hackattack/game.hpp"

namespace hackattack {

// Soft probabilities are kept inside [kFloor, 1 - kFloor]; exact 0 and 1 only
// ever come from hard evidence.
inline constexpr double kFloor = 1e-12;

inline double clamp_soft(double p) { return std::clamp(p, kFloor, 1.0 - kFloor); }

// Config-dependent prior quantities, computed once per config.
struct Priors {
  // P(c patched against an exploit of power n | c runs that exploit's OS).
  std::vector<double> patch;
  // For two exploits of one OS with powers a != b:
  //   patch_given_in[a][b]  = P(b patched | a patched)  / P(b patched)
  //   patch_given_out[a][b] = P(b patched | a unpatched) / P(b patched)
  std::vector<std::vector<double>> patch_given_in;
  std::vector<std::vector<double>> patch_given_out;
  // P(a specific exploit of power n is in a starting hand).
  std::vector<double> hand;

  static Priors compute(const GameConfig& c) {
    Priors pr;
    const int np = c.num_powers();
    const int draws = c.starting_patches_per_computer;
    for (int n = 0; n < np; ++n) {
      const int t[] = {n};
      auto [classes, targets] = patch_space_classes(c, t);
      pr.patch.push_back(inclusion_probability(classes, draws, targets));
    }
    pr.patch_given_in.assign(np, std::vector<double>(np, 1.0));
    pr.patch_given_out.assign(np, std::vector<double>(np, 1.0));
    for (int a = 0; a < np; ++a) {
      for (int b = 0; b < np; ++b) {
        if (a == b) continue;
        const int t[] = {a, b};
        auto [classes, targets] = patch_space_classes(c, t);
        const double both = inclusion_probability(classes, draws, targets);
        const double pa = pr.patch[a], pb = pr.patch[b];
        if (pb <= 0.0) continue;
        if (pa > 0.0) pr.patch_given_in[a][b] = both / pa / pb;
        if (pa < 1.0) pr.patch_given_out[a][b] = (pb - both) / (1.0 - pa) / pb;
      }
    }
    // Starting hands are drawn from the full (os, power) space.
    GameConfig hand_space = c;
    hand_space.patch_model = PatchModel::AnyOs;
    for (int n = 0; n < np; ++n) {
      const int t[] = {n};
      auto [classes, targets] = patch_space_classes(hand_space, t);
      pr.hand.push_back(inclusion_probability(classes, c.starting_exploits, targets));
    }
    return pr;
  }
};

inline std::shared_ptr<const Priors> priors_for(const GameConfig& c) {
  using Key = std::tuple<int, int, int, int, int, PatchModel>;
  static std::mutex mu;
  static std::map<Key, std::shared_ptr<const Priors>> cache;
  const Key key{c.num_os, c.max_power, c.starting_patches_per_computer, c.starting_exploits,
                c.num_players, c.patch_model};
  std::lock_guard lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto p = std::make_shared<const Priors>(Priors::compute(c));
  cache.emplace(key, p);
  return p;
}

// One player's four probability tables: OS per computer, patch status per
// (computer, exploit), account count per (player, computer), exploit
// ownership per (player, exploit). The owner's own rows are exact.
class Belief {
 public:
  Belief() = default;

  Belief(const GameConfig& config, PlayerId owner)
      : config_(config),
        priors_(priors_for(config)),
        owner_(owner),
        computers_(config.num_computers()),
        os_count_(config.num_os),
        exploit_count_(config.num_exploits()),
        levels_(config.max_accounts + 1),
        os_(computers_ * os_count_, 1.0 / os_count_),
        patched_(computers_ * exploit_count_),
        accounts_(config.num_players * computers_ * levels_, 0.0),
        owns_(config.num_players * exploit_count_) {
    for (int c = 0; c < computers_; ++c)
      for (int e = 0; e < exploit_count_; ++e)
        patched_[c * exploit_count_ + e] = priors_->patch[exploit_at(config_, e).power];
    const double start = 1.0 / computers_;
    for (PlayerId p = 0; p < config.num_players; ++p) {
      for (int c = 0; c < computers_; ++c) {
        acc(p, c, 0) = 1.0 - start;
        acc(p, c, 1) = start;
      }
      for (int e = 0; e < exploit_count_; ++e)
        owns_[p * exploit_count_ + e] = priors_->hand[exploit_at(config_, e).power];
    }
  }

  const GameConfig& config() const { return config_; }
  const Priors& priors() const { return *priors_; }
  PlayerId owner() const { return owner_; }
  int computers() const { return computers_; }

  double os(ComputerId c, int o) const { return os_[c * os_count_ + o]; }
  double patched(ComputerId c, Exploit e) const {
    return patched_[c * exploit_count_ + exploit_index(config_, e)];
  }
  double account(PlayerId p, ComputerId c, int r) const {
    return accounts_[(p * computers_ + c) * levels_ + r];
  }
  double owns(PlayerId p, Exploit e) const {
    return owns_[p * exploit_count_ + exploit_index(config_, e)];
  }
  double presence(PlayerId p, ComputerId c) const { return 1.0 - account(p, c, 0); }

  std::optional<int> known_os(ComputerId c) const {
    for (int o = 0; o < os_count_; ++o)
      if (os(c, o) == 1.0) return o;
    return std::nullopt;
  }

  // --- exact facts -------------------------------------------------------

  void set_count(PlayerId p, ComputerId c, int r) {
    for (int k = 0; k < levels_; ++k) acc(p, c, k) = (k == r) ? 1.0 : 0.0;
  }
  void set_owned(PlayerId p, Exploit e, bool owned) {
    owns_[p * exploit_count_ + exploit_index(config_, e)] = owned ? 1.0 : 0.0;
  }
  void set_os(ComputerId c, int o) {
    for (int k = 0; k < os_count_; ++k) os_[c * os_count_ + k] = (k == o) ? 1.0 : 0.0;
  }
  void set_patched(ComputerId c, Exploit e, bool patched) {
    patch_ref(c, e) = patched ? 1.0 : 0.0;
  }

  // --- Bayes updates -----------------------------------------------------

  // Result of the owner's own hack. Success fixes the OS and rules out the
  // patch; failure is the joint event "wrong OS, or right OS and patched".
  void hack_outcome(ComputerId t, Exploit e, bool success) {
    if (success) {
      set_os(t, e.os);
      reveal_patch(t, e, false);
      return;
    }
    if (os(t, e.os) == 1.0) {
      reveal_patch(t, e, true);
      return;
    }
    const double pi = clamp_soft(patched(t, e));
    double z = 0.0;
    for (int o = 0; o < os_count_; ++o) {
      double& v = os_[t * os_count_ + o];
      if (o == e.os) v *= pi;
      z += v;
    }
    for (int o = 0; o < os_count_; ++o) os_[t * os_count_ + o] /= z;
    // Given the exploit's OS, failure means it is patched.
    reveal_patch(t, e, true);
  }

  void recon_outcome(ComputerId t, int os_value, const std::vector<Exploit>& viable,
                     const std::vector<Exploit>& blocked) {
    set_os(t, os_value);
    for (const Exploit& e : viable) reveal_patch(t, e, false);
    for (const Exploit& e : blocked) reveal_patch(t, e, true);
  }

  // The owner cleaned with `own_count` accounts and removed `removed` of
  // player p's. Fewer than own_count means p had exactly that many (now 0);
  // exactly own_count means p had at least that many.
  void clean_outcome(PlayerId p, ComputerId c, int own_count, int removed) {
    if (removed < own_count) {
      set_count(p, c, 0);
      return;
    }
    std::vector<double> next(levels_, 0.0);
    for (int r = own_count; r < levels_; ++r) next[r - own_count] = account(p, c, r);
    assign_normalized(p, c, next, 0);
  }

  // Expected posterior of a clean before its result is known.
  void clean_expected(PlayerId p, ComputerId c, int own_count) {
    std::vector<double> next(levels_, 0.0);
    for (int r = 0; r < levels_; ++r) next[std::max(0, r - own_count)] += account(p, c, r);
    assign_normalized(p, c, next, 0);
  }

  // Player p is known to hold at least `k` accounts on c.
  void condition_at_least(PlayerId p, ComputerId c, int k) {
    std::vector<double> next(levels_, 0.0);
    for (int r = k; r < levels_; ++r) next[r] = account(p, c, r);
    assign_normalized(p, c, next, std::min(k, levels_ - 1));
  }

  // Player p gained `k` accounts on c (capped).
  void shift_up(PlayerId p, ComputerId c, int k) {
    std::vector<double> next(levels_, 0.0);
    for (int r = 0; r < levels_; ++r) next[std::min(levels_ - 1, r + k)] += account(p, c, r);
    assign_normalized(p, c, next, levels_ - 1);
  }

  // Another player's Hack/Clean/... was seen. Only occupancy is inferred: the
  // actor holds the source computer, and a successful hack or a backdoor adds
  // one account on the affected computer.
  void detected(const Detected& d) {
    if (d.actor == owner_) return;
    if (d.source) condition_at_least(d.actor, *d.source, 1);
    if (d.kind == ActionKind::Hack && d.success.value_or(false)) shift_up(d.actor, d.target, 1);
    if (d.kind == ActionKind::Backdoor) shift_up(d.actor, d.target, 1);
  }

  // The owner lost `lost` accounts to player `by`'s clean, with `remaining`
  // left. A partial loss pins the cleaner's count exactly.
  void accounts_lost(const AccountsLost& a) {
    set_count(owner_, a.computer, a.remaining);
    if (a.by == owner_) return;
    if (a.remaining > 0)
      set_count(a.by, a.computer, a.lost);
    else
      condition_at_least(a.by, a.computer, a.lost);
  }

  // Unobserved grants: every other player may have gained an exploit.
  void predict_round() {
    const double g = config_.exploit_gain_prob;
    for (PlayerId p = 0; p < config_.num_players; ++p) {
      if (p == owner_) continue;
      for (int e = 0; e < exploit_count_; ++e) {
        double& v = owns_[p * exploit_count_ + e];
        if (v >= 1.0) continue;
        v = std::min(1.0 - kFloor, v + (1.0 - v) * g * exploit_probability(config_, exploit_at(config_, e)));
      }
    }
  }

  // Flat copies of the tables, for snapshots and tests.
  const std::vector<double>& os_table() const { return os_; }
  const std::vector<double>& patch_table() const { return patched_; }
  const std::vector<double>& account_table() const { return accounts_; }
  const std::vector<double>& exploit_table() const { return owns_; }

 private:
  double& acc(PlayerId p, ComputerId c, int r) { return accounts_[(p * computers_ + c) * levels_ + r]; }
  double& patch_ref(ComputerId c, Exploit e) {
    return patched_[c * exploit_count_ + exploit_index(config_, e)];
  }

  void assign_normalized(PlayerId p, ComputerId c, const std::vector<double>& next, int fallback) {
    const double z = std::accumulate(next.begin(), next.end(), 0.0);
    if (z <= 0.0) {
      set_count(p, c, fallback);
      return;
    }
    for (int r = 0; r < levels_; ++r) acc(p, c, r) = next[r] / z;
  }

  // Hard patch fact for (t, e), propagated to the other exploits of e's OS
  // through the draw-without-replacement coupling.
  void reveal_patch(ComputerId t, Exploit e, bool is_patched) {
    const double before = patched(t, e);
    patch_ref(t, e) = is_patched ? 1.0 : 0.0;
    if (before == 0.0 || before == 1.0) return;
    const auto& ratio = is_patched ? priors_->patch_given_in : priors_->patch_given_out;
    for (int n = 0; n < config_.num_powers(); ++n) {
      if (n == e.power) continue;
      double& v = patch_ref(t, Exploit{e.os, n});
      if (v == 0.0 || v == 1.0) continue;
      v = clamp_soft(v * ratio[e.power][n]);
    }
  }

  GameConfig config_;
  std::shared_ptr<const Priors> priors_;
  PlayerId owner_ = 0;
  int computers_ = 0;
  int os_count_ = 0;
  int exploit_count_ = 0;
  int levels_ = 0;
  std::vector<double> os_;
  std::vector<double> patched_;
  std::vector<double> accounts_;
  std::vector<double> owns_;
};

// Belief at the start of a game: the owner knows their start computer and hand.
inline Belief initial_belief(const GameConfig& config, PlayerId owner, ComputerId start,
                             const ExploitSet& own_exploits) {
  Belief b(config, owner);
  for (int c = 0; c < config.num_computers(); ++c) b.set_count(owner, c, c == start ? 1 : 0);
  for (int i = 0; i < config.num_exploits(); ++i) {
    const Exploit e = exploit_at(config, i);
    b.set_owned(owner, e, own_exploits.contains(e));
  }
  return b;
}

inline double expected_opponent_computers(const Belief& b, PlayerId opponent) {
  double sum = 0.0;
  for (int c = 0; c < b.computers(); ++c) sum += b.presence(opponent, c);
  return sum;
}

inline double p_hack_success(const Belief& b, Exploit e, ComputerId target) {
  return b.os(target, e.os) * (1.0 - b.patched(target, e));
}

struct OpponentMove {
  Action action;
  double weight = 0.0;
};

inline constexpr double kTemplatePrune = 1e-6;

// Everything the opponent could do next turn, each weighted by the chance that
// they hold the computer (and exploit) it needs; normalized to sum to 1.
inline std::vector<OpponentMove> opponent_move_distribution(const Belief& b, PlayerId opponent) {
  const GameConfig& cfg = b.config();
  const int n = cfg.num_computers();
  std::vector<OpponentMove> out;
  for (int x = 0; x < n; ++x) {
    const double px = b.presence(opponent, x);
    for (int y = 0; y < n; ++y) {
      if (y == x) continue;
      for (int i = 0; i < cfg.num_exploits(); ++i) {
        const Exploit e = exploit_at(cfg, i);
        out.push_back({Action::hack(opponent, x, y, e), px * b.owns(opponent, e)});
      }
      out.push_back({Action::recon(opponent, x, y), px});
    }
    out.push_back({Action::local(opponent, x, ActionKind::Clean), px});
    out.push_back({Action::local(opponent, x, ActionKind::Backdoor), px});
    out.push_back({Action::local(opponent, x, ActionKind::Scan), px});
    for (int i = 0; i < cfg.num_exploits(); ++i) {
      const Exploit e = exploit_at(cfg, i);
      out.push_back({Action::patch(opponent, x, e), px * b.owns(opponent, e)});
    }
  }
  double total = 0.0;
  for (const auto& m : out) total += m.weight;
  std::vector<OpponentMove> kept;
  if (total <= 0.0) return kept;
  for (auto& m : out) {
    m.weight /= total;
    if (m.weight >= kTemplatePrune) kept.push_back(m);
  }
  double z = 0.0;
  for (const auto& m : kept) z += m.weight;
  for (auto& m : kept) m.weight /= z;
  return kept;
}

}  // namespace hackattack
