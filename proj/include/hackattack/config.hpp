#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hackattack {

using PlayerId = int;
using ComputerId = int;

enum class ActionKind : std::uint8_t { Hack, Backdoor, Clean, Patch, Recon, Scan };

inline constexpr std::array<ActionKind, 6> kActionKinds = {
    ActionKind::Hack,  ActionKind::Backdoor, ActionKind::Clean,
    ActionKind::Patch, ActionKind::Recon,    ActionKind::Scan};

inline constexpr std::string_view to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::Hack: return "hack";
    case ActionKind::Backdoor: return "backdoor";
    case ActionKind::Clean: return "clean";
    case ActionKind::Patch: return "patch";
    case ActionKind::Recon: return "recon";
    case ActionKind::Scan: return "scan";
  }
  return "?";
}

inline std::optional<ActionKind> parse_action_kind(std::string_view name) {
  for (ActionKind k : kActionKinds)
    if (to_string(k) == name) return k;
  return std::nullopt;
}

// Hack and Recon reach another computer; everything else acts on the acting
// computer itself.
inline constexpr bool is_remote(ActionKind kind) {
  return kind == ActionKind::Hack || kind == ActionKind::Recon;
}

inline constexpr bool uses_exploit(ActionKind kind) {
  return kind == ActionKind::Hack || kind == ActionKind::Patch;
}

// How the three hidden starting patches of a computer are drawn.
//   AnyOs:     from the full (os, power) exploit distribution.
//   MatchingOs: from the power distribution, for the computer's own OS.
enum class PatchModel : std::uint8_t { AnyOs, MatchingOs };

inline constexpr std::string_view to_string(PatchModel m) {
  return m == PatchModel::AnyOs ? "any-os" : "matching-os";
}

struct GameConfig {
  int num_players = 2;
  int computers_per_player = 5;
  int max_accounts = 4;
  int num_os = 4;
  int max_power = 14;
  int rounds = 20;
  int starting_exploits = 4;
  double exploit_gain_prob = 1.0 / 6.0;
  int starting_patches_per_computer = 3;
  PatchModel patch_model = PatchModel::MatchingOs;
  // Indexed by ActionKind.
  std::array<double, 6> detection_probs = {0.20, 0.15, 1.00, 0.25, 0.05, 0.30};

  int num_computers() const { return computers_per_player * num_players; }
  int num_powers() const { return max_power + 1; }
  int num_exploits() const { return num_os * num_powers(); }
  double detection_prob(ActionKind kind) const {
    return detection_probs[static_cast<std::size_t>(kind)];
  }

  bool operator==(const GameConfig&) const = default;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void validate(const GameConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid config: ") + what);
  };
  require(c.num_players >= 2, "num_players must be >= 2");
  require(c.computers_per_player >= 1, "computers_per_player must be >= 1");
  require(c.max_accounts >= 1, "max_accounts must be >= 1");
  require(c.num_os >= 1, "num_os must be >= 1");
  require(c.max_power >= 0 && c.max_power <= 52, "max_power must be in [0, 52]");
  require(c.rounds >= 1, "rounds must be >= 1");
  require(c.starting_exploits >= 0 && c.starting_exploits <= c.num_exploits(),
          "starting_exploits must fit the exploit space");
  const int patch_space =
      c.patch_model == PatchModel::AnyOs ? c.num_exploits() : c.num_powers();
  require(c.starting_patches_per_computer >= 0 &&
              c.starting_patches_per_computer <= patch_space,
          "starting_patches_per_computer must fit the patch space");
  require(c.exploit_gain_prob >= 0.0 && c.exploit_gain_prob <= 1.0,
          "exploit_gain_prob must be in [0, 1]");
  for (double p : c.detection_probs)
    require(p >= 0.0 && p <= 1.0, "detection probabilities must be in [0, 1]");
}

}  // namespace hackattack
