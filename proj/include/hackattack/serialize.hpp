#pragma once

// JSON forms of the game types. Field names are part of the record and
// session wire formats; keep them stable.

#include <json.hpp>

#include "hackattack/belief.hpp"
#include "hackattack/game.hpp"
#include "hackattack/strategy.hpp"
#include "hackattack/view.hpp"

namespace hackattack {

using json = nlohmann::json;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void to_json(json& j, const Exploit& e) { j = json{{"os", e.os}, {"power", e.power}}; }
inline void from_json(const json& j, Exploit& e) {
  j.at("os").get_to(e.os);
  j.at("power").get_to(e.power);
}

inline ActionKind kind_from_json(const json& j) {
  auto k = parse_action_kind(j.get<std::string>());
  if (!k) throw FormatError("unknown action kind: " + j.get<std::string>());
  return *k;
}

inline void to_json(json& j, const GameConfig& c) {
  json det = json::object();
  for (ActionKind k : kActionKinds) det[std::string(to_string(k))] = c.detection_prob(k);
  j = json{{"num_players", c.num_players},
           {"computers_per_player", c.computers_per_player},
           {"max_accounts", c.max_accounts},
           {"num_os", c.num_os},
           {"max_power", c.max_power},
           {"rounds", c.rounds},
           {"starting_exploits", c.starting_exploits},
           {"exploit_gain_prob", c.exploit_gain_prob},
           {"starting_patches_per_computer", c.starting_patches_per_computer},
           {"patch_model", std::string(to_string(c.patch_model))},
           {"detection_probs", det}};
}

// Missing fields keep their defaults, so a config file may list only what it
// changes.
inline void from_json(const json& j, GameConfig& c) {
  auto opt = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  opt("num_players", c.num_players);
  opt("computers_per_player", c.computers_per_player);
  opt("max_accounts", c.max_accounts);
  opt("num_os", c.num_os);
  opt("max_power", c.max_power);
  opt("rounds", c.rounds);
  opt("starting_exploits", c.starting_exploits);
  opt("exploit_gain_prob", c.exploit_gain_prob);
  opt("starting_patches_per_computer", c.starting_patches_per_computer);
  if (j.contains("patch_model")) {
    const auto m = j.at("patch_model").get<std::string>();
    if (m == "any-os") c.patch_model = PatchModel::AnyOs;
    else if (m == "matching-os") c.patch_model = PatchModel::MatchingOs;
    else throw FormatError("unknown patch_model: " + m);
  }
  if (j.contains("detection_probs")) {
    for (const auto& [name, p] : j.at("detection_probs").items()) {
      auto k = parse_action_kind(name);
      if (!k) throw FormatError("unknown action kind in detection_probs: " + name);
      c.detection_probs[static_cast<std::size_t>(*k)] = p.get<double>();
    }
  }
}

inline void to_json(json& j, const Action& a) {
  j = json{{"actor", a.actor}, {"acting", a.acting}, {"kind", std::string(to_string(a.kind))}};
  if (is_remote(a.kind)) j["target"] = a.target;
  if (a.exploit) j["exploit"] = *a.exploit;
}
inline void from_json(const json& j, Action& a) {
  j.at("actor").get_to(a.actor);
  j.at("acting").get_to(a.acting);
  a.kind = kind_from_json(j.at("kind"));
  a.target = j.contains("target") ? j.at("target").get<int>() : -1;
  a.exploit = j.contains("exploit") ? std::optional<Exploit>(j.at("exploit").get<Exploit>()) : std::nullopt;
}

inline std::string to_string(Outcome::Kind k) {
  switch (k) {
    case Outcome::Kind::Ongoing: return "ongoing";
    case Outcome::Kind::Win: return "win";
    case Outcome::Kind::Tie: return "tie";
  }
  return "?";
}

inline void to_json(json& j, const Outcome& o) {
  j = json{{"kind", to_string(o.kind)}, {"counts", o.counts}};
  if (o.kind == Outcome::Kind::Win) j["winner"] = o.winner;
}
inline void from_json(const json& j, Outcome& o) {
  const auto k = j.at("kind").get<std::string>();
  if (k == "ongoing") o.kind = Outcome::Kind::Ongoing;
  else if (k == "win") o.kind = Outcome::Kind::Win;
  else if (k == "tie") o.kind = Outcome::Kind::Tie;
  else throw FormatError("unknown outcome kind: " + k);
  o.winner = j.contains("winner") ? j.at("winner").get<int>() : -1;
  j.at("counts").get_to(o.counts);
}

namespace detail {

struct PayloadWriter {
  json& j;
  void operator()(const HackResult& r) const {
    j["type"] = "hack_result";
    j["target"] = r.target;
    j["exploit"] = r.exploit;
    j["success"] = r.success;
  }
  void operator()(const BackdoorApplied& r) const {
    j["type"] = "backdoor_applied";
    j["computer"] = r.computer;
    j["count"] = r.count;
  }
  void operator()(const CleanResult& r) const {
    j["type"] = "clean_result";
    j["computer"] = r.computer;
    j["own_count"] = r.own_count;
    json removed = json::array();
    for (const auto& [p, n] : r.removed) removed.push_back({{"player", p}, {"removed", n}});
    j["removed"] = removed;
  }
  void operator()(const PatchApplied& r) const {
    j["type"] = "patch_applied";
    j["computer"] = r.computer;
    j["exploit"] = r.exploit;
  }
  void operator()(const ReconResult& r) const {
    j["type"] = "recon_result";
    j["target"] = r.target;
    j["os"] = r.os;
    j["viable"] = r.viable;
    j["blocked"] = r.blocked;
  }
  void operator()(const ScanResult& r) const {
    j["type"] = "scan_result";
    j["computer"] = r.computer;
    j["counts"] = r.counts;
  }
  void operator()(const Detected& d) const {
    j["type"] = "detected";
    j["actor"] = d.actor;
    j["kind"] = std::string(to_string(d.kind));
    j["source"] = d.source ? json(*d.source) : json(nullptr);
    j["target"] = d.target;
    if (d.success) j["success"] = *d.success;
  }
  void operator()(const AccountsLost& a) const {
    j["type"] = "accounts_lost";
    j["computer"] = a.computer;
    j["by"] = a.by;
    j["lost"] = a.lost;
    j["remaining"] = a.remaining;
  }
  void operator()(const ExploitGained& g) const {
    j["type"] = "exploit_gained";
    j["exploit"] = g.exploit;
  }
  void operator()(const GameEnd& g) const {
    j["type"] = "game_end";
    j["outcome"] = g.outcome;
  }
};

}  // namespace detail

inline void to_json(json& j, const Observation& o) {
  j = json{{"to", o.recipient}};
  std::visit(detail::PayloadWriter{j}, o.payload);
}

inline void from_json(const json& j, Observation& o) {
  j.at("to").get_to(o.recipient);
  const auto type = j.at("type").get<std::string>();
  if (type == "hack_result") {
    o.payload = HackResult{j.at("target"), j.at("exploit").get<Exploit>(), j.at("success")};
  } else if (type == "backdoor_applied") {
    o.payload = BackdoorApplied{j.at("computer"), j.at("count")};
  } else if (type == "clean_result") {
    CleanResult r{j.at("computer"), j.at("own_count"), {}};
    for (const auto& e : j.at("removed")) r.removed[e.at("player").get<int>()] = e.at("removed").get<int>();
    o.payload = std::move(r);
  } else if (type == "patch_applied") {
    o.payload = PatchApplied{j.at("computer"), j.at("exploit").get<Exploit>()};
  } else if (type == "recon_result") {
    o.payload = ReconResult{j.at("target"), j.at("os"), j.at("viable").get<std::vector<Exploit>>(),
                            j.at("blocked").get<std::vector<Exploit>>()};
  } else if (type == "scan_result") {
    o.payload = ScanResult{j.at("computer"), j.at("counts").get<std::vector<int>>()};
  } else if (type == "detected") {
    Detected d{j.at("actor"), kind_from_json(j.at("kind")), std::nullopt, j.at("target"), std::nullopt};
    if (!j.at("source").is_null()) d.source = j.at("source").get<int>();
    if (j.contains("success")) d.success = j.at("success").get<bool>();
    o.payload = d;
  } else if (type == "accounts_lost") {
    o.payload = AccountsLost{j.at("computer"), j.at("by"), j.at("lost"), j.at("remaining")};
  } else if (type == "exploit_gained") {
    o.payload = ExploitGained{j.at("exploit").get<Exploit>()};
  } else if (type == "game_end") {
    o.payload = GameEnd{j.at("outcome").get<Outcome>()};
  } else {
    throw FormatError("unknown observation type: " + type);
  }
}

// What the owner believes, for debugging and the UI's knowledge panel. Own
// rows are exact; opponent rows are summarized per computer.
inline json belief_snapshot(const Belief& b) {
  const GameConfig& cfg = b.config();
  json computers = json::array();
  for (int c = 0; c < cfg.num_computers(); ++c) {
    json os = json::array();
    for (int o = 0; o < cfg.num_os; ++o) os.push_back(b.os(c, o));
    json presence = json::object();
    json accounts = json::object();
    for (PlayerId p = 0; p < cfg.num_players; ++p) {
      if (p == b.owner()) continue;
      presence[std::to_string(p)] = b.presence(p, c);
      json dist = json::array();
      for (int r = 0; r <= cfg.max_accounts; ++r) dist.push_back(b.account(p, c, r));
      accounts[std::to_string(p)] = dist;
    }
    computers.push_back({{"computer", c}, {"os", os}, {"opponent_presence", presence},
                         {"opponent_accounts", accounts}});
  }
  json owned = json::object();
  for (PlayerId p = 0; p < cfg.num_players; ++p) {
    if (p == b.owner()) continue;
    json row = json::array();
    for (int i = 0; i < cfg.num_exploits(); ++i) row.push_back(b.owns(p, exploit_at(cfg, i)));
    owned[std::to_string(p)] = row;
  }
  return json{{"owner", b.owner()}, {"computers", computers}, {"opponent_exploits", owned},
              {"patch_table", b.patch_table()}};
}

inline void to_json(json& j, const StrategyKind& k) { j = to_string(k); }
inline void from_json(const json& j, StrategyKind& k) {
  auto parsed = parse_strategy(j.get<std::string>());
  if (!parsed) throw FormatError("unknown strategy: " + j.get<std::string>());
  k = *parsed;
}

}  // namespace hackattack
