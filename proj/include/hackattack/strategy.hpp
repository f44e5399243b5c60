#pragma once

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hackattack/belief.hpp"
#include "hackattack/game.hpp"
#include "hackattack/rng.hpp"
#include "hackattack/view.hpp"

namespace hackattack {

struct StrategyKind {
  enum class Type { Random, OneStep, RandomResponse, NoResponse };
  Type type = Type::Random;
  int depth = 1;  // No-Response plies

  static StrategyKind random() { return {Type::Random, 0}; }
  static StrategyKind one_step() { return {Type::OneStep, 1}; }
  static StrategyKind random_response() { return {Type::RandomResponse, 2}; }
  static StrategyKind no_response(int k = 2) { return {Type::NoResponse, k}; }

  bool operator==(const StrategyKind&) const = default;
};

inline std::string to_string(const StrategyKind& k) {
  switch (k.type) {
    case StrategyKind::Type::Random: return "random";
    case StrategyKind::Type::OneStep: return "one-step";
    case StrategyKind::Type::RandomResponse: return "random-response";
    case StrategyKind::Type::NoResponse: return "no-response:" + std::to_string(k.depth);
  }
  return "?";
}

// "random", "one-step", "random-response", "no-response" or "no-response:k".
inline std::optional<StrategyKind> parse_strategy(std::string_view name) {
  if (name == "random") return StrategyKind::random();
  if (name == "one-step") return StrategyKind::one_step();
  if (name == "random-response") return StrategyKind::random_response();
  if (name == "no-response") return StrategyKind::no_response();
  constexpr std::string_view prefix = "no-response:";
  if (name.starts_with(prefix)) {
    const auto digits = name.substr(prefix.size());
    int k = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && k >= 1)
      return StrategyKind::no_response(k);
  }
  return std::nullopt;
}

// Net computers: computers the owner holds minus the expected number every
// other player holds.
inline double evaluate(const PlayerView& v) {
  double value = v.controlled_count();
  for (PlayerId q = 0; q < v.config().num_players; ++q)
    if (q != v.owner()) value -= expected_opponent_computers(v.belief(), q);
  return value;
}

struct WeightedView {
  PlayerView view;
  double weight;
};
using WeightedViews = std::vector<WeightedView>;

namespace detail {

inline void scan_branches(const PlayerView& v, ComputerId c, std::vector<int>& counts, PlayerId q,
                          double weight, WeightedViews& out) {
  const int players = v.config().num_players;
  if (q == players) {
    PlayerView next = v;
    next.observe({v.owner(), ScanResult{c, counts}});
    out.push_back({std::move(next), weight});
    return;
  }
  if (q == v.owner()) {
    counts[q] = v.own_count(c);
    scan_branches(v, c, counts, q + 1, weight, out);
    return;
  }
  for (int r = 0; r <= v.config().max_accounts; ++r) {
    const double w = v.belief().account(q, c, r);
    if (w <= 0.0) continue;
    counts[q] = r;
    scan_branches(v, c, counts, q + 1, weight * w, out);
  }
}

}  // namespace detail

// Chance node for one of the owner's own actions: every distinguishable result
// with its probability under the owner's belief. Detections and exploit grants
// are not modeled. Recon branches on the OS only; patch status inside a branch
// stays in expectation.
inline WeightedViews expand_outcomes(const PlayerView& v, const Action& a) {
  WeightedViews out;
  const PlayerId me = v.owner();
  switch (a.kind) {
    case ActionKind::Hack: {
      const double p = p_hack_success(v.belief(), *a.exploit, a.target);
      if (p > 0.0) {
        PlayerView win = v;
        win.observe({me, HackResult{a.target, *a.exploit, true}});
        out.push_back({std::move(win), p});
      }
      if (p < 1.0) {
        PlayerView lose = v;
        lose.observe({me, HackResult{a.target, *a.exploit, false}});
        out.push_back({std::move(lose), 1.0 - p});
      }
      break;
    }
    case ActionKind::Recon: {
      for (int o = 0; o < v.config().num_os; ++o) {
        const double w = v.belief().os(a.target, o);
        if (w <= 0.0) continue;
        PlayerView next = v;
        next.belief().set_os(a.target, o);
        out.push_back({std::move(next), w});
      }
      break;
    }
    case ActionKind::Scan: {
      std::vector<int> counts(v.config().num_players, 0);
      detail::scan_branches(v, a.acting, counts, 0, 1.0, out);
      break;
    }
    case ActionKind::Clean: {
      PlayerView next = v;
      for (PlayerId q = 0; q < v.config().num_players; ++q)
        if (q != me) next.belief().clean_expected(q, a.acting, v.own_count(a.acting));
      out.push_back({std::move(next), 1.0});
      break;
    }
    case ActionKind::Backdoor: {
      PlayerView next = v;
      next.observe({me, BackdoorApplied{a.acting, std::min(v.config().max_accounts, v.own_count(a.acting) + 1)}});
      out.push_back({std::move(next), 1.0});
      break;
    }
    case ActionKind::Patch: {
      PlayerView next = v;
      next.observe({me, PatchApplied{a.acting, *a.exploit}});
      out.push_back({std::move(next), 1.0});
      break;
    }
  }
  return out;
}

// Expected change of evaluate() from one action, without building the
// outcome views. Only hacks (new computer) and cleans (opponent removed) move
// the score; scouting, backdoors and patches change information or accounts,
// which net-computers does not price.
inline double expected_gain(const PlayerView& v, const Action& a) {
  switch (a.kind) {
    case ActionKind::Hack:
      if (v.controls(a.target)) return 0.0;
      return p_hack_success(v.belief(), *a.exploit, a.target);
    case ActionKind::Clean: {
      const int mine = v.own_count(a.acting);
      double gain = 0.0;
      for (PlayerId q = 0; q < v.config().num_players; ++q) {
        if (q == v.owner()) continue;
        for (int r = 1; r <= mine; ++r) gain += v.belief().account(q, a.acting, r);
      }
      return gain;
    }
    default:
      return 0.0;
  }
}

// Expected loss of evaluate() when `opponent` makes one move drawn from
// opponent_move_distribution(). Clean templates knock the owner off x when the
// opponent holds at least as many accounts there; hack templates add opponent
// presence on the target. Other templates leave the score unchanged.
inline double random_response_loss(const PlayerView& v, PlayerId opponent) {
  const Belief& b = v.belief();
  const GameConfig& cfg = v.config();
  const int n = cfg.num_computers();

  double held = 0.0;
  for (int i = 0; i < cfg.num_exploits(); ++i) held += b.owns(opponent, exploit_at(cfg, i));

  double presence_sum = 0.0, total_weight = 0.0, clean_loss = 0.0;
  std::vector<double> presence(n);
  for (int x = 0; x < n; ++x) {
    presence[x] = b.presence(opponent, x);
    presence_sum += presence[x];
    total_weight += presence[x] * ((n - 1) * held + (n - 1) + 3 + held);
    const int mine = v.own_count(x);
    if (mine >= 1)
      for (int r = mine; r <= cfg.max_accounts; ++r) clean_loss += b.account(opponent, x, r);
  }
  if (total_weight <= 0.0) return 0.0;

  double hack_loss = 0.0;
  for (int y = 0; y < n; ++y) {
    if (presence[y] >= 1.0) continue;
    double reach = 0.0;
    for (int i = 0; i < cfg.num_exploits(); ++i) {
      const Exploit e = exploit_at(cfg, i);
      const double owned = b.owns(opponent, e);
      if (owned > 0.0) reach += owned * p_hack_success(b, e, y);
    }
    hack_loss += (1.0 - presence[y]) * reach * (presence_sum - presence[y]);
  }
  return (clean_loss + hack_loss) / total_weight;
}

// Score after one opponent template is applied, for checking
// random_response_loss() one template at a time.
inline double evaluate_after_template(const PlayerView& v, const Action& t) {
  const Belief& b = v.belief();
  double value = evaluate(v);
  if (t.kind == ActionKind::Clean) {
    const int mine = v.own_count(t.acting);
    const double px = b.presence(t.actor, t.acting);
    if (mine >= 1 && px > 0.0) {
      double elim = 0.0;
      for (int r = mine; r <= v.config().max_accounts; ++r) elim += b.account(t.actor, t.acting, r);
      value -= elim / px;
    }
  } else if (t.kind == ActionKind::Hack) {
    value -= (1.0 - b.presence(t.actor, t.target)) * p_hack_success(b, *t.exploit, t.target);
  }
  return value;
}

// Candidate moves for search. Hacks keep, per target and OS, only the owned
// exploit most likely to succeed, and skip computers already held; every
// other legal move is kept.
inline std::vector<Action> search_candidates(const PlayerView& v, ComputerId acting) {
  const PlayerId me = v.owner();
  const GameConfig& cfg = v.config();
  std::vector<Action> out;
  for (int t = 0; t < cfg.num_computers(); ++t) {
    if (t == acting || v.controls(t)) continue;
    for (int o = 0; o < cfg.num_os; ++o) {
      std::optional<Exploit> best;
      double best_p = -1.0;
      for (const Exploit& e : v.exploits()) {  // strongest first
        if (e.os != o) continue;
        const double p = p_hack_success(v.belief(), e, t);
        if (p > best_p) {
          best_p = p;
          best = e;
        }
      }
      if (best) out.push_back(Action::hack(me, acting, t, *best));
    }
  }
  for (int t = 0; t < cfg.num_computers(); ++t)
    if (t != acting) out.push_back(Action::recon(me, acting, t));
  out.push_back(Action::local(me, acting, ActionKind::Clean));
  out.push_back(Action::local(me, acting, ActionKind::Scan));
  if (v.own_count(acting) < cfg.max_accounts) out.push_back(Action::local(me, acting, ActionKind::Backdoor));
  for (const Exploit& e : v.exploits())
    if (!v.knows_patched(acting, e)) out.push_back(Action::patch(me, acting, e));
  return out;
}

struct SearchResult {
  Action action;
  double score = 0.0;
  std::vector<Action> best;  // every action tied for the top score
};

inline constexpr double kTieTolerance = 1e-9;

// Best value reachable from `v` with `plies` more own moves of `acting`.
inline double no_response_value(const PlayerView& v, ComputerId acting, int plies) {
  if (plies <= 0) return evaluate(v);
  const auto candidates = search_candidates(v, acting);
  if (plies == 1) {
    double best = 0.0;
    for (const Action& a : candidates) best = std::max(best, expected_gain(v, a));
    return evaluate(v) + best;
  }
  double best = -1e300;
  for (const Action& a : candidates) {
    double value = 0.0;
    for (const auto& [child, w] : expand_outcomes(v, a)) value += w * no_response_value(child, acting, plies - 1);
    best = std::max(best, value);
  }
  return best;
}

inline double random_response_value(const PlayerView& v) {
  double value = evaluate(v);
  for (PlayerId q = 0; q < v.config().num_players; ++q)
    if (q != v.owner()) value -= random_response_loss(v, q);
  return value;
}

// Score of every candidate action at a decision node for `kind`.
inline std::vector<std::pair<Action, double>> score_actions(const PlayerView& v, ComputerId acting,
                                                            StrategyKind kind) {
  std::vector<std::pair<Action, double>> scored;
  const double base = evaluate(v);
  for (const Action& a : search_candidates(v, acting)) {
    double value = 0.0;
    switch (kind.type) {
      case StrategyKind::Type::Random:
      case StrategyKind::Type::OneStep:
        value = base + expected_gain(v, a);
        break;
      case StrategyKind::Type::NoResponse:
        if (kind.depth <= 1) {
          value = base + expected_gain(v, a);
        } else {
          for (const auto& [child, w] : expand_outcomes(v, a))
            value += w * no_response_value(child, acting, kind.depth - 1);
        }
        break;
      case StrategyKind::Type::RandomResponse:
        for (const auto& [child, w] : expand_outcomes(v, a)) value += w * random_response_value(child);
        break;
    }
    scored.emplace_back(a, value);
  }
  return scored;
}

// Per-computer decision: the highest-scoring candidate. Among tied candidates
// the one with the larger immediate gain wins, so a plan is not postponed when
// its steps commute; remaining ties are broken uniformly with `rng`.
inline SearchResult search(const PlayerView& v, ComputerId acting, StrategyKind kind, Rng& rng) {
  if (!v.controls(acting)) throw RuleViolation("player does not control the acting computer");
  const auto scored = score_actions(v, acting, kind);
  double top = -1e300;
  for (const auto& [a, s] : scored) top = std::max(top, s);
  SearchResult result;
  result.score = top;
  for (const auto& [a, s] : scored)
    if (s >= top - kTieTolerance) result.best.push_back(a);
  if (result.best.size() > 1) {
    double now = -1e300;
    for (const Action& a : result.best) now = std::max(now, expected_gain(v, a));
    std::erase_if(result.best, [&](const Action& a) { return expected_gain(v, a) < now - kTieTolerance; });
  }
  result.action = result.best[rng.uniform_index(result.best.size())];
  return result;
}

// One action per controlled computer, in ascending computer order. Each
// decision sees the most likely result of the previous ones.
inline std::vector<Action> choose_turn(const PlayerView& v, StrategyKind kind, Rng& rng) {
  std::vector<Action> turn;
  const auto order = v.controlled();
  if (kind.type == StrategyKind::Type::Random) {
    for (ComputerId c : order) {
      const auto legal = legal_actions(v, c);
      turn.push_back(legal[rng.uniform_index(legal.size())]);
    }
    return turn;
  }
  PlayerView scratch = v;
  for (ComputerId c : order) {
    const SearchResult r = search(scratch, c, kind, rng);
    turn.push_back(r.action);
    auto outcomes = expand_outcomes(scratch, r.action);
    std::size_t likely = 0;
    for (std::size_t i = 1; i < outcomes.size(); ++i)
      if (outcomes[i].weight > outcomes[likely].weight) likely = i;
    scratch = std::move(outcomes[likely].view);
  }
  return turn;
}

}  // namespace hackattack
