#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "hackattack/record.hpp"
#include "hackattack/serialize.hpp"
#include "hackattack/strategy.hpp"
#include "hackattack/view.hpp"

namespace hackattack::server {

inline constexpr int kProtocolVersion = 1;

// Raised for requests the caller is not entitled to make.
class AuthError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for requests that are well-formed but out of turn or out of phase.
class StateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SeatSpec {
  bool human = true;
  StrategyKind bot;

  static SeatSpec parse(const std::string& name) {
    if (name == "human") return {true, {}};
    auto k = parse_strategy(name);
    if (!k) throw FormatError("unknown seat: " + name);
    return {false, *k};
  }
  std::string name() const { return human ? "human" : to_string(bot); }
};

inline std::string random_token() {
  static std::mutex mu;
  static std::mt19937_64 gen{std::random_device{}() ^
                             static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count())};
  std::lock_guard lock(mu);
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(gen()),
                static_cast<unsigned long long>(gen()));
  return buf;
}

struct Event {
  std::uint64_t seq = 0;
  json body;
};

// One interactive game. Every seat sees only its own observation log; bot
// seats play on a worker thread when prompted.
class Session {
 public:
  Session(GameConfig config, std::uint64_t seed, std::vector<SeatSpec> seats)
      : id_(random_token()), seats_(std::move(seats)), state_(new_game(config, seed)) {
    validate(config);
    if (static_cast<int>(seats_.size()) != config.num_players)
      throw ConfigError("one seat per player is required");
    record_.config = config;
    record_.seed = seed;
    for (PlayerId p = 0; p < config.num_players; ++p) {
      record_.strategies.push_back(seats_[p].name());
      views_.push_back(PlayerView::at_start(state_, p));
      rngs_.push_back(substream(seed, static_cast<std::uint64_t>(p)));
      tokens_.push_back(seats_[p].human ? random_token() : std::string());
      claimed_.push_back(false);
      logs_.emplace_back();
      observations_.emplace_back();
      json hand = json::array();
      for (const Exploit& e : state_.exploits[p]) hand.push_back(e);
      push(p, {{"type", "game_start"}, {"seat", p}, {"start_computer", state_.start_computers[p]},
               {"exploits", hand}});
    }
    std::lock_guard lock(mu_);
    advance();
    worker_ = std::jthread([this](std::stop_token st) { run_bots(st); });
  }

  ~Session() {
    worker_.request_stop();
    cv_.notify_all();
  }

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const { return id_; }
  int seats() const { return static_cast<int>(seats_.size()); }
  const SeatSpec& seat(PlayerId p) const { return seats_.at(p); }

  // Hands out the token of an unclaimed human seat, once.
  std::string join(PlayerId p) {
    std::lock_guard lock(mu_);
    if (p < 0 || p >= seats()) throw StateError("no such seat");
    if (!seats_[p].human) throw StateError("seat is played by a bot");
    if (claimed_[p]) throw AuthError("seat already claimed");
    claimed_[p] = true;
    return tokens_[p];
  }

  // The seat a token belongs to; AuthError when it belongs to none.
  PlayerId authorize(const std::string& token) const {
    if (token.empty()) throw AuthError("missing seat token");
    for (PlayerId p = 0; p < seats(); ++p)
      if (seats_[p].human && tokens_[p] == token) return p;
    throw AuthError("invalid seat token");
  }

  json view(const std::string& token) const {
    const PlayerId p = authorize(token);
    std::lock_guard lock(mu_);
    return view_json(p);
  }

  // Applies a complete turn for the token's seat. RuleViolation names the
  // violated rule; nothing is applied on rejection.
  void submit(const std::string& token, const std::vector<Action>& submitted) {
    const PlayerId p = authorize(token);
    std::lock_guard lock(mu_);
    if (finished_) throw StateError("game is over");
    if (current_player(state_) != p) throw StateError("not this seat's turn");
    std::vector<Action> actions = submitted;
    for (Action& a : actions) {
      if (a.actor != p && a.actor != -1) throw RuleViolation("action submitted for another player");
      a.actor = p;
    }
    apply_turn(p, actions);
  }

  // Events after `after` for the token's seat, waiting up to `wait` for one
  // to arrive.
  std::vector<Event> events(const std::string& token, std::uint64_t after,
                            std::chrono::milliseconds wait = std::chrono::milliseconds(0)) const {
    const PlayerId p = authorize(token);
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, wait, [&] { return logs_[p].size() > after || finished_; });
    return {logs_[p].begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(after, logs_[p].size())),
            logs_[p].end()};
  }

  std::uint64_t last_seq(const std::string& token) const {
    const PlayerId p = authorize(token);
    std::lock_guard lock(mu_);
    return logs_[p].size();
  }

  bool finished() const {
    std::lock_guard lock(mu_);
    return finished_;
  }

  GameRecord record(const std::string& token) const {
    authorize(token);
    std::lock_guard lock(mu_);
    if (!finished_) throw StateError("record is available once the game is over");
    return record_;
  }

  // Blocks until the game is over or a human seat is to move.
  void wait_idle(std::chrono::milliseconds timeout) const {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [&] { return finished_ || seats_[current_player(state_)].human; });
  }

 private:
  void push(PlayerId p, json body) {
    Event e{logs_[p].size() + 1, std::move(body)};
    e.body["seq"] = e.seq;
    logs_[p].push_back(std::move(e));
  }
  void push_all(const json& body) {
    for (PlayerId p = 0; p < seats(); ++p) push(p, body);
  }
  void deliver(const Observations& obs) {
    for (const Observation& o : obs) {
      views_[o.recipient].observe(o);
      observations_[o.recipient].push_back(o);
      push(o.recipient, {{"type", "observation"}, {"observation", o}});
    }
  }

  // Moves the game forward to the next decision: rolls round grants when a
  // round opens and finishes the game when it is over.
  void advance() {
    if (is_over(state_)) {
      close_round();
      record_.end = end_of_game(state_);
      deliver(record_.end);
      record_.outcome = game_result(state_);
      finished_ = true;
      push_all({{"type", "game_end"}, {"outcome", record_.outcome}});
      cv_.notify_all();
      return;
    }
    if (!state_.grants_done) {
      current_round_ = RoundRecord{};
      current_round_.round = state_.round;
      round_open_ = true;
      for (auto& v : views_) v.begin_round(state_.round);
      push_all({{"type", "round_start"}, {"round", state_.round}});
      current_round_.grants = grant_round_exploits(state_);
      deliver(current_round_.grants);
    }
    const PlayerId p = current_player(state_);
    push_all({{"type", "turn"}, {"player", p}, {"round", state_.round}});
    cv_.notify_all();
  }

  void apply_turn(PlayerId p, const std::vector<Action>& actions) {
    TurnRecord turn;
    turn.player = p;
    turn.actions = actions;
    turn.observations = play_turn(state_, p, actions);
    for (const auto& obs : turn.observations) deliver(obs);
    current_round_.turns.push_back(std::move(turn));
    push_all({{"type", "turn_done"}, {"player", p}});
    if (state_.turn_index == 0) close_round();
    advance();
  }

  void close_round() {
    if (!round_open_) return;
    record_.rounds.push_back(std::move(current_round_));
    round_open_ = false;
  }

  void run_bots(std::stop_token st) {
    std::unique_lock lock(mu_);
    while (!st.stop_requested()) {
      cv_.wait(lock, st, [&] { return finished_ || !seats_[current_player(state_)].human; });
      if (st.stop_requested() || finished_) return;
      const PlayerId p = current_player(state_);
      push_all({{"type", "thinking"}, {"player", p}});
      cv_.notify_all();
      const PlayerView snapshot = views_[p];
      Rng rng = rngs_[p];
      lock.unlock();
      auto actions = choose_turn(snapshot, seats_[p].bot, rng);
      lock.lock();
      rngs_[p] = rng;
      apply_turn(p, actions);
    }
  }

  json view_json(PlayerId p) const {
    const PlayerView& v = views_[p];
    const GameConfig& cfg = state_.config;
    json computers = json::array();
    for (ComputerId c = 0; c < cfg.num_computers(); ++c) {
      json patches = json::array();
      for (const auto& [pc, e] : v.known_patches())
        if (pc == c) patches.push_back(e);
      const auto os = v.belief().known_os(c);
      computers.push_back({{"computer", c},
                           {"controlled", v.controls(c)},
                           {"accounts", v.own_count(c)},
                           {"os", os ? json(*os) : json(nullptr)},
                           {"known_patches", patches}});
    }
    json legal = json::object();
    const bool to_move = !finished_ && current_player(state_) == p;
    if (to_move)
      for (ComputerId c : v.controlled()) legal[std::to_string(c)] = legal_actions(v, c);
    json hand = json::array();
    for (const Exploit& e : v.exploits()) hand.push_back(e);
    json out{{"protocol", kProtocolVersion},
             {"session", id_},
             {"seat", p},
             {"round", v.round()},
             {"config", cfg},
             {"seats", json::array()},
             {"to_move", finished_ ? json(nullptr) : json(current_player(state_))},
             {"computers", computers},
             {"exploits", hand},
             {"legal_actions", legal},
             {"observations", observations_[p]},
             {"belief", belief_snapshot(v.belief())},
             {"last_seq", logs_[p].size()}};
    for (const SeatSpec& s : seats_) out["seats"].push_back(s.name());
    if (finished_) out["outcome"] = record_.outcome;
    return out;
  }

  std::string id_;
  std::vector<SeatSpec> seats_;
  std::vector<std::string> tokens_;
  std::vector<bool> claimed_;

  mutable std::mutex mu_;
  mutable std::condition_variable_any cv_;
  GameState state_;
  std::vector<PlayerView> views_;
  std::vector<Rng> rngs_;
  std::vector<std::vector<Event>> logs_;
  std::vector<Observations> observations_;
  GameRecord record_;
  RoundRecord current_round_;
  bool round_open_ = false;
  bool finished_ = false;
  std::jthread worker_;
};

// Live sessions by id.
class SessionRegistry {
 public:
  std::shared_ptr<Session> create(const GameConfig& config, std::uint64_t seed, std::vector<SeatSpec> seats) {
    auto s = std::make_shared<Session>(config, seed, std::move(seats));
    std::lock_guard lock(mu_);
    sessions_[s->id()] = s;
    return s;
  }
  std::shared_ptr<Session> find(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }
  std::size_t size() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
  }

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace hackattack::server
