#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "hackattack/game.hpp"
#include "hackattack/record.hpp"
#include "hackattack/strategy.hpp"
#include "hackattack/view.hpp"

namespace hackattack {

struct MatchSpec {
  StrategyKind p1;
  StrategyKind p2;
  int games = 1;
  std::uint64_t base_seed = 0;
  GameConfig config;
};

// Game i of a match uses seed base_seed + i.
inline std::uint64_t game_seed(const MatchSpec& spec, int index) {
  return spec.base_seed + static_cast<std::uint64_t>(index);
}

// Plays one seeded game between the two seats. Each seat decides from its own
// view only; tie-breaks draw from a per-seat stream derived from the seed.
inline GameRecord play_game(const MatchSpec& spec, int index) {
  if (spec.config.num_players != 2) throw ConfigError("strategies are defined for two players");
  const std::uint64_t seed = game_seed(spec, index);
  const StrategyKind seats[2] = {spec.p1, spec.p2};

  GameRecord rec;
  rec.config = spec.config;
  rec.seed = seed;
  rec.strategies = {to_string(spec.p1), to_string(spec.p2)};

  GameState s = new_game(spec.config, seed);
  std::vector<PlayerView> views;
  std::vector<Rng> rngs;
  for (PlayerId p = 0; p < 2; ++p) {
    views.push_back(PlayerView::at_start(s, p));
    rngs.push_back(substream(seed, static_cast<std::uint64_t>(p)));
  }
  auto deliver = [&](const Observations& obs) {
    for (const Observation& o : obs) views[o.recipient].observe(o);
  };

  while (!is_over(s)) {
    RoundRecord round;
    round.round = s.round;
    for (auto& v : views) v.begin_round(s.round);
    round.grants = grant_round_exploits(s);
    deliver(round.grants);
    for (PlayerId p = 0; p < 2 && !is_over(s); ++p) {
      TurnRecord turn;
      turn.player = p;
      turn.actions = choose_turn(views[p], seats[p], rngs[p]);
      turn.observations = play_turn(s, p, turn.actions);
      for (const auto& obs : turn.observations) deliver(obs);
      round.turns.push_back(std::move(turn));
    }
    rec.rounds.push_back(std::move(round));
  }
  rec.end = end_of_game(s);
  deliver(rec.end);
  rec.outcome = game_result(s);
  return rec;
}

struct MatchStats {
  StrategyKind p1;
  StrategyKind p2;
  int games = 0;
  std::uint64_t base_seed = 0;
  int wins_p1 = 0;
  int wins_p2 = 0;
  int ties = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> digests;
  double mean_count_p1 = 0.0;
  double mean_count_p2 = 0.0;

  // Wins plus half the ties, as a share of games.
  double score_share_p1() const { return games ? (wins_p1 + 0.5 * ties) / games : 0.0; }
  double score_share_p2() const { return games ? (wins_p2 + 0.5 * ties) / games : 0.0; }

  bool operator==(const MatchStats&) const = default;
};

inline void to_json(json& j, const MatchStats& m) {
  j = json{{"strategy_p1", m.p1}, {"strategy_p2", m.p2},   {"games", m.games},
           {"base_seed", m.base_seed}, {"wins_p1", m.wins_p1}, {"wins_p2", m.wins_p2},
           {"ties", m.ties},         {"seeds", m.seeds},     {"digests", m.digests},
           {"mean_count_p1", m.mean_count_p1}, {"mean_count_p2", m.mean_count_p2}};
}
inline void from_json(const json& j, MatchStats& m) {
  j.at("strategy_p1").get_to(m.p1);
  j.at("strategy_p2").get_to(m.p2);
  j.at("games").get_to(m.games);
  j.at("base_seed").get_to(m.base_seed);
  j.at("wins_p1").get_to(m.wins_p1);
  j.at("wins_p2").get_to(m.wins_p2);
  j.at("ties").get_to(m.ties);
  j.at("seeds").get_to(m.seeds);
  j.at("digests").get_to(m.digests);
  j.at("mean_count_p1").get_to(m.mean_count_p1);
  j.at("mean_count_p2").get_to(m.mean_count_p2);
}

// Runs fn(i) for i in [0, n) on up to `threads` workers.
template <typename Fn>
void parallel_for(int n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max(n, 1))));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

inline MatchStats aggregate(const MatchSpec& spec, const std::vector<GameRecord>& records) {
  MatchStats m;
  m.p1 = spec.p1;
  m.p2 = spec.p2;
  m.games = spec.games;
  m.base_seed = spec.base_seed;
  double sum1 = 0.0, sum2 = 0.0;
  for (const GameRecord& r : records) {
    m.seeds.push_back(r.seed);
    m.digests.push_back(digest(r));
    if (r.outcome.kind == Outcome::Kind::Win)
      ++(r.outcome.winner == 0 ? m.wins_p1 : m.wins_p2);
    else
      ++m.ties;
    sum1 += r.outcome.counts[0];
    sum2 += r.outcome.counts[1];
  }
  if (!records.empty()) {
    m.mean_count_p1 = sum1 / records.size();
    m.mean_count_p2 = sum2 / records.size();
  }
  return m;
}

inline MatchStats run_match(const MatchSpec& spec, unsigned threads = default_threads()) {
  if (spec.games < 1) throw std::invalid_argument("a match needs at least one game");
  std::vector<GameRecord> records(spec.games);
  parallel_for(spec.games, threads, [&](int i) { records[i] = play_game(spec, i); });
  return aggregate(spec, records);
}

// Every ordered pairing of distinct strategies, both seat orders.
inline std::vector<MatchStats> run_matrix(const std::vector<StrategyKind>& strategies, int games_per_pairing,
                                          std::uint64_t base_seed, const GameConfig& config = {},
                                          unsigned threads = default_threads()) {
  if (strategies.size() < 2) throw std::invalid_argument("a matrix needs at least two strategies");
  std::vector<MatchStats> out;
  for (std::size_t a = 0; a < strategies.size(); ++a)
    for (std::size_t b = a + 1; b < strategies.size(); ++b)
      for (auto [p1, p2] : {std::pair{a, b}, std::pair{b, a}})
        out.push_back(run_match({strategies[p1], strategies[p2], games_per_pairing, base_seed, config}, threads));
  return out;
}

// --- reports -------------------------------------------------------------

inline constexpr std::string_view kCsvHeader = "strategy_p1,strategy_p2,wins_p1,wins_p2,ties";

inline std::string report_csv(const std::vector<MatchStats>& stats) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& m : stats)
    out << to_string(m.p1) << ',' << to_string(m.p2) << ',' << m.wins_p1 << ',' << m.wins_p2 << ','
        << m.ties << '\n';
  return out.str();
}

inline std::string report_json(const std::vector<MatchStats>& stats) {
  return json{{"version", 1}, {"matches", stats}}.dump(2) + "\n";
}

inline std::vector<MatchStats> parse_report_json(const std::string& text) {
  return json::parse(text).at("matches").get<std::vector<MatchStats>>();
}

enum class ReportFormat { Json, Csv };

inline void write_report(const std::vector<MatchStats>& stats, const std::string& path, ReportFormat format) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write report to " + path);
  f << (format == ReportFormat::Json ? report_json(stats) : report_csv(stats));
  if (!f) throw std::runtime_error("failed writing report to " + path);
}

// --- statistics ----------------------------------------------------------

// P(X >= k) for X ~ Binomial(n, 1/2).
inline double binomial_upper_tail(int n, int k) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  double total = 0.0;
  for (int i = k; i <= n; ++i)
    total += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) - n * std::log(2.0));
  return std::min(1.0, total);
}

// Head-to-head tally of strategy `a` against `b` over both seat orders.
struct Comparison {
  int games = 0;
  int wins_a = 0;
  int wins_b = 0;
  int ties = 0;

  double score_a() const { return wins_a + 0.5 * ties; }
  double share_a() const { return games ? score_a() / games : 0.0; }
  // One-sided test of "a scores above half": ties count half, rounded down.
  double p_value() const { return binomial_upper_tail(games, static_cast<int>(std::floor(score_a()))); }
};

inline Comparison compare(const std::vector<MatchStats>& stats, const StrategyKind& a, const StrategyKind& b) {
  Comparison c;
  for (const auto& m : stats) {
    if (m.p1 == a && m.p2 == b) {
      c.wins_a += m.wins_p1;
      c.wins_b += m.wins_p2;
    } else if (m.p1 == b && m.p2 == a) {
      c.wins_a += m.wins_p2;
      c.wins_b += m.wins_p1;
    } else {
      continue;
    }
    c.games += m.games;
    c.ties += m.ties;
  }
  return c;
}

// Wilson score interval for a proportion.
inline std::pair<double, double> wilson_interval(double successes, int n, double z = 1.959963984540054) {
  if (n == 0) return {0.0, 1.0};
  const double p = successes / n;
  const double denom = 1.0 + z * z / n;
  const double center = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  return {center - half, center + half};
}

}  // namespace hackattack
