// hackattack: run seeded matches and strategy matrices, replay records, or
// serve interactive sessions.

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hackattack/record.hpp"
#include "hackattack/server/http.hpp"
#include "hackattack/tournament.hpp"

using namespace hackattack;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

StrategyKind strategy_arg(const std::string& token) {
  auto k = parse_strategy(token);
  if (!k) throw UsageError("unknown strategy '" + token + "'");
  return *k;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream out;
  out << f.rdbuf();
  return out.str();
}

GameConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  GameConfig c = json::parse(read_file(path)).get<GameConfig>();
  validate(c);
  return c;
}

ReportFormat format_for(const std::string& format, const std::string& path) {
  if (format == "csv") return ReportFormat::Csv;
  if (format == "json") return ReportFormat::Json;
  if (path.ends_with(".csv")) return ReportFormat::Csv;
  return ReportFormat::Json;
}

void print_summary(const std::vector<MatchStats>& stats) {
  for (const auto& m : stats)
    std::printf("%s vs %s: %d-%d-%d (p1 score %.3f)\n", to_string(m.p1).c_str(), to_string(m.p2).c_str(),
                m.wins_p1, m.wins_p2, m.ties, m.score_share_p1());
}

void emit(const std::vector<MatchStats>& stats, const std::string& out, const std::string& format) {
  if (out.empty() || out == "-")
    std::cout << (format == "csv" ? report_csv(stats) : report_json(stats));
  else
    write_report(stats, out, format_for(format, out));
}

std::pair<std::string, int> split_addr(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw UsageError("--addr must be host:port");
  try {
    return {addr.substr(0, colon), std::stoi(addr.substr(colon + 1))};
  } catch (const std::exception&) {
    throw UsageError("--addr must be host:port");
  }
}

server::HttpServer* g_server = nullptr;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HackAttack game engine, strategies and tournaments"};
  app.require_subcommand(1);

  std::string p1 = "no-response:2", p2 = "random", config_path, out, format, strategies, addr = "127.0.0.1:8080";
  std::string record_path;
  int games = 100;
  std::uint64_t seed = 0;
  unsigned threads = default_threads();

  auto* simulate = app.add_subcommand("simulate", "play a seeded match between two strategies");
  simulate->add_option("--p1", p1, "strategy in seat 1")->capture_default_str();
  simulate->add_option("--p2", p2, "strategy in seat 2")->capture_default_str();
  simulate->add_option("--games", games, "number of games")->capture_default_str();
  simulate->add_option("--seed", seed, "base seed; game i uses seed + i")->capture_default_str();
  simulate->add_option("--config", config_path, "GameConfig JSON file");
  simulate->add_option("--out", out, "report path (default: stdout)");
  simulate->add_option("--format", format, "json or csv (default: by extension)");
  simulate->add_option("--threads", threads, "worker threads")->capture_default_str();

  auto* matrix = app.add_subcommand("matrix", "every ordered pairing of a strategy list");
  matrix->add_option("--strategies", strategies, "comma-separated strategies")->required();
  matrix->add_option("--games", games, "games per ordered pairing")->capture_default_str();
  matrix->add_option("--seed", seed, "base seed")->capture_default_str();
  matrix->add_option("--config", config_path, "GameConfig JSON file");
  matrix->add_option("--out", out, "report path (default: stdout)");
  matrix->add_option("--format", format, "json or csv (default: by extension)");
  matrix->add_option("--threads", threads, "worker threads")->capture_default_str();

  auto* replay_cmd = app.add_subcommand("replay", "re-run a GameRecord and check it reproduces");
  replay_cmd->add_option("record", record_path, "GameRecord JSON file")->required();

  auto* serve = app.add_subcommand("serve", "serve interactive sessions over HTTP");
  serve->add_option("--addr", addr, "host:port")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      if (games < 1) throw UsageError("--games must be at least 1");
      MatchSpec spec{strategy_arg(p1), strategy_arg(p2), games, seed, load_config(config_path)};
      const std::vector<MatchStats> stats{run_match(spec, threads)};
      emit(stats, out, format);
      if (!out.empty() && out != "-") print_summary(stats);
    } else if (*matrix) {
      if (games < 1) throw UsageError("--games must be at least 1");
      std::vector<StrategyKind> list;
      std::stringstream ss(strategies);
      for (std::string token; std::getline(ss, token, ',');) list.push_back(strategy_arg(token));
      if (list.size() < 2) throw UsageError("--strategies needs at least two strategies");
      const auto stats = run_matrix(list, games, seed, load_config(config_path), threads);
      emit(stats, out, format);
      if (!out.empty() && out != "-") print_summary(stats);
    } else if (*replay_cmd) {
      const GameRecord rec = json::parse(read_file(record_path)).get<GameRecord>();
      const GameRecord again = replay(rec);
      const bool same = again.rounds == rec.rounds && again.end == rec.end && again.outcome == rec.outcome;
      std::printf("%s %s\n", same ? "reproduced" : "DIVERGED", json(again.outcome).dump().c_str());
      return same ? 0 : 1;
    } else if (*serve) {
      const auto [host, port] = split_addr(addr);
      server::HttpServer http;
      if (!http.bind(host, port)) throw std::runtime_error("cannot bind " + addr);
      g_server = &http;
      std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
      std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
      std::printf("listening on %s\n", addr.c_str());
      std::fflush(stdout);
      http.listen_after_bind();
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
