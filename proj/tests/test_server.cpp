#include <gtest/gtest.h>

#include <thread>

#include "hackattack/server/http.hpp"
#include "hackattack/tournament.hpp"

using namespace hackattack;
using namespace hackattack::server;
using namespace std::chrono_literals;

namespace {

// A seat's view rebuilt by a client from nothing but its own event stream.
struct ClientView {
  GameConfig config;
  std::optional<PlayerView> view;
  std::uint64_t seen = 0;

  void apply(const json& ev) {
    const std::string type = ev.at("type");
    if (type == "game_start") {
      ExploitSet hand;
      for (const auto& e : ev.at("exploits")) hand.insert(e.get<Exploit>());
      view.emplace(config, ev.at("seat").get<PlayerId>(), ev.at("start_computer").get<ComputerId>(), hand);
    } else if (type == "round_start") {
      view->begin_round(ev.at("round").get<int>());
    } else if (type == "observation") {
      view->observe(ev.at("observation").get<Observation>());
    }
    seen = ev.at("seq").get<std::uint64_t>();
  }
  void sync(const Session& s, const std::string& token) {
    for (const Event& e : s.events(token, seen)) apply(e.body);
  }
};

struct Seated {
  std::shared_ptr<Session> session;
  std::string tokens[2];
};

Seated two_humans(std::uint64_t seed) {
  Seated out{std::make_shared<Session>(GameConfig{}, seed, std::vector{SeatSpec::parse("human"), SeatSpec::parse("human")}),
             {}};
  out.tokens[0] = out.session->join(0);
  out.tokens[1] = out.session->join(1);
  return out;
}

}  // namespace

// Two human seats driven by one-step from their rebuilt views play exactly the
// game the engine plays on its own, and every view the session serves matches
// the client's reconstruction.
TEST(Session, SeatViewsAreRebuiltFromOwnEvents) {
  const std::uint64_t seed = 21;
  Seated g = two_humans(seed);
  ClientView client[2];
  Rng rngs[2] = {substream(seed, 0), substream(seed, 1)};
  while (!g.session->finished()) {
    const json probe = g.session->view(g.tokens[0]);
    const PlayerId p = probe.at("to_move").get<PlayerId>();
    for (PlayerId q = 0; q < 2; ++q) {
      client[q].sync(*g.session, g.tokens[q]);
      const json served = g.session->view(g.tokens[q]);
      ASSERT_EQ(served.at("belief"), belief_snapshot(client[q].view->belief()));
      ASSERT_EQ(served.at("seat"), q);
      for (const auto& o : served.at("observations")) ASSERT_EQ(o.at("to"), q);
      for (ComputerId c = 0; c < client[q].view->config().num_computers(); ++c)
        ASSERT_EQ(served.at("computers")[c].at("accounts"), client[q].view->own_count(c));
      ASSERT_EQ(served.at("legal_actions").empty(), q != p);
    }
    g.session->submit(g.tokens[p], choose_turn(*client[p].view, StrategyKind::one_step(), rngs[p]));
  }
  const GameRecord got = g.session->record(g.tokens[1]);
  const GameRecord want = play_game({StrategyKind::one_step(), StrategyKind::one_step(), 1, seed, {}}, 0);
  EXPECT_EQ(got.rounds, want.rounds);
  EXPECT_EQ(got.end, want.end);
  EXPECT_EQ(got.outcome, want.outcome);
  EXPECT_EQ(replay(got).outcome, got.outcome);
}

TEST(Session, CleanResultGoesOnlyToTheCleaner) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Seated g = two_humans(seed);
    const json v0 = g.session->view(g.tokens[0]);
    ComputerId mine = -1;
    for (const auto& c : v0.at("computers"))
      if (c.at("controlled").get<bool>()) mine = c.at("computer");
    g.session->submit(g.tokens[0], {Action::local(0, mine, ActionKind::Clean)});
    bool cleaner_got = false;
    for (const Event& e : g.session->events(g.tokens[0], 0))
      cleaner_got |= e.body.dump().find("clean_result") != std::string::npos;
    EXPECT_TRUE(cleaner_got);
    for (const Event& e : g.session->events(g.tokens[1], 0))
      EXPECT_EQ(e.body.dump().find("clean_result"), std::string::npos) << e.body.dump();
  }
}

TEST(Session, Authorization) {
  Seated g = two_humans(3);
  EXPECT_THROW(g.session->view("nope"), AuthError);
  EXPECT_THROW(g.session->view(""), AuthError);
  EXPECT_THROW(g.session->join(0), AuthError);
  EXPECT_THROW(g.session->join(2), StateError);
  EXPECT_THROW(g.session->record(g.tokens[0]), StateError);
  const PlayerId p = g.session->view(g.tokens[0]).at("to_move");
  EXPECT_THROW(g.session->submit(g.tokens[1 - p], {}), StateError);
  EXPECT_NE(g.tokens[0], g.tokens[1]);
  EXPECT_EQ(g.tokens[0].size(), 32u);

  Session bot(GameConfig{}, 1, {SeatSpec::parse("human"), SeatSpec::parse("random")});
  EXPECT_THROW(bot.join(1), StateError);
}

TEST(Session, IllegalTurnIsRejectedWhole) {
  Seated g = two_humans(4);
  const PlayerId p = g.session->view(g.tokens[0]).at("to_move");
  const std::string& tok = g.tokens[p];
  const json before = g.session->view(tok);
  ComputerId mine = -1;
  for (const auto& c : before.at("computers"))
    if (c.at("controlled").get<bool>()) mine = c.at("computer");
  const ComputerId other = (mine + 1) % 10;
  // Acting from a computer the player does not hold.
  EXPECT_THROW(g.session->submit(tok, {Action::local(p, other, ActionKind::Scan)}), RuleViolation);
  // Acting for the other player.
  EXPECT_THROW(g.session->submit(tok, {Action::local(1 - p, mine, ActionKind::Scan)}), RuleViolation);
  EXPECT_EQ(g.session->view(tok), before);
}

TEST(Session, BotsPlayTheirSeats) {
  Session s(GameConfig{}, 9, {SeatSpec::parse("random"), SeatSpec::parse("one-step")});
  s.wait_idle(60s);
  ASSERT_TRUE(s.finished());
}

// --- HTTP ----------------------------------------------------------------

namespace {

class Served : public ::testing::Test {
 protected:
  void SetUp() override {
    port_ = http_.bind_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { http_.listen_after_bind(); });
    http_.wait_until_ready();
  }
  void TearDown() override {
    http_.stop();
    thread_.join();
  }
  httplib::Client client() {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(60, 0);
    return c;
  }
  static httplib::Headers auth(const std::string& token) { return {{"Authorization", "Bearer " + token}}; }

  HttpServer http_;
  int port_ = 0;
  std::thread thread_;
};

json body_of(const httplib::Result& r) { return json::parse(r->body); }

}  // namespace

TEST_F(Served, HumanAgainstNoResponseToTheEnd) {
  auto c = client();
  auto created = c.Post("/api/v1/sessions", json{{"seats", {"human", "no-response:2"}}, {"seed", 79}}.dump(),
                        "application/json");
  ASSERT_TRUE(created);
  ASSERT_EQ(created->status, 201);
  const std::string id = body_of(created).at("session");
  const std::string base = "/api/v1/sessions/" + id;

  auto joined = c.Post(base + "/join", R"({"seat": 0})", "application/json");
  ASSERT_EQ(joined->status, 200);
  const std::string token = body_of(joined).at("token");
  EXPECT_EQ(c.Post(base + "/join", R"({"seat": 0})", "application/json")->status, 403);
  EXPECT_EQ(c.Get(base + "/record", auth(token))->status, 409);
  EXPECT_EQ(c.Get(base + "/view", auth("0123"))->status, 403);
  EXPECT_EQ(c.Get(base + "/view?seat=1", auth(token))->status, 403);

  ClientView mine;
  mine.config = GameConfig{};
  Rng rng(5);
  bool over = false, rejected_once = false;
  int turns = 0;
  while (!over) {
    auto r = c.Get(base + "/events?after=" + std::to_string(mine.seen) + "&wait=5000", auth(token));
    ASSERT_EQ(r->status, 200);
    bool my_turn = false;
    const json batch = body_of(r);
    for (const auto& ev : batch.at("events")) {
      mine.apply(ev);
      if (ev.at("type") == "turn") my_turn = ev.at("player") == 0;
      if (ev.at("type") == "turn_done") my_turn = false;
      if (ev.at("type") == "game_end") over = true;
    }
    if (!my_turn || over) continue;
    const json view = body_of(c.Get(base + "/view", auth(token)));
    ASSERT_EQ(view.at("belief"), belief_snapshot(mine.view->belief()));

    if (!rejected_once) {
      const ComputerId foreign = (mine.view->controlled().front() + 1) % 10;
      auto bad = c.Post(base + "/turn", auth(token),
                        json{{"actions", {Action::local(0, foreign, ActionKind::Scan)}}}.dump(), "application/json");
      ASSERT_EQ(bad->status, 400);
      EXPECT_NE(body_of(bad).at("error").get<std::string>().find("illegal action"), std::string::npos);
      rejected_once = true;
    }
    const auto actions = choose_turn(*mine.view, StrategyKind::random(), rng);
    auto ok = c.Post(base + "/turn", auth(token), json{{"actions", actions}}.dump(), "application/json");
    ASSERT_EQ(ok->status, 200) << ok->body;
    ++turns;
  }
  EXPECT_EQ(turns, 20);

  auto rec = c.Get(base + "/record?token=" + token);
  ASSERT_EQ(rec->status, 200);
  const GameRecord record = body_of(rec).get<GameRecord>();
  EXPECT_EQ(record.rounds.size(), 20u);
  ASSERT_NE(record.outcome.kind, Outcome::Kind::Ongoing);
  EXPECT_EQ(replay(record).outcome, record.outcome);
  EXPECT_EQ(body_of(c.Get(base + "/view", auth(token))).at("outcome"), json(record.outcome));

  // A stream opened after the end replays the whole log and closes.
  httplib::Headers sse = auth(token);
  sse.emplace("Accept", "text/event-stream");
  auto stream = c.Get(base + "/events", sse);
  ASSERT_EQ(stream->status, 200);
  EXPECT_NE(stream->body.find("id: " + std::to_string(mine.seen) + "\n"), std::string::npos);
  EXPECT_NE(stream->body.find("\"game_end\""), std::string::npos);
}

TEST_F(Served, ErrorsMapToStatusCodes) {
  auto c = client();
  EXPECT_EQ(body_of(c.Get("/api/v1")).at("protocol"), kProtocolVersion);
  EXPECT_EQ(c.Post("/api/v1/sessions", R"({"seats": ["human", "minimax"]})", "application/json")->status, 400);
  EXPECT_EQ(c.Post("/api/v1/sessions", R"({"seats": ["human"]})", "application/json")->status, 400);
  EXPECT_EQ(c.Post("/api/v1/sessions", "{nope", "application/json")->status, 400);
  EXPECT_EQ(c.Post("/api/v1/sessions", R"({"seats": ["human", "human"], "config": {"num_os": 0}})",
                   "application/json")->status,
            400);
  EXPECT_EQ(c.Get("/api/v1/sessions/abc/view", auth("x"))->status, 409);
}

// Random requests against a live two-human session: nothing crashes the
// server, and no response carries the other seat's token, and views only ever show
// seat 0's own hand.
TEST_F(Served, FuzzedRequestsLeakNothing) {
  auto c = client();
  auto created = c.Post("/api/v1/sessions", R"({"seats": ["human", "human"], "seed": 5})", "application/json");
  const std::string id = body_of(created).at("session");
  const std::string base = "/api/v1/sessions/" + id;
  const std::string tok[2] = {body_of(c.Post(base + "/join", R"({"seat": 0})", "application/json")).at("token"),
                              body_of(c.Post(base + "/join", R"({"seat": 1})", "application/json")).at("token")};
  Session& s = *http_.registry().find(id);
  const std::string hand0 = s.view(tok[0]).at("exploits").dump();

  const std::vector<std::string> paths = {"/view", "/events", "/record", "/turn", "/join", "/events?after=99999",
                                          "/events?after=-1", "/events?wait=abc", "/view?seat=0", "/view?seat=1"};
  const std::vector<std::string> bodies = {"", "{}", "[]", "null", R"({"actions": 3})", R"({"actions": [{}]})",
                                           R"({"seat": "0"})", R"({"seat": 1e99})",
                                           R"({"actions": [{"acting": 0, "kind": "hack"}]})",
                                           R"({"actions": [{"acting": 99, "kind": "scan"}]})"};
  const std::vector<std::string> tokens = {tok[0], "", "deadbeef", tok[0] + "0", tok[0].substr(1)};
  Rng rng(13);
  for (int i = 0; i < 400; ++i) {
    const std::string path = base + paths[rng.uniform_index(paths.size())];
    const std::string token = tokens[rng.uniform_index(tokens.size())];
    httplib::Result r = rng.bernoulli(0.5)
                            ? c.Get(path, auth(token))
                            : c.Post(path, auth(token), bodies[rng.uniform_index(bodies.size())],
                                     "application/json");
    ASSERT_TRUE(r) << path;
    EXPECT_LT(r->status, 500) << path << " " << r->body;
    EXPECT_EQ(r->body.find(tok[1]), std::string::npos) << path;
    if (r->status == 200 && path.find("/view") != std::string::npos) {
      EXPECT_EQ(body_of(r).at("seat"), 0);
      EXPECT_EQ(body_of(r).at("exploits").dump(), hand0);
    }
  }
}
