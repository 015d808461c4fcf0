#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "inquire/errors.hpp"
#include "inquire/harness.hpp"
#include "inquire/household.hpp"
#include "inquire/oracle.hpp"
#include "inquire/policies.hpp"
#include "support.hpp"

using namespace inquire;

namespace {

// Completion endpoint on a free local port, served from a background thread.
class StubEndpoint {
 public:
  using Handler = std::function<nlohmann::json(const nlohmann::json&)>;

  explicit StubEndpoint(Handler h) : handler_(std::move(h)) {
    http_.Post("/v1/complete", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      const auto body = nlohmann::json::parse(req.body);
      res.set_content(handler_(body).dump(), "application/json");
    });
    port_ = http_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { http_.listen_after_bind(); });
    http_.wait_until_ready();
  }
  ~StubEndpoint() {
    http_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::atomic<int> requests{0};

 private:
  Handler handler_;
  httplib::Server http_;
  int port_ = 0;
  std::thread thread_;
};

int cue_number(const std::string& prompt) {
  const auto at = prompt.rfind("\nAct ");
  return std::stoi(prompt.substr(at + 5));
}

RemoteConfig config_for(const StubEndpoint& stub) {
  RemoteConfig c;
  c.url = stub.url();
  c.max_attempts = 1;
  c.timeout = std::chrono::seconds(5);
  return c;
}

}  // namespace

TEST_CASE("remote replies become think and ask actions") {
  std::vector<std::string> replies = {"think: hello", "Act 2: ask: Where is the mug?"};
  StubEndpoint stub([&](const nlohmann::json& req) {
    CHECK(req.at("max_tokens").get<int>() > 0);
    CHECK_FALSE(req.at("want_token_scores").get<bool>());
    return nlohmann::json{{"text", replies[cue_number(req.at("prompt")) - 1]}};
  });
  const auto ctx = support::mug_walkthrough_context();
  RemotePolicy p(config_for(stub), default_prompt_bundle(EnvKind::household));
  ScriptedOracle o({"mug 1 is in sidetable 1."});
  EpisodeDriver d(environment_for(EnvKind::household), ctx, o, {}, "r", "remote");
  d.submit(*p.act(d.input(false)));
  CHECK(std::holds_alternative<Think>(d.record().steps[0].action));
  CHECK(d.record().steps[0].observation.text == "OK.");
  d.submit(*p.act(d.input(false)));
  CHECK(d.record().steps[1].action == AugmentedAction{Ask{"Where is the mug?"}});
}

TEST_CASE("a remote agent replaying the mug walkthrough succeeds") {
  const auto t = support::mug_walkthrough_transcript();
  StubEndpoint stub([&](const nlohmann::json& req) {
    const auto k = static_cast<std::size_t>(cue_number(req.at("prompt")));
    return nlohmann::json{{"text", k <= t.actions.size() ? t.actions[k - 1] + "\nObs" : ""}};
  });
  const auto ctx = support::mug_walkthrough_context();
  RemotePolicy p(config_for(stub), default_prompt_bundle(EnvKind::household));
  std::vector<std::string> answers;
  for (std::size_t i = 0; i < t.actions.size(); ++i)
    if (t.actions[i].rfind("ask:", 0) == 0) answers.push_back(t.observations[i]);
  ScriptedOracle o(answers);
  const auto r = run_episode(environment_for(EnvKind::household), ctx, p, o, {}, "remote-b");
  CHECK(r.outcome == Outcome::success);
  CHECK(r.length() == 10);
  CHECK(r.initial_observation == t.initial_observation);
}

TEST_CASE("candidate scoring picks the highest product of token scores") {
  StubEndpoint stub([&](const nlohmann::json& req) {
    CHECK(req.at("max_tokens").get<int>() == 0);
    CHECK(req.at("want_token_scores").get<bool>());
    const auto prompt = req.at("prompt").get<std::string>();
    std::vector<double> scores = {0.5, 0.5};
    if (prompt.ends_with(" go to sidetable 1")) scores = {0.9, 0.4};
    if (prompt.ends_with(" go to bed 1")) scores = {0.3};
    return nlohmann::json{{"text", ""}, {"token_scores", scores}};
  });
  auto cfg = config_for(stub);
  cfg.candidates = {"go to bed 1", "go to sidetable 1", "go to drawer 1"};
  RemotePolicy p(cfg, default_prompt_bundle(EnvKind::household));
  const auto ctx = support::mug_walkthrough_context();
  ScriptedOracle o;
  EpisodeDriver d(environment_for(EnvKind::household), ctx, o, {}, "c", "remote");
  // 0.36 beats 0.3 and 0.25: the longer candidate wins without length normalization.
  CHECK(*p.act(d.input(false)) == "go to sidetable 1");
  CHECK(stub.requests == 3);
}

TEST_CASE("an unreachable endpoint fails the episode instead of throwing") {
  RemoteConfig cfg;
  cfg.url = "http://127.0.0.1:1";
  cfg.max_attempts = 2;
  cfg.backoff = std::chrono::milliseconds(1);
  cfg.timeout = std::chrono::seconds(1);
  RemotePolicy p(cfg, default_prompt_bundle(EnvKind::household));
  const auto ctx = support::mug_walkthrough_context();
  ScriptedOracle o;
  const auto r = run_episode(environment_for(EnvKind::household), ctx, p, o, {}, "down");
  CHECK(r.outcome == Outcome::failure);
  CHECK(r.steps.empty());
}

TEST_CASE("prompt bundles parse and render with the act cue") {
  const auto b = parse_prompt_bundle("version: 7\nRules here.\n=== example 1\nObs 1: a\n=== example 2\nObs 1: b\n");
  CHECK(b.version == "7");
  CHECK(b.preamble == "Rules here.");
  REQUIRE(b.examples.size() == 2);
  CHECK(b.examples[1] == "Obs 1: b");
  const auto r = b.render("Obs 1: now", 1);
  CHECK(r == "Rules here.\n\nObs 1: a\n\nObs 1: b\n\nObs 1: now\nAct 1:");
  for (auto env : {EnvKind::household, EnvKind::tabletop}) CHECK(default_prompt_bundle(env).examples.size() == 2);
}

TEST_CASE("first action line strips echoes and blank lines") {
  CHECK(first_action_line("\n  go to bed 1\nObs 3: x") == "go to bed 1");
  CHECK(first_action_line("Act 4: ask: Where is the mug?") == "ask: Where is the mug?");
  CHECK(first_action_line("   \n") == "");
}

TEST_CASE("policy names resolve and unknown ones are refused") {
  for (const char* n : {"expert", "scripted-aba", "scripted-baseline"}) CHECK(policy_factory(n)()->name() == n);
  CHECK_THROWS_AS(policy_factory("oracle-god"), Error);
}

TEST_CASE("the scripted asker solves the mug walkthrough room with one question") {
  const auto ctx = support::mug_walkthrough_context();
  ScriptedAbaPolicy p;
  RuleOracle o(ctx);
  const auto r = run_episode(environment_for(EnvKind::household), ctx, p, o, {}, "aba");
  CHECK(r.outcome == Outcome::success);
  CHECK(r.questions() == 1);
  CHECK(r.physical_actions() <= 4);
}

TEST_CASE("expert plans reach success on every task kind") {
  std::map<TaskKind, int> seen;
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    const auto ctx = household::generate_context(seed, household::default_pool(household::PoolId::id_dist),
                                                 Variant::standard);
    ExpertPolicy p;
    RuleOracle o(ctx);
    const auto r = run_episode(environment_for(EnvKind::household), ctx, p, o, {}, "x");
    CHECK(r.outcome == Outcome::success);
    CHECK(r.questions() == 0);
    ++seen[ctx.task.kind];
  }
  CHECK(seen.size() == 6);
}
