#include <cstdio>
#include <random>

#include "inquire/policies.hpp"
#include "inquire/service.hpp"

namespace inquire {

using nlohmann::json;

std::string_view to_string(SessionMode m) {
  switch (m) {
    case SessionMode::auto_oracle: return "auto-oracle";
    case SessionMode::human_oracle: return "human-oracle";
    case SessionMode::human_agent: return "human-agent";
  }
  return "?";
}

SessionMode parse_session_mode(std::string_view s) {
  for (auto m : {SessionMode::auto_oracle, SessionMode::human_oracle, SessionMode::human_agent})
    if (to_string(m) == s) return m;
  throw Error("unknown session mode '" + std::string(s) + "'");
}

namespace {

ServiceError bad_request(const std::string& msg) { return ServiceError("BAD_REQUEST", 400, msg); }

}  // namespace

SessionConfig SessionConfig::from_json(const json& j) {
  if (!j.is_object()) throw bad_request("session request must be a JSON object");
  SessionConfig c;
  try {
    if (j.contains("env")) c.env = parse_env_kind(j.at("env").get<std::string>());
    if (j.contains("variant")) c.variant = parse_variant(j.at("variant").get<std::string>());
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("policy")) c.policy = j.at("policy").get<std::string>();
    if (j.contains("mode")) c.mode = parse_session_mode(j.at("mode").get<std::string>());
    if (j.contains("pool")) c.pool = household::parse_pool_id(j.at("pool").get<std::string>());
    if (j.contains("task")) c.tabletop_task = parse_task_kind(j.at("task").get<std::string>());
    if (j.contains("x")) c.params.x = j.at("x").get<int>();
    if (j.contains("y")) c.params.y = j.at("y").get<int>();
    if (j.contains("horizon")) c.horizon = j.at("horizon").get<int>();
    if (j.contains("max_tasks")) c.max_tasks = j.at("max_tasks").get<int>();
  } catch (const json::exception& e) {
    throw bad_request(e.what());
  } catch (const Error& e) {
    throw bad_request(e.what());
  }
  if (c.horizon <= 0) throw bad_request("horizon must be positive");
  return c;
}

json SessionConfig::to_json() const {
  json j = {{"env", to_string(env)},   {"variant", to_string(variant)},   {"seed", seed},
            {"policy", policy},        {"mode", to_string(mode)},         {"horizon", horizon},
            {"max_tasks", max_tasks}};
  if (env == EnvKind::household) {
    j["pool"] = household::to_string(pool);
  } else {
    j["task"] = to_string(tabletop_task);
    j["x"] = params.x;
    j["y"] = params.y;
  }
  return j;
}

// ---------------------------------------------------------------------------

struct SessionManager::Session {
  std::string id;
  SessionConfig config;
  std::mutex mu;
  std::condition_variable cv;
  Clock::time_point touched = Clock::now();
  bool closed = false;

  std::unique_ptr<Policy> policy;
  std::unique_ptr<Oracle> oracle;
  ScriptedOracle* human = nullptr;  // set in human-oracle mode
  std::unique_ptr<EpisodeDriver> driver;

  std::vector<json> log;
  std::optional<AugmentedAction> parked;  // the Ask waiting for a reply
  std::optional<std::string> pending_question;

  void emit(json event) {
    event["cursor"] = log.size();
    log.push_back(std::move(event));
    cv.notify_all();
  }

  void emit_action(std::size_t step, const AugmentedAction& a) {
    const char* kind = std::holds_alternative<Think>(a) ? "think" : std::holds_alternative<Ask>(a) ? "ask" : "act";
    emit({{"kind", kind}, {"step", step}, {"text", render(a)}});
  }

  void emit_observation(std::size_t step, const Observation& o) {
    emit({{"kind", "observation"}, {"step", step}, {"source", to_string(o.kind)}, {"text", o.text}});
  }

  void emit_end() {
    const auto& r = driver->record();
    emit({{"kind", "end"},
          {"step", r.steps.size()},
          {"text", to_string(r.outcome)},
          {"outcome", to_string(r.outcome)},
          {"tasks_completed", r.tasks_completed},
          {"length", r.length()},
          {"physical_actions", r.physical_actions()},
          {"questions", r.questions()},
          {"reward", r.total_reward()}});
  }

  // Applies one action and logs both halves of the step.
  void apply(const AugmentedAction& a, bool already_logged_action = false) {
    const auto n = driver->record().steps.size() + 1;
    if (!already_logged_action) emit_action(n, a);
    const auto& rec = driver->submit(a);
    emit_observation(n, rec.observation);
    if (driver->over()) emit_end();
  }

  // Runs the policy until the episode ends, parks at a question, or (in
  // human-agent mode) needs the person's next action.
  void pump() {
    if (config.mode == SessionMode::human_agent) return;
    while (!driver->over() && !parked) {
      auto in = driver->input(policy->privileged());
      std::optional<AugmentedAction> action;
      for (int attempt = 0;; ++attempt) {
        in.attempt = attempt;
        const auto reply = policy->act(in);
        if (!reply) break;
        try {
          action = parse_augmented(*reply, driver->env());
          break;
        } catch (const MalformedAction& e) {
          if (attempt >= driver->parse_retries()) break;
          in.parse_error = e.what();
        }
      }
      if (!action) {
        driver->fail();
        emit_end();
        return;
      }
      const auto* ask = std::get_if<Ask>(&*action);
      if (config.mode == SessionMode::human_oracle && ask && !driver->question_refused(ask->text)) {
        emit_action(driver->record().steps.size() + 1, *action);
        pending_question = ask->text;
        parked = std::move(action);
        return;
      }
      apply(*action);
    }
  }
};

SessionManager::SessionManager(std::chrono::milliseconds idle_timeout) : idle_timeout_(idle_timeout) {}
SessionManager::~SessionManager() = default;

std::string SessionManager::create(const SessionConfig& config) {
  expire_idle();
  auto s = std::make_shared<Session>();
  s->config = config;

  Context ctx;
  try {
    if (config.env == EnvKind::household) {
      ctx = household::generate_context(config.seed, household::default_pool(config.pool), config.variant);
    } else {
      ctx = tabletop::generate_tabletop(config.tabletop_task, config.params, config.seed);
    }
    if (config.mode != SessionMode::human_agent) s->policy = policy_factory(config.policy)();
  } catch (const Error& e) {
    throw bad_request(e.what());
  }

  if (config.mode == SessionMode::human_oracle) {
    auto human = std::make_unique<ScriptedOracle>();
    s->human = human.get();
    s->oracle = std::move(human);
  } else {
    s->oracle = std::make_unique<RuleOracle>(ctx);
  }

  RunLimits limits;
  limits.horizon = config.horizon;
  limits.max_tasks = config.max_tasks;
  {
    // Opaque token: a counter so ids never repeat, plus random bits.
    static thread_local std::mt19937_64 gen{std::random_device{}()};
    std::lock_guard lock(mu_);
    char buf[40];
    std::snprintf(buf, sizeof buf, "s%llu-%016llx", static_cast<unsigned long long>(++counter_),
                  static_cast<unsigned long long>(gen()));
    s->id = buf;
  }
  const auto policy_name = s->policy ? s->policy->name() : std::string("human");
  s->driver = std::make_unique<EpisodeDriver>(environment_for(ctx.env_kind), std::move(ctx), *s->oracle,
                                              limits, s->id, policy_name);
  {
    std::lock_guard lock(s->mu);
    s->emit({{"kind", "observation"}, {"step", 0}, {"source", "env"}, {"text", s->driver->record().initial_observation}});
    if (s->driver->over()) s->emit_end();
    s->pump();
  }
  std::lock_guard lock(mu_);
  sessions_[s->id] = s;
  return s->id;
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) {
  std::lock_guard lock(mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError("UNKNOWN_SESSION", 404, "no session '" + id + "'");
  it->second->touched = Clock::now();
  return it->second;
}

std::vector<json> SessionManager::events(const std::string& id, std::uint64_t since,
                                         std::chrono::milliseconds wait) {
  auto s = find(id);
  std::unique_lock lock(s->mu);
  if (wait.count() > 0)
    s->cv.wait_for(lock, wait, [&] { return s->closed || s->log.size() > since || s->driver->over(); });
  std::vector<json> out;
  for (auto k = since; k < s->log.size(); ++k) out.push_back(s->log[k]);
  return out;
}

void SessionManager::answer(const std::string& id, const std::string& text) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  if (s->config.mode != SessionMode::human_oracle)
    throw ServiceError("WRONG_MODE", 409, "answers are accepted only in human-oracle sessions");
  if (!s->pending_question)
    throw ServiceError("ANSWER_WITHOUT_QUESTION", 409, "the agent has not asked anything");
  // Injected verbatim: the oracle hands the text straight back to the episode.
  s->human->push(text);
  auto ask = std::move(*s->parked);
  s->parked.reset();
  s->pending_question.reset();
  s->apply(ask, true);
  s->pump();
}

void SessionManager::act(const std::string& id, const std::string& text) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  if (s->config.mode != SessionMode::human_agent)
    throw ServiceError("WRONG_MODE", 409, "actions are accepted only in human-agent sessions");
  if (s->driver->over()) throw ServiceError("EPISODE_FINISHED", 409, "the episode is over");
  AugmentedAction a;
  try {
    a = parse_augmented(text, s->driver->env());
  } catch (const MalformedAction& e) {
    throw ServiceError("MALFORMED_ACTION", 400, e.what());
  }
  s->apply(a);
}

json SessionManager::state(const std::string& id) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  const auto& r = s->driver->record();
  return {{"id", s->id},
          {"version", kWireVersion},
          {"config", s->config.to_json()},
          {"policy", r.policy},
          {"over", s->driver->over()},
          {"outcome", s->driver->over() ? json(to_string(r.outcome)) : json(nullptr)},
          {"steps", r.steps.size()},
          {"steps_left", s->driver->steps_left()},
          {"physical_actions", r.physical_actions()},
          {"questions", r.questions()},
          {"tasks_completed", r.tasks_completed},
          {"pending_question", s->pending_question ? json(*s->pending_question) : json(nullptr)},
          {"next_cursor", s->log.size()}};
}

EpisodeRecord SessionManager::record(const std::string& id) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  return s->driver->record();
}

void SessionManager::close(const std::string& id) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ServiceError("UNKNOWN_SESSION", 404, "no session '" + id + "'");
    s = it->second;
    sessions_.erase(it);
  }
  std::lock_guard lock(s->mu);
  s->closed = true;
  s->cv.notify_all();
}

std::size_t SessionManager::expire_idle(Clock::time_point now) {
  std::vector<std::shared_ptr<Session>> dropped;
  {
    std::lock_guard lock(mu_);
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      if (now - it->second->touched > idle_timeout_) {
        dropped.push_back(it->second);
        it = sessions_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto& s : dropped) {
    std::lock_guard lock(s->mu);
    s->closed = true;
    s->cv.notify_all();
  }
  return dropped.size();
}

std::size_t SessionManager::size() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

}  // namespace inquire
