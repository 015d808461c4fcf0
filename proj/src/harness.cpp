#include "inquire/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <regex>
#include <thread>

#include "inquire/errors.hpp"
#include "inquire/household.hpp"
#include "inquire/tabletop.hpp"
#include "inquire/text.hpp"

namespace inquire {

EpisodeDriver::EpisodeDriver(const Environment& env, Context ctx, Oracle& oracle, RunLimits limits,
                             std::string episode_id, std::string policy_name)
    : env_(env), oracle_(oracle), limits_(limits), state_(env.reset(ctx)) {
  record_.episode_id = std::move(episode_id);
  record_.policy = std::move(policy_name);
  record_.initial_observation = env.initial_observation(state_, ctx);
  record_.context = std::move(ctx);
  record_.horizon = limits.horizon;
  record_.discount = limits.discount;
  if (limits_.horizon <= 0) finish(Outcome::timeout);
}

int EpisodeDriver::steps_left() const noexcept {
  return std::max(0, limits_.horizon - static_cast<int>(record_.steps.size()));
}

PolicyInput EpisodeDriver::input(bool privileged) const {
  PolicyInput in;
  in.env = env_.kind();
  in.variant = record_.context.variant;
  in.episode_seed = record_.context.seed;
  in.initial_observation = record_.initial_observation;
  in.steps = record_.steps;
  in.transcript = concat_trajectory(record_.initial_observation, record_.steps);
  if (privileged) {
    in.context = &record_.context;
    in.state = &state_;
  }
  return in;
}

const StepRecord& EpisodeDriver::submit(std::string_view text, bool noise) {
  return submit(parse_augmented(text, env_), noise);
}

const StepRecord& EpisodeDriver::submit(const AugmentedAction& action, bool noise) {
  if (over_) throw EpisodeFinished();
  auto result = step(state_, action, record_.context, oracle_, env_);
  state_ = std::move(result.state);
  record_.steps.push_back({action, std::move(result.observation), noise, result.reward});

  if (const auto* hs = std::get_if<HouseholdState>(&state_))
    record_.tasks_completed = hs->tasks_completed;
  else if (result.done)
    record_.tasks_completed = 1;

  if (result.done) {
    record_.tasks_completed = std::max(1, record_.tasks_completed);
    finish(Outcome::success);
  } else if (limits_.max_tasks > 0 && record_.tasks_completed >= limits_.max_tasks) {
    finish(Outcome::success);
  } else if (steps_left() == 0) {
    // Multiround episodes only end at the horizon; any completed round counts.
    finish(record_.tasks_completed > 0 ? Outcome::success : Outcome::timeout);
  }
  return record_.steps.back();
}

bool EpisodeDriver::question_refused(std::string_view question) const {
  WorldState probe = state_;
  return env_.admit_question(probe, question, record_.context).has_value();
}

void EpisodeDriver::fail() { finish(Outcome::failure); }

void EpisodeDriver::finish(Outcome o) {
  over_ = true;
  record_.outcome = o;
}

void drive(EpisodeDriver& driver, Policy& policy) {
  while (!driver.over()) {
    auto in = driver.input(policy.privileged());
    bool stepped = false;
    for (int attempt = 0;; ++attempt) {
      in.attempt = attempt;
      const auto reply = policy.act(in);
      if (!reply) break;
      try {
        driver.submit(*reply);
        stepped = true;
        break;
      } catch (const MalformedAction& e) {
        if (attempt >= driver.parse_retries()) break;
        in.parse_error = e.what();
      }
    }
    if (!stepped) driver.fail();
  }
}

EpisodeRecord run_episode(const Environment& env, const Context& ctx, Policy& policy,
                          Oracle& oracle, const RunLimits& limits, std::string episode_id) {
  EpisodeDriver driver(env, ctx, oracle, limits, std::move(episode_id), policy.name());
  drive(driver, policy);
  return driver.record();
}

const Environment& environment_for(EnvKind kind) {
  static const household::HouseholdEnv household_env;
  static const tabletop::TabletopEnv tabletop_env;
  if (kind == EnvKind::household) return household_env;
  return tabletop_env;
}

std::vector<EpisodeRecord> run_batch(std::span<const EpisodeSpec> specs, const PolicyFactory& policy,
                                     const OracleFactory& oracle, const RunLimits& limits,
                                     int jobs) {
  std::vector<EpisodeRecord> out(specs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;

  const auto worker = [&] {
    for (;;) {
      const auto i = next.fetch_add(1);
      if (i >= specs.size()) return;
      try {
        const auto& spec = specs[i];
        auto p = policy();
        auto o = oracle(spec.context);
        out[i] = run_episode(environment_for(spec.context.env_kind), spec.context, *p, *o, limits,
                             spec.episode_id);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next = specs.size();
      }
    }
  };

  const auto n = static_cast<std::size_t>(std::clamp(jobs, 1, 256));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(n, specs.size()); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

// ---------------------------------------------------------------------------

double log_score(const ScoredCandidate& c) {
  if (c.token_scores.empty())
    throw NonPositiveScore("candidate '" + c.action + "' has no token scores");
  double sum = 0.0;
  for (double s : c.token_scores) {
    if (!(s > 0.0 && s <= 1.0))
      throw NonPositiveScore("token score outside (0, 1] for candidate '" + c.action + "'");
    sum += std::log(s);
  }
  return sum;
}

std::size_t select_by_token_scores(std::span<const ScoredCandidate> candidates) {
  if (candidates.empty()) throw EmptyCandidates();
  std::size_t best = 0;
  double best_score = log_score(candidates[0]);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double s = log_score(candidates[i]);
    // Equal products can differ in the last bits once taken through logs
    // (0.125 vs 0.5^3), so a relative slack keeps such ties with the earlier one.
    if (s > best_score + kTieSlack * std::max(1.0, std::abs(best_score))) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

std::string SightingReport::render() const {
  if (seen.empty()) return "I have never seen " + object_class + " before.";
  std::vector<std::string> parts;
  for (const auto& s : seen) parts.push_back(s.instance + " is in " + s.receptacle);
  return text::join(parts, ", ") + ".";
}

namespace {

struct Mention {
  std::size_t pos;
  std::string instance;
  std::string receptacle;
};

void add_list(std::vector<Mention>& out, std::size_t pos, const std::string& list,
              const std::string& receptacle) {
  std::size_t offset = 0;
  for (auto item : text::split(list, ',')) {
    std::string_view v = text::trim(item);
    if (v.substr(0, 4) == "and ") v.remove_prefix(4);
    if (v.substr(0, 2) == "a ") v.remove_prefix(2);
    if (v != "nothing" && !v.empty()) out.push_back({pos + offset, std::string(v), receptacle});
    offset += item.size() + 1;
  }
}

std::vector<Mention> mentions_in(const std::string& obs) {
  static const std::regex on_re(R"(On the ([a-z]+ \d+), you see ([^.]*)\.)");
  static const std::regex open_re(R"(You open the ([a-z]+ \d+)\. The [a-z]+ \d+ is open\. In it, you see ([^.]*)\.)");
  static const std::regex take_re(R"(You pick up the ([a-z]+ \d+) from the ([a-z]+ \d+)\.)");
  static const std::regex put_re(R"(You put the ([a-z]+ \d+) in/on the ([a-z]+ \d+)\.)");

  std::vector<Mention> out;
  const auto scan_list = [&](const std::regex& re) {
    for (auto it = std::sregex_iterator(obs.begin(), obs.end(), re); it != std::sregex_iterator(); ++it)
      add_list(out, static_cast<std::size_t>(it->position(2)), (*it)[2].str(), (*it)[1].str());
  };
  scan_list(on_re);
  scan_list(open_re);
  for (const auto* re : {&take_re, &put_re})
    for (auto it = std::sregex_iterator(obs.begin(), obs.end(), *re); it != std::sregex_iterator(); ++it)
      out.push_back({static_cast<std::size_t>(it->position(1)), (*it)[1].str(), (*it)[2].str()});
  std::stable_sort(out.begin(), out.end(),
                   [](const Mention& a, const Mention& b) { return a.pos < b.pos; });
  return out;
}

}  // namespace

SightingReport query_memory(std::string_view initial_observation,
                            std::span<const StepRecord> steps, std::string_view object_class) {
  SightingReport report;
  report.object_class = std::string(object_class);
  std::map<std::string, std::size_t> slot;  // instance -> index in report.seen

  const auto scan = [&](const std::string& obs, int number) {
    for (auto& m : mentions_in(obs)) {
      if (household::class_of(m.instance) != object_class) continue;
      auto [it, fresh] = slot.try_emplace(m.instance, report.seen.size());
      if (fresh) report.seen.push_back({m.instance, m.receptacle, number});
      else report.seen[it->second] = {m.instance, m.receptacle, number};
    }
  };
  scan(std::string(initial_observation), 1);
  for (std::size_t i = 0; i < steps.size(); ++i)
    if (steps[i].observation.kind == ObsKind::env_text)
      scan(steps[i].observation.text, static_cast<int>(i) + 2);
  return report;
}

std::vector<AugmentedAction> strip_metadata(std::vector<AugmentedAction> actions) {
  if (actions.empty() || std::holds_alternative<Think>(actions.back())) return actions;
  return {std::move(actions.back())};
}

}  // namespace inquire
