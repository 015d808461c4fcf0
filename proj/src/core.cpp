#include "inquire/core.hpp"

#include <algorithm>

#include "inquire/errors.hpp"
#include "inquire/text.hpp"

namespace inquire {

StepResult step(const WorldState& state, const AugmentedAction& action, const Context& ctx,
                Oracle& oracle, const Environment& env) {
  if (env.finished(state, ctx)) throw EpisodeFinished();

  if (const auto* q = std::get_if<Ask>(&action)) {
    WorldState next = state;
    if (auto refusal = env.admit_question(next, q->text, ctx))
      return {std::move(next), Observation::env(std::move(*refusal)), 0.0, false};
    return {std::move(next), Observation::answer(oracle.answer(q->text)), 0.0, false};
  }
  if (std::holds_alternative<Think>(action)) return {state, Observation::ack(), 0.0, false};

  auto out = env.apply(state, std::get<Physical>(action).action, ctx);
  return {std::move(out.state), Observation::env(std::move(out.text)), out.reward, out.done};
}

namespace {

std::string checked_payload(std::string_view text, std::size_t prefix_len, std::string_view what) {
  const auto body = text::trim(text.substr(prefix_len));
  if (body.empty()) throw MalformedAction(std::string(what) + " text is empty", prefix_len, 0);
  if (body.find('\n') != std::string_view::npos)
    throw MalformedAction(std::string(what) + " text spans several lines", prefix_len, body.size());
  return std::string(body);
}

}  // namespace

AugmentedAction parse_augmented(std::string_view raw, const Environment& env) {
  const auto s = text::trim(raw);
  if (s.empty()) throw MalformedAction("empty action", 0, 0);
  if (text::starts_with_icase(s, "think:")) return Think{checked_payload(s, 6, "think")};
  if (text::starts_with_icase(s, "ask:")) return Ask{checked_payload(s, 4, "ask")};
  if (s.find('\n') != std::string_view::npos)
    throw MalformedAction("action spans several lines", 0, s.size());
  return Physical{env.parse_physical(s)};
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::success: return "success";
    case Outcome::failure: return "failure";
    case Outcome::timeout: return "timeout";
  }
  return "?";
}

Outcome parse_outcome(std::string_view s) {
  if (s == "success") return Outcome::success;
  if (s == "failure") return Outcome::failure;
  if (s == "timeout") return Outcome::timeout;
  throw FormatError("unknown outcome: '" + std::string(s) + "'");
}

double EpisodeRecord::total_reward() const {
  double sum = 0.0;
  for (const auto& s : steps) sum += s.reward;
  return sum;
}

int EpisodeRecord::physical_actions() const {
  return static_cast<int>(std::count_if(steps.begin(), steps.end(), [](const StepRecord& s) {
    return kind_of(s.action) == ActionKind::physical;
  }));
}

int EpisodeRecord::questions() const {
  return static_cast<int>(std::count_if(steps.begin(), steps.end(), [](const StepRecord& s) {
    return kind_of(s.action) == ActionKind::ask;
  }));
}

std::string act_line(std::size_t step_index, const AugmentedAction& a) {
  return "Act " + std::to_string(step_index + 1) + ": " + render(a);
}

std::string obs_line(std::size_t obs_number, std::string_view text) {
  return "Obs " + std::to_string(obs_number) + ": " + std::string(text);
}

std::string concat_trajectory(std::string_view initial_observation,
                              std::span<const StepRecord> steps) {
  std::string out = obs_line(1, initial_observation);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    out += '\n';
    out += act_line(i, steps[i].action);
    out += '\n';
    out += obs_line(i + 2, steps[i].observation.text);
  }
  return out;
}

}  // namespace inquire
