#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "inquire/errors.hpp"
#include "inquire/policies.hpp"
#include "inquire/records.hpp"
#include "inquire/text.hpp"

namespace inquire {

std::string PromptBundle::render(std::string_view transcript, std::size_t next_act) const {
  std::string out = preamble;
  if (!out.empty() && out.back() != '\n') out += '\n';
  for (const auto& ex : examples) {
    out += '\n';
    out += ex;
    if (!ex.empty() && ex.back() != '\n') out += '\n';
  }
  out += '\n';
  out += transcript;
  out += "\nAct " + std::to_string(next_act) + ":";
  return out;
}

PromptBundle parse_prompt_bundle(std::string_view text) {
  PromptBundle b;
  std::string* section = &b.preamble;
  bool saw_version = false;
  for (const auto& line : text::split_lines(text)) {
    if (!saw_version && line.rfind("version:", 0) == 0) {
      b.version = std::string(text::trim(std::string_view(line).substr(8)));
      saw_version = true;
      continue;
    }
    if (line.rfind("=== example", 0) == 0) {
      b.examples.emplace_back();
      section = &b.examples.back();
      continue;
    }
    *section += line;
    *section += '\n';
  }
  const auto tidy = [](std::string& s) { s = std::string(text::trim(s)); };
  tidy(b.preamble);
  for (auto& e : b.examples) tidy(e);
  return b;
}

PromptBundle load_prompt_bundle(const std::string& path) { return parse_prompt_bundle(read_file(path)); }

PromptBundle default_prompt_bundle(EnvKind env) {
  return load_prompt_bundle(std::string(INQUIRE_ASSET_DIR) + "/prompts/" + std::string(to_string(env)) +
                            ".txt");
}

std::string first_action_line(std::string_view completion) {
  for (const auto& raw : text::split_lines(completion)) {
    std::string_view line = text::trim(raw);
    if (line.empty()) continue;
    // Models often echo the cue: "Act 3: go to desk 1".
    if (line.rfind("Act ", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string_view::npos) line = text::trim(line.substr(colon + 1));
    }
    if (!line.empty()) return std::string(line);
  }
  return {};
}

RemotePolicy::RemotePolicy(RemoteConfig config, PromptBundle bundle)
    : config_(std::move(config)), bundle_(std::move(bundle)) {}

RemotePolicy::~RemotePolicy() = default;

RemotePolicy::Completion RemotePolicy::complete(const std::string& prompt, bool want_scores) {
  // Scoring requests generate nothing; the endpoint scores the candidate text
  // that follows the final "Act t:" cue (echo-style log-probabilities).
  nlohmann::json req = {{"prompt", prompt},
                        {"max_tokens", want_scores ? 0 : config_.max_tokens},
                        {"stop", config_.stop},
                        {"want_token_scores", want_scores}};
  const auto body = req.dump();
  auto delay = config_.backoff;
  std::string last_error;
  for (int attempt = 0; attempt < std::max(1, config_.max_attempts); ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    httplib::Client cli(config_.url);
    cli.set_connection_timeout(config_.timeout);
    cli.set_read_timeout(config_.timeout);
    auto res = cli.Post(config_.path, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) throw TransportError("completion endpoint returned HTTP " + std::to_string(res->status));
    try {
      const auto j = nlohmann::json::parse(res->body);
      Completion c;
      c.text = j.at("text").get<std::string>();
      if (j.contains("token_scores") && !j["token_scores"].is_null())
        c.token_scores = j["token_scores"].get<std::vector<double>>();
      return c;
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(std::string("malformed completion response: ") + e.what());
    }
  }
  throw TransportError("completion endpoint unreachable after retries: " + last_error);
}

std::optional<std::string> RemotePolicy::act(const PolicyInput& in) {
  auto prompt = bundle_.render(in.transcript, in.steps.size() + 1);
  if (in.parse_error) {
    // Corrective suffix: restate the cue after naming the problem.
    prompt += " (previous reply rejected: " + *in.parse_error +
              "; answer with exactly one action)\nAct " + std::to_string(in.steps.size() + 1) + ":";
  }
  try {
    if (!config_.candidates.empty()) {
      std::vector<ScoredCandidate> scored;
      for (const auto& cand : config_.candidates) {
        auto c = complete(prompt + " " + cand, true);
        if (c.token_scores.empty()) {
          scored.clear();
          break;
        }
        scored.push_back({cand, std::move(c.token_scores)});
      }
      if (!scored.empty()) return scored[select_by_token_scores(scored)].action;
    }
    return first_action_line(complete(prompt, false).text);
  } catch (const TransportError&) {
    return std::nullopt;  // the harness records the episode as a failure
  }
}

}  // namespace inquire
