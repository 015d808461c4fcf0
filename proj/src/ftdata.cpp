#include "inquire/ftdata.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "inquire/errors.hpp"
#include "inquire/harness.hpp"
#include "inquire/oracle.hpp"
#include "inquire/policies.hpp"
#include "inquire/random.hpp"
#include "inquire/records.hpp"
#include "inquire/text.hpp"

namespace inquire {

using nlohmann::json;

EpisodeRecord collect_episode(const Context& ctx, double p, std::uint64_t noise_seed, int horizon,
                              int max_tasks, std::string episode_id) {
  if (!(p >= 0.0 && p < 1.0)) throw ParamOutOfRange("noise probability must be in [0, 1)");
  const auto& env = environment_for(ctx.env_kind);
  RuleOracle oracle(ctx);
  RunLimits limits;
  limits.horizon = horizon;
  limits.max_tasks = ctx.variant == Variant::multiround ? max_tasks : 0;
  ExpertPolicy teacher(true);
  EpisodeDriver driver(env, ctx, oracle, limits, std::move(episode_id), teacher.name());
  Rng rng(noise_seed);

  while (!driver.over()) {
    const auto planned = teacher.decide(driver.input(true));
    if (!planned) {
      driver.fail();
      break;
    }
    // The draw happens at every step so the flagged fraction is p over all steps.
    if (rng.bernoulli(p)) {
      std::vector<PhysicalAction> pool;
      if (const auto* hs = std::get_if<HouseholdState>(&driver.state())) {
        for (auto& a : household::action_space(*hs)) {
          PhysicalAction pa = std::move(a);
          if (!(*planned == AugmentedAction{Physical{pa}})) pool.push_back(std::move(pa));
        }
      }
      if (!pool.empty()) {
        driver.submit(AugmentedAction{Physical{pool[rng.index(pool.size())]}}, true);
        continue;
      }
    }
    driver.submit(*planned);
  }
  return driver.record();
}

std::vector<EpisodeRecord> collect_corrupted(const CollectConfig& cfg) {
  if (cfg.episodes < 0) throw ParamOutOfRange("episode count must be non-negative");
  const auto& pool = household::default_pool(cfg.pool);
  std::vector<EpisodeRecord> out(static_cast<std::size_t>(cfg.episodes));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;

  const auto worker = [&] {
    for (;;) {
      const auto i = next.fetch_add(1);
      if (i >= out.size()) return;
      try {
        const auto ctx = household::generate_context(derive_seed(cfg.seed, i), pool, cfg.variant);
        const auto id = "ft-" + std::to_string(i);
        out[i] = collect_episode(ctx, cfg.p, derive_seed(cfg.seed ^ 0x6e6f697365ULL, i), cfg.horizon,
                                 cfg.max_tasks, id);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        next = out.size();
      }
    }
  };
  const auto jobs = static_cast<std::size_t>(std::clamp(cfg.jobs, 1, 256));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < std::min(jobs, out.size()); ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string prefix_with_cue(const EpisodeRecord& r, std::size_t t) {
  return concat_trajectory(r.initial_observation, std::span(r.steps).first(t)) + "\nAct " +
         std::to_string(t + 1) + ":";
}

}  // namespace

std::vector<FtPolicyRecord> build_policy_dataset(const std::vector<EpisodeRecord>& records) {
  std::vector<FtPolicyRecord> out;
  for (const auto& r : records)
    for (std::size_t t = 0; t < r.steps.size(); ++t)
      out.push_back({prefix_with_cue(r, t), render(r.steps[t].action), r.steps[t].noise ? 1 : 0,
                     r.episode_id, static_cast<int>(t)});
  return out;
}

std::string seen_question(std::string_view c) {
  return "do you have ever seen the " + std::string(c) + "?";
}
std::string where_question(std::string_view c) {
  return "where have you seen the " + std::string(c) + "?";
}

std::vector<FtQaRecord> build_qa_dataset(const std::vector<EpisodeRecord>& records,
                                         std::uint64_t seed, int augment) {
  static const std::regex query_re(R"(### query: ([a-z]+) >)");
  std::vector<FtQaRecord> out;

  const auto emit = [&](const EpisodeRecord& r, std::size_t t, const std::string& c, bool augmented) {
    const auto prefix = std::span(r.steps).first(t);
    const auto report = query_memory(r.initial_observation, prefix, c);
    const auto base = concat_trajectory(r.initial_observation, prefix) + "\nQuestion: ";
    const int step = static_cast<int>(t);
    out.push_back({base + seen_question(c), report.never_seen() ? "no" : "yes", c, augmented,
                   r.episode_id, step});
    if (!report.never_seen())
      out.push_back({base + where_question(c), report.render(), c, augmented, r.episode_id, step});
  };

  for (const auto& r : records) {
    if (r.context.env_kind != EnvKind::household) continue;
    for (std::size_t t = 0; t < r.steps.size(); ++t) {
      const auto* think = std::get_if<Think>(&r.steps[t].action);
      std::smatch m;
      if (think && std::regex_search(think->text, m, query_re)) emit(r, t, m[1].str(), false);
    }

    std::set<std::string> classes;
    for (const auto& p : r.context.placement) classes.insert(household::class_of(p.instance));
    classes.erase(r.context.task.object_class);
    if (classes.empty()) continue;
    const std::vector<std::string> others(classes.begin(), classes.end());
    Rng rng(derive_seed(seed, fnv1a(r.episode_id)));
    for (int k = 0; k < augment; ++k) {
      const auto t = rng.index(r.steps.size() + 1);
      emit(r, t, rng.pick(others), true);
    }
  }
  return out;
}

ObjectiveTerms masked_objective(const std::vector<std::vector<double>>& qa_scores,
                                const std::vector<std::pair<std::vector<double>, int>>& policy_scores) {
  const auto add = [](double& acc, const std::vector<double>& ls) {
    for (double l : ls) {
      if (!std::isfinite(l) || l > 0.0)
        throw NonFiniteScore("log-likelihood must be finite and <= 0, got " + std::to_string(l));
      acc -= l;
    }
  };
  ObjectiveTerms terms;
  for (const auto& ls : qa_scores) add(terms.qa, ls);
  for (const auto& [ls, mask] : policy_scores)
    if (mask == 0) add(terms.policy, ls);
  return terms;
}

// ---------------------------------------------------------------------------

namespace {

std::string header_line(const char* format) {
  return json{{"format", format}, {"version", kDatasetVersion}}.dump() + "\n";
}

template <typename F>
void each_line(std::string_view text, const char* format, F&& f) {
  const auto lines = text::split_lines(text);
  if (lines.empty()) throw FormatError("empty dataset file");
  const auto head = json::parse(lines[0], nullptr, false);
  if (head.is_discarded() || head.value("format", "") != format || head.value("version", 0) != kDatasetVersion)
    throw FormatError(std::string("expected a ") + format + " version " + std::to_string(kDatasetVersion) + " header");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const auto j = json::parse(lines[i], nullptr, false);
    if (j.is_discarded()) throw FormatError("dataset line " + std::to_string(i + 1) + " is not JSON");
    try {
      f(j);
    } catch (const json::exception& e) {
      throw FormatError("dataset line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string dump_policy_dataset(const std::vector<FtPolicyRecord>& records) {
  std::string out = header_line(kPolicyDatasetFormat);
  for (const auto& r : records)
    out += json{{"x", r.x}, {"y", r.y}, {"mask", r.mask}, {"episode_id", r.episode_id}, {"step", r.step}}
               .dump() + "\n";
  return out;
}

std::string dump_qa_dataset(const std::vector<FtQaRecord>& records) {
  std::string out = header_line(kQaDatasetFormat);
  for (const auto& r : records)
    out += json{{"x", r.x},
                {"y", r.y},
                {"object_class", r.object_class},
                {"augmented", r.augmented},
                {"episode_id", r.episode_id},
                {"step", r.step}}
               .dump() + "\n";
  return out;
}

std::vector<FtPolicyRecord> parse_policy_dataset(std::string_view text) {
  std::vector<FtPolicyRecord> out;
  each_line(text, kPolicyDatasetFormat, [&](const json& j) {
    out.push_back({j.at("x").get<std::string>(), j.at("y").get<std::string>(), j.at("mask").get<int>(),
                   j.at("episode_id").get<std::string>(), j.at("step").get<int>()});
  });
  return out;
}

std::vector<FtQaRecord> parse_qa_dataset(std::string_view text) {
  std::vector<FtQaRecord> out;
  each_line(text, kQaDatasetFormat, [&](const json& j) {
    out.push_back({j.at("x").get<std::string>(), j.at("y").get<std::string>(),
                   j.at("object_class").get<std::string>(), j.at("augmented").get<bool>(),
                   j.at("episode_id").get<std::string>(), j.at("step").get<int>()});
  });
  return out;
}

json write_ftdata(const CollectConfig& cfg, const std::filesystem::path& dir) {
  const auto records = collect_corrupted(cfg);
  const auto policy = build_policy_dataset(records);
  const auto qa = build_qa_dataset(records, cfg.seed);

  std::ostringstream rec_text;
  write_records(rec_text, records);
  const auto policy_text = dump_policy_dataset(policy);
  const auto qa_text = dump_qa_dataset(qa);

  std::size_t steps = 0, flagged = 0, successes = 0;
  for (const auto& r : records) {
    steps += r.steps.size();
    for (const auto& s : r.steps) flagged += s.noise ? 1 : 0;
    successes += r.outcome == Outcome::success ? 1 : 0;
  }
  std::size_t masked = 0;
  for (const auto& r : policy) masked += static_cast<std::size_t>(r.mask);

  json manifest = {
      {"format", "inquire.ftdata.manifest"},
      {"version", kDatasetVersion},
      {"seed", cfg.seed},
      {"p", cfg.p},
      {"n", cfg.episodes},
      {"variant", std::string(to_string(cfg.variant))},
      {"pool", std::string(household::to_string(cfg.pool))},
      {"horizon", cfg.horizon},
      {"max_tasks", cfg.max_tasks},
      {"counts",
       {{"episodes", records.size()},
        {"successes", successes},
        {"steps", steps},
        {"flagged_steps", flagged},
        {"policy_records", policy.size()},
        {"masked_records", masked},
        {"qa_records", qa.size()}}},
      {"fnv1a",
       {{"records.jsonl", hex(fnv1a(rec_text.str()))},
        {"policy.jsonl", hex(fnv1a(policy_text))},
        {"qa.jsonl", hex(fnv1a(qa_text))}}}};

  std::filesystem::create_directories(dir);
  write_file(dir / "records.jsonl", rec_text.str());
  write_file(dir / "policy.jsonl", policy_text);
  write_file(dir / "qa.jsonl", qa_text);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

}  // namespace inquire
