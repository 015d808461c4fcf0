#include <csignal>
#include <fstream>
#include <iostream>
#include <regex>

#include <CLI11.hpp>

#include "inquire/errors.hpp"
#include "inquire/ftdata.hpp"
#include "inquire/harness.hpp"
#include "inquire/household.hpp"
#include "inquire/metrics.hpp"
#include "inquire/oracle.hpp"
#include "inquire/policies.hpp"
#include "inquire/records.hpp"
#include "inquire/replay.hpp"
#include "inquire/service.hpp"
#include "inquire/tabletop.hpp"
#include "inquire/text.hpp"

using namespace inquire;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitThreshold = 3;

struct EnvFlags {
  std::string env = "household";
  std::string variant = "standard";
  std::string pool = "id-dist";
  std::string task = "tabletop1";
  int x = 3;
  int y = 3;

  void add(CLI::App* app) {
    app->add_option("--env", env, "household | tabletop")->check(CLI::IsMember({"household", "tabletop"}));
    app->add_option("--variant", variant, "standard | ambiguous | multiround")
        ->check(CLI::IsMember({"standard", "ambiguous", "multiround"}));
    app->add_option("--pool", pool, "household layout pool: id-dist | ood-dist")
        ->check(CLI::IsMember({"id-dist", "ood-dist"}));
    app->add_option("--task", task, "tabletop task: tabletop1 | tabletop2 | tabletop3")
        ->check(CLI::IsMember({"tabletop1", "tabletop2", "tabletop3"}));
    app->add_option("--x", x, "tabletop red blocks");
    app->add_option("--y", y, "tabletop bases");
  }

  Context make(std::uint64_t seed) const {
    if (env == "household")
      return household::generate_context(seed, household::default_pool(household::parse_pool_id(pool)),
                                         parse_variant(variant));
    const auto kind = parse_task_kind(task);
    tabletop::Params p{kind == TaskKind::tabletop2 ? 0 : x, kind == TaskKind::tabletop1 ? 0 : y};
    return tabletop::generate_tabletop(kind, p, seed);
  }
};

// "a..b" inclusive, or a single number.
std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& s) {
  static const std::regex range(R"(^(\d+)(?:\.\.(\d+))?$)");
  std::smatch m;
  if (!std::regex_match(s, m, range)) throw CLI::ValidationError("--seeds", "expected a..b, got '" + s + "'");
  const auto a = std::stoull(m[1].str());
  const auto b = m[2].matched ? std::stoull(m[2].str()) : a;
  if (b < a) throw CLI::ValidationError("--seeds", "empty range '" + s + "'");
  return {a, b};
}

OracleFactory make_oracle(const std::string& kind, double q, std::uint64_t seed) {
  if (kind == "rule") return [](const Context& c) { return std::make_unique<RuleOracle>(c); };
  const auto mode = kind == "wrong-target" ? NoiseMode::wrong_target : NoiseMode::unhelpful;
  return [q, seed, mode](const Context& c) {
    return std::make_unique<NoisyOracle>(std::make_unique<RuleOracle>(c), c, q, derive_seed(seed, c.seed), mode);
  };
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw Error("cannot write '" + path + "'");
  return file;
}

Server* g_server = nullptr;
void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Episodes, datasets and reports for question-asking agents"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Write one generated context to a file");
  EnvFlags gen_env;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen_env.add(gen);
  gen->add_option("--seed", gen_seed, "context seed");
  gen->add_option("--out", gen_out, "output file (default stdout)");

  // run
  auto* run = app.add_subcommand("run", "Run episodes and write a records file");
  EnvFlags run_env;
  std::string policy = "scripted-aba", oracle = "rule", seeds = "0", run_out, remote_url, prompt_path;
  std::vector<std::string> candidates;
  double q = 0.0;
  int horizon = 50, max_tasks = 0, jobs = 1;
  run_env.add(run);
  run->add_option("--policy", policy, "expert | expert-ask | scripted-aba | scripted-baseline | remote");
  run->add_option("--oracle", oracle, "rule | noisy | wrong-target")
      ->check(CLI::IsMember({"rule", "noisy", "wrong-target"}));
  run->add_option("--q", q, "noisy oracle corruption probability")->check(CLI::Range(0.0, 1.0));
  run->add_option("--seeds", seeds, "seed range a..b (inclusive)");
  run->add_option("--T", horizon, "horizon: max actions per episode")->check(CLI::PositiveNumber);
  run->add_option("--max-tasks", max_tasks, "multiround: stop after this many tasks (0 = horizon only)");
  run->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  run->add_option("--out", run_out, "records file (default stdout)");
  run->add_option("--remote-url", remote_url, "completion endpoint for --policy remote");
  run->add_option("--prompt", prompt_path, "prompt bundle for --policy remote");
  run->add_option("--candidate", candidates, "remote: score these candidate actions instead of sampling");

  // ftdata
  auto* ft = app.add_subcommand("ftdata", "Collect noisy expert episodes and build training datasets");
  CollectConfig ft_cfg;
  std::string ft_variant = "ambiguous", ft_pool = "id-dist", ft_out;
  ft->add_option("--n", ft_cfg.episodes, "episodes")->check(CLI::NonNegativeNumber);
  ft->add_option("--p", ft_cfg.p, "per-step noise probability")->check(CLI::Range(0.0, 0.999999));
  ft->add_option("--seed", ft_cfg.seed, "collection seed");
  ft->add_option("--variant", ft_variant)->check(CLI::IsMember({"standard", "ambiguous", "multiround"}));
  ft->add_option("--pool", ft_pool)->check(CLI::IsMember({"id-dist", "ood-dist"}));
  ft->add_option("--T", ft_cfg.horizon, "horizon")->check(CLI::PositiveNumber);
  ft->add_option("--max-tasks", ft_cfg.max_tasks, "multiround tasks per episode");
  ft->add_option("--jobs", ft_cfg.jobs)->check(CLI::PositiveNumber);
  ft->add_option("--out", ft_out, "output directory")->required();

  // eval
  auto* ev = app.add_subcommand("eval", "Aggregate a records file into a report");
  std::string ev_records, ev_format = "text", ev_group = "policy,env,variant,task", ev_out;
  double min_success = -1.0;
  ev->add_option("--records", ev_records, "records file")->required();
  ev->add_option("--format", ev_format, "text | structured | plot-data");
  ev->add_option("--group", ev_group, "comma-separated keys: policy, env, variant, task, layout");
  ev->add_option("--out", ev_out, "report file (default stdout)");
  ev->add_option("--min-success", min_success, "exit 3 when any group's success rate (%) is below this");

  // probe-oracle
  auto* pr = app.add_subcommand("probe-oracle", "Score an oracle on where-is probes");
  std::string pr_oracle = "rule";
  double pr_q = 0.275;
  std::uint64_t pr_seed = 0;
  int scenarios = 8, questions = 5;
  pr->add_option("--oracle", pr_oracle)->check(CLI::IsMember({"rule", "noisy"}));
  pr->add_option("--q", pr_q)->check(CLI::Range(0.0, 1.0));
  pr->add_option("--seed", pr_seed);
  pr->add_option("--scenarios", scenarios)->check(CLI::PositiveNumber);
  pr->add_option("--questions", questions)->check(CLI::PositiveNumber);

  // serve
  auto* sv = app.add_subcommand("serve", "Run the session service");
  std::optional<std::string> addr;
  double idle_minutes = 30.0;
  sv->add_option("--addr", addr, "host:port (default INQUIRE_ADDR or 127.0.0.1:8080)");
  sv->add_option("--idle-timeout", idle_minutes, "minutes before an idle session is dropped")
      ->check(CLI::PositiveNumber);

  // replay
  auto* rp = app.add_subcommand("replay", "Replay a transcript against a context");
  std::string rp_context, rp_transcript, rp_out, rp_id = "replay";
  double rp_tol = 1e-2;
  rp->add_option("--context", rp_context)->required();
  rp->add_option("--transcript", rp_transcript)->required();
  rp->add_option("--out", rp_out, "write the replayed episode as a records file");
  rp->add_option("--id", rp_id, "episode id in the records file");
  rp->add_option("--tolerance", rp_tol, "tabletop coordinate tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen) {
      const auto ctx = gen_env.make(gen_seed);
      std::ofstream file;
      open_out(gen_out, file) << to_json(ctx).dump(2) << "\n";
      return 0;
    }

    if (*run) {
      std::pair<std::uint64_t, std::uint64_t> range;
      try {
        range = parse_seed_range(seeds);
      } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
      }
      RemoteConfig rc;
      if (!remote_url.empty()) rc.url = remote_url;
      rc.candidates = candidates;
      std::optional<PromptBundle> bundle;
      if (!prompt_path.empty()) bundle = load_prompt_bundle(prompt_path);
      else if (policy == "remote") bundle = default_prompt_bundle(parse_env_kind(run_env.env));
      PolicyFactory factory;
      try {
        factory = policy_factory(policy, rc, bundle);
      } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
      }
      std::vector<EpisodeSpec> specs;
      for (auto s = range.first; s <= range.second; ++s)
        specs.push_back({run_env.env + "-" + std::to_string(s), run_env.make(s)});
      RunLimits limits;
      limits.horizon = horizon;
      limits.max_tasks = max_tasks;
      const auto records = run_batch(specs, factory, make_oracle(oracle, q, range.first), limits, jobs);
      std::ofstream file;
      write_records(open_out(run_out, file), records);
      return 0;
    }

    if (*ft) {
      ft_cfg.variant = parse_variant(ft_variant);
      ft_cfg.pool = household::parse_pool_id(ft_pool);
      const auto manifest = write_ftdata(ft_cfg, ft_out);
      std::cout << manifest["counts"].dump() << "\n";
      return 0;
    }

    if (*ev) {
      std::vector<GroupKey> keys;
      for (const auto& k : text::split(ev_group, ','))
        if (!text::trim(k).empty()) keys.push_back(parse_group_key(text::trim(k)));
      const auto format = parse_report_format(ev_format);
      const auto table = compute_metrics(load_records(ev_records), keys);
      std::ofstream file;
      open_out(ev_out, file) << emit_report(table, format);
      if (min_success >= 0.0) {
        for (const auto& r : table.rows)
          if (r.success_rate < min_success) {
            std::cerr << "success rate " << one_decimal(r.success_rate) << "% below threshold " << min_success
                      << "%\n";
            return kExitThreshold;
          }
      }
      return 0;
    }

    if (*pr) {
      const auto result = probe_accuracy(make_oracle(pr_oracle, pr_q, pr_seed), pr_seed, scenarios, questions);
      nlohmann::json j = {{"oracle", pr_oracle},
                          {"q", pr_oracle == "rule" ? 0.0 : pr_q},
                          {"per_scenario", result.per_scenario},
                          {"mean", result.mean},
                          {"std", result.stddev}};
      std::cout << j.dump() << "\n";
      return 0;
    }

    if (*sv) {
      const auto [host, port] = resolve_bind_address(addr);
      SessionManager sessions(std::chrono::milliseconds(static_cast<long long>(idle_minutes * 60000.0)));
      Server server(sessions);
      const int bound = server.bind(host, port);
      if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
      std::cerr << "listening on " << host << ":" << bound << "\n";
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      server.listen();
      g_server = nullptr;
      return 0;
    }

    if (*rp) {
      const auto ctx = load_context(rp_context);
      const auto result = replay_transcript(ctx, parse_transcript(read_file(rp_transcript)), rp_tol, rp_id, "fixture");
      for (const auto& m : result.mismatches)
        std::cerr << "Obs " << m.obs_number << " differs\n  expected: " << m.expected << "\n  actual:   " << m.actual
                  << "\n";
      if (!rp_out.empty()) save_records(rp_out, {result.record});
      std::cout << (result.ok() ? "match" : "mismatch") << " " << result.record.length() << " "
                << to_string(result.record.outcome) << "\n";
      return result.ok() ? 0 : kExitRuntime;
    }
  } catch (const UnsupportedFormat& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
