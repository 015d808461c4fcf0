#include "inquire/records.hpp"

#include <fstream>
#include <sstream>

#include "inquire/errors.hpp"
#include "inquire/household.hpp"
#include "inquire/tabletop.hpp"

namespace inquire {

using nlohmann::json;

namespace {

std::string_view kind_name(ObjectKind k) {
  switch (k) {
    case ObjectKind::block: return "block";
    case ObjectKind::bowl: return "bowl";
    case ObjectKind::base: return "base";
  }
  return "?";
}

ObjectKind parse_object_kind(const std::string& s) {
  if (s == "block") return ObjectKind::block;
  if (s == "bowl") return ObjectKind::bowl;
  if (s == "base") return ObjectKind::base;
  throw FormatError("unknown object kind '" + s + "'");
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  return it == j.end() || it->is_null() ? fallback : it->get<T>();
}

json to_json(const Observation& o) {
  return {{"kind", std::string(to_string(o.kind))}, {"text", o.text}};
}

Observation observation_from_json(const json& j) {
  return {parse_obs_kind(j.at("kind").get<std::string>()), j.at("text").get<std::string>()};
}

FormatError line_error(std::size_t line, const std::string& msg) {
  return FormatError("records line " + std::to_string(line) + ": " + msg);
}

}  // namespace

json to_json(const Context& ctx) {
  json j;
  j["env"] = to_string(ctx.env_kind);
  j["variant"] = to_string(ctx.variant);
  j["layout"] = ctx.layout_name;
  j["seed"] = ctx.seed;
  j["task"] = {{"kind", std::string(to_string(ctx.task.kind))},
               {"object_class", ctx.task.object_class},
               {"destination", ctx.task.destination},
               {"x", ctx.task.distractors},
               {"y", ctx.task.bases},
               {"instruction", ctx.task.instruction}};
  json recs = json::array();
  for (const auto& r : ctx.receptacles)
    recs.push_back({{"name", r.name}, {"openable", r.openable}, {"open", r.open}});
  j["receptacles"] = std::move(recs);
  json placement = json::array();
  for (const auto& p : ctx.placement)
    placement.push_back({{"instance", p.instance}, {"receptacle", p.receptacle}});
  j["placement"] = std::move(placement);
  j["destinations"] = ctx.destinations;
  json kinds = json::object();
  for (const auto& [cls, ks] : ctx.class_kinds) {
    json arr = json::array();
    for (auto k : ks) arr.push_back(std::string(to_string(k)));
    kinds[cls] = std::move(arr);
  }
  j["class_kinds"] = std::move(kinds);
  json table = json::array();
  for (const auto& o : ctx.table)
    table.push_back({{"kind", std::string(kind_name(o.kind))},
                     {"color", o.color},
                     {"x", o.pose.x},
                     {"y", o.pose.y},
                     {"index", o.index}});
  j["table"] = std::move(table);
  j["target_block"] = ctx.target_block ? json(*ctx.target_block) : json(nullptr);
  j["targets"] = ctx.target_instances;
  json colors = json::object();
  for (const auto& [base, color] : ctx.color_map) colors[std::to_string(base)] = color;
  j["color_map"] = std::move(colors);
  return j;
}

Context context_from_json(const json& j) {
  Context ctx;
  ctx.env_kind = parse_env_kind(j.at("env").get<std::string>());
  ctx.variant = parse_variant(get_or<std::string>(j, "variant", "standard"));
  ctx.layout_name = get_or<std::string>(j, "layout", "");
  ctx.seed = get_or<std::uint64_t>(j, "seed", 0);

  const auto& t = j.at("task");
  ctx.task.kind = parse_task_kind(t.at("kind").get<std::string>());
  ctx.task.object_class = get_or<std::string>(t, "object_class", "");
  ctx.task.destination = get_or<std::string>(t, "destination", "");
  ctx.task.distractors = get_or<int>(t, "x", 0);
  ctx.task.bases = get_or<int>(t, "y", 0);
  ctx.task.instruction = get_or<std::string>(t, "instruction", "");

  if (j.contains("receptacles"))
    for (const auto& r : j["receptacles"])
      ctx.receptacles.push_back({r.at("name").get<std::string>(), get_or<bool>(r, "openable", false),
                                 get_or<bool>(r, "open", true)});
  if (j.contains("placement"))
    for (const auto& p : j["placement"])
      ctx.placement.push_back({p.at("instance").get<std::string>(), p.at("receptacle").get<std::string>()});
  ctx.destinations = get_or<std::vector<std::string>>(j, "destinations", {});
  if (j.contains("class_kinds"))
    for (const auto& [cls, ks] : j["class_kinds"].items())
      for (const auto& k : ks) ctx.class_kinds[cls].push_back(parse_task_kind(k.get<std::string>()));
  if (j.contains("table"))
    for (const auto& o : j["table"])
      ctx.table.push_back({parse_object_kind(o.at("kind").get<std::string>()),
                           get_or<std::string>(o, "color", ""),
                           {o.at("x").get<double>(), o.at("y").get<double>()},
                           get_or<int>(o, "index", 0)});
  if (j.contains("target_block") && !j["target_block"].is_null())
    ctx.target_block = j["target_block"].get<std::size_t>();
  ctx.target_instances = get_or<std::vector<std::string>>(j, "targets", {});
  if (j.contains("color_map"))
    for (const auto& [base, color] : j["color_map"].items())
      ctx.color_map[std::stoi(base)] = color.get<std::string>();

  if (ctx.env_kind == EnvKind::household && ctx.task.instruction.empty())
    ctx.task.instruction = household::render_instruction(ctx.task);
  if (ctx.env_kind == EnvKind::tabletop && ctx.task.instruction.empty())
    ctx.task.instruction = tabletop::instruction_for(ctx.task.kind);
  return ctx;
}

json to_json(const AugmentedAction& a) {
  const auto kind = kind_of(a);
  std::string body;
  if (const auto* p = std::get_if<Physical>(&a)) body = render(p->action);
  else if (const auto* q = std::get_if<Ask>(&a)) body = q->text;
  else body = std::get<Think>(a).text;
  return {{"kind", std::string(to_string(kind))}, {"text", body}};
}

AugmentedAction action_from_json(const json& j, EnvKind env) {
  const auto kind = j.at("kind").get<std::string>();
  const auto body = j.at("text").get<std::string>();
  if (kind == "think") return Think{body};
  if (kind == "ask") return Ask{body};
  if (kind != "physical") throw FormatError("unknown action kind '" + kind + "'");
  if (env == EnvKind::household) return Physical{household::parse_household_action(body)};
  return Physical{tabletop::parse_move(body)};
}

void write_records(std::ostream& out, const std::vector<EpisodeRecord>& records) {
  out << json{{"format", kRecordsFormat}, {"version", kRecordsVersion}}.dump() << '\n';
  for (const auto& r : records) {
    out << json{{"type", "episode"},
                {"episode_id", r.episode_id},
                {"policy", r.policy},
                {"context", to_json(r.context)},
                {"initial_observation", r.initial_observation},
                {"horizon", r.horizon},
                {"discount", r.discount}}
               .dump()
        << '\n';
    for (std::size_t t = 0; t < r.steps.size(); ++t) {
      const auto& s = r.steps[t];
      out << json{{"type", "step"},
                  {"episode_id", r.episode_id},
                  {"t", t + 1},
                  {"action", to_json(s.action)},
                  {"observation", to_json(s.observation)},
                  {"noise", s.noise},
                  {"reward", s.reward}}
                 .dump()
          << '\n';
    }
    out << json{{"type", "end"},
                {"episode_id", r.episode_id},
                {"outcome", std::string(to_string(r.outcome))},
                {"tasks_completed", r.tasks_completed},
                {"steps", r.steps.size()}}
               .dump()
        << '\n';
  }
}

std::vector<EpisodeRecord> read_records(std::istream& in) {
  std::vector<EpisodeRecord> out;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  bool open = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw line_error(line_no, e.what());
    }
    try {
      if (!header) {
        if (j.value("format", "") != kRecordsFormat) throw line_error(line_no, "not a records file");
        if (j.value("version", 0) != kRecordsVersion)
          throw line_error(line_no, "unsupported records version " + j["version"].dump());
        header = true;
        continue;
      }
      const auto type = j.at("type").get<std::string>();
      if (type == "episode") {
        if (open) throw line_error(line_no, "episode started before the previous one ended");
        EpisodeRecord r;
        r.episode_id = j.at("episode_id").get<std::string>();
        r.policy = get_or<std::string>(j, "policy", "");
        r.context = context_from_json(j.at("context"));
        r.initial_observation = j.at("initial_observation").get<std::string>();
        r.horizon = get_or<int>(j, "horizon", 50);
        r.discount = get_or<double>(j, "discount", 1.0);
        out.push_back(std::move(r));
        open = true;
      } else if (type == "step") {
        if (!open) throw line_error(line_no, "step outside an episode");
        auto& r = out.back();
        if (j.at("t").get<std::size_t>() != r.steps.size() + 1)
          throw line_error(line_no, "step numbers are not consecutive");
        r.steps.push_back({action_from_json(j.at("action"), r.context.env_kind),
                           observation_from_json(j.at("observation")), get_or<bool>(j, "noise", false),
                           get_or<double>(j, "reward", 0.0)});
      } else if (type == "end") {
        if (!open) throw line_error(line_no, "end outside an episode");
        auto& r = out.back();
        r.outcome = parse_outcome(j.at("outcome").get<std::string>());
        r.tasks_completed = get_or<int>(j, "tasks_completed", 0);
        if (j.at("steps").get<std::size_t>() != r.steps.size())
          throw line_error(line_no, "step count mismatch");
        open = false;
      } else {
        throw line_error(line_no, "unknown line type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw line_error(line_no, e.what());
    } catch (const MalformedAction& e) {
      throw line_error(line_no, std::string("bad action: ") + e.what());
    }
  }
  if (!header) throw FormatError("records file is empty");
  if (open) throw FormatError("records file ends inside an episode");
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void save_records(const std::filesystem::path& path, const std::vector<EpisodeRecord>& records) {
  std::ostringstream out;
  write_records(out, records);
  write_file(path, out.str());
}

std::vector<EpisodeRecord> load_records(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return read_records(in);
}

void save_context(const std::filesystem::path& path, const Context& ctx) {
  write_file(path, to_json(ctx).dump(2) + "\n");
}

Context load_context(const std::filesystem::path& path) {
  try {
    return context_from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace inquire
