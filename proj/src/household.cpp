#include "inquire/household.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <map>
#include <set>

#include "inquire/errors.hpp"
#include "inquire/text.hpp"

namespace inquire::household {

namespace {

constexpr std::array<TaskKind, 6> kHouseholdKinds = {TaskKind::pick, TaskKind::examine,
                                                     TaskKind::clean, TaskKind::heat,
                                                     TaskKind::cool, TaskKind::pick2};

bool flag_ok(TaskKind kind, const ObjectStatus& s) {
  switch (kind) {
    case TaskKind::heat: return s.heated;
    case TaskKind::clean: return s.cleaned;
    case TaskKind::cool: return s.cooled;
    case TaskKind::examine: return s.examined;
    default: return true;
  }
}

ObjectStatus status_of(const HouseholdState& s, const std::string& instance) {
  auto it = s.status.find(instance);
  return it == s.status.end() ? ObjectStatus{} : it->second;
}

// Receptacle currently holding `instance`, or nullptr (inventory / unknown).
const std::string* location_of(const HouseholdState& s, const std::string& instance) {
  for (const auto& [name, r] : s.receptacles)
    if (std::find(r.contents.begin(), r.contents.end(), instance) != r.contents.end())
      return &name;
  return nullptr;
}

std::vector<std::string> sorted_for_display(std::vector<std::string> names) {
  std::sort(names.begin(), names.end(),
            [](const std::string& a, const std::string& b) { return display_before(a, b); });
  return names;
}

std::string render_contents(const Receptacle& r) {
  const auto names = sorted_for_display(r.contents);
  return text::article_list(names);
}

std::string render_at(const std::string& name, const Receptacle& r) {
  if (r.closed()) return "The " + name + " is closed.";
  return "On the " + name + ", you see " + render_contents(r) + ".";
}

std::vector<std::string> instances_of_class(const Context& ctx, std::string_view cls) {
  std::vector<std::string> out;
  for (const auto& p : ctx.placement)
    if (class_of(p.instance) == cls) out.push_back(p.instance);
  std::sort(out.begin(), out.end(),
            [](const std::string& a, const std::string& b) { return index_of(a) < index_of(b); });
  return out;
}

bool room_has_type(const Context& ctx, std::string_view type) {
  for (const auto& r : ctx.receptacles)
    if (class_of(r.name) == type) return true;
  return false;
}

bool kind_allowed(const Context& ctx, std::string_view cls, TaskKind kind) {
  auto it = ctx.class_kinds.find(std::string(cls));
  if (it == ctx.class_kinds.end()) return false;
  return std::find(it->second.begin(), it->second.end(), kind) != it->second.end();
}

std::vector<std::string> present_classes(const Context& ctx) {
  std::set<std::string> seen;
  std::vector<std::string> out;
  for (const auto& p : ctx.placement) {
    auto c = class_of(p.instance);
    if (seen.insert(c).second) out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct Candidate {
  TaskKind kind;
  std::string cls;
  std::string dest;
};

// All (kind, class, destination) triples the room can support.
std::vector<Candidate> task_candidates(const Context& ctx) {
  std::vector<Candidate> out;
  for (TaskKind kind : kHouseholdKinds) {
    const auto appliance = appliance_for(kind);
    if (!appliance.empty() && !room_has_type(ctx, appliance)) continue;
    for (const auto& cls : present_classes(ctx)) {
      if (!kind_allowed(ctx, cls, kind)) continue;
      const auto n = instances_of_class(ctx, cls).size();
      if (kind == TaskKind::pick2 && n < 2) continue;
      if (kind == TaskKind::examine) {
        out.push_back({kind, cls, ""});
        continue;
      }
      for (const auto& d : ctx.destinations)
        if (room_has_type(ctx, d)) out.push_back({kind, cls, d});
    }
  }
  return out;
}

TaskSpec make_task(const Candidate& c) {
  TaskSpec t;
  t.kind = c.kind;
  t.object_class = c.cls;
  t.destination = c.dest;
  t.instruction = render_instruction(t);
  return t;
}

// Uniform over kinds that have at least one candidate, then uniform within.
std::optional<Candidate> sample_candidate(const std::vector<Candidate>& all, Rng& rng) {
  std::map<TaskKind, std::vector<const Candidate*>> by_kind;
  for (const auto& c : all) by_kind[c.kind].push_back(&c);
  if (by_kind.empty()) return std::nullopt;
  std::vector<TaskKind> kinds;
  for (TaskKind k : kHouseholdKinds)
    if (by_kind.count(k)) kinds.push_back(k);
  const auto& bucket = by_kind[rng.pick(kinds)];
  return *bucket[rng.index(bucket.size())];
}

std::vector<std::string> sample_targets(const TaskSpec& task, const Context& ctx, Rng& rng) {
  auto pool = instances_of_class(ctx, task.object_class);
  if (pool.empty()) return {};
  std::size_t size = 1;
  if (task.kind == TaskKind::pick2) {
    size = 2;
  } else if (task.kind != TaskKind::examine && pool.size() >= 2 &&
             rng.bernoulli(kMultiTargetProbability)) {
    size = static_cast<std::size_t>(rng.between(2, static_cast<int>(pool.size())));
  }
  rng.shuffle(pool);
  pool.resize(std::min(size, pool.size()));
  std::sort(pool.begin(), pool.end(),
            [](const std::string& a, const std::string& b) { return index_of(a) < index_of(b); });
  return pool;
}

struct Token {
  std::string_view text;
  std::size_t offset;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i >= s.size()) break;
    const auto start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    out.push_back({s.substr(start, i - start), start});
  }
  return out;
}

bool is_word(std::string_view w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

bool is_number(std::string_view w) {
  return !w.empty() && w.size() < 6 &&
         std::all_of(w.begin(), w.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
         w.front() != '0';
}

class ActionParser {
 public:
  explicit ActionParser(std::string_view s) : src_(s), toks_(tokenize(s)) {}

  HouseholdAction parse() {
    if (toks_.empty()) throw MalformedAction("empty action", 0, 0);
    const auto verb = next("a verb").text;
    HouseholdAction a;
    if (verb == "go") {
      a.verb = Verb::go;
      keyword("to");
      a.receptacle = entity();
    } else if (verb == "take") {
      a.verb = Verb::take;
      a.object = entity();
      keyword("from");
      a.receptacle = entity();
    } else if (verb == "put") {
      a.verb = Verb::put;
      a.object = entity();
      keyword("in/on");
      a.receptacle = entity();
    } else if (verb == "open" || verb == "close" || verb == "use") {
      a.verb = verb == "open" ? Verb::open : verb == "close" ? Verb::close : Verb::use;
      a.receptacle = entity();
    } else if (verb == "heat" || verb == "clean" || verb == "cool") {
      a.verb = verb == "heat" ? Verb::heat : verb == "clean" ? Verb::clean : Verb::cool;
      a.object = entity();
      keyword("with");
      a.receptacle = entity();
    } else {
      const auto& t = toks_[0];
      throw MalformedAction("unknown verb '" + std::string(verb) + "'", t.offset, t.text.size());
    }
    if (pos_ < toks_.size()) {
      const auto& t = toks_[pos_];
      throw MalformedAction("unexpected trailing '" + std::string(t.text) + "'", t.offset,
                            src_.size() - t.offset);
    }
    return a;
  }

 private:
  const Token& next(std::string_view what) {
    if (pos_ >= toks_.size())
      throw MalformedAction("expected " + std::string(what) + " at end of input", src_.size(), 0);
    return toks_[pos_++];
  }

  void keyword(std::string_view kw) {
    const auto& t = next("'" + std::string(kw) + "'");
    if (t.text != kw)
      throw MalformedAction("expected '" + std::string(kw) + "', got '" + std::string(t.text) + "'",
                            t.offset, t.text.size());
  }

  std::string entity() {
    const auto& name = next("an object or receptacle name");
    if (!is_word(name.text))
      throw MalformedAction("bad name '" + std::string(name.text) + "'", name.offset,
                            name.text.size());
    const auto& num = next("an instance number");
    if (!is_number(num.text))
      throw MalformedAction("bad instance number '" + std::string(num.text) + "'", num.offset,
                            num.text.size());
    return std::string(name.text) + " " + std::string(num.text);
  }

  std::string_view src_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

// ---------------------------------------------------------------------------

std::string class_of(std::string_view instance) {
  const auto sp = instance.rfind(' ');
  return std::string(sp == std::string_view::npos ? instance : instance.substr(0, sp));
}

int index_of(std::string_view instance) {
  const auto sp = instance.rfind(' ');
  if (sp == std::string_view::npos) return 0;
  int v = 0;
  const auto digits = instance.substr(sp + 1);
  std::from_chars(digits.data(), digits.data() + digits.size(), v);
  return v;
}

bool display_before(std::string_view a, std::string_view b) {
  const auto ca = class_of(a), cb = class_of(b);
  if (ca != cb) return ca < cb;
  return index_of(a) > index_of(b);
}

std::string render_instruction(const TaskSpec& t) {
  const auto& c = t.object_class;
  const auto& d = t.destination;
  switch (t.kind) {
    case TaskKind::pick: return "put a " + c + " in " + d + ".";
    case TaskKind::pick2: return "put two " + c + " in " + d + ".";
    case TaskKind::clean: return "put a clean " + c + " in " + d + ".";
    case TaskKind::heat: return "put a hot " + c + " in " + d + ".";
    case TaskKind::cool: return "put a cool " + c + " in " + d + ".";
    case TaskKind::examine: return "look at " + c + " under the desklamp.";
    default: return t.instruction;
  }
}

std::optional<TaskSpec> parse_instruction(std::string_view s) {
  s = text::trim(s);
  if (s.empty() || s.back() != '.') return std::nullopt;
  s.remove_suffix(1);
  const auto w = text::split(s, ' ');
  TaskSpec t;
  if (w.size() == 6 && w[0] == "look" && w[1] == "at" && w[3] == "under" && w[4] == "the" &&
      w[5] == "desklamp") {
    t.kind = TaskKind::examine;
    t.object_class = w[2];
  } else if (w.size() == 5 && w[0] == "put" && w[3] == "in") {
    if (w[1] != "a" && w[1] != "two") return std::nullopt;
    t.kind = w[1] == "two" ? TaskKind::pick2 : TaskKind::pick;
    t.object_class = w[2];
    t.destination = w[4];
  } else if (w.size() == 6 && w[0] == "put" && w[1] == "a" && w[4] == "in") {
    if (w[2] == "clean") t.kind = TaskKind::clean;
    else if (w[2] == "hot") t.kind = TaskKind::heat;
    else if (w[2] == "cool") t.kind = TaskKind::cool;
    else return std::nullopt;
    t.object_class = w[3];
    t.destination = w[5];
  } else {
    return std::nullopt;
  }
  t.instruction = render_instruction(t);
  return t;
}

Context make_context(std::vector<ReceptacleSpec> receptacles, std::vector<Placement> placement,
                     TaskSpec task, Variant variant, std::vector<std::string> targets,
                     std::uint64_t seed) {
  Context ctx;
  ctx.env_kind = EnvKind::household;
  ctx.variant = variant;
  ctx.layout_name = "custom";
  ctx.receptacles = std::move(receptacles);
  ctx.placement = std::move(placement);
  if (task.instruction.empty()) task.instruction = render_instruction(task);
  ctx.task = std::move(task);
  std::sort(targets.begin(), targets.end(),
            [](const std::string& a, const std::string& b) { return index_of(a) < index_of(b); });
  ctx.target_instances = std::move(targets);
  ctx.seed = seed;
  std::set<std::string> types;
  for (const auto& r : ctx.receptacles) types.insert(class_of(r.name));
  for (const auto& type : types)
    if (type != "desklamp") ctx.destinations.push_back(type);
  for (const auto& cls : present_classes(ctx))
    ctx.class_kinds[cls] = {kHouseholdKinds.begin(), kHouseholdKinds.end()};
  return ctx;
}

Context generate_context(std::uint64_t seed, const LayoutPool& pool, Variant variant) {
  if (pool.layouts.empty()) throw UnsatisfiableTask("layout pool is empty");
  Rng rng(derive_seed(seed, 0x686f757365ULL));

  for (int attempt = 0; attempt < 64; ++attempt) {
    const Layout& layout = rng.pick(pool.layouts);
    Context ctx;
    ctx.env_kind = EnvKind::household;
    ctx.variant = variant;
    ctx.layout_name = layout.name;
    ctx.seed = seed;
    ctx.destinations = layout.destinations;

    for (const auto& rt : layout.receptacles)
      for (int i = 1; i <= rt.count; ++i)
        ctx.receptacles.push_back({rt.type + " " + std::to_string(i), rt.openable, !rt.closed});

    for (const auto& cls : layout.classes) {
      ctx.class_kinds[cls.name] = cls.kinds;
      std::vector<std::string> hosts;
      for (const auto& r : ctx.receptacles)
        if (std::find(cls.hosts.begin(), cls.hosts.end(), class_of(r.name)) != cls.hosts.end())
          hosts.push_back(r.name);
      const int n = rng.between(cls.min_count, cls.max_count);
      for (int i = 1; i <= n; ++i)
        ctx.placement.push_back({cls.name + " " + std::to_string(i), rng.pick(hosts)});
    }
    rng.shuffle(ctx.placement);

    const auto cand = sample_candidate(task_candidates(ctx), rng);
    if (!cand) continue;
    ctx.task = make_task(*cand);
    if (variant == Variant::ambiguous) ctx.target_instances = sample_targets(ctx.task, ctx, rng);

    if (check_household_success(initial_state(ctx), ctx)) continue;
    return ctx;
  }
  throw UnsatisfiableTask("no satisfiable task found for seed " + std::to_string(seed));
}

// ---------------------------------------------------------------------------

HouseholdAction parse_household_action(std::string_view text) {
  return ActionParser(text::trim(text)).parse();
}

HouseholdState initial_state(const Context& ctx) {
  HouseholdState s;
  for (const auto& r : ctx.receptacles) s.receptacles[r.name] = Receptacle{{}, r.openable, r.open};
  for (const auto& p : ctx.placement) {
    auto it = s.receptacles.find(p.receptacle);
    if (it == s.receptacles.end())
      throw FormatError("placement of '" + p.instance + "' names unknown receptacle '" +
                        p.receptacle + "'");
    it->second.contents.push_back(p.instance);
    s.status[p.instance] = ObjectStatus{};
  }
  s.task = ctx.task;
  return s;
}

std::string initial_observation(const HouseholdState& state) {
  std::vector<std::string> names;
  for (const auto& [name, r] : state.receptacles) names.push_back(name);
  names = sorted_for_display(std::move(names));
  return "You are in the middle of a room. Looking quickly around you, you see " +
         text::article_list(names) + ". Your task is to: " + state.task.instruction;
}

ApplyResult apply_household(const HouseholdState& state, const HouseholdAction& a,
                            const Context& /*ctx*/) {
  ApplyResult out{state, std::string(kNothingHappens)};
  auto& s = out.state;
  const auto rit = s.receptacles.find(a.receptacle);
  if (rit == s.receptacles.end()) return out;
  auto& rec = rit->second;
  const std::string& name = rit->first;
  const bool here = s.agent_at == name;
  const std::string type = class_of(name);

  switch (a.verb) {
    case Verb::go:
      s.agent_at = name;
      out.text = render_at(name, rec);
      break;

    case Verb::take: {
      auto it = std::find(rec.contents.begin(), rec.contents.end(), a.object);
      if (!here || rec.closed() || s.inventory || it == rec.contents.end()) return {state, out.text};
      rec.contents.erase(it);
      s.inventory = a.object;
      out.text = "You pick up the " + a.object + " from the " + name + ".";
      break;
    }

    case Verb::put:
      if (!here || rec.closed() || s.inventory != a.object || type == "desklamp")
        return {state, out.text};
      rec.contents.push_back(a.object);
      s.inventory.reset();
      out.text = "You put the " + a.object + " in/on the " + name + ".";
      break;

    case Verb::open:
      if (!here || !rec.closed()) return {state, out.text};
      rec.open = true;
      out.text = "You open the " + name + ". The " + name + " is open. In it, you see " +
                 render_contents(rec) + ".";
      break;

    case Verb::close:
      if (!here || !rec.openable || !rec.open) return {state, out.text};
      rec.open = false;
      out.text = "You close the " + name + ".";
      break;

    case Verb::heat:
    case Verb::clean:
    case Verb::cool: {
      const TaskKind kind = a.verb == Verb::heat    ? TaskKind::heat
                            : a.verb == Verb::clean ? TaskKind::clean
                                                    : TaskKind::cool;
      if (!here || type != appliance_for(kind) || s.inventory != a.object) return {state, out.text};
      auto& st = s.status[a.object];
      if (kind == TaskKind::heat) st.heated = true;
      if (kind == TaskKind::clean) st.cleaned = true;
      if (kind == TaskKind::cool) st.cooled = true;
      out.text = "You " + verb_name(a.verb) + " the " + a.object + " using the " + name + ".";
      break;
    }

    case Verb::use:
      if (!here || type != "desklamp") return {state, out.text};
      if (s.inventory) s.status[*s.inventory].examined = true;
      out.text = "You turn on the " + name + ".";
      break;
  }
  return out;
}

bool targets_apply(const HouseholdState& state, const Context& ctx) {
  return ctx.variant == Variant::ambiguous && state.tasks_completed == 0 &&
         !ctx.target_instances.empty();
}

std::vector<std::string> eligible_instances(const HouseholdState& state, const Context& ctx) {
  if (targets_apply(state, ctx)) return ctx.target_instances;
  return instances_of_class(ctx, state.task.object_class);
}

bool check_household_success(const HouseholdState& state, const Context& ctx) {
  const auto& task = state.task;
  const auto eligible = eligible_instances(state, ctx);
  const bool all_required = targets_apply(state, ctx);

  if (task.kind == TaskKind::examine) {
    if (!state.inventory) return false;
    const auto& held = *state.inventory;
    return std::find(eligible.begin(), eligible.end(), held) != eligible.end() &&
           status_of(state, held).examined;
  }

  // receptacle -> delivered eligible instances
  std::map<std::string, int> delivered;
  int delivered_total = 0;
  for (const auto& inst : eligible) {
    const auto* loc = location_of(state, inst);
    const bool ok = loc && class_of(*loc) == task.destination && flag_ok(task.kind, status_of(state, inst));
    if (ok) {
      ++delivered[*loc];
      ++delivered_total;
    } else if (all_required) {
      return false;
    }
  }

  if (task.kind == TaskKind::pick2) {
    if (all_required) return delivered.size() == 1;
    for (const auto& [rec, n] : delivered)
      if (n >= 2) return true;
    return false;
  }
  return delivered_total > 0;
}

TaskSpec next_multiround_task(const HouseholdState& state, const Context& ctx, Rng& rng) {
  std::vector<Candidate> open;
  for (const auto& c : task_candidates(ctx)) {
    HouseholdState probe = state;
    probe.task = make_task(c);
    probe.tasks_completed = std::max(1, state.tasks_completed);
    if (!check_household_success(probe, ctx)) open.push_back(c);
  }
  const auto chosen = sample_candidate(open, rng);
  if (!chosen) throw UnsatisfiableTask("no open task left in the room");
  return make_task(*chosen);
}

std::vector<HouseholdAction> action_space(const HouseholdState& s) {
  std::vector<HouseholdAction> out;
  for (const auto& [name, r] : s.receptacles) out.push_back({Verb::go, "", name});
  const auto here = s.receptacles.find(s.agent_at);
  if (here == s.receptacles.end()) return out;
  const auto& name = here->first;
  const auto& rec = here->second;
  const auto type = class_of(name);
  if (rec.closed()) out.push_back({Verb::open, "", name});
  if (rec.openable && rec.open) out.push_back({Verb::close, "", name});
  if (!rec.closed() && !s.inventory)
    for (const auto& obj : sorted_for_display(rec.contents)) out.push_back({Verb::take, obj, name});
  if (s.inventory) {
    if (!rec.closed() && type != "desklamp") out.push_back({Verb::put, *s.inventory, name});
    if (type == "microwave") out.push_back({Verb::heat, *s.inventory, name});
    if (type == "sinkbasin") out.push_back({Verb::clean, *s.inventory, name});
    if (type == "fridge") out.push_back({Verb::cool, *s.inventory, name});
  }
  if (type == "desklamp") out.push_back({Verb::use, "", name});
  return out;
}

// ---------------------------------------------------------------------------

WorldState HouseholdEnv::reset(const Context& ctx) const { return initial_state(ctx); }

std::string HouseholdEnv::initial_observation(const WorldState& state, const Context&) const {
  return household::initial_observation(std::get<HouseholdState>(state));
}

PhysicalAction HouseholdEnv::parse_physical(std::string_view text) const {
  return parse_household_action(text);
}

PhysicalOutcome HouseholdEnv::apply(const WorldState& state, const PhysicalAction& action,
                                    const Context& ctx) const {
  const auto* act = std::get_if<HouseholdAction>(&action);
  if (!act) throw MalformedAction("not a household action: " + render(action));
  auto r = apply_household(std::get<HouseholdState>(state), *act, ctx);
  if (!check_household_success(r.state, ctx)) return {std::move(r.state), std::move(r.text), 0.0, false};

  if (ctx.variant != Variant::multiround) return {std::move(r.state), std::move(r.text), 1.0, true};

  auto& s = r.state;
  ++s.tasks_completed;
  Rng rng(derive_seed(ctx.seed, 0x6e657874ULL + static_cast<std::uint64_t>(s.tasks_completed)));
  s.task = next_multiround_task(s, ctx, rng);
  r.text += " ";
  r.text += kNextTaskPrefix;
  r.text += s.task.instruction;
  return {std::move(r.state), std::move(r.text), 1.0, false};
}

bool HouseholdEnv::finished(const WorldState& state, const Context& ctx) const {
  if (ctx.variant == Variant::multiround) return false;
  return check_household_success(std::get<HouseholdState>(state), ctx);
}

}  // namespace inquire::household
