#include "inquire/policies.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <regex>
#include <set>

#include "inquire/belief.hpp"
#include "inquire/errors.hpp"
#include "inquire/household.hpp"
#include "inquire/random.hpp"
#include "inquire/tabletop.hpp"
#include "inquire/text.hpp"

namespace inquire {

using household::class_of;
using household::index_of;

namespace {

bool needs_flag(TaskKind k) {
  return k == TaskKind::heat || k == TaskKind::clean || k == TaskKind::cool;
}

bool has_flag(const ObjectStatus& s, TaskKind k) {
  switch (k) {
    case TaskKind::heat: return s.heated;
    case TaskKind::clean: return s.cleaned;
    case TaskKind::cool: return s.cooled;
    case TaskKind::examine: return s.examined;
    default: return true;
  }
}

Verb process_verb(TaskKind k) {
  return k == TaskKind::heat ? Verb::heat : k == TaskKind::clean ? Verb::clean : Verb::cool;
}

bool by_index(const std::string& a, const std::string& b) {
  const auto ca = class_of(a), cb = class_of(b);
  if (ca != cb) return ca < cb;
  return index_of(a) < index_of(b);
}

template <typename T>
bool contains(const std::vector<T>& v, const T& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

std::string cardinal_word(std::size_t n) {
  static const std::array<const char*, 11> words = {"zero", "one", "two",   "three", "four", "five",
                                                    "six",  "seven", "eight", "nine", "ten"};
  return n < words.size() ? words[n] : std::to_string(n);
}

// A decision is the turns that lead to one action: zero or more thoughts,
// then an ask or a physical action. Policies are stateless, so a decision
// is recomputed after each thought and the next unsent turn is emitted.
using Turns = std::vector<AugmentedAction>;

std::size_t trailing_thoughts(std::span<const StepRecord> steps) {
  std::size_t n = 0;
  for (auto it = steps.rbegin(); it != steps.rend() && std::holds_alternative<Think>(it->action); ++it) ++n;
  return n;
}

std::optional<std::string> emit(const Turns& turns, const PolicyInput& in) {
  if (turns.empty()) return std::nullopt;
  const auto k = std::min(trailing_thoughts(in.steps), turns.size() - 1);
  return render(turns[k]);
}

Physical phys(HouseholdAction a) { return Physical{std::move(a)}; }
HouseholdAction go(const std::string& r) { return {Verb::go, "", r}; }

}  // namespace

std::string remaining_phrase(const TaskSpec& task) {
  const std::string put = "put it in " + task.destination;
  switch (task.kind) {
    case TaskKind::pick: return put;
    case TaskKind::pick2: return "put them in " + task.destination;
    case TaskKind::heat: return "heat it with microwave, then " + put;
    case TaskKind::clean: return "clean it with sinkbasin, then " + put;
    case TaskKind::cool: return "cool it with fridge, then " + put;
    case TaskKind::examine: return "use the desklamp";
    default: return "finish the task";
  }
}

// ---------------------------------------------------------------------------
// Expert, household

namespace {

struct HouseholdView {
  const HouseholdState& s;
  const Context& ctx;

  bool closed(const std::string& r) const { return s.receptacles.at(r).closed(); }
  int go_cost(const std::string& r) const { return s.agent_at == r ? 0 : 1; }
  int reach_cost(const std::string& r) const { return go_cost(r) + (closed(r) ? 1 : 0); }

  std::optional<std::string> where(const std::string& inst) const {
    for (const auto& [name, r] : s.receptacles)
      if (contains(r.contents, inst)) return name;
    return std::nullopt;
  }

  ObjectStatus status(const std::string& inst) const {
    auto it = s.status.find(inst);
    return it == s.status.end() ? ObjectStatus{} : it->second;
  }

  std::vector<std::string> of_type(std::string_view type) const {
    std::vector<std::string> out;
    for (const auto& [name, r] : s.receptacles)
      if (class_of(name) == type) out.push_back(name);
    std::sort(out.begin(), out.end(), by_index);
    return out;
  }

  // Cheapest receptacle in `names` by `cost`, ties to the lowest index.
  template <typename Cost>
  std::optional<std::string> cheapest(const std::vector<std::string>& names, Cost cost) const {
    std::optional<std::string> best;
    int best_cost = std::numeric_limits<int>::max();
    for (const auto& n : names) {
      const int c = cost(n);
      if (c < best_cost) {
        best = n;
        best_cost = c;
      }
    }
    return best;
  }

  // go, then open if needed; nullopt once the agent stands at an open `r`.
  std::optional<HouseholdAction> reach(const std::string& r) const {
    if (s.agent_at != r) return go(r);
    if (closed(r)) return HouseholdAction{Verb::open, "", r};
    return std::nullopt;
  }

  HouseholdAction put_down() const {
    const auto& h = *s.inventory;
    const auto here = s.receptacles.find(s.agent_at);
    if (here != s.receptacles.end() && !here->second.closed() && class_of(here->first) != "desklamp")
      return {Verb::put, h, here->first};
    std::vector<std::string> spots;
    for (const auto& [name, r] : s.receptacles)
      if (class_of(name) != "desklamp") spots.push_back(name);
    std::sort(spots.begin(), spots.end(), by_index);
    const auto spot = cheapest(spots, [&](const std::string& r) { return reach_cost(r); });
    if (!spot) throw UnsatisfiableTask("nowhere to put down " + h);
    if (auto step = reach(*spot)) return *step;
    return {Verb::put, h, *spot};
  }
};

}  // namespace

std::optional<HouseholdAction> expert_household_next(const HouseholdState& s, const Context& ctx) {
  if (household::check_household_success(s, ctx)) return std::nullopt;
  const HouseholdView v{s, ctx};
  const auto& task = s.task;
  auto eligible = household::eligible_instances(s, ctx);
  std::sort(eligible.begin(), eligible.end(), by_index);

  if (task.kind == TaskKind::examine) {
    const auto lamps = v.of_type("desklamp");
    const auto lamp = v.cheapest(lamps, [&](const std::string& r) { return v.go_cost(r); });
    if (!lamp) throw UnsatisfiableTask("no desklamp in the room");
    if (s.inventory) {
      if (!contains(eligible, *s.inventory)) return v.put_down();
      if (s.agent_at != *lamp) return go(*lamp);
      return HouseholdAction{Verb::use, "", *lamp};
    }
    std::optional<std::string> best;
    int best_cost = std::numeric_limits<int>::max();
    for (const auto& inst : eligible) {
      const auto r = v.where(inst);
      if (!r) continue;
      const int c = v.reach_cost(*r) + 1 + (v.status(inst).examined ? 0 : 2);
      if (c < best_cost) {
        best = inst;
        best_cost = c;
      }
    }
    if (!best) throw UnsatisfiableTask("no instance of " + task.object_class + " to examine");
    const auto r = *v.where(*best);
    if (auto step = v.reach(r)) return *step;
    return HouseholdAction{Verb::take, *best, r};
  }

  const auto dests = v.of_type(task.destination);
  if (dests.empty()) throw UnsatisfiableTask("no " + task.destination + " in the room");
  const auto delivered_in = [&](const std::string& inst, const std::string& r) {
    const auto at = v.where(inst);
    return at && *at == r && has_flag(v.status(inst), task.kind);
  };

  std::string dest;
  if (task.kind == TaskKind::pick2) {
    // Collect into the receptacle that already holds the most eligible
    // instances. Distance only breaks ties among empty ones; otherwise the
    // choice would flip as the agent walks between two half-filled spots.
    int best_n = -1, best_cost = 0;
    for (const auto& r : dests) {
      int n = 0;
      for (const auto& inst : eligible) n += delivered_in(inst, r) ? 1 : 0;
      const int c = n > 0 ? 0 : v.reach_cost(r);
      if (n > best_n || (n == best_n && c < best_cost)) {
        dest = r;
        best_n = n;
        best_cost = c;
      }
    }
  } else {
    dest = *v.cheapest(dests, [&](const std::string& r) { return v.reach_cost(r); });
  }

  const auto delivered = [&](const std::string& inst) {
    if (task.kind == TaskKind::pick2) return delivered_in(inst, dest);
    const auto at = v.where(inst);
    return at && class_of(*at) == task.destination && has_flag(v.status(inst), task.kind);
  };

  if (s.inventory) {
    const auto& h = *s.inventory;
    if (!contains(eligible, h)) return v.put_down();
    if (needs_flag(task.kind) && !has_flag(v.status(h), task.kind)) {
      const auto apps = v.of_type(household::appliance_for(task.kind));
      const auto app = v.cheapest(apps, [&](const std::string& r) { return v.go_cost(r); });
      if (!app) throw UnsatisfiableTask("no appliance for " + std::string(to_string(task.kind)));
      if (s.agent_at != *app) return go(*app);
      return HouseholdAction{process_verb(task.kind), h, *app};
    }
    if (auto step = v.reach(dest)) return *step;
    return HouseholdAction{Verb::put, h, dest};
  }

  std::optional<std::string> best;
  int best_cost = std::numeric_limits<int>::max();
  for (const auto& inst : eligible) {
    if (delivered(inst)) continue;
    const auto r = v.where(inst);
    if (!r) continue;
    const int c = v.reach_cost(*r) + 1 +
                  (needs_flag(task.kind) && !has_flag(v.status(inst), task.kind) ? 2 : 0);
    if (c < best_cost) {
      best = inst;
      best_cost = c;
    }
  }
  if (!best) throw UnsatisfiableTask("nothing left to deliver for " + task.instruction);
  const auto r = *v.where(*best);
  if (auto step = v.reach(r)) return *step;
  return HouseholdAction{Verb::take, *best, r};
}

std::vector<HouseholdAction> expert_household_plan(HouseholdState state, const Context& ctx,
                                                   int max_steps) {
  std::vector<HouseholdAction> plan;
  for (int i = 0; i < max_steps; ++i) {
    const auto next = expert_household_next(state, ctx);
    if (!next) return plan;
    plan.push_back(*next);
    state = household::apply_household(state, *next, ctx).state;
  }
  throw UnsatisfiableTask("expert plan did not converge");
}

// ---------------------------------------------------------------------------
// Expert, tabletop

namespace {

bool near(const TableObject& o, Pose p) { return tabletop::distance(o.pose, p) <= tabletop::kContainRadius; }

// First grid point at least the sampling separation away from every object.
Pose free_spot(const std::vector<TableObject>& objects) {
  for (double x = 0.30; x <= 0.7001; x += 0.05)
    for (double y = -0.45; y <= 0.4501; y += 0.05) {
      const Pose p{x, y};
      if (std::all_of(objects.begin(), objects.end(), [&](const TableObject& o) {
            return tabletop::distance(o.pose, p) >= tabletop::kSeparation;
          }))
        return p;
    }
  return {tabletop::kXMin, tabletop::kYMin};
}

}  // namespace

std::optional<MoveCmd> expert_tabletop_next(const TabletopState& state, const Context& ctx) {
  if (tabletop::check_tabletop_success(state, ctx)) return std::nullopt;
  const auto& objs = state.objects;
  const auto kind = ctx.task.kind;

  if (kind == TaskKind::tabletop1 || kind == TaskKind::tabletop3) {
    const auto bowl = std::find_if(objs.begin(), objs.end(), [](const TableObject& o) {
      return o.kind == ObjectKind::bowl && o.color == "green";
    });
    if (bowl == objs.end() || !ctx.target_block) throw UnsatisfiableTask("no green bowl or target");
    const auto& target = objs[*ctx.target_block];
    if (!near(target, bowl->pose)) return MoveCmd{target.pose, bowl->pose};
    for (std::size_t i = 0; i < objs.size(); ++i) {
      const auto& o = objs[i];
      if (i != *ctx.target_block && o.kind == ObjectKind::block && o.color == "red" && near(o, bowl->pose))
        return MoveCmd{o.pose, free_spot(objs)};
    }
  }

  if (kind == TaskKind::tabletop2 || kind == TaskKind::tabletop3) {
    std::vector<const TableObject*> bases;
    for (const auto& o : objs)
      if (o.kind == ObjectKind::base) bases.push_back(&o);
    std::sort(bases.begin(), bases.end(), [](auto* a, auto* b) { return a->index < b->index; });
    const auto on_right_base = [&](const TableObject& b) {
      return std::any_of(bases.begin(), bases.end(), [&](const TableObject* base) {
        return near(b, base->pose) && ctx.color_map.at(base->index) == b.color;
      });
    };
    for (const auto* base : bases) {
      const auto& want = ctx.color_map.at(base->index);
      bool covered = false;
      for (const auto& o : objs)
        if (o.kind == ObjectKind::block && near(o, base->pose)) {
          if (o.color == want) covered = true;
          else return MoveCmd{o.pose, free_spot(objs)};  // wrong block in the way
        }
      if (covered) continue;
      for (const auto& o : objs)
        if (o.kind == ObjectKind::block && o.color == want && !on_right_base(o))
          return MoveCmd{o.pose, base->pose};
      throw UnsatisfiableTask("no free " + want + " block");
    }
  }
  throw UnsatisfiableTask("tabletop task has no remaining step");
}

// ---------------------------------------------------------------------------
// Expert policy

namespace {

std::size_t segment_start(std::span<const StepRecord> steps) {
  for (std::size_t i = steps.size(); i > 0; --i)
    if (steps[i - 1].observation.text.find(household::kNextTaskPrefix) != std::string::npos) return i;
  return 0;
}

}  // namespace

std::optional<AugmentedAction> ExpertPolicy::decide(const PolicyInput& in) const {
  if (!in.context || !in.state) throw Error("the expert policy needs the hidden context");
  const auto& ctx = *in.context;

  if (const auto* ts = std::get_if<TabletopState>(in.state)) {
    const auto m = expert_tabletop_next(*ts, ctx);
    if (!m) return std::nullopt;
    return Physical{*m};
  }

  const auto& hs = std::get<HouseholdState>(*in.state);
  if (with_questions_) {
    // Teacher turns for the current task, in order; already-sent ones are
    // matched against the transcript so injected noise never skips one.
    const auto start = segment_start(in.steps);
    const auto& c = hs.task.object_class;
    const auto memory = query_memory(in.initial_observation, in.steps.first(start), c);
    Turns teacher;
    teacher.push_back(Think{"To solve the task, I need to find and take a " + c + ", then " +
                            remaining_phrase(hs.task) + ". First I need to find the locations of " +
                            c + ". ### query: " + c + " > " + memory.render()});
    if (memory.never_seen()) {
      teacher.push_back(Think{"I cannot locate " + c + ", I need to ask the owner of this room."});
      teacher.push_back(Ask{"Where is the " + c + "?"});
    }
    if (household::targets_apply(hs, ctx)) {
      std::size_t n = 0;
      for (const auto& p : ctx.placement) n += class_of(p.instance) == c ? 1 : 0;
      if (n > 1) {
        teacher.push_back(Think{"There are multiple " + c + ". I need to ask which " + c + " should be taken."});
        teacher.push_back(Ask{"Which " + c + " do you prefer?"});
      }
    }
    std::size_t sent = 0;
    for (std::size_t i = start; i < in.steps.size() && sent < teacher.size(); ++i)
      if (in.steps[i].action == teacher[sent]) ++sent;
    if (sent < teacher.size()) return teacher[sent];
  }
  const auto a = expert_household_next(hs, ctx);
  if (!a) return std::nullopt;
  return phys(*a);
}

std::optional<std::string> ExpertPolicy::act(const PolicyInput& in) {
  const auto a = decide(in);
  if (!a) return std::nullopt;
  return render(*a);
}

// ---------------------------------------------------------------------------
// Blind household script, shared by the asking and the searching policy

namespace {

struct ScriptMode {
  bool ask = true;
  std::vector<std::string> search_order;  // receptacles to enumerate, in order
  std::uint64_t seed = 0;                 // guesses of the searching policy
};

class HouseholdScript {
 public:
  HouseholdScript(const PolicyInput& in, ScriptMode mode)
      : in_(in), mode_(std::move(mode)), b_(replay_household(in.initial_observation, in.steps)) {
    const auto& t = b_.task;
    c_ = t.object_class;
    rest_ = remaining_phrase(t);
    for (std::size_t i = b_.task_start; i < in.steps.size(); ++i)
      if (!std::holds_alternative<Think>(in.steps[i].action)) fresh_ = false;
  }

  Turns decide() {
    auto turns = core();
    if (fresh_ && in_.variant == Variant::multiround && mode_.ask && !turns.empty()) {
      const auto memory = query_memory(in_.initial_observation, in_.steps, c_);
      turns.insert(turns.begin(), Think{"To solve the task, I need to find and take a " + c_ +
                                        ", then " + rest_ + ". First I need to find the locations of " +
                                        c_ + ". ### query: " + c_ + " > " + memory.render()});
    }
    return turns;
  }

 private:
  bool last_is(Verb v) const {
    if (!b_.last_action) return false;
    const auto* p = std::get_if<Physical>(&*b_.last_action);
    if (!p) return false;
    const auto* a = std::get_if<HouseholdAction>(&p->action);
    return a && a->verb == v;
  }

  std::optional<QueryKind> last_ask() const {
    if (!b_.last_action) return std::nullopt;
    const auto* q = std::get_if<Ask>(&*b_.last_action);
    if (!q) return std::nullopt;
    return classify_question(q->text).kind;
  }

  bool wanted(const std::string& inst) const {
    if (class_of(inst) != c_) return false;
    return !b_.preferred || b_.task_number > 0 || contains(*b_.preferred, inst);
  }

  bool guessing() const {
    return !mode_.ask && in_.variant == Variant::ambiguous && b_.task_number == 0;
  }

  bool known_closed(const std::string& r) const { return b_.closed.count(r) > 0; }

  std::vector<std::string> of_type(std::string_view type) const {
    std::vector<std::string> out;
    for (const auto& r : b_.receptacles)
      if (class_of(r) == type) out.push_back(r);
    std::sort(out.begin(), out.end(), by_index);
    return out;
  }

  std::string dest() const {
    const auto dests = of_type(b_.task.destination);
    if (dests.empty()) return {};
    const auto score = [&](const std::string& r) {
      int s = 0;
      if (b_.task.kind == TaskKind::pick2) {
        // Where wanted instances already sit wins outright, independent of
        // where the agent stands, so the choice cannot flip while walking.
        for (const auto& inst : b_.known_instances(c_))
          if (wanted(inst) && b_.location_of(inst) == r) s -= 8;
        if (s < 0) return s;
      }
      if (b_.at == r) s -= 2;
      else if (b_.visited(r) && !known_closed(r)) s -= 1;
      return s;
    };
    return *std::min_element(dests.begin(), dests.end(), [&](const auto& a, const auto& b) {
      return score(a) < score(b);
    });
  }

  bool delivered(const std::string& inst) const {
    const auto at = b_.location_of(inst);
    if (!at || class_of(*at) != b_.task.destination) return false;
    if (b_.task.kind == TaskKind::pick2) return *at == dest();
    auto st = b_.status.find(inst);
    return has_flag(st == b_.status.end() ? ObjectStatus{} : st->second, b_.task.kind);
  }

  Turns put_down(const std::string& h) const {
    const bool here_ok = b_.at != "start" && !known_closed(b_.at) && class_of(b_.at) != "desklamp";
    if (here_ok) return {phys({Verb::put, h, b_.at})};
    for (const auto& r : mode_.search_order)
      if (b_.visited(r) && !known_closed(r)) return {phys(go(r))};
    return {phys(go(mode_.search_order.front()))};
  }

  Turns holding(const std::string& h) {
    if (!wanted(h)) return put_down(h);
    const auto& task = b_.task;
    const bool just_took = last_is(Verb::take);
    const auto took = Think{"Now I take a " + h + ". Next, I need to " + rest_ + "."};

    if (task.kind == TaskKind::examine) {
      const auto lamps = of_type("desklamp");
      if (lamps.empty()) return {};
      if (b_.at == lamps.front()) return {phys({Verb::use, "", lamps.front()})};
      if (just_took && mode_.ask) return {took, phys(go(lamps.front()))};
      return {phys(go(lamps.front()))};
    }

    auto st = b_.status.find(h);
    const bool flagged = st != b_.status.end() && has_flag(st->second, task.kind);
    if (needs_flag(task.kind) && !flagged) {
      const auto apps = of_type(household::appliance_for(task.kind));
      if (apps.empty()) return {};
      const auto& app = apps.front();
      if (b_.at == app) return {phys({process_verb(task.kind), h, app})};
      if (just_took && mode_.ask) return {took, phys(go(app))};
      return {phys(go(app))};
    }

    const auto d = dest();
    if (d.empty()) return {};
    if (b_.at == d) {
      if (known_closed(d)) return {phys({Verb::open, "", d})};
      return {phys({Verb::put, h, d})};
    }
    if (mode_.ask && just_took) return {took, phys(go(d))};
    if (mode_.ask && needs_flag(task.kind) && b_.last_action && !last_is(Verb::go)) {
      const auto* p = std::get_if<Physical>(&*b_.last_action);
      const auto* a = p ? std::get_if<HouseholdAction>(&p->action) : nullptr;
      if (a && a->verb == process_verb(task.kind))
        return {Think{"Now I " + verb_name(a->verb) + " " + h + ". Next, I need to put it in " +
                      task.destination + "."},
                phys(go(d))};
    }
    return {phys(go(d))};
  }

  std::vector<std::string> candidates() const {
    std::vector<std::string> out;
    for (const auto& inst : b_.known_instances(c_))
      if (wanted(inst) && !delivered(inst)) out.push_back(inst);
    return out;
  }

  std::string pick_candidate(const std::vector<std::string>& cands) const {
    const auto score = [&](const std::string& inst) {
      const auto r = *b_.location_of(inst);
      if (r == b_.at) return 0;
      auto it = b_.contents.find(r);
      if (it != b_.contents.end() && contains(it->second, inst) && !known_closed(r)) return 1;
      return 2;
    };
    return *std::min_element(cands.begin(), cands.end(),
                             [&](const auto& a, const auto& b) { return score(a) < score(b); });
  }

  Turns fetch(const std::string& inst) {
    const auto r = *b_.location_of(inst);
    if (b_.at == r) {
      if (known_closed(r)) return {phys({Verb::open, "", r})};
      const HouseholdAction take{Verb::take, inst, r};
      if (mode_.ask && (last_is(Verb::go) || last_is(Verb::open)))
        return {Think{"Now I find the " + inst + ". Next, I need to take it, then " + rest_ + "."},
                phys(take)};
      return {phys(take)};
    }
    const auto plan = "go to " + r + " and take the " + inst + ", then " + rest_ + ".";
    if (mode_.ask) {
      const auto asked = last_ask();
      if (asked == QueryKind::where_is) return {Think{"We can " + plan}, phys(go(r))};
      if (asked == QueryKind::which_preferred)
        return {Think{"Now I understand the task. I can " + plan}, phys(go(r))};
      if (fresh_ && in_.variant == Variant::multiround) return {Think{"I can " + plan}, phys(go(r))};
    }
    return {phys(go(r))};
  }

  std::string opening() const {
    const std::string take = b_.task.kind == TaskKind::pick2 ? "find and take two " : "find and take a ";
    return "To solve the task, I need to " + take + c_ + ", then " + rest_ + ".";
  }

  Turns search() {
    if (b_.at != "start" && known_closed(b_.at) && !b_.visited(b_.at))
      return {phys({Verb::open, "", b_.at})};
    for (const auto& r : mode_.search_order) {
      if (b_.visited(r)) continue;
      if (!mode_.ask && fresh_ && b_.task_number == 0 && in_.steps.empty())
        return {Think{opening() + " First I need to find a " + c_ + ". I can check one by one."},
                phys(go(r))};
      return {phys(go(r))};
    }
    return {};
  }

  Turns core() {
    if (b_.holding) return holding(*b_.holding);

    if (guessing()) {
      // Without asking, the target among several instances is a guess: look
      // everywhere, pick one uniformly, deliver it once.
      for (const auto& inst : b_.known_instances(c_))
        if (delivered(inst)) return {};
      auto looked = search();
      if (!looked.empty()) return looked;
      auto all = b_.known_instances(c_);
      if (all.empty()) return {};
      std::sort(all.begin(), all.end(), by_index);
      Rng rng(derive_seed(mode_.seed, 0x6775657373ULL));
      return fetch(rng.pick(all));
    }

    if (mode_.ask && in_.variant == Variant::ambiguous && b_.task_number == 0 &&
        !b_.preference_asked) {
      std::size_t told = 0;
      for (const auto& [inst, t] : b_.told) told += class_of(inst) == c_ ? 1 : 0;
      if (told > 1)
        return {Think{"There are multiple " + c_ + ". I need to ask which " + c_ + " should be taken."},
                Ask{"Which " + c_ + " do you prefer?"}};
    }

    const auto cands = candidates();
    if (!cands.empty()) return fetch(pick_candidate(cands));

    if (mode_.ask) {
      const auto asked = b_.where_asked.count(c_) ? b_.where_asked.at(c_) : 0;
      if (asked == 0) {
        if (in_.variant == Variant::multiround)
          return {Think{"I cannot locate " + c_ + ", I need to ask the owner of this room."},
                  Ask{"Where is the " + c_ + "?"}};
        return {Think{opening() + " But where is the " + c_ + "? Let me ask that person."},
                Ask{"Where is the " + c_ + "?"}};
      }
      if (asked == 1)
        return {Think{"I still do not know where the " + c_ + " is. Let me ask again."},
                Ask{"Where can I find the " + c_ + "?"}};
    }
    return search();
  }

  const PolicyInput& in_;
  ScriptMode mode_;
  HouseholdBelief b_;
  std::string c_;
  std::string rest_;
  bool fresh_ = true;
};

std::vector<std::string> natural_order(std::vector<std::string> names) {
  names.erase(std::remove_if(names.begin(), names.end(),
                             [](const std::string& r) { return class_of(r) == "desklamp"; }),
              names.end());
  std::sort(names.begin(), names.end(), by_index);
  return names;
}

// ---------------------------------------------------------------------------
// Blind tabletop script

std::optional<TaskKind> tabletop_kind(std::string_view initial) {
  for (TaskKind k : {TaskKind::tabletop3, TaskKind::tabletop1, TaskKind::tabletop2}) {
    const auto instr = tabletop::instruction_for(k);
    if (initial.size() >= instr.size() && initial.substr(initial.size() - instr.size()) == instr)
      return k;
  }
  return std::nullopt;
}

std::string move_text(Pose from, Pose to) {
  return "move_to(" + text::coord(from.x) + ", " + text::coord(from.y) + ", " + text::coord(to.x) +
         ", " + text::coord(to.y) + ")";
}

AugmentedAction move_action(Pose from, Pose to) {
  return Physical{tabletop::parse_move(move_text(from, to))};
}

class TabletopScript {
 public:
  TabletopScript(const PolicyInput& in, bool ask) : in_(in), ask_(ask) {
    kind_ = tabletop_kind(in.initial_observation);
    initial_ = tabletop::parse_scene(in.initial_observation);
    scene_ = initial_;
    static const std::regex color_re(R"(You should put the ([a-z]+) block on the # (\d+) base\.)");
    for (const auto& s : in.steps) {
      if (std::holds_alternative<Physical>(s.action)) {
        ++moves_;
        auto parsed = tabletop::parse_scene(s.observation.text);
        if (!parsed.empty()) scene_ = std::move(parsed);
      } else if (const auto* q = std::get_if<Ask>(&s.action)) {
        if (s.observation.kind != ObsKind::answer) continue;
        const auto query = classify_question(q->text);
        std::smatch m;
        if (query.kind == QueryKind::relative_target) relative_ = s.observation.text;
        else if (query.kind == QueryKind::color_for_base &&
                 std::regex_search(s.observation.text, m, color_re))
          colors_[std::stoi(m[2].str())] = m[1].str();
      }
    }
  }

  Turns decide() {
    if (!kind_) return {};
    const bool t1 = *kind_ != TaskKind::tabletop2;
    const bool t2 = *kind_ != TaskKind::tabletop1;
    if (t1 && !task1_done()) return ask_ ? task1() : guess_task1();
    if (t2) return ask_ ? task2() : guess_task2();
    return {};
  }

 private:
  std::vector<const TableObject*> of(const std::vector<TableObject>& scene, ObjectKind k,
                                     std::string_view color = {}) const {
    std::vector<const TableObject*> out;
    for (const auto& o : scene)
      if (o.kind == k && (color.empty() || o.color == color)) out.push_back(&o);
    return out;
  }

  std::optional<Pose> green() const {
    const auto bowls = of(scene_, ObjectKind::bowl, "green");
    if (bowls.empty()) return std::nullopt;
    return bowls.front()->pose;
  }

  bool task1_done() const {
    const auto g = green();
    if (!g) return true;
    for (const auto* r : of(scene_, ObjectKind::block, "red"))
      if (near(*r, *g)) return true;
    return false;
  }

  Turns task1() const {
    const auto g = *green();
    std::vector<TableObject> reds;
    for (const auto* r : of(initial_, ObjectKind::block, "red")) reds.push_back(*r);
    if (reds.empty()) return {};
    if (reds.size() == 1)
      return {Think{"I find one red block in the scene. I can move it to the green bowl."},
              move_action(reds[0].pose, g)};
    if (!relative_)
      return {Think{"I find " + cardinal_word(reds.size()) +
                    " red blocks in the scene. Let me ask which red block should I move."},
              Ask{"Which red block should I move?"}};
    std::size_t idx = 0;
    try {
      idx = tabletop::resolve_relative(reds, "red", *relative_);
    } catch (const Error&) {
      return {};
    }
    std::vector<double> ys;
    for (const auto& r : reds) ys.push_back(r.pose.y);
    std::sort(ys.begin(), ys.end());
    std::vector<std::string> sorted;
    for (double y : ys) sorted.push_back(text::coord(y));
    std::size_t rank = 1;
    for (double y : ys) {
      if (y == reds[idx].pose.y) break;
      ++rank;
    }
    const auto& p = reds[idx].pose;
    return {Think{"The second dimension refers to the horizontal axis, and the smaller the value is, "
                  "the closer to the left. I can sort the second dimensions of the " +
                  cardinal_word(reds.size()) + " red blocks: " + text::join(sorted, " < ") +
                  ". Therefore, the " + text::ordinal_word(rank) + " one from the left is " +
                  text::coord(p.y) + " and its coordinate is (" + text::coord(p.x) + ", " +
                  text::coord(p.y) + "). I can move it to the green bowl."},
            move_action(p, g)};
  }

  Turns guess_task1() const {
    if (moves_ > 0) return {};  // one attempt only
    const auto reds = of(initial_, ObjectKind::block, "red");
    const auto g = green();
    if (reds.empty() || !g) return {};
    Rng rng(derive_seed(in_.episode_seed, 0x6775657373ULL));
    return {Think{"Let me try to move a red block in the green bowl."},
            move_action(reds[rng.index(reds.size())]->pose, *g)};
  }

  std::vector<const TableObject*> bases() const {
    auto out = of(scene_, ObjectKind::base);
    std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->index < b->index; });
    return out;
  }

  std::vector<std::string> base_colors() const {
    std::set<std::string> colors;
    for (const auto* o : of(initial_, ObjectKind::block))
      if (o->color != "red") colors.insert(o->color);
    return {colors.begin(), colors.end()};
  }

  // A block of `color` that sits on no base, nearest to the left edge first.
  const TableObject* free_block(std::string_view color) const {
    const auto bs = bases();
    for (const auto* o : of(scene_, ObjectKind::block, color)) {
      const bool on_base = std::any_of(bs.begin(), bs.end(), [&](auto* b) { return near(*o, b->pose); });
      if (!on_base) return o;
    }
    return nullptr;
  }

  bool covered(const TableObject& base, std::string_view color) const {
    for (const auto* o : of(scene_, ObjectKind::block, color))
      if (near(*o, base.pose)) return true;
    return false;
  }

  Turns task2() const {
    const auto bs = bases();
    auto colors = colors_;
    std::vector<int> unknown;
    for (const auto* b : bs)
      if (!colors.count(b->index)) unknown.push_back(b->index);
    if (unknown.size() == 1) {
      auto left = base_colors();
      for (const auto& [k, c] : colors) left.erase(std::remove(left.begin(), left.end(), c), left.end());
      if (left.size() == 1) colors[unknown[0]] = left[0];
    }
    for (const auto* b : bs) {
      const auto k = b->index;
      const auto it = colors.find(k);
      if (it == colors.end()) {
        const auto ks = std::to_string(k);
        std::string lead = bs.size() > 1 && k == 1
                               ? "There are " + cardinal_word(bs.size()) +
                                     " bases. We need to put different colors on different bases. "
                               : "";
        return {Think{lead + "Let me ask which color should be put on the # " + ks + " base."},
                Ask{"Which color should be put on the # " + ks + " base?"}};
      }
      if (covered(*b, it->second)) continue;
      const auto* blk = free_block(it->second);
      if (!blk) return {};
      if (!colors_.count(k))
        return {Think{"I know the colors of the other bases, so the " + it->second +
                      " block goes on the # " + std::to_string(k) + " base."},
                move_action(blk->pose, b->pose)};
      return {move_action(blk->pose, b->pose)};
    }
    return {};
  }

  Turns guess_task2() const {
    const auto bs = bases();
    auto colors = base_colors();
    Rng rng(derive_seed(in_.episode_seed, 0x7065726dULL));
    rng.shuffle(colors);
    for (std::size_t i = 0; i < bs.size() && i < colors.size(); ++i) {
      if (covered(*bs[i], colors[i])) continue;
      const auto* blk = free_block(colors[i]);
      if (!blk) return {};
      return {move_action(blk->pose, bs[i]->pose)};
    }
    return {};  // every base holds its guess; no second attempt
  }

  const PolicyInput& in_;
  bool ask_;
  std::optional<TaskKind> kind_;
  std::vector<TableObject> initial_;
  std::vector<TableObject> scene_;
  std::optional<std::string> relative_;
  std::map<int, std::string> colors_;
  int moves_ = 0;
};

std::vector<std::string> receptacles_of(std::string_view initial) {
  return replay_household(initial, {}).receptacles;
}

}  // namespace

std::optional<std::string> ScriptedAbaPolicy::act(const PolicyInput& in) {
  if (in.env == EnvKind::tabletop) return emit(TabletopScript(in, true).decide(), in);
  ScriptMode mode;
  mode.search_order = natural_order(receptacles_of(in.initial_observation));
  if (mode.search_order.empty()) return std::nullopt;
  return emit(HouseholdScript(in, std::move(mode)).decide(), in);
}

std::optional<std::string> ScriptedBaselinePolicy::act(const PolicyInput& in) {
  if (in.env == EnvKind::tabletop) return emit(TabletopScript(in, false).decide(), in);
  ScriptMode mode;
  mode.ask = false;
  mode.seed = in.episode_seed;
  mode.search_order = natural_order(receptacles_of(in.initial_observation));
  if (mode.search_order.empty()) return std::nullopt;
  Rng rng(derive_seed(in.episode_seed, 0x6f72646572ULL));
  rng.shuffle(mode.search_order);
  return emit(HouseholdScript(in, std::move(mode)).decide(), in);
}

// ---------------------------------------------------------------------------

PolicyFactory policy_factory(std::string_view name, const RemoteConfig& remote,
                             const std::optional<PromptBundle>& bundle) {
  if (name == "expert") return [] { return std::make_unique<ExpertPolicy>(false); };
  if (name == "expert-ask") return [] { return std::make_unique<ExpertPolicy>(true); };
  if (name == "scripted-aba") return [] { return std::make_unique<ScriptedAbaPolicy>(); };
  if (name == "scripted-baseline") return [] { return std::make_unique<ScriptedBaselinePolicy>(); };
  if (name == "remote") {
    auto b = bundle ? *bundle : default_prompt_bundle(EnvKind::household);
    return [remote, b] { return std::make_unique<RemotePolicy>(remote, b); };
  }
  throw Error("unknown policy '" + std::string(name) +
              "' (expected expert, expert-ask, scripted-aba, scripted-baseline or remote)");
}

}  // namespace inquire
