#include "inquire/tabletop.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <regex>

#include "inquire/errors.hpp"
#include "inquire/oracle.hpp"
#include "inquire/random.hpp"
#include "inquire/text.hpp"

namespace inquire::tabletop {

namespace {

// Colors for bases and their blocks; red and green are reserved for Task 1.
const std::vector<std::string> kBaseColors = {"blue",   "orange", "yellow", "purple",
                                              "pink",   "brown",  "gray",   "cyan"};
const std::vector<std::string> kBowlColors = {"blue", "orange", "yellow", "purple", "pink",
                                              "brown", "gray",  "cyan",   "red"};

constexpr std::uint64_t kLayoutStream = 0x7461626c65ULL;
constexpr std::uint64_t kJitterStream = 0x6a69747465ULL;
constexpr std::uint64_t kShuffleStream = 0x7368756666ULL;

bool has_task1(TaskKind k) { return k == TaskKind::tabletop1 || k == TaskKind::tabletop3; }
bool has_task2(TaskKind k) { return k == TaskKind::tabletop2 || k == TaskKind::tabletop3; }

class Sampler {
 public:
  explicit Sampler(Rng& rng) : rng_(rng) {}

  bool clear_of(Pose p) const {
    return std::all_of(placed_.begin(), placed_.end(),
                       [&](const Pose& q) { return distance(p, q) >= kSeparation; });
  }

  // Rejection sampling; `accept` adds extra constraints.
  template <typename Accept>
  std::optional<Pose> sample(Accept accept) {
    for (int attempt = 0; attempt < 2000; ++attempt) {
      const Pose p{rng_.uniform(kXMin, kXMax), rng_.uniform(kYMin, kYMax)};
      if (clear_of(p) && accept(p)) {
        placed_.push_back(p);
        return p;
      }
    }
    return std::nullopt;
  }

  void reserve(Pose p) { placed_.push_back(p); }

 private:
  Rng& rng_;
  std::vector<Pose> placed_;
};

std::optional<Context> try_generate(TaskKind kind, Params params, std::uint64_t seed, Rng& rng) {
  Context ctx;
  ctx.env_kind = EnvKind::tabletop;
  ctx.variant = Variant::standard;
  ctx.layout_name = std::string(to_string(kind));
  ctx.seed = seed;
  ctx.task.kind = kind;
  ctx.task.object_class = "block";
  ctx.task.distractors = has_task1(kind) ? params.x : 0;
  ctx.task.bases = has_task2(kind) ? params.y : 0;
  ctx.task.instruction = instruction_for(kind);

  Sampler sampler(rng);
  auto& table = ctx.table;

  if (has_task2(kind)) {
    const int y = params.y;
    const double x0 = rng.uniform(kXMin, kXMax - kBaseSpacing * (y - 1));
    const double y0 = rng.uniform(kYMin, kYMax);
    for (int i = 0; i < y; ++i) {
      const Pose p{x0 + kBaseSpacing * i, y0};
      if (!sampler.clear_of(p)) return std::nullopt;
      sampler.reserve(p);
      table.push_back({ObjectKind::base, "", p, i + 1});
    }
    auto colors = kBaseColors;
    rng.shuffle(colors);
    for (int i = 0; i < y; ++i) ctx.color_map[i + 1] = colors[static_cast<std::size_t>(i)];
  }

  if (has_task1(kind)) {
    std::vector<double> red_ys;
    const auto rank_ok = [&](Pose p) {
      return std::all_of(red_ys.begin(), red_ys.end(),
                         [&](double v) { return std::abs(v - p.y) >= kRankGap; });
    };
    for (int i = 0; i < params.x; ++i) {
      const auto p = sampler.sample(rank_ok);
      if (!p) return std::nullopt;
      red_ys.push_back(p->y);
      table.push_back({ObjectKind::block, "red", *p, 0});
    }
    ctx.target_block = table.size() - static_cast<std::size_t>(params.x) +
                       rng.index(static_cast<std::size_t>(params.x));

    auto bowl_colors = kBowlColors;
    rng.shuffle(bowl_colors);
    bowl_colors.resize(static_cast<std::size_t>(rng.between(4, 7)));
    bowl_colors.insert(bowl_colors.begin(), "green");
    for (const auto& c : bowl_colors) {
      const auto p = sampler.sample([](Pose) { return true; });
      if (!p) return std::nullopt;
      table.push_back({ObjectKind::bowl, c, *p, 0});
    }
  }

  if (has_task2(kind)) {
    // One or two blocks per base color, so some colors repeat as in the
    // recorded scenes. Same-color blocks keep distinct y ranks.
    for (const auto& [base, color] : ctx.color_map) {
      const int n = rng.between(1, 2);
      std::vector<double> ys;
      for (int i = 0; i < n; ++i) {
        const auto p = sampler.sample([&](Pose q) {
          return std::all_of(ys.begin(), ys.end(),
                             [&](double v) { return std::abs(v - q.y) >= kRankGap; });
        });
        if (!p) return std::nullopt;
        ys.push_back(p->y);
        table.push_back({ObjectKind::block, color, *p, 0});
      }
    }
  }
  return ctx;
}

std::string kind_name(ObjectKind k) {
  switch (k) {
    case ObjectKind::block: return "block";
    case ObjectKind::bowl: return "bowl";
    case ObjectKind::base: return "base";
  }
  return "?";
}

bool near(const TableObject& o, Pose p) { return distance(o.pose, p) <= kContainRadius; }

// Same-color blocks ordered left to right (ascending y). Throws AmbiguousRank
// when two of them render to the same coordinate.
std::vector<std::size_t> left_to_right(const std::vector<TableObject>& objects,
                                       std::string_view color) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < objects.size(); ++i)
    if (objects[i].kind == ObjectKind::block && objects[i].color == color) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return objects[a].pose.y < objects[b].pose.y;
  });
  for (std::size_t i = 1; i < idx.size(); ++i)
    if (text::coord(objects[idx[i - 1]].pose.y) == text::coord(objects[idx[i]].pose.y))
      throw AmbiguousRank("two " + std::string(color) + " blocks share the y coordinate " +
                          text::coord(objects[idx[i]].pose.y));
  return idx;
}

}  // namespace

void validate(TaskKind kind, Params params) {
  if (kind != TaskKind::tabletop1 && kind != TaskKind::tabletop2 && kind != TaskKind::tabletop3)
    throw ParamOutOfRange("not a tabletop task: " + std::string(to_string(kind)));
  if (has_task1(kind) && (params.x < 1 || params.x > kMaxDistractors))
    throw ParamOutOfRange("x must lie in [1, " + std::to_string(kMaxDistractors) + "], got " +
                          std::to_string(params.x));
  if (has_task2(kind) && (params.y < 1 || params.y > kMaxBases))
    throw ParamOutOfRange("y must lie in [1, " + std::to_string(kMaxBases) + "], got " +
                          std::to_string(params.y));
}

Context generate_tabletop(TaskKind kind, Params params, std::uint64_t seed) {
  validate(kind, params);
  Rng rng(derive_seed(seed, kLayoutStream));
  for (int attempt = 0; attempt < 100; ++attempt)
    if (auto ctx = try_generate(kind, params, seed, rng)) return std::move(*ctx);
  throw UnsatisfiableTask("could not place tabletop objects for seed " + std::to_string(seed));
}

std::string instruction_for(TaskKind kind) {
  switch (kind) {
    case TaskKind::tabletop1: return "Move the red block into the green bowl.";
    case TaskKind::tabletop2: return "Place the blocks on the corresponding bases.";
    case TaskKind::tabletop3:
      return "Move the red block into the green bowl and place the blocks on the corresponding "
             "bases.";
    default: throw ParamOutOfRange("not a tabletop task");
  }
}

TabletopState initial_state(const Context& ctx) {
  TabletopState s;
  s.objects = ctx.table;
  if (has_task2(ctx.task.kind)) s.question_budget = ctx.task.bases - 1;
  return s;
}

bool in_bounds(Pose p) {
  return p.x >= kXMin && p.x <= kXMax && p.y >= kYMin && p.y <= kYMax;
}

double distance(Pose a, Pose b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::string render_object(const TableObject& o) {
  const std::string at = "(" + text::coord(o.pose.x) + ", " + text::coord(o.pose.y) + ").";
  if (o.kind == ObjectKind::base) return "The # " + std::to_string(o.index) + " base is in " + at;
  return "A " + o.color + " " + kind_name(o.kind) + " is in " + at;
}

std::string render_scene(const TabletopState& state, std::uint64_t seed) {
  std::vector<const TableObject*> bases, rest;
  for (const auto& o : state.objects) (o.kind == ObjectKind::base ? bases : rest).push_back(&o);
  std::sort(bases.begin(), bases.end(),
            [](const TableObject* a, const TableObject* b) { return a->index < b->index; });
  Rng rng(derive_seed(seed, kShuffleStream + state.tick));
  rng.shuffle(rest);
  std::vector<std::string> lines;
  for (const auto* o : bases) lines.push_back(render_object(*o));
  for (const auto* o : rest) lines.push_back(render_object(*o));
  return text::join(lines, " ");
}

std::string initial_observation(const TabletopState& state, const Context& ctx) {
  return render_scene(state, ctx.seed) + " You task is: " + ctx.task.instruction;
}

std::vector<TableObject> parse_scene(std::string_view scene) {
  static const std::regex item(
      R"((?:A ([a-z]+) (block|bowl)|The # (\d+) base) is in \((-?[0-9.]+), (-?[0-9.]+)\)\.)");
  std::vector<TableObject> out;
  const std::string s(scene);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), item); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    TableObject o;
    if (m[3].matched) {
      o.kind = ObjectKind::base;
      o.index = std::stoi(m[3].str());
    } else {
      o.kind = m[2].str() == "block" ? ObjectKind::block : ObjectKind::bowl;
      o.color = m[1].str();
    }
    o.pose = {std::stod(m[4].str()), std::stod(m[5].str())};
    out.push_back(std::move(o));
  }
  return out;
}

MoveCmd parse_move(std::string_view raw) {
  std::string s;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  constexpr std::string_view head = "move_to(";
  const auto fail = [] { throw MalformedAction(std::string(kNoFunctionCall), 0, 0); };
  if (s.size() < head.size() + 1 || s.compare(0, head.size(), head) != 0 || s.back() != ')') fail();

  std::array<double, 4> v{};
  const char* p = s.data() + head.size();
  const char* end = s.data() + s.size() - 1;
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto [next, ec] = std::from_chars(p, end, v[i]);
    if (ec != std::errc() || !std::isfinite(v[i])) fail();
    p = next;
    if (i + 1 < v.size()) {
      if (p == end || *p != ',') fail();
      ++p;
    }
  }
  if (p != end) fail();
  MoveCmd cmd{{v[0], v[1]}, {v[2], v[3]}};
  if (!in_bounds(cmd.pick) || !in_bounds(cmd.place)) fail();
  return cmd;
}

MoveResult apply_move(const TabletopState& state, const MoveCmd& cmd, const Context& ctx) {
  MoveResult out{state, {}};
  auto& s = out.state;
  ++s.tick;

  std::optional<std::size_t> best;
  double best_d = 0.0;
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    const auto& o = s.objects[i];
    if (o.kind != ObjectKind::block) continue;
    const double d = distance(o.pose, cmd.pick);
    if (d > kSnapRadius) continue;
    const bool better =
        !best || d < best_d ||
        (d == best_d && (o.pose.x < s.objects[*best].pose.x ||
                         (o.pose.x == s.objects[*best].pose.x && o.pose.y < s.objects[*best].pose.y)));
    if (better) {
      best = i;
      best_d = d;
    }
  }
  if (best) {
    Rng rng(derive_seed(ctx.seed, kJitterStream + s.tick));
    const double jx = rng.uniform(-kJitter, kJitter);
    const double jy = rng.uniform(-kJitter, kJitter);
    s.objects[*best].pose = {std::clamp(cmd.place.x + jx, kXMin, kXMax),
                             std::clamp(cmd.place.y + jy, kYMin, kYMax)};
  }
  out.text = render_scene(s, ctx.seed);
  return out;
}

bool check_tabletop_success(const TabletopState& state, const Context& ctx) {
  const auto kind = ctx.task.kind;
  if (has_task1(kind)) {
    if (!ctx.target_block) return false;
    const auto bowl = std::find_if(state.objects.begin(), state.objects.end(), [](const auto& o) {
      return o.kind == ObjectKind::bowl && o.color == "green";
    });
    if (bowl == state.objects.end()) return false;
    for (std::size_t i = 0; i < state.objects.size(); ++i) {
      const auto& o = state.objects[i];
      if (o.kind != ObjectKind::block || o.color != "red") continue;
      const bool inside = near(o, bowl->pose);
      if (i == *ctx.target_block ? !inside : inside) return false;
    }
  }
  if (has_task2(kind)) {
    for (const auto& base : state.objects) {
      if (base.kind != ObjectKind::base) continue;
      const auto want = ctx.color_map.find(base.index);
      if (want == ctx.color_map.end()) return false;
      const bool covered = std::any_of(state.objects.begin(), state.objects.end(), [&](const auto& o) {
        return o.kind == ObjectKind::block && o.color == want->second && near(o, base.pose);
      });
      if (!covered) return false;
    }
  }
  return has_task1(kind) || has_task2(kind);
}

std::string relative_position_phrase(const std::vector<TableObject>& objects,
                                     std::string_view color, std::size_t target) {
  const auto order = left_to_right(objects, color);
  const auto it = std::find(order.begin(), order.end(), target);
  if (it == order.end())
    throw Error("object " + std::to_string(target) + " is not a " + std::string(color) + " block");
  const auto rank = static_cast<std::size_t>(it - order.begin()) + 1;
  return "The " + text::ordinal_word(rank) + " " + std::string(color) + " block from the left.";
}

std::size_t resolve_relative(const std::vector<TableObject>& objects, std::string_view color,
                             std::string_view phrase) {
  static const std::regex pattern(R"(the\s+([a-z]+)\s+([a-z]+)\s+block\s+from\s+the\s+left)");
  std::smatch m;
  const auto lowered = text::lower(phrase);
  if (!std::regex_search(lowered, m, pattern) || m[2].str() != color)
    throw FormatError("not a relative position phrase: '" + std::string(phrase) + "'");
  const int rank = text::ordinal_rank(m[1].str());
  const auto order = left_to_right(objects, color);
  if (rank < 1 || static_cast<std::size_t>(rank) > order.size())
    throw FormatError("rank out of range in '" + std::string(phrase) + "'");
  return order[static_cast<std::size_t>(rank - 1)];
}

// ---------------------------------------------------------------------------

WorldState TabletopEnv::reset(const Context& ctx) const { return initial_state(ctx); }

std::string TabletopEnv::initial_observation(const WorldState& state, const Context& ctx) const {
  return tabletop::initial_observation(std::get<TabletopState>(state), ctx);
}

PhysicalAction TabletopEnv::parse_physical(std::string_view text) const { return parse_move(text); }

PhysicalOutcome TabletopEnv::apply(const WorldState& state, const PhysicalAction& action,
                                   const Context& ctx) const {
  const auto* cmd = std::get_if<MoveCmd>(&action);
  if (!cmd) throw MalformedAction(std::string(kNoFunctionCall));
  auto r = apply_move(std::get<TabletopState>(state), *cmd, ctx);
  const bool done = check_tabletop_success(r.state, ctx);
  return {std::move(r.state), std::move(r.text), done ? 1.0 : 0.0, done};
}

bool TabletopEnv::finished(const WorldState& state, const Context& ctx) const {
  return check_tabletop_success(std::get<TabletopState>(state), ctx);
}

std::optional<std::string> TabletopEnv::admit_question(WorldState& state, std::string_view question,
                                                       const Context& ctx) const {
  auto& s = std::get<TabletopState>(state);
  if (!s.question_budget) return std::nullopt;
  if (ctx.task.kind == TaskKind::tabletop3 &&
      classify_question(question).kind == QueryKind::relative_target)
    return std::nullopt;
  if (*s.question_budget <= 0) return std::string(kBudgetSpent);
  --*s.question_budget;
  return std::nullopt;
}

}  // namespace inquire::tabletop
