#include <charconv>
#include <fstream>
#include <sstream>

#include "inquire/errors.hpp"
#include "inquire/household.hpp"
#include "inquire/text.hpp"

namespace inquire::household {

namespace {

#include "inquire/default_pools.inc"

int to_int(std::string_view s, std::size_t line_no) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw FormatError("layout line " + std::to_string(line_no) + ": expected integer, got '" +
                      std::string(s) + "'");
  return v;
}

std::vector<std::string> words(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

}  // namespace

bool Layout::has_type(std::string_view type) const {
  for (const auto& r : receptacles)
    if (r.type == type) return true;
  return false;
}

int Layout::receptacle_count() const {
  int n = 0;
  for (const auto& r : receptacles) n += r.count;
  return n;
}

PoolId parse_pool_id(std::string_view s) {
  if (s == "id-dist" || s == "id") return PoolId::id_dist;
  if (s == "ood-dist" || s == "ood") return PoolId::ood_dist;
  throw FormatError("unknown layout pool: '" + std::string(s) + "'");
}

std::string_view to_string(PoolId p) { return p == PoolId::id_dist ? "id-dist" : "ood-dist"; }

std::string_view appliance_for(TaskKind kind) {
  switch (kind) {
    case TaskKind::heat: return "microwave";
    case TaskKind::clean: return "sinkbasin";
    case TaskKind::cool: return "fridge";
    case TaskKind::examine: return "desklamp";
    default: return "";
  }
}

LayoutPool parse_layout_pool(std::string_view source, std::string name) {
  LayoutPool pool{std::move(name), {}};
  std::optional<Layout> current;
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& msg) {
    throw FormatError("layout line " + std::to_string(line_no) + ": " + msg);
  };

  for (const auto& raw : text::split(source, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto w = words(line);
    if (w.empty()) continue;
    const auto& head = w[0];

    if (head == "layout") {
      if (current) fail("nested layout (missing 'end')");
      if (w.size() != 2) fail("expected 'layout <name>'");
      current = Layout{w[1], {}, {}, {}};
    } else if (head == "end") {
      if (!current) fail("'end' without 'layout'");
      if (current->receptacles.empty()) fail("layout '" + current->name + "' has no receptacles");
      if (current->destinations.empty()) fail("layout '" + current->name + "' has no destinations");
      pool.layouts.push_back(std::move(*current));
      current.reset();
    } else if (!current) {
      fail("directive outside a layout block");
    } else if (head == "receptacle") {
      if (w.size() < 3) fail("expected 'receptacle <type> <count> [openable] [closed]'");
      ReceptacleType r{w[1], to_int(w[2], line_no), false, false};
      for (std::size_t i = 3; i < w.size(); ++i) {
        if (w[i] == "openable") r.openable = true;
        else if (w[i] == "closed") r.closed = true;
        else fail("unknown receptacle flag '" + w[i] + "'");
      }
      if (r.closed && !r.openable) fail("closed receptacle must be openable");
      if (r.count < 1) fail("receptacle count must be positive");
      current->receptacles.push_back(std::move(r));
    } else if (head == "object") {
      if (w.size() != 6) fail("expected 'object <class> <min> <max> <kinds> <hosts>'");
      ObjectClassSpec c{w[1], to_int(w[2], line_no), to_int(w[3], line_no), {}, {}};
      if (c.min_count < 1 || c.max_count < c.min_count) fail("bad instance count range");
      for (const auto& k : text::split(w[4], ',')) {
        const auto kind = parse_task_kind(k);
        if (!is_household(kind)) fail("'" + k + "' is not a household task kind");
        c.kinds.push_back(kind);
      }
      c.hosts = text::split(w[5], ',');
      for (const auto& h : c.hosts)
        if (!current->has_type(h)) fail("host '" + h + "' is not declared above");
      current->classes.push_back(std::move(c));
    } else if (head == "destinations") {
      if (w.size() != 2) fail("expected 'destinations <types>'");
      current->destinations = text::split(w[1], ',');
      for (const auto& d : current->destinations)
        if (!current->has_type(d)) fail("destination '" + d + "' is not declared above");
    } else {
      fail("unknown directive '" + head + "'");
    }
  }
  if (current) fail("unterminated layout '" + current->name + "'");
  if (pool.layouts.empty()) throw FormatError("layout pool '" + pool.name + "' is empty");
  return pool;
}

LayoutPool load_layout_pool(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open layout pool " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_layout_pool(buf.str(), path.stem().string());
}

const LayoutPool& default_pool(PoolId id) {
  static const LayoutPool id_pool = parse_layout_pool(kIdPoolText, "id-dist");
  static const LayoutPool ood_pool = parse_layout_pool(kOodPoolText, "ood-dist");
  return id == PoolId::id_dist ? id_pool : ood_pool;
}

}  // namespace inquire::household
