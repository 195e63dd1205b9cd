#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>

#include "rmued/solvability.hpp"
#include "rmued/students.hpp"

namespace rmued {

namespace {

constexpr int kUnreached = std::numeric_limits<int>::max();

int dot(Pos a, Pos b) { return a.x * b.x + a.y * b.y; }

/// Whether `q` lies in the 5x5 view of an agent at `agent` facing `dir`,
/// excluding the agent's own cell.
bool in_view(Pos agent, Direction dir, Pos q) {
  if (q == agent) return false;
  Pos rel{q.x - agent.x, q.y - agent.y};
  int ahead = dot(rel, forward_vector(dir));
  int side = dot(rel, right_vector(dir));
  return ahead >= 0 && ahead < kViewSize && side >= -kViewSize / 2 && side <= kViewSize / 2;
}

bool near_door(const Level& level, Pos p) {
  for (int d = 0; d < 4; ++d) {
    Pos q = p + forward_vector(static_cast<Direction>(d));
    if (level.in_bounds(q) && level.is_door_slot(q)) return true;
  }
  return false;
}

struct Pose {
  Pos pos;
  Direction dir;
};

/// Shortest action sequences from the agent's pose to every pose. Turning and
/// moving cost one step; a closed door, or a locked door whose key is held,
/// costs an extra toggle.
class Navigator {
 public:
  explicit Navigator(const Level& level)
      : level_(level), w_(level.width()), h_(level.height()) {
    const std::size_t n = static_cast<std::size_t>(w_ * h_ * 4);
    dist_.assign(n, kUnreached);
    parent_.assign(n, -1);
    move_.assign(n, Move::turn_left);
    run();
  }

  /// Cheapest reached pose satisfying `pred`; ties go to the lowest index.
  template <class Pred>
  std::optional<int> best(Pred pred) const {
    std::optional<int> out;
    for (int i = 0; i < static_cast<int>(dist_.size()); ++i) {
      if (dist_[static_cast<std::size_t>(i)] == kUnreached || !pred(pose(i))) continue;
      if (!out || dist_[static_cast<std::size_t>(i)] < dist_[static_cast<std::size_t>(*out)]) out = i;
    }
    return out;
  }

  std::vector<Action> actions_to(int target) const {
    std::vector<Action> out;
    for (int i = target; parent_[static_cast<std::size_t>(i)] >= 0; i = parent_[static_cast<std::size_t>(i)]) {
      switch (move_[static_cast<std::size_t>(i)]) {
        case Move::turn_left: out.push_back(Action::turn_left); break;
        case Move::turn_right: out.push_back(Action::turn_right); break;
        case Move::forward: out.push_back(Action::forward); break;
        case Move::toggle_forward:
          out.push_back(Action::forward);
          out.push_back(Action::toggle);
          break;
      }
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

  int cost(int i) const { return dist_[static_cast<std::size_t>(i)]; }

  Pose pose(int i) const {
    int dir = i % 4;
    int cell = i / 4;
    return {{cell % w_, cell / w_}, static_cast<Direction>(dir)};
  }

 private:
  enum class Move : std::uint8_t { turn_left, turn_right, forward, toggle_forward };
  // Cost of entering a cell: 0 blocked, 1 walk in, 2 toggle then walk in.
  enum : std::uint8_t { kBlocked = 0 };

  int index(Pos p, Direction d) const { return (p.y * w_ + p.x) * 4 + static_cast<int>(d); }

  std::vector<std::uint8_t> entry_costs() const {
    std::vector<std::uint8_t> cost(static_cast<std::size_t>(w_ * h_), kBlocked);
    for (int y = 0; y < h_; ++y) {
      for (int x = 0; x < w_; ++x) {
        Pos c{x, y};
        if (level_.is_wall(c)) continue;
        std::uint8_t& out = cost[static_cast<std::size_t>(y * w_ + x)];
        auto object = level_.object_at(c);
        if (!object) {
          out = 1;
        } else if (object->is_door()) {
          bool has_key = level_.carried && level_.carried->kind == ObjectKind::key &&
                         level_.carried->color == object->color;
          if (object->door_state == DoorState::open)
            out = 1;
          else if (object->door_state == DoorState::closed ||
                   (object->door_state == DoorState::locked && has_key))
            out = 2;
        }
      }
    }
    return cost;
  }

  // Dial's algorithm: edge costs are 1 or 2, so three buckets suffice.
  void run() {
    const std::vector<std::uint8_t> enter = entry_costs();
    std::array<std::vector<int>, 3> buckets;
    int start = index(level_.agent, level_.direction);
    dist_[static_cast<std::size_t>(start)] = 0;
    buckets[0].push_back(start);
    std::size_t pending = 1;
    auto relax = [&](int from, int to, int cost, Move move) {
      int nd = dist_[static_cast<std::size_t>(from)] + cost;
      if (nd < dist_[static_cast<std::size_t>(to)]) {
        dist_[static_cast<std::size_t>(to)] = nd;
        parent_[static_cast<std::size_t>(to)] = from;
        move_[static_cast<std::size_t>(to)] = move;
        buckets[static_cast<std::size_t>(nd % 3)].push_back(to);
        ++pending;
      }
    };
    for (int d = 0; pending > 0; ++d) {
      std::vector<int> current;
      current.swap(buckets[static_cast<std::size_t>(d % 3)]);
      pending -= current.size();
      for (int i : current) {
        if (dist_[static_cast<std::size_t>(i)] != d) continue;
        const int dir = i % 4;
        const int cell = i / 4;
        relax(i, cell * 4 + (dir + 3) % 4, 1, Move::turn_left);
        relax(i, cell * 4 + (dir + 1) % 4, 1, Move::turn_right);
        Pos f = Pos{cell % w_, cell / w_} + forward_vector(static_cast<Direction>(dir));
        if (!level_.in_bounds(f)) continue;
        std::uint8_t c = enter[static_cast<std::size_t>(f.y * w_ + f.x)];
        if (c == kBlocked) continue;
        relax(i, index(f, static_cast<Direction>(dir)), c,
              c == 1 ? Move::forward : Move::toggle_forward);
      }
    }
  }

  const Level& level_;
  int w_;
  int h_;
  std::vector<int> dist_;
  std::vector<int> parent_;
  std::vector<Move> move_;
};

/// A level being advanced by a macro, with the actions taken so far.
struct Sim {
  Level level;
  std::vector<Action> actions;

  void run(const std::vector<Action>& as) {
    for (Action a : as) {
      env_step(level, a);
      actions.push_back(a);
    }
  }
  void act(Action a) { run({a}); }

  template <class Pred>
  bool go(Pred pred) {
    Navigator nav(level);
    auto target = nav.best(pred);
    if (!target) return false;
    run(nav.actions_to(*target));
    return true;
  }

  bool face(Pos t) {
    return go([&](const Pose& p) { return p.pos + forward_vector(p.dir) == t; });
  }

  /// Drops the held object on the nearest free cell, avoiding cells next to
  /// doors and the cells in `keep_clear` when possible.
  bool stash(const std::vector<Pos>& keep_clear = {}) {
    if (!level.carried) return true;
    for (int pass = 0; pass < 2; ++pass) {
      bool ok = go([&](const Pose& p) {
        Pos f = p.pos + forward_vector(p.dir);
        if (!level.is_floor(f) || level.object_at(f) || f == p.pos) return false;
        if (std::find(keep_clear.begin(), keep_clear.end(), f) != keep_clear.end()) return false;
        return pass == 1 || !near_door(level, f);
      });
      if (ok) {
        act(Action::drop);
        return !level.carried;
      }
    }
    return false;
  }

  bool pickup(Pos t) {
    if (level.carried && !stash({t})) return false;
    if (!face(t)) return false;
    act(Action::pickup);
    return level.carried.has_value();
  }
};

bool same_kind_color(const ObjectDescriptor& pattern, const ObjectDescriptor& d) {
  return pattern.kind == d.kind && (pattern.color == Color::unspecified || pattern.color == d.color);
}

bool holds_key_for(const Level& level, const ObjectDescriptor& door) {
  return level.carried && level.carried->kind == ObjectKind::key && level.carried->color == door.color;
}

class MacroPlanner {
 public:
  MacroPlanner(const PlannerOptions& options) : options_(options) {}

  std::optional<std::vector<Action>> achieve(const Level& level, PropId p) const {
    if (!possible(level, p)) return std::nullopt;
    return achieve(level, p, options_.prep_depth);
  }

 private:
  bool holds(const Level& level, PropId p) const {
    return label(level, options_.observation).test(to_index(p));
  }

  /// Some object could ever play each role of the proposition.
  bool possible(const Level& level, PropId p) const {
    const Proposition& prop = Alphabet::instance().at(p);
    auto any_match = [&](const ObjectDescriptor& pattern) {
      if (level.carried && same_kind_color(pattern, *level.carried)) return true;
      for (Pos q : level.object_positions())
        if (same_kind_color(pattern, *level.object_at(q))) return true;
      return false;
    };
    return any_match(prop.first) && (!prop.second || any_match(*prop.second));
  }

  std::optional<std::vector<Action>> achieve(const Level& level, PropId p, int depth) const {
    // Already true: the RM fires on the next label, so idle for one step.
    if (holds(level, p)) {
      for (Action a : {Action::pickup, Action::drop, Action::toggle}) {
        Level next = level;
        env_step(next, a);
        if (next == level) return std::vector<Action>{a};
      }
    }
    if (auto direct = direct_macro(level, p)) return direct;
    if (depth == 0) return std::nullopt;
    std::vector<Sim> preps = prep_macros(level);
    for (const Sim& prep : preps) {
      if (holds(prep.level, p)) return prep.actions;
      if (auto rest = achieve(prep.level, p, depth - 1)) {
        std::vector<Action> out = prep.actions;
        out.insert(out.end(), rest->begin(), rest->end());
        return out;
      }
    }
    return std::nullopt;
  }

  /// Fetch each reachable loose object, or just put the held one away;
  /// shortest first.
  std::vector<Sim> prep_macros(const Level& level) const {
    std::vector<Sim> out;
    for (Pos q : level.non_door_positions()) {
      Sim sim{level, {}};
      if (sim.pickup(q)) out.push_back(std::move(sim));
    }
    if (level.carried) {
      Sim sim{level, {}};
      if (sim.stash()) out.push_back(std::move(sim));
    }
    for (Pos door : level.door_positions()) {
      const ObjectDescriptor d = *level.object_at(door);
      if (d.door_state == DoorState::open) continue;
      if (d.door_state == DoorState::closed) {
        Sim sim{level, {}};
        if (sim.face(door)) {
          sim.act(Action::toggle);
          out.push_back(std::move(sim));
        }
        continue;
      }
      // Locked: bring the nearest usable key along.
      std::vector<Sim> tries;
      if (holds_key_for(level, d)) tries.push_back(Sim{level, {}});
      for (Pos k : level.non_door_positions()) {
        const ObjectDescriptor key = *level.object_at(k);
        if (key.kind != ObjectKind::key || key.color != d.color) continue;
        Sim sim{level, {}};
        if (sim.pickup(k)) tries.push_back(std::move(sim));
      }
      for (Sim& sim : tries) {
        if (!sim.face(door)) continue;
        sim.act(Action::toggle);
        if (sim.level.object_at(door)->door_state == DoorState::open) {
          out.push_back(std::move(sim));
          break;
        }
      }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Sim& a, const Sim& b) { return a.actions.size() < b.actions.size(); });
    return out;
  }

  std::optional<std::vector<Action>> direct_macro(const Level& level, PropId p) const {
    const Proposition& prop = Alphabet::instance().at(p);
    std::vector<Sim> candidates;
    switch (prop.location) {
      case Location::front: front_candidates(level, prop.first, candidates); break;
      case Location::carrying: carrying_candidates(level, prop.first, candidates); break;
      case Location::next: next_candidates(level, prop.first, *prop.second, candidates); break;
    }
    std::optional<std::vector<Action>> best;
    for (Sim& sim : candidates)
      if (holds(sim.level, p) && (!best || sim.actions.size() < best->size()))
        best = std::move(sim.actions);
    return best;
  }

  void front_candidates(const Level& level, const ObjectDescriptor& pattern,
                        std::vector<Sim>& out) const {
    for (Pos q : level.object_positions()) {
      const ObjectDescriptor d = *level.object_at(q);
      if (!same_kind_color(pattern, d)) continue;
      int toggles = 0;
      bool needs_key = false;
      if (d.is_door() && pattern.door_state != DoorState::unspecified &&
          pattern.door_state != d.door_state) {
        if (pattern.door_state == DoorState::locked) continue;
        if (d.door_state == DoorState::locked) {
          needs_key = true;
          toggles = pattern.door_state == DoorState::open ? 1 : 2;
        } else {
          toggles = 1;
        }
      }
      if (needs_key && !holds_key_for(level, d)) continue;
      Sim sim{level, {}};
      if (!sim.face(q)) continue;
      for (int t = 0; t < toggles; ++t) sim.act(Action::toggle);
      out.push_back(std::move(sim));
    }
    if (level.carried && same_kind_color(pattern, *level.carried)) {
      Sim sim{level, {}};
      if (sim.stash()) out.push_back(std::move(sim));
    }
  }

  void carrying_candidates(const Level& level, const ObjectDescriptor& pattern,
                           std::vector<Sim>& out) const {
    for (Pos q : level.non_door_positions()) {
      if (!same_kind_color(pattern, *level.object_at(q))) continue;
      Sim sim{level, {}};
      if (level.carried) {
        // Walk up to the target first: the held object may be a key that
        // opens the way.
        if (!sim.face(q) || !sim.stash({q})) continue;
      }
      if (sim.pickup(q)) out.push_back(std::move(sim));
    }
  }

  void next_candidates(const Level& level, const ObjectDescriptor& a, const ObjectDescriptor& b,
                       std::vector<Sim>& out) const {
    auto matches_pair = [&](const ObjectDescriptor& x, const ObjectDescriptor& y) {
      return (a.generalizes(x) && b.generalizes(y)) || (a.generalizes(y) && b.generalizes(x));
    };
    auto positions = level.object_positions();
    // Pairs already adjacent: bring both into view.
    for (Pos p : positions)
      for (Pos step : {Pos{1, 0}, Pos{0, 1}}) {
        Pos q = p + step;
        auto op = level.object_at(p);
        auto oq = level.object_at(q);
        if (!oq || (op->is_door() && oq->is_door()) || !matches_pair(*op, *oq)) continue;
        Sim sim{level, {}};
        if (sim.go([&](const Pose& pose) { return in_view(pose.pos, pose.dir, p) && in_view(pose.pos, pose.dir, q); }))
          out.push_back(std::move(sim));
      }
    // Carry a loose object next to a partner.
    auto partner_role = [&](const ObjectDescriptor& mover) -> const ObjectDescriptor* {
      if (a.generalizes(mover)) return &b;
      if (b.generalizes(mover)) return &a;
      return nullptr;
    };
    // Anchors match by kind and color; a door in the wrong state is toggled
    // after the drop.
    auto place_next_to_partner = [&](const Sim& start, Pos origin) {
      const ObjectDescriptor& pattern = *partner_role(*start.level.carried);
      struct Target {
        Pos anchor;
        Pos drop;
        int pose;
      };
      Navigator nav(start.level);
      std::vector<std::pair<int, Target>> targets;  // (rank, target)
      for (Pos q : start.level.object_positions()) {
        const ObjectDescriptor other = *start.level.object_at(q);
        if (!same_kind_color(pattern, other)) continue;
        if (other.is_door() && pattern.door_state == DoorState::locked &&
            other.door_state != DoorState::locked)
          continue;
        for (int d = 0; d < 4; ++d) {
          Pos c = q + forward_vector(static_cast<Direction>(d));
          if (c == origin || !start.level.is_floor(c) || start.level.object_at(c)) continue;
          auto pose = nav.best([&](const Pose& pz) {
            return pz.pos != q && pz.pos + forward_vector(pz.dir) == c;
          });
          if (pose) targets.push_back({nav.cost(*pose), {q, c, *pose}});
        }
      }
      std::stable_sort(targets.begin(), targets.end(),
                       [](const auto& x, const auto& y) { return x.first < y.first; });
      if (targets.size() > 6) targets.resize(6);
      for (const auto& [rank, target] : targets) {
        const ObjectDescriptor anchor0 = *start.level.object_at(target.anchor);
        if (anchor0.is_door() && pattern.door_state != DoorState::unspecified &&
            anchor0.door_state != pattern.door_state && anchor0.door_state != DoorState::locked) {
          // Set the door first, then drop from wherever is still reachable.
          Sim sim = start;
          if (sim.face(target.anchor)) {
            sim.act(Action::toggle);
            Pos c = target.drop;
            if (sim.go([&](const Pose& pz) {
                  return pz.pos != target.anchor && pz.pos + forward_vector(pz.dir) == c;
                })) {
              sim.act(Action::drop);
              out.push_back(std::move(sim));
            }
          }
        }
        Sim sim = start;
        sim.run(nav.actions_to(target.pose));
        sim.act(Action::drop);
        const ObjectDescriptor anchor = *sim.level.object_at(target.anchor);
        if (anchor.is_door() && pattern.door_state != DoorState::unspecified &&
            anchor.door_state != pattern.door_state) {
          if (anchor.door_state == DoorState::locked || !sim.face(target.anchor)) continue;
          sim.act(Action::toggle);
        }
        out.push_back(std::move(sim));
      }
    };
    if (level.carried && partner_role(*level.carried))
      place_next_to_partner(Sim{level, {}}, level.agent);
    for (Pos q : level.non_door_positions()) {
      if (!partner_role(*level.object_at(q))) continue;
      Sim sim{level, {}};
      if (!sim.pickup(q)) continue;
      place_next_to_partner(sim, q);
    }
  }

  const PlannerOptions& options_;
};

}  // namespace

void PlannerStudent::reset(const Problem&, std::uint64_t seed) {
  rng_ = Rng(seed);
  plan_.clear();
  expected_.clear();
  cursor_ = 0;
  failed_state_.reset();
}

std::optional<std::vector<Action>> PlannerStudent::plan(const Level& level, const RewardMachine& rm,
                                                        RmState u) const {
  if (u == rm.accepting) return std::vector<Action>{};
  RewardMachine from_u = rm;
  from_u.initial = u;
  if (!is_solvable_static(Problem{from_u, level})) return std::nullopt;

  MacroPlanner macros(options_);
  auto paths = enumerate_paths(rm, u);
  if (static_cast<int>(paths.size()) > options_.max_paths)
    paths.resize(static_cast<std::size_t>(options_.max_paths));

  std::optional<std::vector<Action>> best;
  for (const RmPath& path : paths) {
    Level sim = level;
    RmState cur = u;
    std::vector<Action> actions;
    RmPath remaining = path;
    bool ok = true;
    for (int guard = 0; cur != rm.accepting && ok; ++guard) {
      auto edge = std::find_if(remaining.begin(), remaining.end(),
                               [&](const RmEdge& e) { return e.source == cur; });
      if (edge == remaining.end()) {
        // An unplanned transition moved us off the path; follow the first
        // path from where we are.
        auto detour = enumerate_paths(rm, cur);
        if (detour.empty() || guard > 2 * rm.num_states) {
          ok = false;
          break;
        }
        remaining = detour.front();
        edge = remaining.begin();
      }
      auto macro = macros.achieve(sim, edge->formula.positive);
      if (!macro) {
        ok = false;
        break;
      }
      RmState before = cur;
      for (Action a : *macro) {
        env_step(sim, a);
        actions.push_back(a);
        cur = rm_step(rm, cur, label(sim, options_.observation)).state;
        if (cur != before) break;
      }
      if (cur == before || static_cast<int>(actions.size()) > options_.max_plan_length) ok = false;
    }
    if (ok && (!best || actions.size() < best->size())) best = std::move(actions);
  }
  return best;
}

Decision PlannerStudent::decide(const StudentView& view) {
  auto on_track = [&] {
    if (cursor_ >= plan_.size()) return false;
    const Expected& e = expected_[cursor_];
    return e.rm_state == view.rm_state && e.agent == view.level.agent &&
           e.direction == view.level.direction;
  };
  if (!on_track()) {
    plan_.clear();
    expected_.clear();
    cursor_ = 0;
    if (!failed_state_ || *failed_state_ != view.rm_state) {
      if (auto p = plan(view.level, view.rm, view.rm_state); p && !p->empty()) {
        plan_ = std::move(*p);
        failed_state_.reset();
        Level sim = view.level;
        RmState u = view.rm_state;
        for (Action a : plan_) {
          expected_.push_back({u, sim.agent, sim.direction});
          env_step(sim, a);
          u = rm_step(view.rm, u, label(sim, options_.observation)).state;
        }
      } else {
        failed_state_ = view.rm_state;
      }
    }
  }
  if (cursor_ < plan_.size()) {
    const auto remaining = static_cast<double>(plan_.size() - cursor_);
    Decision d{plan_[cursor_], std::clamp(std::pow(options_.gamma, remaining - 1.0), 0.0, 1.0)};
    ++cursor_;
    return d;
  }
  return {static_cast<Action>(rng_.uniform_index(kNumActions)), 0.0};
}

}  // namespace rmued
