#include "doctest.h"
#include "fixtures.hpp"
#include "rmued/rng.hpp"
#include "rmued/samplers.hpp"
#include "rmued/serialization.hpp"

using namespace rmued;
using namespace fixtures;

namespace {

std::array<std::uint8_t, 2> cell(const Observation& o, int row, int col) {
  return o.grid[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
}

std::uint8_t id(CellId c) { return static_cast<std::uint8_t>(c); }

}  // namespace

TEST_CASE("room geometry") {
  struct Row {
    int rooms, width, height, doors, min, max;
  };
  for (Row r : {Row{1, 7, 7, 0, 1, 5}, Row{2, 13, 7, 1, 1, 10}, Row{4, 13, 13, 4, 4, 15},
                Row{6, 19, 13, 7, 7, 20}}) {
    Level level(r.rooms);
    CHECK(level.width() == r.width);
    CHECK(level.height() == r.height);
    CHECK(door_count(r.rooms) == r.doors);
    CHECK(object_range(r.rooms).min == r.min);
    CHECK(object_range(r.rooms).max == r.max);
    for (Pos p : door_slots(level.layout())) {
      CHECK(level.is_wall_line(p));
      CHECK(((p.x % kRoomStride == 3) || (p.y % kRoomStride == 3)));
    }
  }
  CHECK_THROWS_AS(room_layout(3), std::invalid_argument);
}

TEST_CASE("the example level yields exactly the six listed propositions") {
  PropSet expected = props({"front_ball", "front_ball_blue", "next_square_key",
                            "next_square_purple_key_green", "next_square_key_green",
                            "next_square_purple_key"});
  CHECK(label(fig1_level()) == expected);
}

TEST_CASE("label examples") {
  Level level(1);
  level.agent = {3, 3};
  level.direction = Direction::east;
  CHECK(label(level).none());

  level.carried = obj(ObjectKind::square, Color::gray);
  PropSet l = label(level);
  CHECK(l.test(to_index(prop("carrying_square"))));
  CHECK(l.test(to_index(prop("carrying_square_gray"))));
}

TEST_CASE("movement and interaction") {
  SUBCASE("forward into a wall keeps the state") {
    Level level(1);
    level.agent = {5, 3};
    level.direction = Direction::east;
    Level before = level;
    env_step(level, Action::forward);
    CHECK(level == before);
  }
  SUBCASE("a matching key unlocks and toggling again closes") {
    Level level = two_rooms(obj(ObjectKind::door, Color::blue, DoorState::locked));
    level.agent = {5, 3};
    level.carried = obj(ObjectKind::key, Color::blue);
    env_step(level, Action::toggle);
    CHECK(level.object_at({6, 3})->door_state == DoorState::open);
    CHECK(level.carried);  // the key is kept
    env_step(level, Action::toggle);
    CHECK(level.object_at({6, 3})->door_state == DoorState::closed);
  }
  SUBCASE("a key of another color does nothing") {
    Level level = two_rooms(obj(ObjectKind::door, Color::blue, DoorState::locked));
    level.agent = {5, 3};
    level.carried = obj(ObjectKind::key, Color::red);
    env_step(level, Action::toggle);
    CHECK(level.object_at({6, 3})->door_state == DoorState::locked);
  }
  SUBCASE("pickup with full hands keeps the state") {
    Level level(1);
    level.agent = {2, 3};
    level.direction = Direction::east;
    level.set_object({3, 3}, obj(ObjectKind::ball, Color::red));
    level.carried = obj(ObjectKind::key, Color::green);
    Level before = level;
    env_step(level, Action::pickup);
    CHECK(level == before);
  }
  SUBCASE("pickup then drop") {
    Level level(1);
    level.agent = {2, 3};
    level.direction = Direction::east;
    level.set_object({3, 3}, obj(ObjectKind::ball, Color::red));
    env_step(level, Action::pickup);
    CHECK_FALSE(level.object_at({3, 3}));
    CHECK(level.carried == obj(ObjectKind::ball, Color::red));
    env_step(level, Action::turn_left);
    env_step(level, Action::drop);
    CHECK(level.object_at({2, 2}) == obj(ObjectKind::ball, Color::red));
    CHECK_FALSE(level.carried);
  }
  SUBCASE("the agent walks through an open door") {
    Level level = two_rooms(obj(ObjectKind::door, Color::gray, DoorState::open));
    level.agent = {5, 3};
    env_step(level, Action::forward);
    CHECK(level.agent == Pos{6, 3});
    env_step(level, Action::forward);
    CHECK(level.agent == Pos{7, 3});
  }
}

TEST_CASE("observation encoding") {
  SUBCASE("a wall straight ahead") {
    Level level(1);
    level.agent = {5, 3};
    level.direction = Direction::east;
    Observation o = observe(level);
    CHECK(cell(o, 3, 2)[0] == id(CellId::wall));
    CHECK(cell(o, 4, 2)[0] == id(CellId::agent));
  }
  SUBCASE("a carried red key shows at the agent cell") {
    Level level(1);
    level.agent = {3, 3};
    level.carried = obj(ObjectKind::key, Color::red);
    Observation o = observe(level);
    CHECK(cell(o, 4, 2)[0] == id(CellId::key));
    CHECK(cell(o, 4, 2)[1] == 1);
  }
  SUBCASE("an empty room") {
    Level level(1);
    level.agent = {3, 5};
    level.direction = Direction::north;
    Observation o = observe(level);
    for (int r = 0; r < kViewSize; ++r) {
      for (int c = 0; c < kViewSize; ++c) {
        if (r == 4 && c == 2) continue;
        Pos w = view_to_world(level, r, c);
        auto expected = !level.in_bounds(w) ? CellId::unseen
                        : level.is_wall(w)  ? CellId::wall
                                            : CellId::empty;
        CHECK(cell(o, r, c)[0] == id(expected));
      }
    }
  }
}

TEST_CASE("property: random play keeps levels valid and labels closed") {
  Rng rng(21);
  const auto& a = Alphabet::instance();
  LevelSamplerConfig cfg;
  for (int k = 0; k < 200; ++k) {
    Level level = sample_level(rng, cfg);
    for (int t = 0; t < 100; ++t) {
      auto action = static_cast<Action>(rng.uniform_index(kNumActions));
      Level copy = level;
      env_step(level, action);
      env_step(copy, action);
      REQUIRE(level == copy);
      REQUIRE(level_problem(level).empty());
      PropSet l = label(level);
      REQUIRE(a.close(l) == l);
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (!l.test(i)) continue;
        const Proposition& p = a.at(prop_id(i));
        if (p.location == Location::next)
          REQUIRE_FALSE((p.first.is_door() && p.second->is_door()));
      }
    }
    CHECK(level_from_json(to_json(level)) == level);
  }
}

TEST_CASE("occlusion hides cells behind a wall") {
  Level level(2);
  level.agent = {4, 3};
  level.direction = Direction::east;
  level.set_object({6, 3}, obj(ObjectKind::door, Color::red, DoorState::closed));
  level.set_object({7, 2}, obj(ObjectKind::ball, Color::red));
  level.set_object({7, 3}, obj(ObjectKind::key, Color::red));
  PropSet open_view = label(level);
  PropSet occluded = label(level, ObservationOptions{true});
  CHECK(open_view.test(to_index(prop("next_ball_red_key_red"))));
  CHECK_FALSE(occluded.test(to_index(prop("next_ball_red_key_red"))));
}
