#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rmued/alphabet.hpp"

namespace rmued {

/// Minigrid direction order: turning right adds one.
enum class Direction : std::uint8_t { east, south, west, north };
enum class Action : std::uint8_t { turn_left, turn_right, forward, pickup, drop, toggle };
inline constexpr int kNumActions = 6;

std::string_view to_string(Direction d);
std::string_view to_string(Action a);
std::optional<Direction> parse_direction(std::string_view s);
std::optional<Action> parse_action(std::string_view s);

struct Pos {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pos&, const Pos&) = default;
  friend auto operator<=>(const Pos&, const Pos&) = default;
};

Pos forward_vector(Direction d);
Pos right_vector(Direction d);
inline Pos operator+(Pos a, Pos b) { return {a.x + b.x, a.y + b.y}; }

inline constexpr int kRoomStride = 6;  // 5x5 interior plus one wall

struct RoomLayout {
  int rooms = 1;
  int rows = 1;
  int cols = 1;
  int width() const { return cols * kRoomStride + 1; }
  int height() const { return rows * kRoomStride + 1; }
  friend bool operator==(const RoomLayout&, const RoomLayout&) = default;
};

/// Layout for 1, 2, 4 or 6 rooms; throws std::invalid_argument otherwise.
RoomLayout room_layout(int rooms);
/// Middle cells of every dividing wall, in row-major order.
std::vector<Pos> door_slots(const RoomLayout& layout);
int door_count(int rooms);

struct ObjectRange {
  int min = 1;
  int max = 5;
};
/// Object count range including doors; the minimum is max(1, door count).
ObjectRange object_range(int rooms);

/// A gridworld level. Cells hold at most one object each; walls are implied
/// by the room layout (every sixth row and column) except door slots, which
/// always hold a door.
class Level {
 public:
  Level() : Level(1) {}
  explicit Level(int rooms);

  int rooms() const { return layout_.rooms; }
  const RoomLayout& layout() const { return layout_; }
  int width() const { return layout_.width(); }
  int height() const { return layout_.height(); }

  bool in_bounds(Pos p) const { return p.x >= 0 && p.y >= 0 && p.x < width() && p.y < height(); }
  bool is_wall_line(Pos p) const { return p.x % kRoomStride == 0 || p.y % kRoomStride == 0; }
  bool is_door_slot(Pos p) const;
  /// Wall cell that is not a door slot.
  bool is_wall(Pos p) const { return is_wall_line(p) && !is_door_slot(p); }
  bool is_floor(Pos p) const { return in_bounds(p) && !is_wall_line(p); }
  /// Room index (row-major) of a floor cell, -1 otherwise.
  int room_of(Pos p) const;

  std::optional<ObjectDescriptor> object_at(Pos p) const;
  void set_object(Pos p, std::optional<ObjectDescriptor> object);
  std::uint8_t cell_code(Pos p) const { return cells_[index(p)]; }

  Pos agent = {1, 1};
  Direction direction = Direction::east;
  std::optional<ObjectDescriptor> carried;

  /// Positions of all grid objects in row-major order.
  std::vector<Pos> object_positions() const;
  std::vector<Pos> door_positions() const;
  std::vector<Pos> non_door_positions() const;
  /// Grid objects plus the carried object.
  int object_count() const;
  /// Floor cells holding no object and not occupied by the agent.
  std::vector<Pos> free_floor_cells() const;

  Pos front() const { return agent + forward_vector(direction); }

  friend bool operator==(const Level&, const Level&) = default;

 private:
  std::size_t index(Pos p) const {
    return static_cast<std::size_t>(p.y) * static_cast<std::size_t>(width()) +
           static_cast<std::size_t>(p.x);
  }

  RoomLayout layout_;
  std::vector<std::uint8_t> cells_;  // 0 = empty, otherwise descriptor index + 1
};

/// Empty string when the level satisfies every structural invariant.
std::string level_problem(const Level& level);
void validate_level(const Level& level);

/// Applies one action. Illegal actions leave the level unchanged.
void env_step(Level& level, Action action);

inline constexpr int kViewSize = 5;

/// Channel-0 ids.
enum class CellId : std::uint8_t {
  unseen = 0,
  empty = 1,
  wall = 2,
  ball = 3,
  square = 4,
  key = 5,
  door_open = 6,
  door_closed = 7,
  door_locked = 8,
  agent = 9,
};
/// Channel-1 ids: 0 none, 1..6 red..gray.

struct Observation {
  /// [row][col][channel]; row 0 is farthest ahead, the agent sits at row 4,
  /// column 2, facing row 0.
  std::array<std::array<std::array<std::uint8_t, 2>, kViewSize>, kViewSize> grid{};
  /// Cells the agent can see; all true unless occlusion is enabled.
  std::array<std::array<bool, kViewSize>, kViewSize> visible{};

  friend bool operator==(const Observation&, const Observation&) = default;
};

struct ObservationOptions {
  /// Line-of-sight masking: walls and closed or locked doors hide what lies
  /// behind them. Off by default (plain geometric crop).
  bool occlusion = false;
};

/// World position of view cell (row, col).
Pos view_to_world(const Level& level, int row, int col);
Observation observe(const Level& level, ObservationOptions options = {});

/// Encodes a concrete descriptor into (channel 0, channel 1) ids.
std::array<std::uint8_t, 2> encode_object(const ObjectDescriptor& d);
std::optional<ObjectDescriptor> decode_object(std::uint8_t id, std::uint8_t color);

/// The set of propositions satisfied by an observation.
PropSet label_observation(const Observation& obs);
PropSet label(const Level& level, ObservationOptions options = {});

/// One character per cell followed by a list of objects with their full
/// names. Legend: '#' wall, '.' floor, agent '>' 'v' '<' '^', 'b' ball,
/// 's' square, 'k' key, '/' open door, '+' closed door, 'L' locked door.
std::string render_ascii(const Level& level);

}  // namespace rmued
