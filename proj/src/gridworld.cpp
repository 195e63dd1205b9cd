#include "rmued/gridworld.hpp"

#include <algorithm>
#include <stdexcept>

namespace rmued {

namespace {

constexpr std::array<std::string_view, 4> kDirectionNames{"east", "south", "west", "north"};
constexpr std::array<std::string_view, 6> kActionNames{"turn_left", "turn_right", "forward",
                                                       "pickup",    "drop",       "toggle"};

bool blocks_sight(const Level& level, Pos p) {
  if (!level.in_bounds(p) || level.is_wall(p)) return true;
  auto object = level.object_at(p);
  return object && object->is_door() && object->door_state != DoorState::open;
}

}  // namespace

std::string_view to_string(Direction d) { return kDirectionNames[static_cast<int>(d)]; }
std::string_view to_string(Action a) { return kActionNames[static_cast<int>(a)]; }

std::optional<Direction> parse_direction(std::string_view s) {
  for (std::size_t i = 0; i < kDirectionNames.size(); ++i)
    if (kDirectionNames[i] == s) return static_cast<Direction>(i);
  return std::nullopt;
}

std::optional<Action> parse_action(std::string_view s) {
  for (std::size_t i = 0; i < kActionNames.size(); ++i)
    if (kActionNames[i] == s) return static_cast<Action>(i);
  return std::nullopt;
}

Pos forward_vector(Direction d) {
  switch (d) {
    case Direction::east: return {1, 0};
    case Direction::south: return {0, 1};
    case Direction::west: return {-1, 0};
    case Direction::north: return {0, -1};
  }
  return {1, 0};
}

Pos right_vector(Direction d) {
  Pos f = forward_vector(d);
  return {-f.y, f.x};
}

RoomLayout room_layout(int rooms) {
  switch (rooms) {
    case 1: return {1, 1, 1};
    case 2: return {2, 1, 2};
    case 4: return {4, 2, 2};
    case 6: return {6, 2, 3};
    default: throw std::invalid_argument("room count must be 1, 2, 4 or 6");
  }
}

std::vector<Pos> door_slots(const RoomLayout& layout) {
  std::vector<Pos> slots;
  for (int r = 0; r < layout.rows; ++r) {
    // vertical walls between horizontally adjacent rooms
    for (int c = 1; c < layout.cols; ++c) slots.push_back({c * kRoomStride, r * kRoomStride + 3});
    // horizontal wall below this row of rooms
    if (r + 1 < layout.rows)
      for (int c = 0; c < layout.cols; ++c)
        slots.push_back({c * kRoomStride + 3, (r + 1) * kRoomStride});
  }
  std::sort(slots.begin(), slots.end(),
            [](Pos a, Pos b) { return std::pair(a.y, a.x) < std::pair(b.y, b.x); });
  return slots;
}

int door_count(int rooms) { return static_cast<int>(door_slots(room_layout(rooms)).size()); }

ObjectRange object_range(int rooms) {
  switch (rooms) {
    case 1: return {1, 5};
    case 2: return {1, 10};
    case 4: return {4, 15};
    case 6: return {7, 20};
    default: throw std::invalid_argument("room count must be 1, 2, 4 or 6");
  }
}

Level::Level(int rooms) : layout_(room_layout(rooms)) {
  cells_.assign(static_cast<std::size_t>(width() * height()), 0);
}

bool Level::is_door_slot(Pos p) const {
  if (!in_bounds(p)) return false;
  const bool vertical_wall = p.x % kRoomStride == 0;
  const bool horizontal_wall = p.y % kRoomStride == 0;
  if (vertical_wall == horizontal_wall) return false;
  if (vertical_wall) return p.x > 0 && p.x < width() - 1 && p.y % kRoomStride == 3;
  return p.y > 0 && p.y < height() - 1 && p.x % kRoomStride == 3;
}

int Level::room_of(Pos p) const {
  if (!is_floor(p)) return -1;
  return (p.y / kRoomStride) * layout_.cols + p.x / kRoomStride;
}

std::optional<ObjectDescriptor> Level::object_at(Pos p) const {
  if (!in_bounds(p)) return std::nullopt;
  std::uint8_t code = cells_[index(p)];
  if (code == 0) return std::nullopt;
  return descriptor_at(code - 1);
}

void Level::set_object(Pos p, std::optional<ObjectDescriptor> object) {
  if (!in_bounds(p)) throw std::out_of_range("set_object: position out of bounds");
  cells_[index(p)] = object ? static_cast<std::uint8_t>(descriptor_index(*object) + 1) : 0;
}

std::vector<Pos> Level::object_positions() const {
  std::vector<Pos> out;
  for (int y = 0; y < height(); ++y)
    for (int x = 0; x < width(); ++x)
      if (cells_[index({x, y})] != 0) out.push_back({x, y});
  return out;
}

std::vector<Pos> Level::door_positions() const {
  std::vector<Pos> out;
  for (Pos p : object_positions())
    if (object_at(p)->is_door()) out.push_back(p);
  return out;
}

std::vector<Pos> Level::non_door_positions() const {
  std::vector<Pos> out;
  for (Pos p : object_positions())
    if (!object_at(p)->is_door()) out.push_back(p);
  return out;
}

int Level::object_count() const {
  int n = carried ? 1 : 0;
  for (std::uint8_t c : cells_) n += c != 0;
  return n;
}

std::vector<Pos> Level::free_floor_cells() const {
  std::vector<Pos> out;
  for (int y = 1; y < height() - 1; ++y)
    for (int x = 1; x < width() - 1; ++x) {
      Pos p{x, y};
      if (is_floor(p) && cells_[index(p)] == 0 && p != agent) out.push_back(p);
    }
  return out;
}

std::string level_problem(const Level& level) {
  for (int y = 0; y < level.height(); ++y)
    for (int x = 0; x < level.width(); ++x) {
      Pos p{x, y};
      auto object = level.object_at(p);
      if (level.is_door_slot(p)) {
        if (!object || !object->is_door()) return "door slot without a door";
      } else if (object) {
        if (object->is_door()) return "door outside a door slot";
        if (level.is_wall_line(p)) return "object on a wall cell";
      }
      if (object && !object->concrete()) return "object with unspecified attributes";
    }
  if (!level.in_bounds(level.agent)) return "agent out of bounds";
  if (level.is_wall(level.agent)) return "agent on a wall";
  auto under_agent = level.object_at(level.agent);
  if (under_agent &&
      !(under_agent->is_door() && under_agent->door_state == DoorState::open))
    return "agent shares a cell with an object";
  if (level.carried && (level.carried->is_door() || !level.carried->concrete()))
    return "invalid carried object";
  ObjectRange range = object_range(level.rooms());
  int n = level.object_count();
  if (n < range.min || n > range.max) return "object count outside the room range";
  return {};
}

void validate_level(const Level& level) {
  if (auto problem = level_problem(level); !problem.empty())
    throw std::invalid_argument("invalid level: " + problem);
}

void env_step(Level& level, Action action) {
  const Pos front = level.front();
  switch (action) {
    case Action::turn_left:
      level.direction = static_cast<Direction>((static_cast<int>(level.direction) + 3) % 4);
      return;
    case Action::turn_right:
      level.direction = static_cast<Direction>((static_cast<int>(level.direction) + 1) % 4);
      return;
    case Action::forward: {
      if (!level.in_bounds(front) || level.is_wall(front)) return;
      auto object = level.object_at(front);
      if (object && !(object->is_door() && object->door_state == DoorState::open)) return;
      level.agent = front;
      return;
    }
    case Action::pickup: {
      if (level.carried) return;
      auto object = level.object_at(front);
      if (!object || object->is_door()) return;
      level.carried = object;
      level.set_object(front, std::nullopt);
      return;
    }
    case Action::drop:
      if (!level.carried || !level.is_floor(front) || level.object_at(front)) return;
      level.set_object(front, level.carried);
      level.carried.reset();
      return;
    case Action::toggle: {
      auto object = level.object_at(front);
      if (!object || !object->is_door()) return;
      switch (object->door_state) {
        case DoorState::open: object->door_state = DoorState::closed; break;
        case DoorState::closed: object->door_state = DoorState::open; break;
        case DoorState::locked:
          if (!level.carried || level.carried->kind != ObjectKind::key ||
              level.carried->color != object->color)
            return;
          object->door_state = DoorState::open;
          break;
        case DoorState::unspecified: return;
      }
      level.set_object(front, object);
      return;
    }
  }
}

Pos view_to_world(const Level& level, int row, int col) {
  Pos f = forward_vector(level.direction);
  Pos r = right_vector(level.direction);
  int ahead = kViewSize - 1 - row;
  int side = col - kViewSize / 2;
  return {level.agent.x + f.x * ahead + r.x * side, level.agent.y + f.y * ahead + r.y * side};
}

std::array<std::uint8_t, 2> encode_object(const ObjectDescriptor& d) {
  std::uint8_t color = d.color == Color::unspecified ? 0 : static_cast<std::uint8_t>(d.color) + 1;
  CellId id = CellId::ball;
  switch (d.kind) {
    case ObjectKind::ball: id = CellId::ball; break;
    case ObjectKind::square: id = CellId::square; break;
    case ObjectKind::key: id = CellId::key; break;
    case ObjectKind::door:
      id = d.door_state == DoorState::open     ? CellId::door_open
           : d.door_state == DoorState::closed ? CellId::door_closed
                                               : CellId::door_locked;
      break;
  }
  return {static_cast<std::uint8_t>(id), color};
}

std::optional<ObjectDescriptor> decode_object(std::uint8_t id, std::uint8_t color) {
  if (color < 1 || color > kNumColors) return std::nullopt;
  ObjectDescriptor d;
  d.color = static_cast<Color>(color - 1);
  switch (static_cast<CellId>(id)) {
    case CellId::ball: d.kind = ObjectKind::ball; break;
    case CellId::square: d.kind = ObjectKind::square; break;
    case CellId::key: d.kind = ObjectKind::key; break;
    case CellId::door_open: d = {ObjectKind::door, d.color, DoorState::open}; break;
    case CellId::door_closed: d = {ObjectKind::door, d.color, DoorState::closed}; break;
    case CellId::door_locked: d = {ObjectKind::door, d.color, DoorState::locked}; break;
    default: return std::nullopt;
  }
  return d;
}

Observation observe(const Level& level, ObservationOptions options) {
  Observation obs;
  constexpr int agent_row = kViewSize - 1;
  constexpr int agent_col = kViewSize / 2;
  for (int row = 0; row < kViewSize; ++row)
    for (int col = 0; col < kViewSize; ++col) {
      Pos p = view_to_world(level, row, col);
      auto& cell = obs.grid[row][col];
      obs.visible[row][col] = true;
      if (!level.in_bounds(p)) {
        cell = {static_cast<std::uint8_t>(CellId::unseen), 0};
      } else if (level.is_wall(p)) {
        cell = {static_cast<std::uint8_t>(CellId::wall), 0};
      } else if (auto object = level.object_at(p)) {
        cell = encode_object(*object);
      } else {
        cell = {static_cast<std::uint8_t>(CellId::empty), 0};
      }
    }

  if (options.occlusion) {
    // Minigrid-style visibility sweep from the agent's row outward.
    std::array<std::array<bool, kViewSize>, kViewSize> mask{};
    mask[agent_row][agent_col] = true;
    auto opaque = [&](int row, int col) { return blocks_sight(level, view_to_world(level, row, col)); };
    for (int row = kViewSize - 1; row >= 0; --row) {
      for (int col = 0; col < kViewSize - 1; ++col) {
        if (!mask[row][col] || opaque(row, col)) continue;
        mask[row][col + 1] = true;
        if (row > 0) {
          mask[row - 1][col + 1] = true;
          mask[row - 1][col] = true;
        }
      }
      for (int col = kViewSize - 1; col > 0; --col) {
        if (!mask[row][col] || opaque(row, col)) continue;
        mask[row][col - 1] = true;
        if (row > 0) {
          mask[row - 1][col - 1] = true;
          mask[row - 1][col] = true;
        }
      }
    }
    obs.visible = mask;
    for (int row = 0; row < kViewSize; ++row)
      for (int col = 0; col < kViewSize; ++col)
        if (!mask[row][col]) obs.grid[row][col] = {static_cast<std::uint8_t>(CellId::unseen), 0};
  }

  if (level.carried)
    obs.grid[agent_row][agent_col] = encode_object(*level.carried);
  else
    obs.grid[agent_row][agent_col] = {static_cast<std::uint8_t>(CellId::agent), 0};
  return obs;
}

PropSet label_observation(const Observation& obs) {
  const Alphabet& alphabet = Alphabet::instance();
  constexpr int agent_row = kViewSize - 1;
  constexpr int agent_col = kViewSize / 2;
  PropSet out;

  std::array<std::array<int, kViewSize>, kViewSize> descriptors{};
  for (int row = 0; row < kViewSize; ++row)
    for (int col = 0; col < kViewSize; ++col) {
      descriptors[row][col] = -1;
      if (!obs.visible[row][col] || (row == agent_row && col == agent_col)) continue;
      auto d = decode_object(obs.grid[row][col][0], obs.grid[row][col][1]);
      if (d) descriptors[row][col] = descriptor_index(*d);
    }

  if (int d = descriptors[agent_row - 1][agent_col]; d >= 0)
    out |= alphabet.generalizations(*alphabet.front(d));

  if (auto carried = decode_object(obs.grid[agent_row][agent_col][0],
                                   obs.grid[agent_row][agent_col][1]);
      carried && !carried->is_door())
    out |= alphabet.generalizations(*alphabet.carrying(descriptor_index(*carried)));

  auto add_pair = [&](int a, int b) {
    if (a < 0 || b < 0) return;
    if (auto id = alphabet.next(a, b)) out |= alphabet.generalizations(*id);
  };
  for (int row = 0; row < kViewSize; ++row)
    for (int col = 0; col < kViewSize; ++col) {
      if (col + 1 < kViewSize) add_pair(descriptors[row][col], descriptors[row][col + 1]);
      if (row + 1 < kViewSize) add_pair(descriptors[row][col], descriptors[row + 1][col]);
    }
  return out;
}

PropSet label(const Level& level, ObservationOptions options) {
  return label_observation(observe(level, options));
}

std::string render_ascii(const Level& level) {
  std::string out;
  std::string objects;
  for (int y = 0; y < level.height(); ++y) {
    for (int x = 0; x < level.width(); ++x) {
      Pos p{x, y};
      char c = '.';
      if (p == level.agent) {
        constexpr std::array<char, 4> arrows{'>', 'v', '<', '^'};
        c = arrows[static_cast<int>(level.direction)];
      } else if (auto object = level.object_at(p)) {
        switch (object->kind) {
          case ObjectKind::ball: c = 'b'; break;
          case ObjectKind::square: c = 's'; break;
          case ObjectKind::key: c = 'k'; break;
          case ObjectKind::door:
            c = object->door_state == DoorState::open     ? '/'
                : object->door_state == DoorState::closed ? '+'
                                                          : 'L';
            break;
        }
      } else if (level.is_wall(p)) {
        c = '#';
      }
      out += c;
    }
    out += '\n';
  }
  for (Pos p : level.object_positions())
    objects += "  (" + std::to_string(p.x) + "," + std::to_string(p.y) + ") " +
               descriptor_name(*level.object_at(p)) + "\n";
  if (level.carried) objects += "  carried " + descriptor_name(*level.carried) + "\n";
  return out + objects;
}

}  // namespace rmued
